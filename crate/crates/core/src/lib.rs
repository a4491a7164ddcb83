//! Argument mining as constrained autoregressive action generation.
//!
//! A paragraph's argumentative structure (typed component spans and typed
//! directed relations) is linearized into a sequence of copy, open and close
//! actions. [`actions`] converts between the two views and defines the legal
//! action space at every decoding step; [`decoder`] runs greedy decoding
//! against any [`decoder::Scorer`]; [`eval`] scores predictions; [`corpus`]
//! reads and writes corpora.

pub mod actions;
pub mod corpus;
pub mod decoder;
pub mod eval;
pub mod structure;

pub use actions::{
    delinearize, linearize, ActionSequence, ActionSpace, ActionStep, Direction, LinearizeMode, Link,
};
pub use decoder::{decode_greedy, decode_structure, DecodeLimits, Scorer, ScoringSession};
pub use eval::{eval_tasks, TaskScores};
pub use structure::{
    canonicalize, validate_structure, AcSpan, ArgRelation, ArgStructure, Paragraph, Schema,
    StructureMode,
};
