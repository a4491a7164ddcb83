//! A small recurrent encoder-decoder that scores the dynamic action
//! vocabulary of `argseq-core`, with hand-written backpropagation and
//! training.
//!
//! Everything is generic over the float type; [`Model`] is the single
//! precision model used for training and inference and [`Model64`] the
//! double precision one used for gradient checks.

mod config;
mod example;
mod gradcheck;
mod io;
mod linalg;
mod model;
mod net;
mod params;
mod pass;
mod scalar;
mod train;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ModelConfig, Vocab};
pub use example::{prepare, prepare_sequence, Example, GoldStep};
pub use gradcheck::{grad_check, GradCheckOptions, GradCheckReport};
pub use io::{load_model, save_model, FORMAT_NAME, FORMAT_VERSION};
pub use model::{NeuralModel, NeuralSession};
pub use net::Prev;
pub use params::{head_param_formula, Layout, ParamCounts, Slot};
pub use pass::PassOutput;
pub use scalar::Scalar;
pub use train::{decode_limits, evaluate, train, train_with, DevScores, EpochRecord, TrainOutcome};

pub type Model = NeuralModel<f32>;
pub type Model64 = NeuralModel<f64>;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("invalid model config: {0}")]
    Config(String),
    #[error("empty training corpus")]
    EmptyCorpus,
    #[error("paragraph `{id}`, gold step {step}: {message}")]
    Gold {
        id: String,
        step: usize,
        message: String,
    },
    #[error("schema mismatch: {0}")]
    Schema(String),
    #[error(transparent)]
    Linearize(#[from] argseq_core::actions::LinearizeError),
    #[error(transparent)]
    Decode(#[from] argseq_core::decoder::DecodeError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("model file: {0}")]
    Format(String),
    #[error("model file version {found} is not supported (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("model file holds {found} parameters, expected {expected}")]
    Dtype { found: String, expected: String },
}
