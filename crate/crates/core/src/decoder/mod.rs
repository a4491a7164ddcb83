//! Greedy constrained decoding over the dynamic action vocabulary.
//!
//! At every step the decoder enumerates [`ActionSpace::legal_actions`], asks a
//! [`ScoringSession`] for one score per candidate and takes the first maximum
//! in enumeration order. In multi-link mode a chosen `Close` then runs a
//! separate link stage: each link candidate is accepted when its score beats
//! the session's null score.

mod scorers;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::actions::{
    delinearize_for_schema, ActionError, ActionSequence, ActionSpace, Candidate, DecoderState,
    Direction, LinearizeMode, LinkChoice, RepairLog,
};
use crate::structure::{ArgStructure, Paragraph, StructureMode};

pub use scorers::{oracle_scorer, OracleScorer, RandomScorer, UniformScorer};

/// Failure inside a scorer; propagated unchanged by the decoder.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("scorer: {0}")]
pub struct ScorerError(pub String);

impl ScorerError {
    pub fn new(msg: impl Into<String>) -> Self {
        ScorerError(msg.into())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecodeError {
    #[error(transparent)]
    Scorer(#[from] ScorerError),
    #[error("max_steps {max_steps} is below the paragraph's {tokens} tokens")]
    LimitsTooSmall { max_steps: usize, tokens: usize },
    #[error("scorer returned {got} scores for {expected} candidates")]
    ScoreCount { expected: usize, got: usize },
    #[error("scorer returned a non-finite score at step {step}")]
    NonFinite { step: usize },
    #[error("illegal action chosen at step {step}: {source}")]
    Illegal { step: usize, source: ActionError },
}

/// Scores for the multi-link stage.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkScores {
    pub scores: Vec<f64>,
    /// A link is accepted iff its score is strictly greater than this.
    pub null: f64,
}

/// A scoring function over the dynamic vocabulary. Sessions carry whatever
/// per-paragraph state the scorer needs (e.g. recurrent hidden states).
pub trait Scorer {
    type Session<'a>: ScoringSession
    where
        Self: 'a;

    fn session<'a>(
        &'a self,
        paragraph: &Paragraph,
        space: &ActionSpace,
    ) -> Result<Self::Session<'a>, ScorerError>;
}

pub trait ScoringSession {
    /// One finite score per candidate, in candidate order.
    fn score_joint(
        &mut self,
        state: &DecoderState,
        candidates: &[Candidate],
    ) -> Result<Vec<f64>, ScorerError>;

    /// Scores links for a `Close` with the given boundary and AC type that is
    /// about to be executed at `state`.
    fn score_links(
        &mut self,
        state: &DecoderState,
        boundary: usize,
        ac_type: usize,
        candidates: &[LinkChoice],
    ) -> Result<LinkScores, ScorerError>;

    /// Called after the decoder has fixed the step to execute at `state`
    /// (before the state is advanced).
    fn observe(
        &mut self,
        state: &DecoderState,
        step: &crate::actions::ActionStep,
    ) -> Result<(), ScorerError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecodeLimits {
    pub max_steps: usize,
}

impl DecodeLimits {
    pub const DEFAULT_MAX_STEPS: usize = 256;
    pub const GRAPH_MAX_STEPS: usize = 1024;

    pub fn for_mode(mode: StructureMode) -> Self {
        DecodeLimits {
            max_steps: match mode {
                StructureMode::Tree => Self::DEFAULT_MAX_STEPS,
                StructureMode::Graph => Self::GRAPH_MAX_STEPS,
            },
        }
    }
}

impl Default for DecodeLimits {
    fn default() -> Self {
        DecodeLimits {
            max_steps: Self::DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decoded {
    pub sequence: ActionSequence,
    /// The step budget forced at least one choice.
    pub truncated: bool,
}

/// Index of the first maximum.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn check_scores(scores: &[f64], expected: usize, step: usize) -> Result<(), DecodeError> {
    if scores.len() != expected {
        return Err(DecodeError::ScoreCount {
            expected,
            got: scores.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(DecodeError::NonFinite { step });
    }
    Ok(())
}

/// Keeps the accepted links a single `Close` can legally carry: the best
/// type per `(antecedent, direction)`, and in tree mode at most one link
/// making the current mention a head. Ties go to the earlier candidate.
fn select_links(
    space: &ActionSpace,
    candidates: &[LinkChoice],
    scores: &LinkScores,
) -> Vec<LinkChoice> {
    let mut best: HashMap<(usize, Direction), usize> = HashMap::new();
    for (i, c) in candidates.iter().enumerate() {
        if scores.scores[i] <= scores.null {
            continue;
        }
        let slot = best.entry((c.antecedent, c.direction)).or_insert(i);
        if scores.scores[i] > scores.scores[*slot] {
            *slot = i;
        }
    }
    let mut chosen: Vec<usize> = best.into_values().collect();
    chosen.sort_unstable();
    if space.schema.structure_mode() == StructureMode::Tree {
        let current_heads: Vec<usize> = chosen
            .iter()
            .copied()
            .filter(|&i| candidates[i].direction == Direction::HeadIsCurrent)
            .collect();
        if let Some(&keep) = current_heads.iter().reduce(|a, b| {
            if scores.scores[*b] > scores.scores[*a] {
                b
            } else {
                a
            }
        }) {
            chosen.retain(|&i| candidates[i].direction != Direction::HeadIsCurrent || i == keep);
        }
    }
    let mut links: Vec<LinkChoice> = chosen.into_iter().map(|i| candidates[i]).collect();
    links.sort_by_key(|l| (l.antecedent, l.direction));
    links
}

/// Greedy decoding of one paragraph.
///
/// The output always has exactly one `Copy` per token: once the remaining
/// step budget only covers the remaining tokens, the vocabulary is narrowed
/// to `Copy`, and `Open` is withheld while pending closes would not fit.
pub fn decode_greedy<S: Scorer + ?Sized>(
    scorer: &S,
    paragraph: &Paragraph,
    space: &ActionSpace,
    limits: DecodeLimits,
) -> Result<Decoded, DecodeError> {
    let n = paragraph.tokens.len();
    if limits.max_steps < n {
        return Err(DecodeError::LimitsTooSmall {
            max_steps: limits.max_steps,
            tokens: n,
        });
    }
    let mut session = scorer.session(paragraph, space)?;
    let mut state = DecoderState::new(n);
    let mut truncated = false;

    while !state.is_terminal() {
        let step_index = state.step_count();
        let budget = limits.max_steps - step_index;
        if budget == 0 {
            truncated = true;
            break;
        }
        let mut candidates =
            space
                .legal_actions(&state)
                .map_err(|source| DecodeError::Illegal {
                    step: step_index,
                    source,
                })?;
        let left = state.tokens_left();
        let before = candidates.len();
        if budget <= left {
            candidates.retain(|c| matches!(c, Candidate::Copy));
        } else if budget <= left + state.opens().len() + 1 {
            candidates.retain(|c| !matches!(c, Candidate::Open));
        }
        if candidates.len() < before {
            truncated = true;
        }

        let choice = if candidates.len() == 1 {
            candidates[0]
        } else {
            let scores = session.score_joint(&state, &candidates)?;
            check_scores(&scores, candidates.len(), step_index)?;
            candidates[argmax(&scores)]
        };

        let links = match choice {
            Candidate::Close {
                boundary, ac_type, ..
            } if space.mode == LinearizeMode::MultiLink => {
                let link_candidates = space.link_candidates(&state);
                if link_candidates.is_empty() {
                    Vec::new()
                } else {
                    let scores =
                        session.score_links(&state, boundary, ac_type, &link_candidates)?;
                    check_scores(&scores.scores, link_candidates.len(), step_index)?;
                    if !scores.null.is_finite() {
                        return Err(DecodeError::NonFinite { step: step_index });
                    }
                    select_links(space, &link_candidates, &scores)
                }
            }
            _ => Vec::new(),
        };

        let step = space.to_step(&choice, &links);
        session.observe(&state, &step)?;
        space
            .apply(&mut state, &step)
            .map_err(|source| DecodeError::Illegal {
                step: step_index,
                source,
            })?;
    }

    if truncated {
        log::debug!(
            "paragraph {}: step budget {} constrained decoding",
            paragraph.id,
            limits.max_steps
        );
    }
    Ok(Decoded {
        sequence: state.into_sequence(paragraph.id.clone()),
        truncated,
    })
}

/// Result of decoding one paragraph inside a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchItem {
    pub id: String,
    pub outcome: Result<DecodedStructure, DecodeError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedStructure {
    pub structure: ArgStructure,
    pub sequence: ActionSequence,
    pub repairs: RepairLog,
    pub truncated: bool,
}

/// Decodes one paragraph and rebuilds its structure.
pub fn decode_structure<S: Scorer + ?Sized>(
    scorer: &S,
    paragraph: &Paragraph,
    space: &ActionSpace,
    limits: DecodeLimits,
) -> Result<DecodedStructure, DecodeError> {
    let decoded = decode_greedy(scorer, paragraph, space, limits)?;
    let (structure, repairs) = delinearize_for_schema(&decoded.sequence, paragraph, &space.schema);
    Ok(DecodedStructure {
        structure,
        sequence: decoded.sequence,
        repairs,
        truncated: decoded.truncated,
    })
}

/// Decodes every paragraph independently, in input order. A failing paragraph
/// yields an error item and does not affect the others.
pub fn batch_decode<'p, S, I>(
    scorer: &S,
    paragraphs: I,
    space: &ActionSpace,
    limits: DecodeLimits,
) -> Vec<BatchItem>
where
    S: Scorer + ?Sized,
    I: IntoIterator<Item = &'p Paragraph>,
{
    paragraphs
        .into_iter()
        .map(|p| BatchItem {
            id: p.id.clone(),
            outcome: decode_structure(scorer, p, space, limits),
        })
        .collect()
}
