//! Argument structures as left-to-right action sequences.
//!
//! A sequence walks the paragraph once. `Copy` consumes the next token,
//! `Open` marks the start of a component, and `Close` ends it, naming the
//! `Open` it pairs with, the component type, and backward links to earlier
//! `Close` steps. Every relation is emitted on the `Close` of whichever
//! endpoint closes later.

mod delinearize;
mod pairing;
mod render;
mod vocab;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::structure::{ArgRelation, ArgStructure, StructureError};

pub use delinearize::{delinearize, delinearize_for_schema, Repair, RepairLog};
pub use pairing::{pair_boundaries, BoundaryPairing, Symbol};
pub use render::{parse_rendered, render, RenderError};
pub use vocab::{
    apply_action, ActionError, ActionSpace, Candidate, ClosedMention, DecoderState, LinkChoice,
    DEFAULT_MAX_OPEN,
};

/// Which endpoint of a relation the current `Close` is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The mention being closed is the relation's head (source).
    HeadIsCurrent,
    /// The antecedent mention is the head.
    HeadIsAntecedent,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::HeadIsCurrent, Direction::HeadIsAntecedent];

    pub fn index(self) -> usize {
        match self {
            Direction::HeadIsCurrent => 0,
            Direction::HeadIsAntecedent => 1,
        }
    }
}

/// A backward link from a `Close` to an earlier `Close`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Link {
    /// Step index of the earlier `Close`.
    pub antecedent: usize,
    pub ar_type: String,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ActionStep {
    Copy,
    Open,
    Close {
        /// Step index of the paired `Open`.
        boundary: usize,
        ac_type: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        links: Vec<Link>,
    },
}

impl ActionStep {
    pub fn symbol(&self) -> Symbol {
        match self {
            ActionStep::Copy => Symbol::Token,
            ActionStep::Open => Symbol::Open,
            ActionStep::Close { .. } => Symbol::Close,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSequence {
    pub paragraph_id: String,
    pub steps: Vec<ActionStep>,
}

impl ActionSequence {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn copy_count(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s, ActionStep::Copy))
            .count()
    }
}

/// How relations are packed onto `Close` steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearizeMode {
    /// A `Close` may carry any number of links; lossless.
    #[default]
    MultiLink,
    /// At most one link per `Close`; surplus relations are dropped.
    SingleLink,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearizeError {
    #[error("structure `{0}` is not canonical; call canonicalize first")]
    NotCanonical(String),
    #[error("structure `{id}`: component {ac} lies outside the paragraph")]
    SpanOutOfBounds { id: String, ac: usize },
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// Output of [`linearize`]: the sequence plus the relations that single-link
/// packing could not express.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Linearization {
    pub sequence: ActionSequence,
    pub dropped: Vec<ArgRelation>,
}

/// Encodes a canonical structure as an action sequence.
pub fn linearize(s: &ArgStructure, mode: LinearizeMode) -> Result<Linearization, LinearizeError> {
    if !s.is_canonical() {
        return Err(LinearizeError::NotCanonical(s.id().to_string()));
    }
    let n = s.paragraph.tokens.len();
    for (ac, span) in s.acs.iter().enumerate() {
        if span.start > span.end || span.end >= n {
            return Err(LinearizeError::SpanOutOfBounds {
                id: s.id().to_string(),
                ac,
            });
        }
        if ac > 0 && s.acs[ac - 1].end >= span.start {
            return Err(StructureError::Overlap {
                first: ac - 1,
                second: ac,
                token: span.start,
            }
            .into());
        }
    }

    // Relations grouped by the later endpoint, which in canonical order is
    // the larger component index.
    let mut by_later: BTreeMap<usize, Vec<&ArgRelation>> = BTreeMap::new();
    for r in &s.ars {
        if r.head >= s.acs.len() || r.tail >= s.acs.len() || r.head == r.tail {
            return Err(LinearizeError::NotCanonical(s.id().to_string()));
        }
        by_later.entry(r.head.max(r.tail)).or_default().push(r);
    }

    let mut steps = Vec::with_capacity(n + 2 * s.acs.len());
    let mut close_step = vec![0usize; s.acs.len()];
    let mut dropped = Vec::new();
    let mut next_ac = 0;
    let mut open_step = 0;
    for t in 0..n {
        if next_ac < s.acs.len() && s.acs[next_ac].start == t {
            open_step = steps.len();
            steps.push(ActionStep::Open);
        }
        steps.push(ActionStep::Copy);
        if next_ac < s.acs.len() && s.acs[next_ac].end == t {
            let current = next_ac;
            let mut links: Vec<(Link, &ArgRelation)> = by_later
                .get(&current)
                .map(|rels| {
                    rels.iter()
                        .map(|&r| {
                            let (other, direction) = if r.head == current {
                                (r.tail, Direction::HeadIsCurrent)
                            } else {
                                (r.head, Direction::HeadIsAntecedent)
                            };
                            let link = Link {
                                antecedent: close_step[other],
                                ar_type: r.ar_type.clone(),
                                direction,
                            };
                            (link, r)
                        })
                        .collect()
                })
                .unwrap_or_default();
            links.sort_by_key(|(l, _)| (l.antecedent, l.direction));
            if mode == LinearizeMode::SingleLink && links.len() > 1 {
                // Nearest antecedent is the one with the largest step index.
                let keep = links
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, (l, _))| {
                        (usize::MAX - l.antecedent, l.antecedent, l.direction)
                    })
                    .map(|(i, _)| i)
                    .unwrap_or(0);
                for (i, (_, r)) in links.iter().enumerate() {
                    if i != keep {
                        dropped.push((*r).clone());
                    }
                }
                let kept = links.swap_remove(keep);
                links = vec![kept];
            }
            close_step[current] = steps.len();
            steps.push(ActionStep::Close {
                boundary: open_step,
                ac_type: s.acs[current].ac_type.clone(),
                links: links.into_iter().map(|(l, _)| l).collect(),
            });
            next_ac += 1;
        }
    }
    dropped.sort();
    Ok(Linearization {
        sequence: ActionSequence {
            paragraph_id: s.id().to_string(),
            steps,
        },
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::{AcSpan, Paragraph};

    fn para(n: usize) -> Paragraph {
        Paragraph::new("p", (0..n).map(|i| format!("t{i}")).collect()).unwrap()
    }

    fn close(boundary: usize, ac_type: &str, links: Vec<Link>) -> ActionStep {
        ActionStep::Close {
            boundary,
            ac_type: ac_type.into(),
            links,
        }
    }

    #[test]
    fn single_span_sequence() {
        let s = ArgStructure::new(para(5), vec![AcSpan::new(1, 3, "Claim")], vec![]);
        let lin = linearize(&s, LinearizeMode::MultiLink).unwrap();
        use ActionStep::*;
        assert_eq!(
            lin.sequence.steps,
            vec![
                Copy,
                Open,
                Copy,
                Copy,
                Copy,
                close(1, "Claim", vec![]),
                Copy
            ]
        );
        assert!(lin.dropped.is_empty());
    }

    #[test]
    fn relation_rides_on_later_close() {
        // Steps: Open0 Copy1 Copy2 Close3 Copy4 Open5 Copy6 Copy7 Copy8 Close9
        let s = ArgStructure::new(
            para(6),
            vec![AcSpan::new(0, 1, "Claim"), AcSpan::new(3, 5, "Premise")],
            vec![ArgRelation::new(1, 0, "Support")],
        );
        let lin = linearize(&s, LinearizeMode::MultiLink).unwrap();
        assert_eq!(
            lin.sequence.steps[9],
            close(
                5,
                "Premise",
                vec![Link {
                    antecedent: 3,
                    ar_type: "Support".into(),
                    direction: Direction::HeadIsCurrent
                }]
            )
        );
        assert_eq!(lin.sequence.steps[3], close(0, "Claim", vec![]));
    }

    fn converging() -> ArgStructure {
        // AC0 = tok 0, AC1 = tok 2, AC2 = tok 4; AC0 -> AC2 and AC1 -> AC2.
        // Steps: O0 C1 X2 | C3 O4 C5 X6 | C7 O8 C9 X10
        ArgStructure::new(
            para(5),
            vec![
                AcSpan::new(0, 0, "Claim"),
                AcSpan::new(2, 2, "Premise"),
                AcSpan::new(4, 4, "Claim"),
            ],
            vec![
                ArgRelation::new(0, 2, "supports"),
                ArgRelation::new(1, 2, "attacks"),
            ],
        )
    }

    #[test]
    fn multi_link_keeps_both() {
        let lin = linearize(&converging(), LinearizeMode::MultiLink).unwrap();
        let ActionStep::Close { links, .. } = &lin.sequence.steps[10] else {
            panic!("expected close")
        };
        assert_eq!(links.len(), 2);
        assert_eq!(links[0].antecedent, 2);
        assert_eq!(links[1].antecedent, 6);
        assert!(links
            .iter()
            .all(|l| l.direction == Direction::HeadIsAntecedent));
    }

    #[test]
    fn single_link_keeps_nearest() {
        let lin = linearize(&converging(), LinearizeMode::SingleLink).unwrap();
        let ActionStep::Close { links, .. } = &lin.sequence.steps[10] else {
            panic!("expected close")
        };
        assert_eq!(
            links,
            &vec![Link {
                antecedent: 6,
                ar_type: "attacks".into(),
                direction: Direction::HeadIsAntecedent
            }]
        );
        assert_eq!(lin.dropped, vec![ArgRelation::new(0, 2, "supports")]);
    }

    #[test]
    fn rejects_non_canonical() {
        let s = ArgStructure::new(
            para(8),
            vec![AcSpan::new(4, 6, "Premise"), AcSpan::new(0, 2, "Claim")],
            vec![],
        );
        assert!(matches!(
            linearize(&s, LinearizeMode::MultiLink),
            Err(LinearizeError::NotCanonical(_))
        ));
    }

    #[test]
    fn step_json_shape() {
        let step = close(
            1,
            "Claim",
            vec![Link {
                antecedent: 0,
                ar_type: "supports".into(),
                direction: Direction::HeadIsCurrent,
            }],
        );
        let json = serde_json::to_string(&step).unwrap();
        assert_eq!(
            json,
            r#"{"op":"close","boundary":1,"ac_type":"Claim","links":[{"antecedent":0,"ar_type":"supports","direction":"head_is_current"}]}"#
        );
        assert_eq!(
            serde_json::to_string(&ActionStep::Copy).unwrap(),
            r#"{"op":"copy"}"#
        );
    }
}
