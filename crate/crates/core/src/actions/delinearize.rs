use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::pairing::pair_boundaries;
use super::{ActionSequence, ActionStep, Direction};
use crate::structure::{AcSpan, ArgRelation, ArgStructure, Paragraph, Schema, StructureMode};

/// One repair applied while decoding a malformed sequence. Step indices refer
/// to the input sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Repair {
    ExtraCopy {
        step: usize,
    },
    UnmatchedOpen {
        step: usize,
    },
    UnmatchedClose {
        step: usize,
    },
    BoundaryReassigned {
        step: usize,
        stated: usize,
        paired: usize,
    },
    EmptySpan {
        step: usize,
    },
    OverlappingSpan {
        step: usize,
    },
    OrphanLink {
        step: usize,
        antecedent: usize,
    },
    DuplicateRelation {
        step: usize,
        antecedent: usize,
    },
    UnknownAcType {
        step: usize,
        label: String,
    },
    UnknownArType {
        step: usize,
        label: String,
    },
    TreeViolation {
        step: usize,
        antecedent: usize,
    },
}

impl fmt::Display for Repair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Repair::ExtraCopy { step } => {
                write!(f, "step {step}: copy past the last token ignored")
            }
            Repair::UnmatchedOpen { step } => write!(f, "step {step}: unmatched open removed"),
            Repair::UnmatchedClose { step } => write!(f, "step {step}: unmatched close removed"),
            Repair::BoundaryReassigned {
                step,
                stated,
                paired,
            } => write!(
                f,
                "step {step}: boundary {stated} re-paired to open {paired}"
            ),
            Repair::EmptySpan { step } => write!(f, "step {step}: empty span dropped"),
            Repair::OverlappingSpan { step } => write!(f, "step {step}: overlapping span dropped"),
            Repair::OrphanLink { step, antecedent } => {
                write!(f, "step {step}: link to removed close {antecedent} dropped")
            }
            Repair::DuplicateRelation { step, antecedent } => {
                write!(
                    f,
                    "step {step}: duplicate relation with {antecedent} dropped"
                )
            }
            Repair::UnknownAcType { step, label } => {
                write!(f, "step {step}: span with unknown type `{label}` dropped")
            }
            Repair::UnknownArType { step, label } => {
                write!(f, "step {step}: link with unknown type `{label}` dropped")
            }
            Repair::TreeViolation { step, antecedent } => write!(
                f,
                "step {step}: link to {antecedent} dropped (second outgoing relation in tree mode)"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RepairLog {
    pub repairs: Vec<Repair>,
}

impl RepairLog {
    pub fn is_empty(&self) -> bool {
        self.repairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.repairs.len()
    }
}

/// Rebuilds the structure a sequence encodes.
///
/// Opens and closes are paired by the leftmost-unmatched rule; anything that
/// cannot be paired is removed, and each removal cascades: links to removed
/// closes are dropped, then empty or overlapping spans. Every repair is logged.
pub fn delinearize(seq: &ActionSequence, paragraph: &Paragraph) -> (ArgStructure, RepairLog) {
    rebuild(seq, paragraph, None)
}

/// [`delinearize`], additionally dropping labels outside `schema` and links
/// that would give a component a second outgoing relation in tree mode.
pub fn delinearize_for_schema(
    seq: &ActionSequence,
    paragraph: &Paragraph,
    schema: &Schema,
) -> (ArgStructure, RepairLog) {
    rebuild(seq, paragraph, Some(schema))
}

fn rebuild(
    seq: &ActionSequence,
    paragraph: &Paragraph,
    schema: Option<&Schema>,
) -> (ArgStructure, RepairLog) {
    let mut log = RepairLog::default();
    let n = paragraph.tokens.len();

    let mut copies_before = Vec::with_capacity(seq.steps.len());
    let mut copied = 0usize;
    for (i, step) in seq.steps.iter().enumerate() {
        copies_before.push(copied);
        if matches!(step, ActionStep::Copy) {
            if copied < n {
                copied += 1;
            } else {
                log.repairs.push(Repair::ExtraCopy { step: i });
            }
        }
    }

    let symbols: Vec<_> = seq.steps.iter().map(ActionStep::symbol).collect();
    let pairing = pair_boundaries(&symbols);
    for &r in &pairing.removed {
        log.repairs.push(match symbols[r] {
            super::Symbol::Open => Repair::UnmatchedOpen { step: r },
            _ => Repair::UnmatchedClose { step: r },
        });
    }

    // Close step -> span, in close order.
    let mut spans: BTreeMap<usize, AcSpan> = BTreeMap::new();
    for &(open, close) in &pairing.pairs {
        let ActionStep::Close {
            boundary, ac_type, ..
        } = &seq.steps[close]
        else {
            unreachable!("pairing returns close positions")
        };
        if *boundary != open {
            log.repairs.push(Repair::BoundaryReassigned {
                step: close,
                stated: *boundary,
                paired: open,
            });
        }
        let (start, stop) = (copies_before[open], copies_before[close]);
        if stop == start {
            log.repairs.push(Repair::EmptySpan { step: close });
            continue;
        }
        if let Some(schema) = schema {
            if schema.ac_index(ac_type).is_none() {
                log.repairs.push(Repair::UnknownAcType {
                    step: close,
                    label: ac_type.clone(),
                });
                continue;
            }
        }
        let span = AcSpan::new(start, stop - 1, ac_type.clone());
        if spans.values().any(|s| s.overlaps(&span)) {
            log.repairs.push(Repair::OverlappingSpan { step: close });
            continue;
        }
        spans.insert(close, span);
    }

    let mut order: Vec<(usize, AcSpan)> = spans.into_iter().collect();
    order.sort_by_key(|(_, s)| s.start);
    let index_of: BTreeMap<usize, usize> = order
        .iter()
        .enumerate()
        .map(|(i, (step, _))| (*step, i))
        .collect();

    let tree = schema.is_some_and(|s| s.structure_mode() == StructureMode::Tree);
    let mut pairs = HashSet::new();
    let mut outgoing = vec![0usize; order.len()];
    let mut ars = Vec::new();
    for (step, step_value) in seq.steps.iter().enumerate() {
        let ActionStep::Close { links, .. } = step_value else {
            continue;
        };
        let Some(&current) = index_of.get(&step) else {
            // Links of a removed close vanish with it.
            continue;
        };
        for link in links {
            let antecedent = match index_of.get(&link.antecedent) {
                Some(&a) if link.antecedent < step => a,
                _ => {
                    log.repairs.push(Repair::OrphanLink {
                        step,
                        antecedent: link.antecedent,
                    });
                    continue;
                }
            };
            if let Some(schema) = schema {
                if schema.ar_index(&link.ar_type).is_none() {
                    log.repairs.push(Repair::UnknownArType {
                        step,
                        label: link.ar_type.clone(),
                    });
                    continue;
                }
            }
            let (head, tail) = match link.direction {
                Direction::HeadIsCurrent => (current, antecedent),
                Direction::HeadIsAntecedent => (antecedent, current),
            };
            if !pairs.insert((head, tail)) {
                log.repairs.push(Repair::DuplicateRelation {
                    step,
                    antecedent: link.antecedent,
                });
                continue;
            }
            if tree && outgoing[head] > 0 {
                pairs.remove(&(head, tail));
                log.repairs.push(Repair::TreeViolation {
                    step,
                    antecedent: link.antecedent,
                });
                continue;
            }
            outgoing[head] += 1;
            ars.push(ArgRelation::new(head, tail, link.ar_type.clone()));
        }
    }
    ars.sort();

    let acs = order.into_iter().map(|(_, s)| s).collect();
    (ArgStructure::new(paragraph.clone(), acs, ars), log)
}
