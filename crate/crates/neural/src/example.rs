//! Gold action sequences unrolled into per-step candidate sets.

use argseq_core::actions::{Candidate, DecoderState, LinkChoice};
use argseq_core::{
    linearize, ActionSequence, ActionSpace, ActionStep, ArgStructure, LinearizeMode, Paragraph,
    Schema,
};

use crate::config::Vocab;
use crate::net::Prev;
use crate::NeuralError;

#[derive(Debug, Clone)]
pub struct GoldStep {
    /// Cursor before the step.
    pub cursor: usize,
    /// Action consumed as decoder input at this step.
    pub prev: Prev,
    pub candidates: Vec<Candidate>,
    pub gold: usize,
    /// Multi-link mode, gold `Close` steps: every link candidate and whether
    /// the gold step carries it.
    pub links: Vec<(LinkChoice, bool)>,
}

impl GoldStep {
    pub fn gold_candidate(&self) -> Candidate {
        self.candidates[self.gold]
    }
}

#[derive(Debug, Clone)]
pub struct Example {
    pub id: String,
    pub ids: Vec<usize>,
    pub steps: Vec<GoldStep>,
    /// Close candidates carry their link and the null head scores the
    /// no-link choice.
    pub single_link: bool,
}

/// The decoder-input form of an executed step.
pub fn prev_of(schema: &Schema, step: &ActionStep, cursor: usize) -> Result<Prev, String> {
    Ok(match step {
        ActionStep::Copy => Prev::Copy(cursor),
        ActionStep::Open => Prev::Open,
        ActionStep::Close { ac_type, links, .. } => Prev::Close {
            ac_type: schema
                .ac_index(ac_type)
                .ok_or_else(|| format!("unknown AC type `{ac_type}`"))?,
            codes: links
                .iter()
                .map(|l| {
                    schema
                        .ar_index(&l.ar_type)
                        .map(|r| r * 2 + l.direction.index())
                        .ok_or_else(|| format!("unknown AR type `{}`", l.ar_type))
                })
                .collect::<Result<_, _>>()?,
        },
    })
}

pub fn link_code(l: &LinkChoice) -> usize {
    l.ar_type * 2 + l.direction.index()
}

/// Unrolls `gold` under `space`. Any gold action outside the legal set is a
/// hard error.
pub fn prepare_sequence(
    space: &ActionSpace,
    vocab: &Vocab,
    paragraph: &Paragraph,
    gold: &ActionSequence,
) -> Result<Example, NeuralError> {
    let fail = |step: usize, message: String| NeuralError::Gold {
        id: paragraph.id.clone(),
        step,
        message,
    };
    let mut state = DecoderState::new(paragraph.tokens.len());
    let mut prev = Prev::Bos;
    let mut steps = Vec::with_capacity(gold.steps.len());
    for (n, step) in gold.steps.iter().enumerate() {
        let candidates = space
            .legal_actions(&state)
            .map_err(|e| fail(n, e.to_string()))?;
        let mut links = Vec::new();
        let target = match step {
            ActionStep::Copy => Candidate::Copy,
            ActionStep::Open => Candidate::Open,
            ActionStep::Close {
                boundary,
                ac_type,
                links: gold_links,
            } => {
                let ac = space
                    .schema
                    .ac_index(ac_type)
                    .ok_or_else(|| fail(n, format!("unknown AC type `{ac_type}`")))?;
                let chosen: Vec<LinkChoice> = gold_links
                    .iter()
                    .map(|l| space.link_choice(l).map_err(|e| fail(n, e.to_string())))
                    .collect::<Result<_, _>>()?;
                match space.mode {
                    LinearizeMode::SingleLink => {
                        if chosen.len() > 1 {
                            return Err(fail(
                                n,
                                format!("{} links in single-link mode", chosen.len()),
                            ));
                        }
                        Candidate::Close {
                            boundary: *boundary,
                            ac_type: ac,
                            link: chosen.first().copied(),
                        }
                    }
                    LinearizeMode::MultiLink => {
                        let all = space.link_candidates(&state);
                        for c in &chosen {
                            if !all.contains(c) {
                                return Err(fail(
                                    n,
                                    format!(
                                        "link to step {} is not a legal candidate",
                                        c.antecedent
                                    ),
                                ));
                            }
                        }
                        links = all.into_iter().map(|c| (c, chosen.contains(&c))).collect();
                        Candidate::Close {
                            boundary: *boundary,
                            ac_type: ac,
                            link: None,
                        }
                    }
                }
            }
        };
        let gold_index = candidates
            .iter()
            .position(|c| *c == target)
            .ok_or_else(|| fail(n, format!("gold action {target:?} is not in the legal set")))?;
        let cursor = state.cursor();
        steps.push(GoldStep {
            cursor,
            prev: prev.clone(),
            candidates,
            gold: gold_index,
            links,
        });
        prev = prev_of(&space.schema, step, cursor).map_err(|m| fail(n, m))?;
        space
            .apply(&mut state, step)
            .map_err(|e| fail(n, e.to_string()))?;
    }
    if !state.is_terminal() {
        return Err(fail(
            gold.steps.len(),
            "gold sequence ends before the paragraph does".into(),
        ));
    }
    Ok(Example {
        id: paragraph.id.clone(),
        ids: vocab.ids(&paragraph.tokens),
        steps,
        single_link: space.mode == LinearizeMode::SingleLink,
    })
}

/// Linearizes `s` in the space's mode and unrolls it.
pub fn prepare(
    space: &ActionSpace,
    vocab: &Vocab,
    s: &ArgStructure,
) -> Result<Example, NeuralError> {
    let lin = linearize(s, space.mode)?;
    prepare_sequence(space, vocab, &s.paragraph, &lin.sequence)
}
