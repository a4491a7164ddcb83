use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LinkScores, Scorer, ScorerError, ScoringSession};
use crate::actions::{
    ActionSequence, ActionSpace, ActionStep, Candidate, DecoderState, LinearizeMode, LinkChoice,
};
use crate::structure::Paragraph;

/// Scores every candidate 0; greedy decoding then copies every token.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformScorer;

impl Scorer for UniformScorer {
    type Session<'a> = UniformScorer;

    fn session(&self, _: &Paragraph, _: &ActionSpace) -> Result<UniformScorer, ScorerError> {
        Ok(UniformScorer)
    }
}

impl ScoringSession for UniformScorer {
    fn score_joint(&mut self, _: &DecoderState, c: &[Candidate]) -> Result<Vec<f64>, ScorerError> {
        Ok(vec![0.0; c.len()])
    }

    fn score_links(
        &mut self,
        _: &DecoderState,
        _: usize,
        _: usize,
        c: &[LinkChoice],
    ) -> Result<LinkScores, ScorerError> {
        Ok(LinkScores {
            scores: vec![0.0; c.len()],
            null: 0.0,
        })
    }

    fn observe(&mut self, _: &DecoderState, _: &ActionStep) -> Result<(), ScorerError> {
        Ok(())
    }
}

/// FNV-1a; stable across platforms and releases.
pub(crate) fn stable_hash(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
    })
}

/// Uniform random scores in `[-1, 1)`, seeded per paragraph from the scorer
/// seed and the paragraph id, so results do not depend on batch order.
#[derive(Debug, Clone, Copy)]
pub struct RandomScorer {
    seed: u64,
}

impl RandomScorer {
    pub fn new(seed: u64) -> Self {
        RandomScorer { seed }
    }
}

pub struct RandomSession {
    rng: ChaCha8Rng,
}

impl Scorer for RandomScorer {
    type Session<'a> = RandomSession;

    fn session(&self, p: &Paragraph, _: &ActionSpace) -> Result<RandomSession, ScorerError> {
        Ok(RandomSession {
            rng: ChaCha8Rng::seed_from_u64(self.seed ^ stable_hash(&p.id)),
        })
    }
}

impl ScoringSession for RandomSession {
    fn score_joint(&mut self, _: &DecoderState, c: &[Candidate]) -> Result<Vec<f64>, ScorerError> {
        Ok(c.iter().map(|_| self.rng.gen_range(-1.0..1.0)).collect())
    }

    fn score_links(
        &mut self,
        _: &DecoderState,
        _: usize,
        _: usize,
        c: &[LinkChoice],
    ) -> Result<LinkScores, ScorerError> {
        Ok(LinkScores {
            scores: c.iter().map(|_| self.rng.gen_range(-1.0..1.0)).collect(),
            null: self.rng.gen_range(-1.0..1.0),
        })
    }

    fn observe(&mut self, _: &DecoderState, _: &ActionStep) -> Result<(), ScorerError> {
        Ok(())
    }
}

/// Test oracle: scores 1 for the gold action at the current step position
/// and 0 for everything else. In the link stage gold links score 1, the null
/// score is 0.5, and other links score 0. Positions past the end of the gold
/// sequence, and paragraphs without a gold sequence, score all zeros.
#[derive(Debug, Clone, Default)]
pub struct OracleScorer {
    gold: HashMap<String, ActionSequence>,
}

pub fn oracle_scorer(gold: ActionSequence) -> OracleScorer {
    OracleScorer::from_sequences([gold])
}

impl OracleScorer {
    pub fn from_sequences(seqs: impl IntoIterator<Item = ActionSequence>) -> Self {
        OracleScorer {
            gold: seqs
                .into_iter()
                .map(|s| (s.paragraph_id.clone(), s))
                .collect(),
        }
    }
}

pub struct OracleSession<'a> {
    gold: Option<&'a ActionSequence>,
    space: ActionSpace,
}

impl Scorer for OracleScorer {
    type Session<'a> = OracleSession<'a>;

    fn session<'a>(
        &'a self,
        p: &Paragraph,
        space: &ActionSpace,
    ) -> Result<OracleSession<'a>, ScorerError> {
        Ok(OracleSession {
            gold: self.gold.get(&p.id),
            space: space.clone(),
        })
    }
}

impl OracleSession<'_> {
    fn gold_step(&self, state: &DecoderState) -> Option<&ActionStep> {
        self.gold.and_then(|g| g.steps.get(state.step_count()))
    }

    fn matches(&self, gold: &ActionStep, candidate: &Candidate) -> bool {
        match (gold, candidate) {
            (ActionStep::Copy, Candidate::Copy) | (ActionStep::Open, Candidate::Open) => true,
            (
                ActionStep::Close {
                    boundary,
                    ac_type,
                    links,
                },
                Candidate::Close {
                    boundary: b,
                    ac_type: t,
                    link,
                },
            ) => {
                let schema = &self.space.schema;
                if boundary != b || schema.ac_index(ac_type) != Some(*t) {
                    return false;
                }
                match self.space.mode {
                    LinearizeMode::MultiLink => true,
                    LinearizeMode::SingleLink => match (links.first(), link) {
                        (None, None) => true,
                        (Some(l), Some(c)) => self.space.link_choice(l).ok() == Some(*c),
                        _ => false,
                    },
                }
            }
            _ => false,
        }
    }
}

impl ScoringSession for OracleSession<'_> {
    fn score_joint(
        &mut self,
        state: &DecoderState,
        candidates: &[Candidate],
    ) -> Result<Vec<f64>, ScorerError> {
        let Some(gold) = self.gold_step(state) else {
            return Ok(vec![0.0; candidates.len()]);
        };
        Ok(candidates
            .iter()
            .map(|c| if self.matches(gold, c) { 1.0 } else { 0.0 })
            .collect())
    }

    fn score_links(
        &mut self,
        state: &DecoderState,
        _: usize,
        _: usize,
        candidates: &[LinkChoice],
    ) -> Result<LinkScores, ScorerError> {
        let gold: Vec<LinkChoice> = match self.gold_step(state) {
            Some(ActionStep::Close { links, .. }) => links
                .iter()
                .filter_map(|l| self.space.link_choice(l).ok())
                .collect(),
            _ => {
                return Ok(LinkScores {
                    scores: vec![0.0; candidates.len()],
                    null: 0.5,
                })
            }
        };
        Ok(LinkScores {
            scores: candidates
                .iter()
                .map(|c| if gold.contains(c) { 1.0 } else { 0.0 })
                .collect(),
            null: 0.5,
        })
    }

    fn observe(&mut self, _: &DecoderState, _: &ActionStep) -> Result<(), ScorerError> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(stable_hash(""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(stable_hash("a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn oracle_zero_past_gold() {
        let space = ActionSpace::new(crate::structure::Schema::aae(), LinearizeMode::MultiLink);
        let gold = ActionSequence {
            paragraph_id: "p".into(),
            steps: vec![ActionStep::Copy],
        };
        let o = oracle_scorer(gold);
        let p = Paragraph::from_text("p", "a b").unwrap();
        let mut s = o.session(&p, &space).unwrap();
        let state = space.replay(2, &[ActionStep::Copy]).unwrap();
        assert_eq!(
            s.score_joint(&state, &[Candidate::Copy, Candidate::Open])
                .unwrap(),
            vec![0.0, 0.0]
        );
        let unknown = Paragraph::from_text("q", "a b").unwrap();
        let mut s = o.session(&unknown, &space).unwrap();
        assert_eq!(
            s.score_joint(&DecoderState::new(2), &[Candidate::Copy, Candidate::Open])
                .unwrap(),
            vec![0.0, 0.0]
        );
    }
}
