//! Decoder state and the legal-action rules that define the dynamic
//! vocabulary at each step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{ActionSequence, ActionStep, Direction, LinearizeMode, Link};
use crate::structure::{Schema, StructureMode};

pub const DEFAULT_MAX_OPEN: usize = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error("state is terminal")]
    Terminal,
    #[error("copy/open: no tokens remain")]
    NoTokensLeft,
    #[error("open: {max} unmatched opens already pending")]
    OpenCapacity { max: usize },
    #[error("close: boundary {boundary} is not the leftmost unmatched open")]
    BadBoundary { boundary: usize },
    #[error("close: no token copied since open at step {boundary}")]
    EmptySpan { boundary: usize },
    #[error("close: unknown AC type `{0}`")]
    UnknownAcType(String),
    #[error("link: unknown AR type `{0}`")]
    UnknownArType(String),
    #[error("link: antecedent {0} is not an earlier close")]
    BadAntecedent(usize),
    #[error("link: antecedent {0} linked twice in the same direction")]
    DuplicateLink(usize),
    #[error("link: single-link mode allows one link per close, got {0}")]
    TooManyLinks(usize),
    #[error("link: tree mode allows one outgoing relation per component (step {0})")]
    TreeViolation(usize),
}

/// A registered `Close`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedMention {
    pub step: usize,
    pub boundary: usize,
    /// Token span, inclusive.
    pub start: usize,
    pub end: usize,
    pub ac_type: usize,
    /// Number of relations in which this mention is the head.
    pub outgoing: usize,
}

/// Decoding history, folded from the executed actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderState {
    token_count: usize,
    cursor: usize,
    /// Unmatched `Open` steps with the cursor at which each was emitted.
    opens: Vec<(usize, usize)>,
    closes: Vec<ClosedMention>,
    steps: Vec<ActionStep>,
}

impl DecoderState {
    pub fn new(token_count: usize) -> Self {
        DecoderState {
            token_count,
            cursor: 0,
            opens: Vec::new(),
            closes: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    /// Index of the next token to copy.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[ActionStep] {
        &self.steps
    }

    /// Step indices of unmatched opens, ascending.
    pub fn opens(&self) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.opens.iter().map(|&(s, _)| s)
    }

    pub fn closes(&self) -> &[ClosedMention] {
        &self.closes
    }

    pub fn close_at(&self, step: usize) -> Option<&ClosedMention> {
        self.closes
            .binary_search_by_key(&step, |c| c.step)
            .ok()
            .map(|i| &self.closes[i])
    }

    pub fn tokens_left(&self) -> usize {
        self.token_count - self.cursor
    }

    pub fn is_terminal(&self) -> bool {
        self.cursor == self.token_count && self.opens.is_empty()
    }

    /// The open a `Close` may pair with now: the leftmost unmatched one, if at
    /// least one token has been copied since it.
    pub fn closable(&self) -> Option<usize> {
        self.opens
            .first()
            .filter(|&&(_, at)| self.cursor > at)
            .map(|&(s, _)| s)
    }

    pub fn into_sequence(self, paragraph_id: impl Into<String>) -> ActionSequence {
        ActionSequence {
            paragraph_id: paragraph_id.into(),
            steps: self.steps,
        }
    }
}

/// A backward link in index form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinkChoice {
    /// Step index of an earlier `Close`.
    pub antecedent: usize,
    pub ar_type: usize,
    pub direction: Direction,
}

/// One member of the dynamic vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Candidate {
    Copy,
    Open,
    Close {
        boundary: usize,
        ac_type: usize,
        /// Single-link mode only; `None` is the no-link choice.
        link: Option<LinkChoice>,
    },
}

/// Schema, link packing and open capacity: everything that, together with a
/// [`DecoderState`], determines the legal actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpace {
    pub schema: Schema,
    pub mode: LinearizeMode,
    pub max_open: usize,
}

impl ActionSpace {
    pub fn new(schema: Schema, mode: LinearizeMode) -> Self {
        ActionSpace {
            schema,
            mode,
            max_open: DEFAULT_MAX_OPEN,
        }
    }

    pub fn with_max_open(mut self, max_open: usize) -> Self {
        self.max_open = max_open.max(1);
        self
    }

    /// The dynamic vocabulary, in tie-break order: `Copy`, `Open`, then
    /// `Close` by boundary, AC type and link (no-link first).
    pub fn legal_actions(&self, state: &DecoderState) -> Result<Vec<Candidate>, ActionError> {
        if state.is_terminal() {
            return Err(ActionError::Terminal);
        }
        let mut out = Vec::new();
        if state.tokens_left() > 0 {
            out.push(Candidate::Copy);
            if state.opens.len() < self.max_open {
                out.push(Candidate::Open);
            }
        }
        if let Some(boundary) = state.closable() {
            let links: Vec<Option<LinkChoice>> = match self.mode {
                LinearizeMode::MultiLink => vec![None],
                LinearizeMode::SingleLink => std::iter::once(None)
                    .chain(self.link_candidates(state).into_iter().map(Some))
                    .collect(),
            };
            for ac_type in 0..self.schema.ac_types().len() {
                for &link in &links {
                    out.push(Candidate::Close {
                        boundary,
                        ac_type,
                        link,
                    });
                }
            }
        }
        debug_assert!(!out.is_empty());
        Ok(out)
    }

    /// Links a `Close` at this state may carry, ordered by antecedent, AR
    /// type, then direction. In tree mode an antecedent that already heads a
    /// relation cannot become a head again.
    pub fn link_candidates(&self, state: &DecoderState) -> Vec<LinkChoice> {
        let tree = self.schema.structure_mode() == StructureMode::Tree;
        let mut out = Vec::new();
        for c in &state.closes {
            for ar_type in 0..self.schema.ar_types().len() {
                for direction in Direction::ALL {
                    if tree && direction == Direction::HeadIsAntecedent && c.outgoing > 0 {
                        continue;
                    }
                    out.push(LinkChoice {
                        antecedent: c.step,
                        ar_type,
                        direction,
                    });
                }
            }
        }
        out
    }

    pub fn to_step(&self, candidate: &Candidate, links: &[LinkChoice]) -> ActionStep {
        match *candidate {
            Candidate::Copy => ActionStep::Copy,
            Candidate::Open => ActionStep::Open,
            Candidate::Close {
                boundary,
                ac_type,
                link,
            } => ActionStep::Close {
                boundary,
                ac_type: self.schema.ac_types()[ac_type].clone(),
                links: link.iter().chain(links).map(|l| self.to_link(l)).collect(),
            },
        }
    }

    pub fn to_link(&self, l: &LinkChoice) -> Link {
        Link {
            antecedent: l.antecedent,
            ar_type: self.schema.ar_types()[l.ar_type].clone(),
            direction: l.direction,
        }
    }

    pub fn link_choice(&self, l: &Link) -> Result<LinkChoice, ActionError> {
        Ok(LinkChoice {
            antecedent: l.antecedent,
            ar_type: self
                .schema
                .ar_index(&l.ar_type)
                .ok_or_else(|| ActionError::UnknownArType(l.ar_type.clone()))?,
            direction: l.direction,
        })
    }

    /// Executes `step`, or names the rule it violates and leaves the state
    /// untouched.
    pub fn apply(&self, state: &mut DecoderState, step: &ActionStep) -> Result<(), ActionError> {
        if state.is_terminal() {
            return Err(ActionError::Terminal);
        }
        match step {
            ActionStep::Copy => {
                if state.tokens_left() == 0 {
                    return Err(ActionError::NoTokensLeft);
                }
                state.cursor += 1;
            }
            ActionStep::Open => {
                if state.tokens_left() == 0 {
                    return Err(ActionError::NoTokensLeft);
                }
                if state.opens.len() >= self.max_open {
                    return Err(ActionError::OpenCapacity { max: self.max_open });
                }
                state.opens.push((state.steps.len(), state.cursor));
            }
            ActionStep::Close {
                boundary,
                ac_type,
                links,
            } => {
                let &(open_step, open_cursor) =
                    state.opens.first().filter(|(s, _)| s == boundary).ok_or(
                        ActionError::BadBoundary {
                            boundary: *boundary,
                        },
                    )?;
                if state.cursor == open_cursor {
                    return Err(ActionError::EmptySpan {
                        boundary: *boundary,
                    });
                }
                let ac_type = self
                    .schema
                    .ac_index(ac_type)
                    .ok_or_else(|| ActionError::UnknownAcType(ac_type.clone()))?;
                let choices = links
                    .iter()
                    .map(|l| self.link_choice(l))
                    .collect::<Result<Vec<_>, _>>()?;
                self.check_links(state, &choices)?;

                let step_index = state.steps.len();
                let mut own_outgoing = 0;
                for l in &choices {
                    match l.direction {
                        Direction::HeadIsCurrent => own_outgoing += 1,
                        Direction::HeadIsAntecedent => {
                            let i = state
                                .closes
                                .binary_search_by_key(&l.antecedent, |c| c.step)
                                .expect("checked");
                            state.closes[i].outgoing += 1;
                        }
                    }
                }
                state.opens.remove(0);
                state.closes.push(ClosedMention {
                    step: step_index,
                    boundary: open_step,
                    start: open_cursor,
                    end: state.cursor - 1,
                    ac_type,
                    outgoing: own_outgoing,
                });
            }
        }
        state.steps.push(step.clone());
        Ok(())
    }

    fn check_links(&self, state: &DecoderState, links: &[LinkChoice]) -> Result<(), ActionError> {
        if self.mode == LinearizeMode::SingleLink && links.len() > 1 {
            return Err(ActionError::TooManyLinks(links.len()));
        }
        let tree = self.schema.structure_mode() == StructureMode::Tree;
        let mut seen = std::collections::HashSet::new();
        let mut heads_current = 0;
        for l in links {
            let ante = state
                .close_at(l.antecedent)
                .ok_or(ActionError::BadAntecedent(l.antecedent))?;
            if !seen.insert((l.antecedent, l.direction)) {
                return Err(ActionError::DuplicateLink(l.antecedent));
            }
            match l.direction {
                Direction::HeadIsCurrent => {
                    heads_current += 1;
                    if tree && heads_current > 1 {
                        return Err(ActionError::TreeViolation(l.antecedent));
                    }
                }
                Direction::HeadIsAntecedent => {
                    if tree && ante.outgoing > 0 {
                        return Err(ActionError::TreeViolation(l.antecedent));
                    }
                }
            }
        }
        Ok(())
    }

    /// Folds `steps` from a fresh state.
    pub fn replay(
        &self,
        token_count: usize,
        steps: &[ActionStep],
    ) -> Result<DecoderState, (usize, ActionError)> {
        let mut state = DecoderState::new(token_count);
        for (i, s) in steps.iter().enumerate() {
            self.apply(&mut state, s).map_err(|e| (i, e))?;
        }
        Ok(state)
    }
}

/// Functional form of [`ActionSpace::apply`].
pub fn apply_action(
    space: &ActionSpace,
    state: &DecoderState,
    step: &ActionStep,
) -> Result<DecoderState, ActionError> {
    let mut next = state.clone();
    space.apply(&mut next, step)?;
    Ok(next)
}
