use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use argseq_core::actions::{Candidate, DecoderState, LinkChoice};
use argseq_core::decoder::{LinkScores, ScorerError};
use argseq_core::{
    ActionSequence, ActionSpace, ActionStep, ArgStructure, Paragraph, Schema, Scorer,
    ScoringSession,
};

use crate::config::{ModelConfig, Vocab};
use crate::example::{link_code, prepare, prepare_sequence, prev_of, Example};
use crate::net::{close_score, CloseHeads, Encoded, Net, OpenProj, Prev};
use crate::params::{Layout, ParamCounts};
use crate::pass::{run, PassOutput};
use crate::scalar::Scalar;
use crate::NeuralError;

/// The recurrent scorer: parameters plus everything needed to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuralModel<T: Scalar> {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub schema: Schema,
    layout: Layout,
    params: Vec<T>,
}

impl<T: Scalar> NeuralModel<T> {
    /// A freshly initialized model, seeded from `config.seed`.
    pub fn new(config: ModelConfig, vocab: Vocab, schema: Schema) -> Result<Self, NeuralError> {
        let mut m = Self::zeros(config, vocab, schema)?;
        m.params = m.layout.init(m.config.seed);
        Ok(m)
    }

    /// A model with every parameter zero.
    pub fn zeros(config: ModelConfig, vocab: Vocab, schema: Schema) -> Result<Self, NeuralError> {
        config.validate()?;
        let layout = Layout::new(
            &config,
            vocab.len(),
            schema.ac_types().len(),
            schema.ar_types().len(),
        );
        let params = vec![T::zero(); layout.total()];
        Ok(NeuralModel {
            config,
            vocab,
            schema,
            layout,
            params,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    /// A named tensor, row-major.
    pub fn tensor(&self, name: &str) -> Option<&[T]> {
        self.layout.get(name).map(|s| s.of(&self.params))
    }

    pub fn tensor_mut(&mut self, name: &str) -> Option<&mut [T]> {
        self.layout.get(name).map(|s| s.of_mut(&mut self.params))
    }

    pub fn param_counts(&self) -> ParamCounts {
        ParamCounts::of(&self.layout)
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|v| v.is_finite())
    }

    /// The action space this model decodes in.
    pub fn space(&self) -> ActionSpace {
        ActionSpace::new(self.schema.clone(), self.config.mode).with_max_open(self.config.max_open)
    }

    pub(crate) fn net(&self) -> Net<'_, T> {
        Net::new(&self.layout, &self.params)
    }

    /// Contextual vectors, one per token.
    pub fn encode(&self, paragraph: &Paragraph) -> Vec<Vec<T>> {
        self.net().encode(&self.vocab.ids(&paragraph.tokens)).ctx
    }

    /// Next decoder state after executing `step` at `cursor`, given the
    /// state it was scored from (`None` before the first step, where `step`
    /// is ignored and the begin symbol is consumed).
    pub fn step_hidden(
        &self,
        paragraph: &Paragraph,
        prev_hidden: Option<&[T]>,
        step: Option<&ActionStep>,
        cursor: usize,
    ) -> Result<Vec<T>, NeuralError> {
        let net = self.net();
        let enc = net.encode(&self.vocab.ids(&paragraph.tokens));
        let (prev, next_cursor) = match step {
            None => (Prev::Bos, cursor),
            Some(s) => (
                prev_of(&self.schema, s, cursor).map_err(NeuralError::Schema)?,
                cursor + usize::from(matches!(s, ActionStep::Copy)),
            ),
        };
        let x = net.input(&prev, next_cursor, &enc);
        Ok(net.cell(&x, prev_hidden))
    }

    pub fn example(&self, s: &ArgStructure) -> Result<Example, NeuralError> {
        prepare(&self.space(), &self.vocab, s)
    }

    /// Teacher-forced negative log-likelihood of `gold`.
    pub fn nll_loss(
        &self,
        paragraph: &Paragraph,
        gold: &ActionSequence,
    ) -> Result<f64, NeuralError> {
        let ex = prepare_sequence(&self.space(), &self.vocab, paragraph, gold)?;
        Ok(self.loss(&ex).loss)
    }

    pub fn loss(&self, ex: &Example) -> PassOutput {
        run(&self.layout, &self.params, ex, None)
    }

    /// Loss and its gradient, laid out like [`NeuralModel::params`].
    pub fn loss_and_grad(&self, ex: &Example) -> (PassOutput, Vec<T>) {
        let mut g = vec![T::zero(); self.params.len()];
        let out = run(&self.layout, &self.params, ex, Some(&mut g));
        (out, g)
    }

    /// The same model with parameters converted to another precision.
    pub fn cast<U: Scalar>(&self) -> NeuralModel<U> {
        NeuralModel {
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            schema: self.schema.clone(),
            layout: self.layout.clone(),
            params: self.params.iter().map(|v| U::of(v.f64())).collect(),
        }
    }
}

/// Per-paragraph decoding state of a [`NeuralModel`].
pub struct NeuralSession<'a, T: Scalar> {
    net: Net<'a, T>,
    schema: &'a Schema,
    single_link: bool,
    enc: Encoded<T>,
    /// Decoder state per step, including the current one.
    hs: Vec<Vec<T>>,
    opens: BTreeMap<usize, OpenProj<T>>,
    mentions: BTreeMap<usize, Vec<T>>,
    heads: Option<(usize, [T; 3], CloseHeads<T>)>,
}

impl<T: Scalar> NeuralSession<'_, T> {
    fn current(&self, state: &DecoderState) -> Result<usize, ScorerError> {
        let n = state.step_count();
        if n + 1 != self.hs.len() {
            return Err(ScorerError::new(format!(
                "session at step {} asked to score step {n}",
                self.hs.len() - 1
            )));
        }
        Ok(n)
    }

    /// Structural scores and, with a boundary, the span heads at step `n`.
    fn heads(
        &mut self,
        n: usize,
        boundary: Option<usize>,
    ) -> Result<([T; 3], Option<&CloseHeads<T>>), ScorerError> {
        if self.heads.as_ref().map(|h| h.0) != Some(n) {
            self.heads = None;
        }
        let h = &self.hs[n];
        let f1 = match &self.heads {
            Some((_, f1, _)) => *f1,
            None => self.net.ffn1(h).1,
        };
        let Some(b) = boundary else {
            return Ok((f1, None));
        };
        if self.heads.is_none() {
            let open = self
                .opens
                .get(&b)
                .ok_or_else(|| ScorerError::new(format!("no open registered at step {b}")))?;
            self.heads = Some((n, f1, self.net.close_heads(h, open)));
        }
        Ok((f1, self.heads.as_ref().map(|h| &h.2)))
    }

    fn mention(&self, step: usize) -> Result<&[T], ScorerError> {
        self.mentions
            .get(&step)
            .map(Vec::as_slice)
            .ok_or_else(|| ScorerError::new(format!("no mention registered at step {step}")))
    }
}

impl<T: Scalar> ScoringSession for NeuralSession<'_, T> {
    fn score_joint(
        &mut self,
        state: &DecoderState,
        candidates: &[Candidate],
    ) -> Result<Vec<f64>, ScorerError> {
        let n = self.current(state)?;
        let boundary = candidates.iter().find_map(|c| match c {
            Candidate::Close { boundary, .. } => Some(*boundary),
            _ => None,
        });
        let (f1, heads) = self.heads(n, boundary)?;
        let heads = heads.cloned();
        let mut links: BTreeMap<usize, Vec<T>> = BTreeMap::new();
        let mut out = Vec::with_capacity(candidates.len());
        for cand in candidates {
            out.push(match *cand {
                Candidate::Copy => f1[0].f64(),
                Candidate::Open => f1[1].f64(),
                Candidate::Close {
                    boundary: b,
                    ac_type,
                    link,
                } => {
                    if Some(b) != boundary {
                        return Err(ScorerError::new(
                            "close candidates disagree on the boundary",
                        ));
                    }
                    let heads = heads.as_ref().expect("boundary present");
                    if ac_type >= heads.types.len() {
                        return Err(ScorerError::new(format!("AC type {ac_type} out of range")));
                    }
                    let extra = match (self.single_link, link) {
                        (false, _) => None,
                        (true, None) => Some(heads.null),
                        (true, Some(lc)) => {
                            if let Entry::Vacant(e) = links.entry(lc.antecedent) {
                                let m = self.mention(lc.antecedent)?;
                                e.insert(self.net.link(&heads.z3, m).1);
                            }
                            Some(links[&lc.antecedent][link_code(&lc)])
                        }
                    };
                    close_score(&f1, heads, ac_type, extra)
                }
            });
        }
        Ok(out)
    }

    fn score_links(
        &mut self,
        state: &DecoderState,
        boundary: usize,
        _ac_type: usize,
        candidates: &[LinkChoice],
    ) -> Result<LinkScores, ScorerError> {
        let n = self.current(state)?;
        let (_, heads) = self.heads(n, Some(boundary))?;
        let heads = heads.expect("boundary given").clone();
        let mut links: BTreeMap<usize, Vec<T>> = BTreeMap::new();
        let mut scores = Vec::with_capacity(candidates.len());
        for lc in candidates {
            if let Entry::Vacant(e) = links.entry(lc.antecedent) {
                let m = self.mention(lc.antecedent)?;
                e.insert(self.net.link(&heads.z3, m).1);
            }
            scores.push(links[&lc.antecedent][link_code(lc)].f64());
        }
        Ok(LinkScores {
            scores,
            null: heads.null.f64(),
        })
    }

    fn observe(&mut self, state: &DecoderState, step: &ActionStep) -> Result<(), ScorerError> {
        let n = self.current(state)?;
        let cursor = state.cursor();
        match step {
            ActionStep::Open => {
                self.opens.insert(n, self.net.open_proj(&self.hs[n]));
            }
            ActionStep::Close { boundary, .. } => {
                let h_open = self.hs.get(*boundary).ok_or_else(|| {
                    ScorerError::new(format!("boundary {boundary} not yet reached"))
                })?;
                self.mentions
                    .insert(n, self.net.mention_proj(&self.hs[n], h_open));
            }
            ActionStep::Copy => {}
        }
        let prev = prev_of(self.schema, step, cursor).map_err(ScorerError::new)?;
        let next = cursor + usize::from(matches!(step, ActionStep::Copy));
        let x = self.net.input(&prev, next, &self.enc);
        let h = self.net.cell(&x, Some(&self.hs[n]));
        self.hs.push(h);
        Ok(())
    }
}

impl<T: Scalar> Scorer for NeuralModel<T> {
    type Session<'a> = NeuralSession<'a, T>;

    fn session<'a>(
        &'a self,
        paragraph: &Paragraph,
        space: &ActionSpace,
    ) -> Result<Self::Session<'a>, ScorerError> {
        if space.schema.ac_types() != self.schema.ac_types()
            || space.schema.ar_types() != self.schema.ar_types()
        {
            return Err(ScorerError::new(format!(
                "model schema `{}` does not match action space schema `{}`",
                self.schema.name(),
                space.schema.name()
            )));
        }
        let net = self.net();
        let enc = net.encode(&self.vocab.ids(&paragraph.tokens));
        let x = net.input(&Prev::Bos, 0, &enc);
        let h0 = net.cell(&x, None);
        Ok(NeuralSession {
            net,
            schema: &self.schema,
            single_link: space.mode == argseq_core::LinearizeMode::SingleLink,
            enc,
            hs: vec![h0],
            opens: BTreeMap::new(),
            mentions: BTreeMap::new(),
            heads: None,
        })
    }
}
