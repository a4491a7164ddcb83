use std::collections::HashMap;

use argseq_core::{ArgStructure, LinearizeMode};
use serde::{Deserialize, Serialize};

use crate::NeuralError;

/// Dimensions and training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub embed_dim: usize,
    pub context_dim: usize,
    pub ffn1_hidden: usize,
    /// Hidden width of the boundary and link heads.
    pub ffn_hidden: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Global gradient-norm clip; 0 disables clipping.
    pub clip_norm: f64,
    pub mode: LinearizeMode,
    pub max_open: usize,
    /// Evaluate on the dev set every this many epochs (and after the last).
    pub eval_every: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 64,
            context_dim: 128,
            ffn1_hidden: 256,
            ffn_hidden: 1500,
            seed: 1,
            learning_rate: 1e-3,
            weight_decay: 0.0,
            epochs: 20,
            batch_size: 8,
            clip_norm: 5.0,
            mode: LinearizeMode::MultiLink,
            max_open: 1,
            eval_every: 1,
        }
    }
}

impl ModelConfig {
    /// Learning rates used for the language-model body and the heads in the
    /// original large-model setup, for reference.
    pub const PRESET_LM_LR: f64 = 5e-5;
    pub const PRESET_HEAD_LR: f64 = 3e-4;

    pub fn validate(&self) -> Result<(), NeuralError> {
        let dims = [
            ("embed_dim", self.embed_dim),
            ("context_dim", self.context_dim),
            ("ffn1_hidden", self.ffn1_hidden),
            ("ffn_hidden", self.ffn_hidden),
            ("batch_size", self.batch_size),
            ("max_open", self.max_open),
            ("eval_every", self.eval_every),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(NeuralError::Config(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NeuralError::Config(format!(
                "learning_rate {}",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(NeuralError::Config(format!(
                "weight_decay {}",
                self.weight_decay
            )));
        }
        if !(self.clip_norm >= 0.0 && self.clip_norm.is_finite()) {
            return Err(NeuralError::Config(format!("clip_norm {}", self.clip_norm)));
        }
        Ok(())
    }
}

/// Token vocabulary; id 0 is the unknown token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocab {
    pub const UNK: &'static str = "<unk>";

    /// Builds from a token list whose first entry must be [`Vocab::UNK`].
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, NeuralError> {
        if tokens.first().map(String::as_str) != Some(Self::UNK) {
            return Err(NeuralError::Format(
                "vocabulary must start with <unk>".into(),
            ));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(NeuralError::Format(format!(
                    "duplicate vocabulary entry `{t}`"
                )));
            }
        }
        Ok(Vocab { tokens, index })
    }

    /// Every token seen at least `min_count` times, in first-seen order.
    pub fn build<'a>(
        structures: impl IntoIterator<Item = &'a ArgStructure>,
        min_count: usize,
    ) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut order = Vec::new();
        for s in structures {
            for t in &s.paragraph.tokens {
                let c = counts.entry(t.as_str()).or_insert_with(|| {
                    order.push(t.as_str());
                    0
                });
                *c += 1;
            }
        }
        let mut tokens = vec![Self::UNK.to_string()];
        tokens.extend(
            order
                .into_iter()
                .filter(|t| counts[t] >= min_count.max(1) && *t != Self::UNK)
                .map(str::to_string),
        );
        Self::from_tokens(tokens).expect("deduplicated by construction")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, token: &str) -> usize {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn ids(&self, tokens: &[String]) -> Vec<usize> {
        tokens.iter().map(|t| self.id(t)).collect()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}
