#![allow(dead_code)]

use argseq_core::corpus::{gen_synthetic, SynthConfig};
use argseq_core::{ArgStructure, LinearizeMode, Schema, StructureMode};
use argseq_neural::{ModelConfig, NeuralModel, Scalar, Vocab};

pub fn corpus(seed: u64, n: usize, mode: StructureMode) -> (Schema, Vec<ArgStructure>) {
    let mut cfg = SynthConfig::new(seed, n, mode);
    cfg.ac_density = 0.2;
    let c = gen_synthetic(&cfg).unwrap();
    let s = c.structures().cloned().collect();
    (c.schema, s)
}

/// Narrow dimensions so tests run quickly.
pub fn small_config(seed: u64, mode: LinearizeMode) -> ModelConfig {
    ModelConfig {
        embed_dim: 8,
        context_dim: 12,
        ffn1_hidden: 10,
        ffn_hidden: 16,
        seed,
        mode,
        ..Default::default()
    }
}

pub fn model<T: Scalar>(
    cfg: ModelConfig,
    schema: &Schema,
    data: &[ArgStructure],
) -> NeuralModel<T> {
    NeuralModel::new(cfg, Vocab::build(data, 1), schema.clone()).unwrap()
}
