//! Mini-batch AdamW on the teacher-forced loss with per-epoch dev
//! evaluation and best-dev checkpointing.

use argseq_core::decoder::decode_structure;
use argseq_core::{eval_tasks, ArgStructure, DecodeLimits, Schema, StructureMode, TaskScores};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ModelConfig, Vocab};
use crate::model::NeuralModel;
use crate::scalar::Scalar;
use crate::NeuralError;

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DevScores {
    pub aci: f64,
    pub acc: f64,
    pub ari: f64,
    pub arc: f64,
    pub avg: f64,
}

impl From<&TaskScores> for DevScores {
    fn from(t: &TaskScores) -> Self {
        DevScores {
            aci: t.aci.f1(),
            acc: t.acc.f1(),
            ari: t.ari.f1(),
            arc: t.arc.f1(),
            avg: t.avg(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean loss per training paragraph.
    pub loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dev: Option<DevScores>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T: Scalar> {
    pub model: NeuralModel<T>,
    pub history: Vec<EpochRecord>,
    /// Epoch of the returned parameters when chosen on dev.
    pub best_epoch: Option<usize>,
}

/// Step budget for decoding a paragraph of `tokens` tokens: the mode's
/// default, raised for long paragraphs.
pub fn decode_limits(mode: StructureMode, tokens: usize) -> DecodeLimits {
    let base = DecodeLimits::for_mode(mode);
    DecodeLimits {
        max_steps: base.max_steps.max(3 * tokens),
    }
}

/// Greedy-decodes every structure's paragraph and scores against it.
pub fn evaluate<T: Scalar>(
    model: &NeuralModel<T>,
    gold: &[ArgStructure],
) -> Result<(TaskScores, Vec<ArgStructure>), NeuralError> {
    let space = model.space();
    let mode = model.schema.structure_mode();
    let preds = gold
        .par_iter()
        .map(|s| {
            let p = &s.paragraph;
            decode_structure(model, p, &space, decode_limits(mode, p.tokens.len()))
                .map(|d| d.structure)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let scores = eval_tasks(gold, &preds).expect("predictions keep gold ids and order");
    Ok((scores, preds))
}

pub fn train<T: Scalar>(
    config: ModelConfig,
    schema: Schema,
    train: &[ArgStructure],
    dev: &[ArgStructure],
) -> Result<TrainOutcome<T>, NeuralError> {
    train_with(config, schema, train, dev, |_, _| true)
}

/// Like [`train`]; `on_epoch` sees each record and the current model and
/// returns whether to continue.
pub fn train_with<T, F>(
    config: ModelConfig,
    schema: Schema,
    train: &[ArgStructure],
    dev: &[ArgStructure],
    mut on_epoch: F,
) -> Result<TrainOutcome<T>, NeuralError>
where
    T: Scalar,
    F: FnMut(&EpochRecord, &NeuralModel<T>) -> bool,
{
    config.validate()?;
    if train.is_empty() {
        return Err(NeuralError::EmptyCorpus);
    }
    let vocab = Vocab::build(train, 1);
    let mut model = NeuralModel::<T>::new(config.clone(), vocab, schema)?;
    let examples = train
        .iter()
        .map(|s| model.example(s))
        .collect::<Result<Vec<_>, _>>()?;

    let n_params = model.params().len();
    let mut m1 = vec![T::zero(); n_params];
    let mut m2 = vec![T::zero(); n_params];
    let mut t = 0i32;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<(f64, usize, Vec<T>)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let results: Vec<(f64, Vec<T>)> = batch
                .par_iter()
                .map(|&i| {
                    let (out, g) = model.loss_and_grad(&examples[i]);
                    (out.loss, g)
                })
                .collect();
            let scale = T::of(1.0 / batch.len() as f64);
            let mut grad = vec![T::zero(); n_params];
            for (loss, g) in &results {
                epoch_loss += loss;
                for (a, b) in grad.iter_mut().zip(g) {
                    *a += *b;
                }
            }
            grad.iter_mut().for_each(|v| *v *= scale);
            if config.clip_norm > 0.0 {
                let max = config.clip_norm;
                let norm = grad.iter().map(|v| v.f64() * v.f64()).sum::<f64>().sqrt();
                if norm > max {
                    let s = T::of(max / norm);
                    grad.iter_mut().for_each(|v| *v *= s);
                }
            }
            t += 1;
            adamw_step(&config, t, model.params_mut(), &grad, &mut m1, &mut m2);
        }
        let loss = epoch_loss / examples.len() as f64;
        let eval_now =
            !dev.is_empty() && (epoch % config.eval_every == 0 || epoch == config.epochs);
        let dev_scores = if eval_now {
            Some(DevScores::from(&evaluate(&model, dev)?.0))
        } else {
            None
        };
        if let Some(d) = dev_scores {
            if best.as_ref().is_none_or(|b| d.avg > b.0) {
                best = Some((d.avg, epoch, model.params().to_vec()));
            }
        }
        let record = EpochRecord {
            epoch,
            loss,
            dev: dev_scores,
        };
        log::debug!("epoch {epoch}: loss {loss:.4}");
        let go_on = on_epoch(&record, &model);
        history.push(record);
        if !go_on {
            break;
        }
    }

    let best_epoch = best.map(|(_, epoch, params)| {
        model.params_mut().copy_from_slice(&params);
        epoch
    });
    Ok(TrainOutcome {
        model,
        history,
        best_epoch,
    })
}

fn adamw_step<T: Scalar>(
    cfg: &ModelConfig,
    t: i32,
    p: &mut [T],
    g: &[T],
    m1: &mut [T],
    m2: &mut [T],
) {
    let lr = cfg.learning_rate;
    let c1 = 1.0 - BETA1.powi(t);
    let c2 = 1.0 - BETA2.powi(t);
    let (b1, b2) = (T::of(BETA1), T::of(BETA2));
    let (ob1, ob2) = (T::of(1.0 - BETA1), T::of(1.0 - BETA2));
    let decay = T::of(1.0 - lr * cfg.weight_decay);
    let step = T::of(lr / c1);
    let c2 = T::of(c2);
    let eps = T::of(ADAM_EPS);
    for i in 0..p.len() {
        m1[i] = b1 * m1[i] + ob1 * g[i];
        m2[i] = b2 * m2[i] + ob2 * g[i] * g[i];
        p[i] = p[i] * decay - step * m1[i] / ((m2[i] / c2).sqrt() + eps);
    }
}
