//! Central finite differences against the analytic gradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::example::Example;
use crate::model::NeuralModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    pub epsilon: f64,
    /// Parameters compared per example.
    pub samples: usize,
    pub seed: u64,
    /// Smallest denominator of the relative error; differences between two
    /// near-zero gradients are measured against this.
    pub floor: f64,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        GradCheckOptions {
            epsilon: 1e-5,
            samples: 200,
            seed: 0,
            floor: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradSample {
    pub tensor: &'static str,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    pub checked: usize,
    /// Samples dropped because a perturbation crossed a rectifier kink.
    pub skipped_kinks: usize,
    pub worst: Option<GradSample>,
}

pub fn rel_error(a: f64, n: f64, floor: f64) -> f64 {
    let diff = (a - n).abs();
    if diff == 0.0 {
        return 0.0;
    }
    diff / a.abs().max(n.abs()).max(floor)
}

/// Compares the analytic gradient of the example's loss with central
/// differences on `opts.samples` parameters. A tensor is drawn uniformly,
/// then an entry within it; samples whose perturbations change the
/// rectifier sign pattern are redrawn.
pub fn grad_check(
    model: &NeuralModel<f64>,
    ex: &Example,
    opts: GradCheckOptions,
) -> GradCheckReport {
    let (base, grad) = model.loss_and_grad(ex);
    let slots: Vec<_> = model
        .layout()
        .slots()
        .into_iter()
        .filter(|(_, s)| !s.is_empty())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut m = model.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        checked: 0,
        skipped_kinks: 0,
        worst: None,
    };
    let max_attempts = opts.samples.saturating_mul(20).max(1);
    let mut attempts = 0;
    while report.checked < opts.samples && attempts < max_attempts {
        attempts += 1;
        let (name, slot) = slots[rng.gen_range(0..slots.len())];
        let index = slot.offset + rng.gen_range(0..slot.len());
        let orig = m.params()[index];
        m.params_mut()[index] = orig + opts.epsilon;
        let plus = m.loss(ex);
        m.params_mut()[index] = orig - opts.epsilon;
        let minus = m.loss(ex);
        m.params_mut()[index] = orig;
        if plus.relu_signature != base.relu_signature || minus.relu_signature != base.relu_signature
        {
            report.skipped_kinks += 1;
            continue;
        }
        let numeric = (plus.loss - minus.loss) / (2.0 * opts.epsilon);
        let analytic = grad[index];
        let e = rel_error(analytic, numeric, opts.floor);
        report.checked += 1;
        if report.worst.is_none() || e > report.max_rel_error {
            report.max_rel_error = e;
            report.worst = Some(GradSample {
                tensor: name,
                index: index - slot.offset,
                analytic,
                numeric,
                rel_error: e,
            });
        }
    }
    if report.checked < opts.samples {
        log::warn!(
            "gradient check compared {} of {} samples ({} kinks)",
            report.checked,
            opts.samples,
            report.skipped_kinks
        );
    }
    report
}
