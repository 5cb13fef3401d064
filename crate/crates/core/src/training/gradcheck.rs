use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::EmbeddingModel;
use crate::ontology::Axiom;

use super::loss::{batch_gradient, branch_log, total_loss, touched_parameters};
use super::{TrainConfig, TrainError};

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;
/// Parameters whose ±`KINK_RADIUS` neighbourhood crosses a branch of the
/// loss are not probed.
pub const KINK_RADIUS: f64 = 1e-4;
/// Lower bound on the denominator of the relative error, per unit of
/// `max(1, |objective|)`, so that gradients which are zero up to rounding
/// compare by absolute error. Rounding in central differences grows with
/// the objective, hence the scaling.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    /// Parameter attaining the maximum, if any was probed.
    pub worst: Option<usize>,
    pub probed: usize,
    pub skipped_near_kink: usize,
}

fn objective(batch: &[Axiom], negatives: &[Axiom], model: &EmbeddingModel, cfg: &TrainConfig) -> Result<f64, TrainError> {
    Ok(total_loss(batch, negatives, model, cfg)?.total)
}

fn shifted(model: &EmbeddingModel, i: usize, delta: f64) -> EmbeddingModel {
    let mut m = model.clone();
    m.params_mut()[i] += delta;
    m
}

/// Compares the analytic gradient of the batch objective with central
/// differences at up to `probes` parameters drawn from those the batch
/// reads.
pub fn gradient_check(
    model: &EmbeddingModel,
    batch: &[Axiom],
    negatives: &[Axiom],
    cfg: &TrainConfig,
    probes: usize,
    seed: u64,
) -> Result<GradientCheck, TrainError> {
    let (_, grad) = batch_gradient(batch, negatives, model, cfg)?;
    let candidates = touched_parameters(batch, negatives, model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = sample(&mut rng, candidates.len(), probes.min(candidates.len()));
    let base_log = branch_log(batch, negatives, model, cfg);
    let floor = RELATIVE_FLOOR * objective(batch, negatives, model, cfg)?.abs().max(1.0);
    let mut report = GradientCheck { max_relative_error: 0.0, worst: None, probed: 0, skipped_near_kink: 0 };
    for k in picks {
        let i = candidates[k];
        let near_kink = [-KINK_RADIUS, KINK_RADIUS]
            .iter()
            .any(|&d| branch_log(batch, negatives, &shifted(model, i, d), cfg) != base_log);
        if near_kink {
            report.skipped_near_kink += 1;
            continue;
        }
        let up = objective(batch, negatives, &shifted(model, i, FD_STEP), cfg)?;
        let down = objective(batch, negatives, &shifted(model, i, -FD_STEP), cfg)?;
        let fd = (up - down) / (2.0 * FD_STEP);
        let err = (grad[i] - fd).abs() / grad[i].abs().max(fd.abs()).max(floor);
        report.probed += 1;
        if err > report.max_relative_error || report.worst.is_none() {
            report.max_relative_error = report.max_relative_error.max(err);
            report.worst = Some(i);
        }
    }
    Ok(report)
}
