//! Loss assembly, gradients and the optimisation loop.

mod gradcheck;
mod loss;
mod negatives;
mod tape;

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{NonInclusionMode, Norm};
use crate::model::{init_model, EmbeddingModel, ModelError};
use crate::ontology::{desugar_abox, semantic_enhance, validate_el, Ontology};

pub use gradcheck::{gradient_check, GradientCheck, FD_STEP, KINK_RADIUS, RELATIVE_FLOOR};
pub use loss::{axiom_loss, batch_gradient, mean_axiom_loss, regularization_loss, total_loss, LossParts};
pub use negatives::{sample_negatives, NegativeSampler};
pub use tape::{Tape, Var};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("ontology is not EL++: {}", .0.join("; "))]
    InvalidOntology(Vec<String>),
    #[error("empty batch")]
    EmptyBatch,
    #[error("loss became non-finite in epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("initial model does not match the ontology: {0}")]
    ModelMismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    /// Margin `γ`.
    pub margin: f64,
    pub learning_rate: f64,
    /// Regularisation factor `λ`.
    pub lambda: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Negatives per eligible positive per epoch; 0 disables sampling.
    pub negatives: usize,
    pub seed: u64,
    pub norm: Norm,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Square `L(α) + λ·L_reg(α)` in the batch objective; `false` uses it
    /// linearly.
    pub square_positive_term: bool,
    pub non_inclusion_mode: NonInclusionMode,
    /// Replace `∃` by `∃ᵃˡˡ` on right-hand sides before training.
    pub semantic_enhancement: bool,
    /// Opt-in penalty `‖max(0, o_min − o(A))‖` keeping concept boxes from
    /// collapsing; active when both fields are positive.
    pub min_offset: f64,
    pub min_offset_weight: f64,
    /// Worker threads for gradient evaluation; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 50,
            margin: 0.05,
            learning_rate: 0.005,
            lambda: 1.0,
            epochs: 5000,
            batch_size: 512,
            negatives: 1,
            seed: 0,
            norm: Norm::L2,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            square_positive_term: true,
            non_inclusion_mode: NonInclusionMode::Norm,
            semantic_enhancement: true,
            min_offset: 0.0,
            min_offset_weight: 0.0,
            threads: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |msg: &str| Err(TrainError::Config(msg.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !(self.margin >= 0.0) || !self.margin.is_finite() {
            return bad("margin must be a finite value >= 0");
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad("learning_rate must be > 0");
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return bad("lambda must be >= 0");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if !(0.0..1.0).contains(&self.adam_beta1) || !(0.0..1.0).contains(&self.adam_beta2) {
            return bad("Adam decay rates must lie in [0, 1)");
        }
        if !(self.adam_epsilon > 0.0) {
            return bad("adam_epsilon must be > 0");
        }
        if !(self.min_offset >= 0.0) || !(self.min_offset_weight >= 0.0) {
            return bad("min_offset and min_offset_weight must be >= 0");
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(len: usize, beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Adam { beta1, beta2, epsilon, m: vec![0.0; len], v: vec![0.0; len], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean `L(α)` over the epoch's positives.
    pub mean_positive: f64,
    /// Mean non-inclusion loss over the epoch's negatives (0 without any).
    pub mean_negative: f64,
    /// Mean `L_reg(α)` over the epoch's positives.
    pub mean_regularization: f64,
    /// Mean batch objective.
    pub total: f64,
    pub skipped: usize,
}

pub fn write_trace_csv(w: &mut impl Write, trace: &[EpochStats]) -> io::Result<()> {
    writeln!(w, "epoch,mean_positive,mean_negative,regularization,total")?;
    for s in trace {
        writeln!(
            w,
            "{},{:e},{:e},{:e},{:e}",
            s.epoch, s.mean_positive, s.mean_negative, s.mean_regularization, s.total
        )?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub model: EmbeddingModel,
    pub trace: Vec<EpochStats>,
    /// The axioms actually optimised (enhanced and desugared).
    pub training_axioms: Vec<crate::ontology::Axiom>,
}

/// Enhancement (if enabled) followed by ABox desugaring.
pub fn prepare_ontology(ontology: &Ontology, cfg: &TrainConfig) -> Ontology {
    if cfg.semantic_enhancement {
        desugar_abox(&semantic_enhance(ontology))
    } else {
        desugar_abox(ontology)
    }
}

pub fn train(ontology: &Ontology, cfg: &TrainConfig) -> Result<TrainOutcome, TrainError> {
    train_with(ontology, cfg, None, &mut |_, _| {})
}

/// Training loop. Starts from `initial` when given, otherwise from
/// [`init_model`] with the configured seed, and calls `on_epoch` after
/// every epoch.
pub fn train_with(
    ontology: &Ontology,
    cfg: &TrainConfig,
    initial: Option<EmbeddingModel>,
    on_epoch: &mut dyn FnMut(&EpochStats, &EmbeddingModel),
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    let violations = validate_el(ontology);
    if !violations.is_empty() {
        return Err(TrainError::InvalidOntology(violations.iter().map(|v| v.to_string()).collect()));
    }
    let prepared = prepare_ontology(ontology, cfg);
    let mut model = match initial {
        Some(m) => {
            if m.dim() != cfg.dim {
                return Err(TrainError::ModelMismatch(format!("dimension {} vs {}", m.dim(), cfg.dim)));
            }
            if let Some(a) = prepared.axioms().iter().find(|a| !m.signature().covers(a)) {
                return Err(TrainError::ModelMismatch(format!("axiom `{a}` uses unknown names")));
            }
            m
        }
        None => init_model(ontology.signature(), cfg.dim, cfg.seed)?,
    };
    let axioms = prepared.into_axioms();
    let mut outcome = TrainOutcome { model: model.clone(), trace: Vec::new(), training_axioms: axioms.clone() };
    if cfg.epochs == 0 || axioms.is_empty() {
        return Ok(outcome);
    }

    let sampler = NegativeSampler::new(&desugar_abox(ontology));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(model.parameter_count(), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_epsilon);
    let pool = if cfg.threads > 0 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.threads)
                .build()
                .map_err(|e| TrainError::Config(e.to_string()))?,
        )
    } else {
        None
    };
    let mut order: Vec<usize> = (0..axioms.len()).collect();
    let mut trace = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut sums = LossParts::default();
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<_> = chunk.iter().map(|&i| axioms[i].clone()).collect();
            let negatives: Vec<_> = if cfg.negatives > 0 {
                batch.iter().flat_map(|a| sampler.sample(a, cfg.negatives, &mut rng)).collect()
            } else {
                Vec::new()
            };
            let (parts, grad) = match &pool {
                Some(p) => p.install(|| batch_gradient(&batch, &negatives, &model, cfg))?,
                None => batch_gradient(&batch, &negatives, &model, cfg)?,
            };
            if !parts.total.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(TrainError::Diverged { epoch });
            }
            adam.step(model.params_mut(), &grad, cfg.learning_rate);
            sums.positive += parts.positive;
            sums.regularization += parts.regularization;
            sums.negative += parts.negative;
            sums.total += parts.total;
            sums.positives += parts.positives;
            sums.negatives += parts.negatives;
            sums.skipped += parts.skipped;
            batches += 1;
        }
        if sums.skipped > 0 {
            log::debug!("epoch {epoch}: skipped {} terms", sums.skipped);
        }
        let mean = |x: f64, n: usize| if n == 0 { 0.0 } else { x / n as f64 };
        let stats = EpochStats {
            epoch,
            mean_positive: mean(sums.positive, sums.positives),
            mean_negative: mean(sums.negative, sums.negatives),
            mean_regularization: mean(sums.regularization, sums.positives),
            total: sums.total / batches as f64,
            skipped: sums.skipped,
        };
        on_epoch(&stats, &model);
        trace.push(stats);
    }
    outcome.model = model;
    outcome.trace = trace;
    Ok(outcome)
}
