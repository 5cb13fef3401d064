use std::cell::RefCell;
use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::geometry::{inclusion_loss, non_inclusion_loss, GeometryError, Norm, Scalar};
use crate::model::{axiom_boxes_with, EmbeddingModel, ModelError};
use crate::ontology::{Axiom, ConceptExpr};

use super::tape::{Tape, Var};
use super::{TrainConfig, TrainError};

/// Inclusion loss of the two sides of `axiom` with margin `gamma`.
pub fn axiom_loss(axiom: &Axiom, model: &EmbeddingModel, gamma: f64, norm: Norm) -> Result<f64, ModelError> {
    axiom_loss_with(axiom, model, &|i| model.params()[i], gamma, norm)
}

pub(crate) fn axiom_loss_with<S: Scalar>(
    axiom: &Axiom,
    model: &EmbeddingModel,
    p: &dyn Fn(usize) -> S,
    gamma: f64,
    norm: Norm,
) -> Result<S, ModelError> {
    let (lhs, rhs) = axiom_boxes_with(axiom, model, p)?;
    Ok(inclusion_loss(&lhs, &rhs, gamma, norm)?)
}

fn collect_atomic<'a>(expr: &'a ConceptExpr, out: &mut Vec<&'a str>) {
    expr.visit(&mut |x| {
        if let ConceptExpr::Atomic(a) = x {
            out.push(a.as_str());
        }
    });
}

/// Atomic concept names occurring in `axiom`, with repetition.
fn atomic_occurrences(axiom: &Axiom) -> Vec<&str> {
    let mut out = Vec::new();
    match axiom {
        Axiom::Gci { lhs, rhs } => {
            collect_atomic(lhs, &mut out);
            collect_atomic(rhs, &mut out);
        }
        Axiom::ConceptAssertion { concept, .. } => out.push(concept.as_str()),
        _ => {}
    }
    out
}

/// `Σ ‖c(A) − 1‖` over atomic concept occurrences in `axiom`.
pub fn regularization_loss(axiom: &Axiom, model: &EmbeddingModel, norm: Norm) -> Result<f64, ModelError> {
    regularization_with(axiom, model, &|i| model.params()[i], norm)
}

fn regularization_with<S: Scalar>(
    axiom: &Axiom,
    model: &EmbeddingModel,
    p: &dyn Fn(usize) -> S,
    norm: Norm,
) -> Result<S, ModelError> {
    let one = S::constant(1.0);
    let mut sum = S::zero();
    for a in atomic_occurrences(axiom) {
        let b = model.concept_box_with(a, p)?;
        sum = sum + norm.apply(b.center().iter().map(|&c| c - one));
    }
    Ok(sum)
}

/// `Σ ‖max(0, o_min − o(A))‖` over atomic concept occurrences.
fn min_offset_with<S: Scalar>(
    axiom: &Axiom,
    model: &EmbeddingModel,
    p: &dyn Fn(usize) -> S,
    floor: f64,
    norm: Norm,
) -> Result<S, ModelError> {
    let floor = S::constant(floor);
    let mut sum = S::zero();
    for a in atomic_occurrences(axiom) {
        let b = model.concept_box_with(a, p)?;
        sum = sum + norm.apply(b.offset().iter().map(|&o| S::zero().max(floor - o)));
    }
    Ok(sum)
}

/// One summand of the batch loss before the `1/N` factor.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Term<'a> {
    Positive(&'a Axiom),
    Negative(&'a Axiom),
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct TermParts<S> {
    pub loss: S,
    pub reg: S,
    pub value: S,
}

pub(crate) fn term_with<S: Scalar>(
    term: Term<'_>,
    model: &EmbeddingModel,
    p: &dyn Fn(usize) -> S,
    cfg: &TrainConfig,
) -> Result<TermParts<S>, ModelError> {
    match term {
        Term::Positive(axiom) => {
            let loss = axiom_loss_with(axiom, model, p, cfg.margin, cfg.norm)?;
            let reg = if cfg.lambda != 0.0 {
                regularization_with(axiom, model, p, cfg.norm)?
            } else {
                S::zero()
            };
            let inner = loss + reg.scale(cfg.lambda);
            let mut value = if cfg.square_positive_term { inner * inner } else { inner };
            if cfg.min_offset > 0.0 && cfg.min_offset_weight > 0.0 {
                let pen = min_offset_with(axiom, model, p, cfg.min_offset, cfg.norm)?;
                value = value + pen.scale(cfg.min_offset_weight);
            }
            Ok(TermParts { loss, reg, value })
        }
        Term::Negative(axiom) => {
            let (lhs, rhs) = axiom_boxes_with(axiom, model, p)?;
            let loss = non_inclusion_loss(&lhs, &rhs, cfg.margin, cfg.norm, cfg.non_inclusion_mode)?;
            Ok(TermParts { loss, reg: S::zero(), value: loss })
        }
    }
}

/// Errors that make a term contribute nothing for this step instead of
/// aborting training.
pub(crate) fn is_skippable(e: &ModelError) -> bool {
    matches!(
        e,
        ModelError::BottomFiller { .. }
            | ModelError::Geometry(GeometryError::UniversalNotIncluded)
            | ModelError::Geometry(GeometryError::MaskedOperand)
    )
}

/// Sums of the batch loss components.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossParts {
    /// `Σ L(α)` over evaluated positives.
    pub positive: f64,
    /// `Σ L_reg(α)` over evaluated positives.
    pub regularization: f64,
    /// `Σ` non-inclusion loss over evaluated negatives.
    pub negative: f64,
    /// The batch objective.
    pub total: f64,
    pub positives: usize,
    pub negatives: usize,
    pub skipped: usize,
}

fn terms<'a>(batch: &'a [Axiom], negatives: &'a [Axiom]) -> Vec<Term<'a>> {
    batch
        .iter()
        .map(Term::Positive)
        .chain(negatives.iter().map(Term::Negative))
        .collect()
}

type TermResult = Result<Option<(TermParts<f64>, Vec<(usize, f64)>)>, ModelError>;

fn term_gradient(term: Term<'_>, model: &EmbeddingModel, cfg: &TrainConfig) -> TermResult {
    let tape = Tape::new();
    let params = model.params();
    let leaves: RefCell<BTreeMap<usize, Var<'_>>> = RefCell::new(BTreeMap::new());
    let p = |i: usize| *leaves.borrow_mut().entry(i).or_insert_with(|| tape.var(params[i]));
    let parts = match term_with(term, model, &p, cfg) {
        Ok(parts) => parts,
        Err(e) if is_skippable(&e) => return Ok(None),
        Err(e) => return Err(e),
    };
    let adj = tape.gradient(parts.value);
    let grads = leaves
        .into_inner()
        .into_iter()
        .map(|(i, v)| (i, v.index().map_or(0.0, |k| adj[k])))
        .collect();
    let values = TermParts { loss: parts.loss.value(), reg: parts.reg.value(), value: parts.value.value() };
    Ok(Some((values, grads)))
}

fn accumulate(
    batch: &[Axiom],
    results: Vec<(Term<'_>, Option<TermParts<f64>>)>,
) -> LossParts {
    let mut parts = LossParts::default();
    let mut sum = 0.0;
    for (term, r) in results {
        let Some(t) = r else {
            parts.skipped += 1;
            continue;
        };
        sum += t.value;
        match term {
            Term::Positive(_) => {
                parts.positive += t.loss;
                parts.regularization += t.reg;
                parts.positives += 1;
            }
            Term::Negative(_) => {
                parts.negative += t.loss;
                parts.negatives += 1;
            }
        }
    }
    parts.total = sum / batch.len() as f64;
    parts
}

/// `(1/N)·(Σ_α (L(α) + λ·L_reg(α))² + Σ_β L_neg(β))` with `N = |batch|`.
/// Terms that cannot be evaluated (existentials over empty fillers) are
/// skipped and counted.
pub fn total_loss(
    batch: &[Axiom],
    negatives: &[Axiom],
    model: &EmbeddingModel,
    cfg: &TrainConfig,
) -> Result<LossParts, TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let p = |i: usize| model.params()[i];
    let mut results = Vec::new();
    for term in terms(batch, negatives) {
        match term_with(term, model, &p, cfg) {
            Ok(t) => results.push((term, Some(t))),
            Err(e) if is_skippable(&e) => results.push((term, None)),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(accumulate(batch, results))
}

/// Batch objective and its gradient with respect to every parameter.
///
/// Terms are differentiated independently (in parallel on the current rayon
/// pool) and summed in a fixed order, so the result does not depend on the
/// number of threads.
pub fn batch_gradient(
    batch: &[Axiom],
    negatives: &[Axiom],
    model: &EmbeddingModel,
    cfg: &TrainConfig,
) -> Result<(LossParts, Vec<f64>), TrainError> {
    if batch.is_empty() {
        return Err(TrainError::EmptyBatch);
    }
    let all = terms(batch, negatives);
    let per_term: Vec<TermResult> = all.par_iter().map(|&t| term_gradient(t, model, cfg)).collect();
    let scale = 1.0 / batch.len() as f64;
    let mut grad = vec![0.0; model.parameter_count()];
    let mut results = Vec::with_capacity(all.len());
    for (term, r) in all.into_iter().zip(per_term) {
        match r? {
            Some((parts, g)) => {
                for (i, d) in g {
                    grad[i] += scale * d;
                }
                results.push((term, Some(parts)));
            }
            None => results.push((term, None)),
        }
    }
    Ok((accumulate(batch, results), grad))
}

/// Parameters read by any term of the batch.
pub(crate) fn touched_parameters(batch: &[Axiom], negatives: &[Axiom], model: &EmbeddingModel, cfg: &TrainConfig) -> Vec<usize> {
    let seen = RefCell::new(std::collections::BTreeSet::new());
    let p = |i: usize| {
        seen.borrow_mut().insert(i);
        model.params()[i]
    };
    for term in terms(batch, negatives) {
        let _ = term_with(term, model, &p, cfg);
    }
    seen.into_inner().into_iter().collect()
}

/// Comparison outcomes recorded while evaluating every term, with one extra
/// entry per term for whether it could be evaluated at all.
pub(crate) fn branch_log(batch: &[Axiom], negatives: &[Axiom], model: &EmbeddingModel, cfg: &TrainConfig) -> Vec<bool> {
    let mut log = Vec::new();
    for term in terms(batch, negatives) {
        let tape = Tape::new();
        let p = |i: usize| tape.var(model.params()[i]);
        let ok = term_with(term, model, &p, cfg).is_ok();
        log.push(ok);
        log.extend(tape.branches());
    }
    log
}

/// Mean of [`axiom_loss`] over `axioms`, ignoring axioms that cannot be
/// evaluated. Returns the mean and the number ignored.
pub fn mean_axiom_loss(axioms: &[Axiom], model: &EmbeddingModel, gamma: f64, norm: Norm) -> Result<(f64, usize), ModelError> {
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for a in axioms {
        match axiom_loss(a, model, gamma, norm) {
            Ok(l) => {
                sum += l;
                used += 1;
            }
            Err(e) if is_skippable(&e) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((if used == 0 { 0.0 } else { sum / used as f64 }, skipped))
}
