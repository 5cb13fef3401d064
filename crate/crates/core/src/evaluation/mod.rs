//! Subsumption prediction by ranking.

mod metrics;
mod split;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{ExtendedBox, Norm};
use crate::model::{EmbeddingModel, ModelError};
use crate::ontology::{Axiom, ConceptExpr};

pub use metrics::{aggregate_metrics, format_table, RankingReport};
pub use split::{classify_axiom, load_test_split, AxiomClass, ComplexCategory, NormalForm, TestSplit};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{path}:{line}: {message}")]
    Input { path: String, line: usize, message: String },
    #[error("unknown names: {}", .0.join(", "))]
    UnknownNames(Vec<String>),
    #[error("true answer `{0}` is not in the candidate pool")]
    AnswerNotInPool(String),
    #[error("empty candidate pool")]
    EmptyPool,
    #[error("no ranks to aggregate")]
    NoRanks,
    #[error("pool size must be at least 2, got {0}")]
    PoolTooSmall(usize),
    #[error("rank {rank} outside [1, {pool}]")]
    RankOutOfRange { rank: f64, pool: usize },
    #[error("query `{0}` does not fit the task")]
    BadQuery(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreConfig {
    /// Weight of the mask-mismatch term.
    pub big_m: f64,
    /// Treat a left-hand side with ANY empty component as empty (score 0);
    /// by default only a left-hand side with ALL components empty is.
    pub strict_empty: bool,
    pub norm: Norm,
}

impl Default for ScoreConfig {
    fn default() -> Self {
        ScoreConfig { big_m: 1e4, strict_empty: false, norm: Norm::L2 }
    }
}

/// Box used for scoring: an existential over an empty filler denotes the
/// empty set and is scored as the all-empty box.
pub fn scoring_box(expr: &ConceptExpr, model: &EmbeddingModel) -> Result<ExtendedBox, ModelError> {
    match model.eval_concept_box(expr) {
        Err(ModelError::BottomFiller { .. }) => Ok(ExtendedBox::empty(model.dim())),
        other => other,
    }
}

/// `−‖(c_C − c_D)·m_C·m_D‖ − M·‖m_C·(1 − m_D)‖`, with an empty left-hand
/// side scoring 0. A universal right-hand side scores 0; a universal
/// left-hand side is scored as a box at the origin with every coordinate
/// present.
pub fn score_boxes(c: &ExtendedBox, d: &ExtendedBox, cfg: &ScoreConfig) -> f64 {
    let empty_lhs = if cfg.strict_empty { c.has_empty_component() } else { c.is_empty() };
    if empty_lhs || d.is_universal() {
        return 0.0;
    }
    let (mc, md) = (c.mask(), d.mask());
    let n = c.dim();
    let present = |m: &[bool], j: usize| if m[j] { 1.0 } else { 0.0 };
    let dist = cfg.norm.apply((0..n).map(|j| {
        (c.center()[j] - d.center()[j]) * present(mc, j) * present(md, j)
    }));
    let mismatch = cfg.norm.apply((0..n).map(|j| present(mc, j) * (1.0 - present(md, j))));
    -dist - cfg.big_m * mismatch
}

pub fn score(lhs: &ConceptExpr, rhs: &ConceptExpr, model: &EmbeddingModel, cfg: &ScoreConfig) -> Result<f64, ModelError> {
    Ok(score_boxes(&scoring_box(lhs, model)?, &scoring_box(rhs, model)?, cfg))
}

/// Names used by `axioms` that `model` does not know, sorted and
/// deduplicated.
pub fn unknown_names(axioms: &[Axiom], model: &EmbeddingModel) -> Vec<String> {
    let known = model.signature();
    let mut probe = crate::ontology::Signature::default();
    let mut clashes = Vec::new();
    for a in axioms {
        if let Err(c) = probe.extend_from_axiom(a) {
            clashes.push(c.name);
        }
    }
    let mut out: Vec<String> = probe
        .concepts
        .iter()
        .filter(|c| !known.concepts.contains(*c))
        .chain(probe.roles.iter().filter(|r| !known.roles.contains(*r)))
        .chain(probe.individuals.iter().filter(|i| !known.individuals.contains(*i)))
        .cloned()
        .chain(clashes)
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Errors unless every name in `axioms` is known to `model`.
pub fn check_signature(axioms: &[Axiom], model: &EmbeddingModel) -> Result<(), EvalError> {
    let unknown = unknown_names(axioms, model);
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(EvalError::UnknownNames(unknown))
    }
}

/// Which side of the query is ranked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    Lhs,
    Rhs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// `* ⊑ ?A`
    RhsAtomic,
    /// `?A ⊑ *`
    LhsAtomic,
    /// `* ⊑ ?C`
    RhsComplex,
    /// `?C ⊑ *`
    LhsComplex,
    /// `A ⊑ ?B`
    NfSubsumption,
    /// `A ⊓ B ⊑ ?B′`
    NfConjunction,
    /// `?A ⊑ ∃r.B`
    NfExistsRhs,
    /// `∃r.B ⊑ ?A`
    NfExistsLhs,
}

impl TaskKind {
    pub const ALL: [TaskKind; 8] = [
        TaskKind::RhsAtomic,
        TaskKind::LhsAtomic,
        TaskKind::RhsComplex,
        TaskKind::LhsComplex,
        TaskKind::NfSubsumption,
        TaskKind::NfConjunction,
        TaskKind::NfExistsRhs,
        TaskKind::NfExistsLhs,
    ];

    /// The four tasks over complex test axioms.
    pub const COMPLEX: [TaskKind; 4] =
        [TaskKind::RhsAtomic, TaskKind::LhsAtomic, TaskKind::RhsComplex, TaskKind::LhsComplex];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::RhsAtomic => "rhs-atomic",
            TaskKind::LhsAtomic => "lhs-atomic",
            TaskKind::RhsComplex => "rhs-complex",
            TaskKind::LhsComplex => "lhs-complex",
            TaskKind::NfSubsumption => "nf-subsumption",
            TaskKind::NfConjunction => "nf-conjunction",
            TaskKind::NfExistsRhs => "nf-exists-rhs",
            TaskKind::NfExistsLhs => "nf-exists-lhs",
        }
    }

    pub fn pattern(self) -> &'static str {
        match self {
            TaskKind::RhsAtomic => "* ⊑ ?A",
            TaskKind::LhsAtomic => "?A ⊑ *",
            TaskKind::RhsComplex => "* ⊑ ?C",
            TaskKind::LhsComplex => "?C ⊑ *",
            TaskKind::NfSubsumption => "A ⊑ ?B",
            TaskKind::NfConjunction => "A ⊓ B ⊑ ?B′",
            TaskKind::NfExistsRhs => "?A ⊑ ∃r.B",
            TaskKind::NfExistsLhs => "∃r.B ⊑ ?A",
        }
    }

    pub fn slot(self) -> Slot {
        match self {
            TaskKind::LhsAtomic | TaskKind::LhsComplex | TaskKind::NfExistsRhs => Slot::Lhs,
            _ => Slot::Rhs,
        }
    }

    fn atomic_pool(self) -> bool {
        !matches!(self, TaskKind::RhsComplex | TaskKind::LhsComplex)
    }

    /// Whether a test axiom yields a query for this task.
    pub fn accepts(self, axiom: &Axiom) -> bool {
        let Axiom::Gci { lhs, rhs } = axiom else {
            return false;
        };
        match self {
            TaskKind::RhsAtomic => rhs.is_atomic() && !lhs.is_atomic() && is_complex(axiom),
            TaskKind::LhsAtomic => lhs.is_atomic() && !rhs.is_atomic() && is_complex(axiom),
            TaskKind::RhsComplex => !rhs.is_atomic() && is_complex(axiom),
            TaskKind::LhsComplex => !lhs.is_atomic() && is_complex(axiom),
            TaskKind::NfSubsumption => classify_axiom(axiom) == Some(AxiomClass::Normal(NormalForm::Subsumption)),
            TaskKind::NfConjunction => classify_axiom(axiom) == Some(AxiomClass::Normal(NormalForm::Conjunction)),
            TaskKind::NfExistsRhs => classify_axiom(axiom) == Some(AxiomClass::Normal(NormalForm::ExistsRhs)),
            TaskKind::NfExistsLhs => classify_axiom(axiom) == Some(AxiomClass::Normal(NormalForm::ExistsLhs)),
        }
    }
}

fn is_complex(axiom: &Axiom) -> bool {
    matches!(classify_axiom(axiom), Some(AxiomClass::Complex(_)))
}

impl std::str::FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = TaskKind::ALL.iter().map(|k| k.name()).collect();
                format!("unknown task `{s}` (expected one of: all, {})", names.join(", "))
            })
    }
}

/// Parses a comma-separated task list; `all` expands to the four complex
/// tasks.
pub fn parse_task_list(s: &str) -> Result<Vec<TaskKind>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let kinds: Vec<TaskKind> = if part == "all" { TaskKind::COMPLEX.to_vec() } else { vec![part.parse()?] };
        for k in kinds {
            if !out.contains(&k) {
                out.push(k);
            }
        }
    }
    if out.is_empty() {
        return Err("no tasks given".into());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankingTask {
    pub kind: TaskKind,
    pub pool: Vec<ConceptExpr>,
    pub queries: Vec<Axiom>,
}

impl RankingTask {
    /// Queries are the test axioms of the task's shape. Atomic pools hold
    /// every concept name of the model; complex pools hold every distinct
    /// non-atomic side of any test axiom.
    pub fn build(kind: TaskKind, test: &[Axiom], model: &EmbeddingModel) -> Self {
        let queries: Vec<Axiom> = test.iter().filter(|a| kind.accepts(a)).cloned().collect();
        let pool = if kind.atomic_pool() {
            model.concepts().iter().map(|c| ConceptExpr::atomic(c.clone())).collect()
        } else {
            let mut seen = indexmap::IndexSet::new();
            for a in test.iter().filter(|a| is_complex(a)) {
                if let Axiom::Gci { lhs, rhs } = a {
                    for side in [lhs, rhs] {
                        if !side.is_atomic() {
                            seen.insert(side.clone());
                        }
                    }
                }
            }
            seen.into_iter().collect()
        };
        RankingTask { kind, pool, queries }
    }
}

/// Raw rank of each query's true answer, ties resolved to the mean rank of
/// the tie group.
pub fn rank_queries(task: &RankingTask, model: &EmbeddingModel, cfg: &ScoreConfig) -> Result<Vec<f64>, EvalError> {
    if task.pool.is_empty() {
        return Err(EvalError::EmptyPool);
    }
    let pool_boxes = task
        .pool
        .iter()
        .map(|c| scoring_box(c, model))
        .collect::<Result<Vec<_>, _>>()?;
    let slot = task.kind.slot();
    task.queries
        .par_iter()
        .map(|q| {
            let Axiom::Gci { lhs, rhs } = q else {
                return Err(EvalError::BadQuery(q.to_string()));
            };
            let (fixed, truth) = match slot {
                Slot::Lhs => (rhs, lhs),
                Slot::Rhs => (lhs, rhs),
            };
            let t = task
                .pool
                .iter()
                .position(|c| c == truth)
                .ok_or_else(|| EvalError::AnswerNotInPool(truth.to_string()))?;
            let fixed_box = scoring_box(fixed, model)?;
            let scores: Vec<f64> = pool_boxes
                .iter()
                .map(|b| match slot {
                    Slot::Lhs => score_boxes(b, &fixed_box, cfg),
                    Slot::Rhs => score_boxes(&fixed_box, b, cfg),
                })
                .collect();
            Ok(tie_mean_rank(&scores, t))
        })
        .collect()
}

/// Rank of `scores[t]` in descending order, averaged over its tie group.
pub fn tie_mean_rank(scores: &[f64], t: usize) -> f64 {
    let s = scores[t];
    let better = scores.iter().filter(|&&x| x > s).count();
    let tied = scores.iter().filter(|&&x| x == s).count();
    better as f64 + (tied as f64 + 1.0) / 2.0
}

/// Runs `task` and aggregates its ranks.
pub fn evaluate_task(task: &RankingTask, model: &EmbeddingModel, cfg: &ScoreConfig) -> Result<RankingReport, EvalError> {
    let ranks = rank_queries(task, model, cfg)?;
    let mut report = aggregate_metrics(&ranks, task.pool.len())?;
    report.task = task.kind.name().to_string();
    Ok(report)
}

#[cfg(test)]
mod tests;
