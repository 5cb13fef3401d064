use crate::geometry::{inclusion_loss, ExtendedBox, Norm, Scalar};
use crate::ontology::{Axiom, ConceptExpr};

use super::{EmbeddingModel, ModelError};

/// The two boxes whose inclusion `axiom` asserts, read through `p`.
///
/// Assertions are read as nominal inclusions: `A(a)` as `{a} ⊑ A` and
/// `r(a, b)` as `{a} ⊑ ∃r.{b}`.
pub fn axiom_boxes_with<S: Scalar>(
    axiom: &Axiom,
    model: &EmbeddingModel,
    p: &dyn Fn(usize) -> S,
) -> Result<(ExtendedBox<S>, ExtendedBox<S>), ModelError> {
    Ok(match axiom {
        Axiom::Gci { lhs, rhs } => (model.eval_concept_box_with(lhs, p)?, model.eval_concept_box_with(rhs, p)?),
        Axiom::RoleInclusion { sub, sup } => (model.role_box_with(sub, p)?, model.role_box_with(sup, p)?),
        Axiom::RoleChain { chain, sup } => (model.chain_box_with(chain, p)?, model.role_box_with(sup, p)?),
        Axiom::ConceptAssertion { concept, individual } => {
            (model.individual_point_with(individual, p)?, model.concept_box_with(concept, p)?)
        }
        Axiom::RoleAssertion { role, subject, object } => (
            model.individual_point_with(subject, p)?,
            model.eval_concept_box_with(
                &ConceptExpr::exists(role.clone(), ConceptExpr::nominal(object.clone())),
                p,
            )?,
        ),
    })
}

/// Box of one side of a GCI, reading an existential over a filler with an
/// empty coordinate as `⊥`: no point inhabits such a filler, so nothing has
/// a successor in it.
fn side_box(expr: &ConceptExpr, model: &EmbeddingModel) -> Result<ExtendedBox, ModelError> {
    match model.eval_concept_box(expr) {
        Err(ModelError::BottomFiller { .. }) => Ok(ExtendedBox::empty(model.dim())),
        other => other,
    }
}

/// Inclusion residual of `axiom` under `model` with zero margin.
pub fn axiom_residual(axiom: &Axiom, model: &EmbeddingModel, norm: Norm) -> Result<f64, ModelError> {
    let (lhs, rhs) = match axiom {
        Axiom::Gci { lhs, rhs } => (side_box(lhs, model)?, side_box(rhs, model)?),
        _ => axiom_boxes_with(axiom, model, &|i| model.params()[i])?,
    };
    Ok(inclusion_loss(&lhs, &rhs, 0.0, norm)?)
}

/// Whether `axiom` holds geometrically up to `tol`. Axioms whose boxes
/// cannot be built (a name missing from the model) count as violated.
pub fn check_axiom(axiom: &Axiom, model: &EmbeddingModel, tol: f64) -> bool {
    matches!(axiom_residual(axiom, model, Norm::L2), Ok(r) if r <= tol)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AxiomVerdict {
    pub axiom: Axiom,
    /// `None` when the boxes could not be evaluated.
    pub residual: Option<f64>,
    pub satisfied: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessReport {
    pub tol: f64,
    pub verdicts: Vec<AxiomVerdict>,
    pub sound: bool,
}

impl SoundnessReport {
    pub fn violations(&self) -> impl Iterator<Item = &AxiomVerdict> {
        self.verdicts.iter().filter(|v| !v.satisfied)
    }
}

impl std::fmt::Display for SoundnessReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for v in &self.verdicts {
            let status = if v.satisfied { "ok  " } else { "FAIL" };
            match (&v.residual, &v.error) {
                (Some(r), _) => writeln!(f, "{status} {r:.6e}  {}", v.axiom)?,
                (None, Some(e)) => writeln!(f, "{status} ({e})  {}", v.axiom)?,
                (None, None) => writeln!(f, "{status} {}", v.axiom)?,
            }
        }
        let bad = self.verdicts.iter().filter(|v| !v.satisfied).count();
        writeln!(
            f,
            "sound={} satisfied={}/{} tol={}",
            self.sound,
            self.verdicts.len() - bad,
            self.verdicts.len(),
            self.tol
        )
    }
}

pub fn soundness_report(axioms: &[Axiom], model: &EmbeddingModel, tol: f64) -> SoundnessReport {
    let verdicts: Vec<AxiomVerdict> = axioms
        .iter()
        .map(|a| match axiom_residual(a, model, Norm::L2) {
            Ok(r) => AxiomVerdict { axiom: a.clone(), residual: Some(r), satisfied: r <= tol, error: None },
            Err(e) => AxiomVerdict {
                axiom: a.clone(),
                residual: None,
                satisfied: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let sound = verdicts.iter().all(|v| v.satisfied);
    SoundnessReport { tol, verdicts, sound }
}
