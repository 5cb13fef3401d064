//! Embedding parameters and the evaluation of concept expressions to boxes.
//!
//! All parameters live in one flat `f64` array laid out as
//!
//! ```text
//! [concept centers | concept raw offsets | role centers | role raw offsets | individual points]
//! ```
//!
//! each block holding `n` consecutive values per name in signature order.
//! Effective offsets are `|raw|`.

mod check;
mod checkpoint;

use indexmap::IndexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::geometry::{
    compose_roles, exists_all_box, exists_box, intersect, ExtendedBox, GeometryError, Scalar,
};
use crate::ontology::{ConceptExpr, NameKind, Signature};

pub use check::{axiom_boxes_with, axiom_residual, check_axiom, soundness_report, AxiomVerdict, SoundnessReport};
pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, Checkpoint, CheckpointError, TrainingMetadata};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("cannot initialise a model for an empty signature")]
    EmptySignature,
    #[error("unknown {kind} `{name}`")]
    UnknownName { name: String, kind: NameKind },
    #[error("filler of `{role}` evaluates to a box with empty components")]
    BottomFiller { role: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Number of scalar parameters for a signature of the given size.
pub fn parameter_count(dim: usize, concepts: usize, roles: usize, individuals: usize) -> usize {
    dim * (2 * concepts + 2 * roles + individuals)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    dim: usize,
    concepts: IndexSet<String>,
    roles: IndexSet<String>,
    individuals: IndexSet<String>,
    params: Vec<f64>,
}

/// Random initialisation: centers and points uniform on `[−1, 1]ⁿ`, raw
/// offsets uniform on `(0, 0.5]ⁿ`.
pub fn init_model(signature: &Signature, dim: usize, seed: u64) -> Result<EmbeddingModel, ModelError> {
    if dim == 0 {
        return Err(ModelError::ZeroDimension);
    }
    if signature.is_empty() {
        return Err(ModelError::EmptySignature);
    }
    let mut model = EmbeddingModel::zeros(signature, dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nc, nr) = (model.concepts.len() * dim, model.roles.len() * dim);
    for (k, p) in model.params.iter_mut().enumerate() {
        let is_offset = (nc..2 * nc).contains(&k) || (2 * nc + nr..2 * nc + 2 * nr).contains(&k);
        *p = if is_offset {
            0.5 * (1.0 - rng.gen::<f64>())
        } else {
            rng.gen_range(-1.0..=1.0)
        };
    }
    Ok(model)
}

impl EmbeddingModel {
    /// All-zero parameters. An empty signature is allowed here.
    pub fn zeros(signature: &Signature, dim: usize) -> Result<Self, ModelError> {
        if dim == 0 {
            return Err(ModelError::ZeroDimension);
        }
        Ok(Self::from_parts(
            dim,
            signature.concepts.clone(),
            signature.roles.clone(),
            signature.individuals.clone(),
            vec![
                0.0;
                parameter_count(
                    dim,
                    signature.concepts.len(),
                    signature.roles.len(),
                    signature.individuals.len()
                )
            ],
        ))
    }

    pub(crate) fn from_parts(
        dim: usize,
        concepts: IndexSet<String>,
        roles: IndexSet<String>,
        individuals: IndexSet<String>,
        params: Vec<f64>,
    ) -> Self {
        debug_assert_eq!(params.len(), parameter_count(dim, concepts.len(), roles.len(), individuals.len()));
        EmbeddingModel { dim, concepts, roles, individuals, params }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn concepts(&self) -> &IndexSet<String> {
        &self.concepts
    }

    pub fn roles(&self) -> &IndexSet<String> {
        &self.roles
    }

    pub fn individuals(&self) -> &IndexSet<String> {
        &self.individuals
    }

    pub fn signature(&self) -> Signature {
        Signature {
            concepts: self.concepts.clone(),
            roles: self.roles.clone(),
            individuals: self.individuals.clone(),
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    fn concept_index(&self, name: &str) -> Result<usize, ModelError> {
        self.concepts.get_index_of(name).ok_or_else(|| unknown(name, NameKind::Concept))
    }

    fn role_index(&self, name: &str) -> Result<usize, ModelError> {
        self.roles.get_index_of(name).ok_or_else(|| unknown(name, NameKind::Role))
    }

    fn individual_index(&self, name: &str) -> Result<usize, ModelError> {
        self.individuals.get_index_of(name).ok_or_else(|| unknown(name, NameKind::Individual))
    }

    /// Start of the center block of concept `name`; its raw offset follows
    /// at [`EmbeddingModel::concept_offset_start`].
    pub fn concept_center_start(&self, name: &str) -> Result<usize, ModelError> {
        Ok(self.concept_index(name)? * self.dim)
    }

    pub fn concept_offset_start(&self, name: &str) -> Result<usize, ModelError> {
        Ok((self.concepts.len() + self.concept_index(name)?) * self.dim)
    }

    pub fn role_center_start(&self, name: &str) -> Result<usize, ModelError> {
        Ok((2 * self.concepts.len() + self.role_index(name)?) * self.dim)
    }

    pub fn role_offset_start(&self, name: &str) -> Result<usize, ModelError> {
        Ok((2 * self.concepts.len() + self.roles.len() + self.role_index(name)?) * self.dim)
    }

    pub fn individual_start(&self, name: &str) -> Result<usize, ModelError> {
        Ok((2 * self.concepts.len() + 2 * self.roles.len() + self.individual_index(name)?) * self.dim)
    }

    fn block<S: Scalar>(&self, start: usize, p: &dyn Fn(usize) -> S) -> Vec<S> {
        (start..start + self.dim).map(p).collect()
    }

    fn plain_box<S: Scalar>(&self, c: usize, o: usize, p: &dyn Fn(usize) -> S) -> ExtendedBox<S> {
        let center = self.block(c, p);
        let offset = self.block(o, p).into_iter().map(Scalar::abs).collect();
        ExtendedBox::plain_unchecked(center, offset)
    }

    pub fn concept_box_with<S: Scalar>(
        &self,
        name: &str,
        p: &dyn Fn(usize) -> S,
    ) -> Result<ExtendedBox<S>, ModelError> {
        Ok(self.plain_box(self.concept_center_start(name)?, self.concept_offset_start(name)?, p))
    }

    pub fn role_box_with<S: Scalar>(
        &self,
        name: &str,
        p: &dyn Fn(usize) -> S,
    ) -> Result<ExtendedBox<S>, ModelError> {
        Ok(self.plain_box(self.role_center_start(name)?, self.role_offset_start(name)?, p))
    }

    pub fn individual_point_with<S: Scalar>(
        &self,
        name: &str,
        p: &dyn Fn(usize) -> S,
    ) -> Result<ExtendedBox<S>, ModelError> {
        Ok(ExtendedBox::point(self.block(self.individual_start(name)?, p)))
    }

    /// Box of the composition `chain[0] ∘ chain[1] ∘ …`.
    pub fn chain_box_with<S: Scalar>(
        &self,
        chain: &[String],
        p: &dyn Fn(usize) -> S,
    ) -> Result<ExtendedBox<S>, ModelError> {
        let (first, rest) = chain.split_first().ok_or(GeometryError::UniversalOperand)?;
        let mut acc = self.role_box_with(first, p)?;
        for r in rest {
            acc = compose_roles(&acc, &self.role_box_with(r, p)?)?;
        }
        Ok(acc)
    }

    /// Box of an arbitrary concept expression, reading parameters through
    /// `p`. Existential restrictions over `⊤` are `⊤`; over a filler with any
    /// empty component they fail with [`ModelError::BottomFiller`].
    pub fn eval_concept_box_with<S: Scalar>(
        &self,
        expr: &ConceptExpr,
        p: &dyn Fn(usize) -> S,
    ) -> Result<ExtendedBox<S>, ModelError> {
        match expr {
            ConceptExpr::Top => Ok(ExtendedBox::universal(self.dim)),
            ConceptExpr::Bottom => Ok(ExtendedBox::empty(self.dim)),
            ConceptExpr::Atomic(a) => self.concept_box_with(a, p),
            ConceptExpr::Nominal(i) => self.individual_point_with(i, p),
            ConceptExpr::Conjunction(parts) => {
                let mut acc = ExtendedBox::universal(self.dim);
                for part in parts {
                    acc = intersect(&acc, &self.eval_concept_box_with(part, p)?)?;
                }
                Ok(acc)
            }
            ConceptExpr::Exists(r, filler) | ConceptExpr::ExistsAll(r, filler) => {
                let role = self.role_box_with(r, p)?;
                let b = self.eval_concept_box_with(filler, p)?;
                if b.is_universal() {
                    return Ok(b);
                }
                if b.has_empty_component() {
                    return Err(ModelError::BottomFiller { role: r.clone() });
                }
                let out = if matches!(expr, ConceptExpr::Exists(..)) {
                    exists_box(&role, &b)?
                } else {
                    exists_all_box(&role, &b)?
                };
                Ok(out)
            }
        }
    }

    pub fn eval_concept_box(&self, expr: &ConceptExpr) -> Result<ExtendedBox, ModelError> {
        self.eval_concept_box_with(expr, &|i| self.params[i])
    }

    pub fn concept_box(&self, name: &str) -> Result<ExtendedBox, ModelError> {
        self.concept_box_with(name, &|i| self.params[i])
    }

    pub fn role_box(&self, name: &str) -> Result<ExtendedBox, ModelError> {
        self.role_box_with(name, &|i| self.params[i])
    }

    pub fn individual_point(&self, name: &str) -> Result<Vec<f64>, ModelError> {
        let s = self.individual_start(name)?;
        Ok(self.params[s..s + self.dim].to_vec())
    }

    fn write_block(&mut self, start: usize, values: &[f64]) -> Result<(), ModelError> {
        crate::geometry::check_dims(self.dim, values.len())?;
        self.params[start..start + self.dim].copy_from_slice(values);
        Ok(())
    }

    /// Sets the box of concept `name`; offsets are stored as given.
    pub fn set_concept(&mut self, name: &str, center: &[f64], offset: &[f64]) -> Result<(), ModelError> {
        let (c, o) = (self.concept_center_start(name)?, self.concept_offset_start(name)?);
        self.write_block(c, center)?;
        self.write_block(o, offset)
    }

    pub fn set_role(&mut self, name: &str, center: &[f64], offset: &[f64]) -> Result<(), ModelError> {
        let (c, o) = (self.role_center_start(name)?, self.role_offset_start(name)?);
        self.write_block(c, center)?;
        self.write_block(o, offset)
    }

    pub fn set_individual(&mut self, name: &str, point: &[f64]) -> Result<(), ModelError> {
        let s = self.individual_start(name)?;
        self.write_block(s, point)
    }

    /// One line per entity: `name kind c_1 … c_n [o_1 … o_n]`, offsets
    /// effective (non-negative). Individuals have no offset columns.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(" ");
        for (kind, names) in [("concept", &self.concepts), ("role", &self.roles)] {
            for name in names {
                let b = if kind == "concept" { self.concept_box(name) } else { self.role_box(name) }
                    .expect("name from own table");
                out.push_str(&format!("{name} {kind} {} {}\n", fmt(b.center()), fmt(b.offset())));
            }
        }
        for name in &self.individuals {
            let x = self.individual_point(name).expect("name from own table");
            out.push_str(&format!("{name} individual {}\n", fmt(&x)));
        }
        out
    }
}

fn unknown(name: &str, kind: NameKind) -> ModelError {
    ModelError::UnknownName { name: name.to_string(), kind }
}

#[cfg(test)]
mod tests;
