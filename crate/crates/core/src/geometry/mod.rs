//! Boxes over `(ℝ ∪ {∅})ⁿ`.
//!
//! Every coordinate of an [`ExtendedBox`] is either a closed interval
//! `[c − o, c + o]` (mask bit set) or the empty component `∅` (mask bit
//! clear). Intersections that miss in some coordinate keep the other
//! coordinates instead of collapsing to the empty box; a box is empty in the
//! usual sense only when every coordinate is `∅`.
//!
//! Roles are boxes of translations: `(x, y)` is in the role iff `x − y` lies
//! in its box. Existential restriction and role composition then reduce to
//! Minkowski sums, see [`exists_box`] and [`compose_roles`].

mod loss;
mod montecarlo;
mod scalar;

use thiserror::Error;

pub use loss::{box_distance, inclusion_loss, non_inclusion_loss, NonInclusionMode};
pub use montecarlo::{
    analytic_intersection_probability, monte_carlo_intersection_probability,
    monte_carlo_intersection_probability_with, OffsetSampling,
};
pub use scalar::{Norm, Scalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("operand has empty components; existential boxes need a plain filler")]
    MaskedOperand,
    #[error("operand is the universal box")]
    UniversalOperand,
    #[error("the universal box is not included in a bounded box")]
    UniversalNotIncluded,
    #[error("offset must be non-negative, got {0}")]
    NegativeOffset(f64),
}

/// An axis-aligned box whose coordinates may individually be empty.
///
/// `universal` encodes the whole space; center, offset and mask of a
/// universal box carry no meaning and are kept at zero / all-ones.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedBox<S = f64> {
    center: Vec<S>,
    offset: Vec<S>,
    mask: Vec<bool>,
    universal: bool,
}

impl<S: Scalar> ExtendedBox<S> {
    /// A plain box (all coordinates present).
    pub fn new(center: Vec<S>, offset: Vec<S>) -> Result<Self, GeometryError> {
        let mask = vec![true; center.len()];
        Self::with_mask(center, offset, mask)
    }

    pub fn with_mask(center: Vec<S>, offset: Vec<S>, mask: Vec<bool>) -> Result<Self, GeometryError> {
        check_dims(center.len(), offset.len())?;
        check_dims(center.len(), mask.len())?;
        if let Some(bad) = offset.iter().find(|o| !(o.value() >= 0.0)) {
            return Err(GeometryError::NegativeOffset(bad.value()));
        }
        Ok(ExtendedBox { center, offset, mask, universal: false })
    }

    /// Builds a plain box without validating offsets. Callers guarantee
    /// equal lengths and non-negative offsets.
    pub(crate) fn plain_unchecked(center: Vec<S>, offset: Vec<S>) -> Self {
        debug_assert_eq!(center.len(), offset.len());
        let mask = vec![true; center.len()];
        ExtendedBox { center, offset, mask, universal: false }
    }

    /// Degenerate box `{x}`.
    pub fn point(x: Vec<S>) -> Self {
        let offset = vec![S::zero(); x.len()];
        Self::plain_unchecked(x, offset)
    }

    /// The whole space.
    pub fn universal(dim: usize) -> Self {
        ExtendedBox {
            center: vec![S::zero(); dim],
            offset: vec![S::zero(); dim],
            mask: vec![true; dim],
            universal: true,
        }
    }

    /// The box with every coordinate empty.
    pub fn empty(dim: usize) -> Self {
        ExtendedBox {
            center: vec![S::zero(); dim],
            offset: vec![S::zero(); dim],
            mask: vec![false; dim],
            universal: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[S] {
        &self.center
    }

    pub fn offset(&self) -> &[S] {
        &self.offset
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_universal(&self) -> bool {
        self.universal
    }

    /// True iff every coordinate is `∅` (the extended notion of disjointness).
    pub fn is_empty(&self) -> bool {
        !self.universal && self.mask.iter().all(|m| !m)
    }

    /// True iff some coordinate is `∅`.
    pub fn has_empty_component(&self) -> bool {
        !self.universal && self.mask.iter().any(|m| !m)
    }

    /// Bounded box with every coordinate present.
    pub fn is_plain(&self) -> bool {
        !self.universal && self.mask.iter().all(|&m| m)
    }

    pub fn lower(&self, j: usize) -> S {
        self.center[j] - self.offset[j]
    }

    pub fn upper(&self, j: usize) -> S {
        self.center[j] + self.offset[j]
    }

    /// Drops the recorded computation, keeping values.
    pub fn to_values(&self) -> ExtendedBox<f64> {
        ExtendedBox {
            center: self.center.iter().map(|c| c.value()).collect(),
            offset: self.offset.iter().map(|o| o.value()).collect(),
            mask: self.mask.clone(),
            universal: self.universal,
        }
    }
}

impl ExtendedBox<f64> {
    /// Box with corners `lo` and `hi`.
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Result<Self, GeometryError> {
        check_dims(lo.len(), hi.len())?;
        let center = lo.iter().zip(hi).map(|(l, h)| (l + h) / 2.0).collect();
        let offset = lo.iter().zip(hi).map(|(l, h)| (h - l) / 2.0).collect();
        Self::new(center, offset)
    }

    /// Point membership. A point never inhabits an `∅` component.
    pub fn contains_point(&self, x: &[f64]) -> Result<bool, GeometryError> {
        check_dims(self.dim(), x.len())?;
        if self.universal {
            return Ok(true);
        }
        Ok((0..self.dim()).all(|j| {
            self.mask[j] && self.lower(j) <= x[j] && x[j] <= self.upper(j)
        }))
    }

    /// Coordinate-wise containment of `self` in `other`, allowing `tol` slack
    /// on each bound. `∅` components are contained in everything; a present
    /// component is never contained in `∅`.
    pub fn is_subset_of(&self, other: &ExtendedBox<f64>, tol: f64) -> Result<bool, GeometryError> {
        check_dims(self.dim(), other.dim())?;
        if other.universal {
            return Ok(true);
        }
        if self.universal {
            return Ok(false);
        }
        Ok((0..self.dim()).all(|j| {
            if !self.mask[j] {
                true
            } else if !other.mask[j] {
                false
            } else {
                self.lower(j) >= other.lower(j) - tol && self.upper(j) <= other.upper(j) + tol
            }
        }))
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<(), GeometryError> {
    if left == right {
        Ok(())
    } else {
        Err(GeometryError::DimensionMismatch { left, right })
    }
}

/// Component-wise intersection.
///
/// Coordinates whose intervals do not meet become `∅` rather than an
/// inverted interval. The inert center of an `∅` coordinate is the midpoint
/// between the two intervals and its offset is 0. The universal box is the
/// identity.
pub fn intersect<S: Scalar>(
    a: &ExtendedBox<S>,
    b: &ExtendedBox<S>,
) -> Result<ExtendedBox<S>, GeometryError> {
    check_dims(a.dim(), b.dim())?;
    if a.universal {
        return Ok(b.clone());
    }
    if b.universal {
        return Ok(a.clone());
    }
    let n = a.dim();
    let mut center = Vec::with_capacity(n);
    let mut offset = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    for j in 0..n {
        let lo = a.lower(j).max(b.lower(j));
        let hi = a.upper(j).min(b.upper(j));
        let present = a.mask[j] && b.mask[j] && hi.ge(lo);
        center.push((lo + hi).scale(0.5));
        offset.push(if present { (hi - lo).scale(0.5) } else { S::zero() });
        mask.push(present);
    }
    Ok(ExtendedBox { center, offset, mask, universal: false })
}

fn require_plain<S: Scalar>(b: &ExtendedBox<S>) -> Result<(), GeometryError> {
    if b.universal {
        Err(GeometryError::UniversalOperand)
    } else if b.has_empty_component() {
        Err(GeometryError::MaskedOperand)
    } else {
        Ok(())
    }
}

/// `{x | ∃y ∈ filler: x − y ∈ role}`: center and offset add.
pub fn exists_box<S: Scalar>(
    role: &ExtendedBox<S>,
    filler: &ExtendedBox<S>,
) -> Result<ExtendedBox<S>, GeometryError> {
    check_dims(role.dim(), filler.dim())?;
    require_plain(role)?;
    require_plain(filler)?;
    let center = role.center.iter().zip(&filler.center).map(|(&a, &b)| a + b).collect();
    let offset = role.offset.iter().zip(&filler.offset).map(|(&a, &b)| a + b).collect();
    Ok(ExtendedBox::plain_unchecked(center, offset))
}

/// `{x | ∀y ∈ filler: x − y ∈ role}`: centers add, offset is
/// `max(0, o(role) − o(filler))`.
pub fn exists_all_box<S: Scalar>(
    role: &ExtendedBox<S>,
    filler: &ExtendedBox<S>,
) -> Result<ExtendedBox<S>, GeometryError> {
    check_dims(role.dim(), filler.dim())?;
    require_plain(role)?;
    require_plain(filler)?;
    let center = role.center.iter().zip(&filler.center).map(|(&a, &b)| a + b).collect();
    let offset = role
        .offset
        .iter()
        .zip(&filler.offset)
        .map(|(&a, &b)| S::zero().max(a - b))
        .collect();
    Ok(ExtendedBox::plain_unchecked(center, offset))
}

/// Translation box of `r ∘ t`.
pub fn compose_roles<S: Scalar>(
    r: &ExtendedBox<S>,
    t: &ExtendedBox<S>,
) -> Result<ExtendedBox<S>, GeometryError> {
    check_dims(r.dim(), t.dim())?;
    require_plain(r)?;
    require_plain(t)?;
    let center = r.center.iter().zip(&t.center).map(|(&a, &b)| a + b).collect();
    let offset = r.offset.iter().zip(&t.offset).map(|(&a, &b)| a + b).collect();
    Ok(ExtendedBox::plain_unchecked(center, offset))
}
