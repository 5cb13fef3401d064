use super::{check_dims, ExtendedBox, GeometryError, Norm, Scalar};

/// Per-coordinate signed gap `|c₁ − c₂| − o₁ − o₂`; negative where the
/// intervals overlap. Masks are not applied.
pub fn box_distance<S: Scalar>(
    a: &ExtendedBox<S>,
    b: &ExtendedBox<S>,
) -> Result<Vec<S>, GeometryError> {
    check_dims(a.dim(), b.dim())?;
    if a.is_universal() || b.is_universal() {
        return Err(GeometryError::UniversalOperand);
    }
    Ok((0..a.dim())
        .map(|j| (a.center()[j] - b.center()[j]).abs() - a.offset()[j] - b.offset()[j])
        .collect())
}

/// Masked inclusion loss of `a ⊆ b`:
///
/// `‖o(a)·m·(1 − m′)‖ + ‖max(0, (d(a, b) + 2·o(a))·m·m′ − γ)‖`
///
/// The first term shrinks `a` to a point wherever `b` is empty, the second is
/// the usual box inclusion penalty on coordinates both boxes share. Zero
/// against the universal box; including the universal box in a bounded one
/// is an error.
pub fn inclusion_loss<S: Scalar>(
    a: &ExtendedBox<S>,
    b: &ExtendedBox<S>,
    gamma: f64,
    norm: Norm,
) -> Result<S, GeometryError> {
    check_dims(a.dim(), b.dim())?;
    if b.is_universal() {
        return Ok(S::zero());
    }
    if a.is_universal() {
        return Err(GeometryError::UniversalNotIncluded);
    }
    let n = a.dim();
    let (ma, mb) = (a.mask(), b.mask());
    let shrink = norm.apply((0..n).map(|j| {
        if ma[j] && !mb[j] {
            a.offset()[j]
        } else {
            S::zero()
        }
    }));
    let d = box_distance(a, b)?;
    let gamma = S::constant(gamma);
    let outside = norm.apply((0..n).map(|j| {
        let shared = if ma[j] && mb[j] {
            d[j] + a.offset()[j].scale(2.0)
        } else {
            S::zero()
        };
        S::zero().max(shared - gamma)
    }));
    Ok(shrink + outside)
}

/// How the negative-sample loss folds coordinates together.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NonInclusionMode {
    /// `(1 − ‖max(0, −d − γ)‖)²`, the formula as written.
    #[default]
    Norm,
    /// Mean over coordinates of `(1 − max(0, −d_j − γ))²`.
    PerCoordinate,
}

/// Loss discouraging `a ⊆ b` for negative samples. Both boxes must be plain.
pub fn non_inclusion_loss<S: Scalar>(
    a: &ExtendedBox<S>,
    b: &ExtendedBox<S>,
    gamma: f64,
    norm: Norm,
    mode: NonInclusionMode,
) -> Result<S, GeometryError> {
    check_dims(a.dim(), b.dim())?;
    if a.has_empty_component() || b.has_empty_component() {
        return Err(GeometryError::MaskedOperand);
    }
    let d = box_distance(a, b)?;
    let gamma = S::constant(gamma);
    let one = S::constant(1.0);
    let clipped = d.iter().map(|&dj| S::zero().max(-dj - gamma));
    Ok(match mode {
        NonInclusionMode::Norm => {
            let t = one - norm.apply(clipped);
            t * t
        }
        NonInclusionMode::PerCoordinate => {
            let n = a.dim().max(1) as f64;
            clipped
                .fold(S::zero(), |acc, c| {
                    let t = one - c;
                    acc + t * t
                })
                .scale(1.0 / n)
        }
    })
}
