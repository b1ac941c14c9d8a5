//! Exact equivariance identities.
//!
//! Projection onto an isometry's image of a column set equals the
//! isometry applied to the projection, and Gram-Schmidt commutes with
//! isometries applied columnwise in order. Both identities hold in
//! exact arithmetic whenever the isometry fixes the projected vector;
//! these checks return the observed floating-point residual so callers
//! can compare it against a tolerance.

use crate::error::{Error, Result};
use crate::isometry::{AxisRotation, Isometry, LineReflection};
use crate::linalg::{gram_schmidt, ColumnSet, RealVector, DEFAULT_RANK_TOL};
use crate::projection::project_onto_span;

/// Residual of projecting `x` onto the reflected columns versus
/// reflecting the projection of `x`, relative to `||x||`.
pub fn check_reflection_equivariance(x: &RealVector, columns: &ColumnSet) -> Result<f64> {
    let reflection = LineReflection::about(x)?;
    let reflected = reflection.apply_columns(columns)?;
    let lhs = project_onto_span(x, &reflected)?;
    let rhs = reflection.reflect(&project_onto_span(x, columns)?)?;
    Ok(lhs.sub(&rhs)?.norm() / x.norm())
}

/// Residual of projecting `x` onto the rotated columns versus rotating
/// the projection of `x`, relative to `||x||`.
///
/// The rotation must be about `x`: its axis may deviate from
/// `x / ||x||` by at most `1e-10`.
pub fn check_rotation_equivariance(
    x: &RealVector,
    columns: &ColumnSet,
    rotation: &AxisRotation,
) -> Result<f64> {
    let xhat = x.normalized()?;
    if rotation.axis().sub(&xhat)?.norm() > 1e-10 {
        return Err(Error::AxisMismatch);
    }
    let rotated = rotation.apply_columns(columns)?;
    let lhs = project_onto_span(x, &rotated)?;
    let rhs = rotation.rotate(&project_onto_span(x, columns)?)?;
    Ok(lhs.sub(&rhs)?.norm() / x.norm())
}

/// Largest columnwise residual between orthonormalizing the transformed
/// columns and transforming the orthonormalized columns.
pub fn check_gs_equivariance<I: Isometry + ?Sized>(
    columns: &ColumnSet,
    isometry: &I,
) -> Result<f64> {
    let base = gram_schmidt(columns, DEFAULT_RANK_TOL)?;
    let transformed = gram_schmidt(&isometry.apply_columns(columns)?, DEFAULT_RANK_TOL)?;
    let mut worst = 0.0f64;
    for (u, v) in base.vectors().iter().zip(transformed.vectors()) {
        worst = worst.max(v.sub(&isometry.apply(u)?)?.norm());
    }
    Ok(worst)
}
