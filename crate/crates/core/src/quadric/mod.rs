//! Quadric surfaces and the invariants that forbid skew loops on them.
//!
//! * [`lorentz`]: the Lorentzian form `Q`, the hyperboloids Σ and Σ̃, the
//!   Q-tantrix and the connection 1-form `ω = −sinh v du`.
//! * [`sphere`]: the spherical analogue, Fenchel bisection and the homotopy
//!   from a spherical loop to its tantrix.
//! * [`section`]: standard quadric models, plane sections and stretch maps.
//! * [`symmetric`]: arclength symmetry and the parallel pairs it forces on
//!   cylinder loops.

pub mod loops;
pub mod lorentz;
pub mod section;
pub mod sphere;
pub mod symmetric;

use thiserror::Error;

use crate::curve::{AffineStatus, SpaceCurve};
use crate::{Mat3, Vec3};

pub use loops::{rotation_loop, ProjectedLoop, Rotated, SigmaLoop};
pub use section::{planar_section, EllipseSection, QuadricKind, QuadricModel, Section};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadricError {
    #[error("sample {index} is off the surface (residual {residual:e})")]
    NotOnSurface { index: usize, residual: f64 },
    #[error("velocity is null or timelike at sample {index}")]
    NullVelocity { index: usize },
    #[error("curve passes within {clearance:e} of a pole; rotate it first")]
    PoleCrossing { clearance: f64 },
    #[error("tantrix is not embedded (arcs {i} and {j} meet)")]
    NotEmbedded { i: usize, j: usize },
    #[error("curve is not unit speed (deviation {deviation:e})")]
    NotUnitSpeed { deviation: f64 },
    #[error("stretch factor must be nonzero")]
    ZeroFactor,
    #[error("plane is tangent to the quadric")]
    TangentPlane,
    #[error("no sign change of z'(s) + z'(s + L/2) was found")]
    NoSignChange,
    #[error("base loop is not arclength symmetric (defect {defect:e})")]
    NotArclengthSymmetric { defect: f64 },
    #[error("curve is not immersed near t = {t}")]
    NotImmersed { t: f64 },
    #[error("invalid quadric model: {0}")]
    InvalidModel(String),
}

/// The dilatation `(x, y, z) ↦ (x, y, c z)`.
pub fn stretch_matrix(factor: f64) -> Result<Mat3, QuadricError> {
    if factor == 0.0 || !factor.is_finite() {
        return Err(QuadricError::ZeroFactor);
    }
    Ok(Mat3::from_diagonal(&Vec3::new(1.0, 1.0, factor)))
}

pub fn stretch(c: &SpaceCurve, factor: f64) -> Result<SpaceCurve, QuadricError> {
    let m = stretch_matrix(factor)?;
    let (out, status) = c.apply_affine(&m, &Vec3::zeros());
    debug_assert_eq!(status, AffineStatus::Invertible);
    Ok(out)
}

pub fn stretch_points(points: &[Vec3], factor: f64) -> Result<Vec<Vec3>, QuadricError> {
    let m = stretch_matrix(factor)?;
    Ok(points.iter().map(|p| m * p).collect())
}
