//! Closed space curves with an analytic (trigonometric polynomial) backend
//! and a C¹ sampled backend interpolated by cubic Hermite segments.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::bounds::{self, BoundBox};
use crate::trigpoly::{Harmonics, TrigPoly};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("velocity vanishes at t = {t}")]
    ZeroVelocity { t: f64 },
    #[error("operation unsupported on the sampled C1 backend: {0}")]
    Unsupported(&'static str),
    #[error("invalid sampled curve: {0}")]
    InvalidSamples(String),
}

/// Whether an affine map was invertible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum AffineStatus {
    Invertible,
    /// The map is singular; skewness is not guaranteed to be preserved.
    Singular,
}

/// Anything that can be evaluated as a smooth closed curve.
pub trait SmoothLoop: Sync {
    fn period(&self) -> f64;
    fn point(&self, t: f64) -> Vec3;
    fn velocity(&self, t: f64) -> Vec3;
    /// Second derivative, when the representation carries it.
    fn acceleration(&self, _t: f64) -> Option<Vec3> {
        None
    }
}

/// Closed curve given by an explicit position/velocity formula.
pub struct FnLoop<P, V> {
    pub period: f64,
    pub point: P,
    pub velocity: V,
}

impl<P, V> SmoothLoop for FnLoop<P, V>
where
    P: Fn(f64) -> Vec3 + Sync,
    V: Fn(f64) -> Vec3 + Sync,
{
    fn period(&self) -> f64 {
        self.period
    }
    fn point(&self, t: f64) -> Vec3 {
        (self.point)(t)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        (self.velocity)(t)
    }
}

/// Space curve whose three coordinates are trigonometric polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCurve {
    pub x: TrigPoly,
    pub y: TrigPoly,
    pub z: TrigPoly,
}

impl AnalyticCurve {
    pub fn new(x: TrigPoly, y: TrigPoly, z: TrigPoly) -> Self {
        Self { x, y, z }
    }

    pub fn components(&self) -> [&TrigPoly; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn degree(&self) -> usize {
        self.x.degree().max(self.y.degree()).max(self.z.degree())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.x.differentiate(),
            self.y.differentiate(),
            self.z.differentiate(),
        )
    }

    pub fn map(&self, f: impl Fn(&TrigPoly) -> TrigPoly) -> Self {
        Self::new(f(&self.x), f(&self.y), f(&self.z))
    }

    /// Position and the first three derivatives at `t`.
    pub fn jet(&self, t: f64) -> [Vec3; 4] {
        let h = Harmonics::at(t, self.degree());
        let [x, y, z] = self.components().map(|c| c.eval_derivs_with(&h));
        [0, 1, 2, 3].map(|k| Vec3::new(x[k], y[k], z[k]))
    }

    /// `⟨a, b⟩` of two analytic vector fields, as an exact polynomial.
    pub fn dot(&self, other: &AnalyticCurve) -> TrigPoly {
        TrigPoly::linear_combination(&[
            (1.0, &(&self.x * &other.x)),
            (1.0, &(&self.y * &other.y)),
            (1.0, &(&self.z * &other.z)),
        ])
    }

    /// `a × b` of two analytic vector fields.
    pub fn cross(&self, other: &AnalyticCurve) -> AnalyticCurve {
        AnalyticCurve::new(
            &(&self.y * &other.z) - &(&self.z * &other.y),
            &(&self.z * &other.x) - &(&self.x * &other.z),
            &(&self.x * &other.y) - &(&self.y * &other.x),
        )
    }

    /// `‖a‖²` as an exact polynomial.
    pub fn norm_squared(&self) -> TrigPoly {
        self.dot(self)
    }

    /// Certified enclosure of `sup ‖a(t)‖`.
    pub fn sup_norm(&self, rel_tol: f64) -> BoundBox {
        let n2 = self.norm_squared();
        let scale = n2.abs_bound().max(f64::MIN_POSITIVE);
        match bounds::sup_bound(&n2, rel_tol * scale) {
            Ok(b) => b.sqrt(),
            Err(e) => e.enclosure().sqrt(),
        }
    }

    /// Certified enclosure of `inf ‖a(t)‖`, refined until positivity is decided.
    pub fn inf_norm(&self, rel_tol: f64) -> BoundBox {
        let n2 = self.norm_squared();
        let scale = n2.abs_bound().max(f64::MIN_POSITIVE);
        bounds::inf_sign(&n2, rel_tol * scale).sqrt()
    }

    pub fn affine(&self, a: &Mat3, b: &Vec3) -> AnalyticCurve {
        let c = self.components();
        let row = |i: usize| {
            let mut p = TrigPoly::linear_combination(&[
                (a[(i, 0)], c[0]),
                (a[(i, 1)], c[1]),
                (a[(i, 2)], c[2]),
            ]);
            p.set(0, p.a0() + b[i], 0.0);
            p.trimmed()
        };
        AnalyticCurve::new(row(0), row(1), row(2))
    }
}

impl SmoothLoop for AnalyticCurve {
    fn period(&self) -> f64 {
        TAU
    }
    fn point(&self, t: f64) -> Vec3 {
        let h = Harmonics::at(t, self.degree());
        Vec3::new(
            self.x.eval_with(&h),
            self.y.eval_with(&h),
            self.z.eval_with(&h),
        )
    }
    fn velocity(&self, t: f64) -> Vec3 {
        self.jet(t)[1]
    }
    fn acceleration(&self, t: f64) -> Option<Vec3> {
        Some(self.jet(t)[2])
    }
}

/// Positions and velocities at `M` uniform parameters `t_j = j L / M`,
/// interpolated by cubic Hermite segments. Wraps around at `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledC1 {
    period: f64,
    positions: Vec<Vec3>,
    velocities: Vec<Vec3>,
}

impl SampledC1 {
    /// Stored end-matching tolerance (relative to the curve's extent).
    pub const CLOSURE_TOL: f64 = 1e-9;

    /// Validates and builds a sampled curve. A trailing sample that repeats
    /// the first one (closure convention) is dropped.
    pub fn new(period: f64, mut positions: Vec<Vec3>, mut velocities: Vec<Vec3>) -> Result<Self, CurveError> {
        if !(period.is_finite() && period > 0.0) {
            return Err(CurveError::InvalidSamples(format!("period {period} must be positive")));
        }
        if positions.len() != velocities.len() {
            return Err(CurveError::InvalidSamples(format!(
                "{} positions but {} velocities",
                positions.len(),
                velocities.len()
            )));
        }
        if positions
            .iter()
            .chain(&velocities)
            .any(|p| !p.iter().all(|c| c.is_finite()))
        {
            return Err(CurveError::InvalidSamples("non-finite sample".into()));
        }
        if positions.len() >= 2 {
            let extent = positions.iter().map(|p| p.norm()).fold(1.0, f64::max);
            let vscale = velocities.iter().map(|p| p.norm()).fold(1.0, f64::max);
            let first = positions[0];
            let last = *positions.last().unwrap();
            if (first - last).norm() <= Self::CLOSURE_TOL * extent
                && (velocities[0] - *velocities.last().unwrap()).norm() <= Self::CLOSURE_TOL * vscale
            {
                positions.pop();
                velocities.pop();
            }
        }
        if positions.len() < 4 {
            return Err(CurveError::InvalidSamples(format!(
                "need at least 4 samples, got {}",
                positions.len()
            )));
        }
        Ok(Self {
            period,
            positions,
            velocities,
        })
    }

    /// Samples a smooth loop at `m` uniform parameters.
    pub fn sample(curve: &dyn SmoothLoop, m: usize) -> Self {
        let period = curve.period();
        let (positions, velocities) = (0..m)
            .map(|j| {
                let t = period * j as f64 / m as f64;
                (curve.point(t), curve.velocity(t))
            })
            .unzip();
        Self {
            period,
            positions,
            velocities,
        }
    }

    /// Resamples a smooth loop by arclength: `m` samples equally spaced in
    /// arclength, unit velocities, period equal to the length.
    pub fn unit_speed(curve: &dyn SmoothLoop, m: usize) -> Result<Self, CurveError> {
        let table = crate::arclength::ArclengthTable::new(curve, m.max(256))?;
        let length = table.length();
        let mut positions = Vec::with_capacity(m);
        let mut velocities = Vec::with_capacity(m);
        for j in 0..m {
            let s = length * j as f64 / m as f64;
            let t = table.parameter_at(s);
            positions.push(curve.point(t));
            let v = curve.velocity(t);
            velocities.push(v / v.norm());
        }
        Ok(Self {
            period: length,
            positions,
            velocities,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.len() as f64
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn velocities(&self) -> &[Vec3] {
        &self.velocities
    }

    fn locate(&self, t: f64) -> (usize, usize, f64, f64) {
        let m = self.len();
        let h = self.spacing();
        let r = t.rem_euclid(self.period);
        let mut j = (r / h).floor() as usize;
        if j >= m {
            j = m - 1;
        }
        let u = ((r - j as f64 * h) / h).clamp(0.0, 1.0);
        (j, (j + 1) % m, u, h)
    }

    pub fn point(&self, t: f64) -> Vec3 {
        let (j0, j1, u, h) = self.locate(t);
        let (u2, u3) = (u * u, u * u * u);
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * self.positions[j0]
            + (h10 * h) * self.velocities[j0]
            + h01 * self.positions[j1]
            + (h11 * h) * self.velocities[j1]
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        let (j0, j1, u, h) = self.locate(t);
        let u2 = u * u;
        let d00 = 6.0 * u2 - 6.0 * u;
        let d10 = 3.0 * u2 - 4.0 * u + 1.0;
        let d01 = -6.0 * u2 + 6.0 * u;
        let d11 = 3.0 * u2 - 2.0 * u;
        (d00 * self.positions[j0] + d01 * self.positions[j1]) / h
            + d10 * self.velocities[j0]
            + d11 * self.velocities[j1]
    }

    /// Second derivative of the Hermite interpolant (piecewise continuous).
    pub(crate) fn interpolant_acceleration(&self, t: f64) -> Vec3 {
        let (j0, j1, u, h) = self.locate(t);
        let e00 = 12.0 * u - 6.0;
        let e10 = 6.0 * u - 4.0;
        let e01 = -12.0 * u + 6.0;
        let e11 = 6.0 * u - 2.0;
        (e00 * self.positions[j0] + e01 * self.positions[j1]) / (h * h)
            + (e10 * self.velocities[j0] + e11 * self.velocities[j1]) / h
    }

    pub fn affine(&self, a: &Mat3, b: &Vec3) -> SampledC1 {
        SampledC1 {
            period: self.period,
            positions: self.positions.iter().map(|p| a * p + b).collect(),
            velocities: self.velocities.iter().map(|v| a * v).collect(),
        }
    }

    /// Largest mismatch between the first and wrapped-around Hermite segment ends.
    pub fn closure_defect(&self) -> f64 {
        (self.point(self.period) - self.positions[0]).norm()
    }
}

impl SmoothLoop for SampledC1 {
    fn period(&self) -> f64 {
        self.period
    }
    fn point(&self, t: f64) -> Vec3 {
        SampledC1::point(self, t)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        SampledC1::velocity(self, t)
    }
}

/// A closed curve in 3-space on one of two backends.
#[derive(Debug, Clone, PartialEq)]
pub enum SpaceCurve {
    Analytic(AnalyticCurve),
    SampledC1(SampledC1),
}

impl From<AnalyticCurve> for SpaceCurve {
    fn from(c: AnalyticCurve) -> Self {
        SpaceCurve::Analytic(c)
    }
}

impl From<SampledC1> for SpaceCurve {
    fn from(c: SampledC1) -> Self {
        SpaceCurve::SampledC1(c)
    }
}

impl SpaceCurve {
    pub fn analytic(x: TrigPoly, y: TrigPoly, z: TrigPoly) -> Self {
        SpaceCurve::Analytic(AnalyticCurve::new(x, y, z))
    }

    /// The unit circle `(cos t, sin t, 0)`.
    pub fn unit_circle() -> Self {
        Self::analytic(TrigPoly::cos_k(1, 1.0), TrigPoly::sin_k(1, 1.0), TrigPoly::zero())
    }

    pub fn is_certifiable(&self) -> bool {
        matches!(self, SpaceCurve::Analytic(_))
    }

    pub fn as_analytic(&self) -> Option<&AnalyticCurve> {
        match self {
            SpaceCurve::Analytic(c) => Some(c),
            SpaceCurve::SampledC1(_) => None,
        }
    }

    pub fn as_sampled(&self) -> Option<&SampledC1> {
        match self {
            SpaceCurve::SampledC1(c) => Some(c),
            SpaceCurve::Analytic(_) => None,
        }
    }

    pub fn period(&self) -> f64 {
        match self {
            SpaceCurve::Analytic(_) => TAU,
            SpaceCurve::SampledC1(c) => c.period(),
        }
    }

    pub fn eval(&self, t: f64) -> Vec3 {
        match self {
            SpaceCurve::Analytic(c) => c.point(t),
            SpaceCurve::SampledC1(c) => c.point(t),
        }
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        match self {
            SpaceCurve::Analytic(c) => c.velocity(t),
            SpaceCurve::SampledC1(c) => c.velocity(t),
        }
    }

    pub fn acceleration(&self, t: f64) -> Result<Vec3, CurveError> {
        match self {
            SpaceCurve::Analytic(c) => Ok(c.jet(t)[2]),
            SpaceCurve::SampledC1(_) => Err(CurveError::Unsupported(
                "acceleration needs C2 data; only positions and velocities are stored",
            )),
        }
    }

    /// Unit tangent `γ'(t)/‖γ'(t)‖`.
    pub fn tantrix_at(&self, t: f64) -> Result<Vec3, CurveError> {
        let v = self.velocity(t);
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(CurveError::ZeroVelocity { t });
        }
        Ok(v / n)
    }

    /// Tantrix and its parameter derivative. On the sampled backend the
    /// derivative is that of the Hermite interpolant.
    pub(crate) fn tantrix_jet(&self, t: f64) -> Option<(Vec3, Vec3)> {
        let (v, a) = match self {
            SpaceCurve::Analytic(c) => {
                let j = c.jet(t);
                (j[1], j[2])
            }
            SpaceCurve::SampledC1(c) => (c.velocity(t), c.interpolant_acceleration(t)),
        };
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let tau = v / n;
        Some((tau, (a - a.dot(&tau) * tau) / n))
    }

    /// `t ↦ A c(t) + b`, on the same backend. Analytic coefficients map exactly.
    pub fn apply_affine(&self, a: &Mat3, b: &Vec3) -> (SpaceCurve, AffineStatus) {
        let scale = a.norm().max(f64::MIN_POSITIVE);
        let status = if a.determinant().abs() <= 1e-14 * scale.powi(3) {
            AffineStatus::Singular
        } else {
            AffineStatus::Invertible
        };
        let mapped = match self {
            SpaceCurve::Analytic(c) => SpaceCurve::Analytic(c.affine(a, b)),
            SpaceCurve::SampledC1(c) => SpaceCurve::SampledC1(c.affine(a, b)),
        };
        (mapped, status)
    }

    /// Parameter shift `t ↦ t + c`.
    pub fn shifted(&self, c: f64) -> SpaceCurve {
        match self {
            SpaceCurve::Analytic(a) => SpaceCurve::Analytic(a.map(|p| p.shifted(c))),
            SpaceCurve::SampledC1(s) => {
                let m = s.len();
                let shifted = FnLoop {
                    period: s.period(),
                    point: |t: f64| s.point(t + c),
                    velocity: |t: f64| s.velocity(t + c),
                };
                SpaceCurve::SampledC1(SampledC1::sample(&shifted, m))
            }
        }
    }

    /// Orientation reversal `t ↦ -t`.
    pub fn reversed(&self) -> SpaceCurve {
        match self {
            SpaceCurve::Analytic(a) => SpaceCurve::Analytic(a.map(|p| p.reversed())),
            SpaceCurve::SampledC1(s) => {
                let m = s.len();
                let mut positions = Vec::with_capacity(m);
                let mut velocities = Vec::with_capacity(m);
                for j in 0..m {
                    let k = (m - j) % m;
                    positions.push(s.positions()[k]);
                    velocities.push(-s.velocities()[k]);
                }
                SpaceCurve::SampledC1(SampledC1 {
                    period: s.period(),
                    positions,
                    velocities,
                })
            }
        }
    }

    /// Samples either backend to a `SampledC1` with `m` points.
    pub fn to_sampled(&self, m: usize) -> SampledC1 {
        match self {
            SpaceCurve::Analytic(a) => SampledC1::sample(a, m),
            SpaceCurve::SampledC1(s) if s.len() == m => s.clone(),
            SpaceCurve::SampledC1(s) => SampledC1::sample(s, m),
        }
    }

    pub fn as_loop(&self) -> &dyn SmoothLoop {
        match self {
            SpaceCurve::Analytic(a) => a,
            SpaceCurve::SampledC1(s) => s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn helix_loop() -> SpaceCurve {
        SpaceCurve::analytic(
            TrigPoly::new(0.0, vec![1.0, 0.1], vec![0.0, 0.2]),
            TrigPoly::new(0.0, vec![0.0, -0.3], vec![1.0, 0.0]),
            TrigPoly::new(0.4, vec![0.0, 0.0, 0.2], vec![0.5, 0.0, 0.0]),
        )
    }

    #[test]
    fn circle_tantrix() {
        let c = SpaceCurve::unit_circle();
        let t = c.tantrix_at(0.0).unwrap();
        assert!((t - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tantrix_is_unit() {
        let c = helix_loop();
        for j in 0..100 {
            let t = 0.0731 * j as f64 - 2.0;
            assert!((c.tantrix_at(t).unwrap().norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn sampled_acceleration_unsupported() {
        let s = SpaceCurve::SampledC1(SampledC1::sample(&*helix_loop().as_analytic().unwrap(), 64));
        assert!(matches!(s.acceleration(0.3), Err(CurveError::Unsupported(_))));
    }

    #[test]
    fn zero_velocity_error() {
        let c = SpaceCurve::analytic(TrigPoly::constant(1.0), TrigPoly::zero(), TrigPoly::zero());
        assert!(matches!(c.tantrix_at(0.5), Err(CurveError::ZeroVelocity { .. })));
    }

    #[test]
    fn hermite_reproduces_smooth_curve() {
        let c = helix_loop();
        let a = c.as_analytic().unwrap();
        let s = SampledC1::sample(a, 2048);
        for j in 0..37 {
            let t = 0.17 * j as f64;
            assert!((s.point(t) - a.point(t)).norm() < 1e-11);
            assert!((s.velocity(t) - a.velocity(t)).norm() < 1e-7);
        }
        assert!(s.closure_defect() < 1e-15);
    }

    #[test]
    fn closure_duplicate_dropped() {
        let a = helix_loop();
        let s = a.to_sampled(16);
        let mut p = s.positions().to_vec();
        let mut v = s.velocities().to_vec();
        p.push(p[0]);
        v.push(v[0]);
        let s2 = SampledC1::new(TAU, p, v).unwrap();
        assert_eq!(s2.len(), 16);
    }

    #[test]
    fn affine_identity_and_scaling() {
        let c = helix_loop();
        let (same, st) = c.apply_affine(&Mat3::identity(), &Vec3::zeros());
        assert_eq!(st, AffineStatus::Invertible);
        assert_eq!(same, c);
        let z = TrigPoly::sin_k(2, 0.3);
        let cyl = SpaceCurve::analytic(TrigPoly::cos_k(1, 1.0), TrigPoly::sin_k(1, 1.0), z.clone());
        let (scaled, _) = cyl.apply_affine(&Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 2.5)), &Vec3::zeros());
        let a = scaled.as_analytic().unwrap();
        assert_eq!(a.x, TrigPoly::cos_k(1, 1.0));
        assert_eq!(a.z, z.scale(2.5));
        let (_, st) = c.apply_affine(&Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 0.0)), &Vec3::zeros());
        assert_eq!(st, AffineStatus::Singular);
    }

    #[test]
    fn orthogonal_map_preserves_speed() {
        let c = helix_loop();
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -1.1, 2.0).into_inner();
        let (m, _) = c.apply_affine(&r, &Vec3::new(1.0, 2.0, 3.0));
        for j in 0..50 {
            let t = 0.13 * j as f64;
            assert!((m.velocity(t).norm() - c.velocity(t).norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_speed_resampling() {
        // ellipse with semi-axes 2, 1
        let e = AnalyticCurve::new(TrigPoly::cos_k(1, 2.0), TrigPoly::sin_k(1, 1.0), TrigPoly::zero());
        let u = SampledC1::unit_speed(&e, 512).unwrap();
        // Ramanujan-free check: length of ellipse (2,1) = 9.688448220547675...
        assert!((u.period() - 9.688_448_220_547_675).abs() < 1e-11);
        let h = u.spacing();
        for j in 0..512 {
            let a = u.positions()[j];
            let b = u.positions()[(j + 1) % 512];
            // chord slightly shorter than arc
            assert!((a - b).norm() <= h + 1e-12);
        }
        assert!((u.positions()[256] + u.positions()[0]).norm() < 1e-10);
        let _ = PI;
    }

    #[test]
    fn reversal_and_shift() {
        let c = helix_loop();
        let r = c.reversed();
        let s = c.shifted(0.4);
        for j in 0..20 {
            let t = 0.3 * j as f64;
            assert!((r.eval(t) - c.eval(-t)).norm() < 1e-14);
            assert!((s.eval(t) - c.eval(t + 0.4)).norm() < 1e-14);
        }
        let samp = SpaceCurve::SampledC1(c.to_sampled(128));
        let rs = samp.reversed();
        for j in 0..128 {
            let t = j as f64 * TAU / 128.0;
            assert!((rs.eval(t) - samp.eval(-t)).norm() < 1e-12);
        }
    }
}
