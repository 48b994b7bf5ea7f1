//! Lorentzian side: the form `Q(x, y) = x₁y₁ + x₂y₂ − x₃y₃`, the upper sheet
//! Σ of `Q = −1`, the one-sheeted hyperboloid Σ̃ of `Q = +1`, Q-tantrices and
//! the connection 1-form `ω = −sinh v du` on Σ̃.
//!
//! Every integral here is a residual computation with an error estimate, not a
//! certificate: a normalized velocity is no longer a trigonometric polynomial,
//! so tantrices live on the sampled backend.

use serde::{Deserialize, Serialize};

use super::loops::sample_jet;
use super::QuadricError;
use crate::curve::{SampledC1, SmoothLoop};
use crate::quadrature::{sampled_trapezoid, Quadrature};
use crate::Vec3;

/// Membership tolerance for `|Q(x, x) ∓ 1|`, relative to `1 + ‖x‖²`.
pub const SURFACE_TOL: f64 = 1e-8;
/// Starting and largest sample counts for the adaptive loop integrals.
pub const MIN_SAMPLES: usize = 256;
pub const MAX_SAMPLES: usize = 1 << 16;

pub fn q_form(a: &Vec3, b: &Vec3) -> f64 {
    a.x * b.x + a.y * b.y - a.z * b.z
}

/// `X(u, v) = (cos u sinh v, sin u sinh v, cosh v)` on Σ.
pub fn sigma_point(u: f64, v: f64) -> Vec3 {
    let (s, c) = u.sin_cos();
    Vec3::new(c * v.sinh(), s * v.sinh(), v.cosh())
}

/// `X̃(u, v) = (cos u cosh v, sin u cosh v, sinh v)` on Σ̃.
pub fn sigma_tilde_point(u: f64, v: f64) -> Vec3 {
    let (s, c) = u.sin_cos();
    Vec3::new(c * v.cosh(), s * v.cosh(), v.sinh())
}

/// The frame `e⁺ = X̃_u / cosh v`, `e⁻ = X̃_v` along Σ̃.
pub fn frame(u: f64, v: f64) -> (Vec3, Vec3) {
    let (s, c) = u.sin_cos();
    let plus = Vec3::new(-s, c, 0.0);
    let minus = Vec3::new(c * v.sinh(), s * v.sinh(), v.cosh());
    (plus, minus)
}

fn surface_residual(p: &Vec3, level: f64) -> f64 {
    (q_form(p, p) - level).abs() / (1.0 + p.norm_squared())
}

fn check_surface(points: &[Vec3], level: f64) -> Result<(), QuadricError> {
    for (index, p) in points.iter().enumerate() {
        let residual = surface_residual(p, level);
        if residual > SURFACE_TOL || (level < 0.0 && p.z <= 0.0) {
            return Err(QuadricError::NotOnSurface { index, residual });
        }
    }
    Ok(())
}

/// Q-tantrix `σ'/√Q(σ', σ')` of a loop on Σ, sampled at `m` uniform
/// parameters. Velocities are exact when the loop supplies accelerations.
pub fn q_tantrix(sigma: &dyn SmoothLoop, m: usize) -> Result<SampledC1, QuadricError> {
    let (pos, vel, acc) = sample_jet(sigma, m);
    check_surface(&pos, -1.0)?;
    let mut tau = Vec::with_capacity(m);
    let mut dtau = Vec::with_capacity(m);
    for (index, (d1, d2)) in vel.iter().zip(&acc).enumerate() {
        let q = q_form(d1, d1);
        if !(q > f64::EPSILON * d1.norm_squared()) {
            return Err(QuadricError::NullVelocity { index });
        }
        let n = q.sqrt();
        tau.push(d1 / n);
        dtau.push(d2 / n - d1 * (q_form(d1, d2) / (q * n)));
    }
    SampledC1::new(sigma.period(), tau, dtau).map_err(|_| QuadricError::NullVelocity { index: 0 })
}

/// Pullback of `−z du` with `du = (x dy − y dx)/(x² + y²)`.
pub(crate) fn angular_integrand(p: &Vec3, v: &Vec3) -> f64 {
    -p.z * (p.x * v.y - p.y * v.x) / (p.x * p.x + p.y * p.y)
}

pub(crate) fn pole_clearance(points: &[Vec3]) -> f64 {
    points
        .iter()
        .map(|p| p.x * p.x + p.y * p.y)
        .fold(f64::INFINITY, f64::min)
}

/// `∫_α ω` over a sampled loop on Σ̃ by the periodic trapezoid rule, which is
/// spectrally accurate on smooth closed curves.
pub fn connection_integral(alpha: &SampledC1) -> Result<Quadrature, QuadricError> {
    check_surface(alpha.positions(), 1.0)?;
    let clearance = pole_clearance(alpha.positions());
    // x² + y² = cosh² v ≥ 1 on Σ̃, so this only fires off the surface
    if clearance < 0.5 {
        return Err(QuadricError::PoleCrossing { clearance });
    }
    let values: Vec<f64> = alpha
        .positions()
        .iter()
        .zip(alpha.velocities())
        .map(|(p, v)| angular_integrand(p, v))
        .collect();
    Ok(sampled_trapezoid(&values, alpha.period()))
}

/// `∫_α ω` for a loop with exact evaluation, doubling the sample count until
/// the error estimate drops below `tol`.
pub fn connection_integral_loop(alpha: &dyn SmoothLoop, tol: f64) -> Result<Quadrature, QuadricError> {
    converge(tol, |m| connection_integral(&SampledC1::sample(alpha, m)))
}

pub(crate) fn converge(
    tol: f64,
    mut step: impl FnMut(usize) -> Result<Quadrature, QuadricError>,
) -> Result<Quadrature, QuadricError> {
    let mut m = MIN_SAMPLES;
    loop {
        let q = step(m)?;
        if q.error_estimate <= tol || m >= MAX_SAMPLES {
            return Ok(q);
        }
        m *= 2;
    }
}

/// Result of the no-period check for a loop on Σ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoPeriodReport {
    /// `|∫ω|` over the Q-tantrix; zero for every loop on Σ.
    pub residual: f64,
    pub error_estimate: f64,
    pub samples: usize,
    /// `∫ cosh v du dv` over the annulus between the tantrix and its
    /// antipodal image, when that annulus is well defined.
    pub annulus_area: Option<f64>,
    /// Why the annulus is not defined, otherwise.
    pub annulus_note: Option<String>,
}

impl NoPeriodReport {
    /// Residual near zero while the annulus area is not: the pair that
    /// rules out an embedded, antipodally disjoint Q-tantrix.
    pub fn contradiction(&self, tol: f64) -> bool {
        self.residual <= tol && self.annulus_area.is_some_and(|a| a > tol)
    }
}

/// `|∫ω|` over the Q-tantrix of `sigma`, refined until the quadrature error
/// estimate is below `tol`, together with the annulus-area side of the
/// comparison.
pub fn noperiod_residual(sigma: &dyn SmoothLoop, tol: f64) -> Result<NoPeriodReport, QuadricError> {
    let mut last = None;
    let q = converge(tol, |m| {
        let tau = q_tantrix(sigma, m)?;
        let q = connection_integral(&tau)?;
        last = Some(tau);
        Ok(q)
    })?;
    let tau = last.expect("at least one pass");
    let (annulus_area, annulus_note) = match annulus_area(&tau) {
        Ok(a) => (Some(a), None),
        Err(note) => (None, Some(note)),
    };
    Ok(NoPeriodReport {
        residual: q.value.abs(),
        error_estimate: q.error_estimate,
        samples: q.points,
        annulus_area,
        annulus_note,
    })
}

fn angle_rate(p: &Vec3, v: &Vec3) -> f64 {
    (p.x * v.y - p.y * v.x) / (p.x * p.x + p.y * p.y)
}

/// Area `∫ cosh v du dv` of the annulus on Σ̃ bounded by a loop `α` and its
/// antipodal image `−α`.
///
/// The annulus is only defined here when `α` is a graph `v = f(u)` over the
/// full circle of angles, traversed once, and `α` misses `−α`. In the height
/// coordinate `z = sinh v` the area is then `∫ |z(u) + z(u + π)| du`.
pub fn annulus_area(alpha: &SampledC1) -> Result<f64, String> {
    let pos = alpha.positions();
    let vel = alpha.velocities();
    let rates: Vec<f64> = pos.iter().zip(vel).map(|(p, v)| angle_rate(p, v)).collect();
    let positive = rates.iter().all(|&r| r > 0.0);
    if !positive && !rates.iter().all(|&r| r < 0.0) {
        return Err("the loop is not a monotone graph over the angle u".into());
    }
    let turns = sampled_trapezoid(&rates, alpha.period()).value / std::f64::consts::TAU;
    if (turns.abs() - 1.0).abs() > 1e-6 {
        return Err(format!("the loop winds {turns:.3} times around the axis"));
    }
    let angle = |t: f64| {
        let p = alpha.point(t);
        p.y.atan2(p.x)
    };
    let h = alpha.spacing();
    let n = pos.len();
    let mut sums = Vec::with_capacity(n);
    for (j, p) in pos.iter().enumerate() {
        let target = p.y.atan2(p.x) + std::f64::consts::PI;
        let gap = |t: f64| wrap(angle(t) - target);
        // the angle is monotone, so the antipodal angle sits in exactly one cell
        let k = (0..n)
            .find(|&k| {
                let (a, b) = (gap(h * k as f64), gap(h * (k + 1) as f64));
                a == 0.0 || (a.signum() != b.signum() && (a - b).abs() < std::f64::consts::PI)
            })
            .ok_or_else(|| "antipodal angle not bracketed".to_string())?;
        let (mut lo, mut hi) = (h * k as f64, h * (k + 1) as f64);
        let flo = gap(lo);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if gap(mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let z_anti = alpha.point(0.5 * (lo + hi)).z;
        sums.push((j, p.z + z_anti));
    }
    let first = sums[0].1;
    if sums.iter().any(|&(_, g)| g == 0.0 || g.signum() != first.signum()) {
        return Err("the loop meets its antipodal image".into());
    }
    let integrand: Vec<f64> = sums.iter().map(|&(j, g)| g.abs() * rates[j].abs()).collect();
    Ok(sampled_trapezoid(&integrand, alpha.period()).value)
}

fn wrap(a: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = a.rem_euclid(t);
    if r > std::f64::consts::PI {
        r - t
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::FnLoop;
    use crate::quadric::SigmaLoop;
    use crate::TrigPoly;
    use std::f64::consts::TAU;

    #[test]
    fn q_form_identities() {
        assert_eq!(q_form(&Vec3::x(), &Vec3::x()), 1.0);
        for k in 0..50 {
            let (u, v) = (0.37 * k as f64, -2.0 + 0.08 * k as f64);
            let x = sigma_point(u, v);
            assert!((q_form(&x, &x) + 1.0).abs() < 1e-12 * x.norm_squared());
            let y = sigma_tilde_point(u, v);
            assert!((q_form(&y, &y) - 1.0).abs() < 1e-12 * y.norm_squared());
            let (p, m) = frame(u, v);
            assert!((q_form(&p, &p) - 1.0).abs() < 1e-12);
            assert!((q_form(&m, &m) + 1.0).abs() < 1e-12 * m.norm_squared());
            assert!(q_form(&p, &m).abs() < 1e-12);
        }
    }

    #[test]
    fn velocity_is_q_orthogonal() {
        let l = SigmaLoop::new(TrigPoly::sin_k(1, 0.4), TrigPoly::new(0.6, vec![0.2], vec![0.0]), 1);
        for j in 0..40 {
            let t = TAU * j as f64 / 40.0;
            let (p, v) = (l.point(t), l.velocity(t));
            assert!(q_form(&p, &v).abs() < 1e-12);
        }
    }

    #[test]
    fn tantrix_of_horizontal_circle() {
        let tau = q_tantrix(&SigmaLoop::circle(0.7), 64).unwrap();
        for (j, p) in tau.positions().iter().enumerate() {
            let t = tau.spacing() * j as f64;
            assert!((p - Vec3::new(-t.sin(), t.cos(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn tantrix_normalized_and_radial() {
        let l = SigmaLoop::new(TrigPoly::new(0.0, vec![0.1, 0.05], vec![0.3]), TrigPoly::new(0.9, vec![0.3], vec![-0.2, 0.1]), 1);
        let tau = q_tantrix(&l, 512).unwrap();
        for (j, p) in tau.positions().iter().enumerate() {
            assert!((q_form(p, p) - 1.0).abs() < 1e-10);
            let v = l.velocity(tau.spacing() * j as f64);
            assert!(p.cross(&v).norm() < 1e-10 * v.norm());
        }
    }

    #[test]
    fn off_surface_is_rejected() {
        let c = crate::AnalyticCurve::new(TrigPoly::cos_k(1, 1.0), TrigPoly::sin_k(1, 1.0), TrigPoly::constant(1.0));
        assert!(matches!(q_tantrix(&c, 64), Err(QuadricError::NotOnSurface { .. })));
    }

    fn tilde_circle(v0: f64) -> SampledC1 {
        let l = FnLoop {
            period: TAU,
            point: move |t: f64| sigma_tilde_point(t, v0),
            velocity: move |t: f64| Vec3::new(-t.sin() * v0.cosh(), t.cos() * v0.cosh(), 0.0),
        };
        SampledC1::sample(&l, 128)
    }

    #[test]
    fn connection_on_circles() {
        assert!(connection_integral(&tilde_circle(0.0)).unwrap().value.abs() < 1e-15);
        let q = connection_integral(&tilde_circle(1.0)).unwrap();
        assert!((q.value + TAU * 1f64.sinh()).abs() < 1e-12);
        assert!((q.value.abs() - 7.384).abs() < 1e-3);
    }

    #[test]
    fn noperiod_examples() {
        let r = noperiod_residual(&SigmaLoop::circle(1.0), 1e-10).unwrap();
        assert!(r.residual < 1e-8);
        let wobbly = SigmaLoop::new(TrigPoly::zero(), TrigPoly::new(0.3, vec![], vec![0.1]), 1);
        let r = noperiod_residual(&wobbly, 1e-9).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn annulus_of_a_tilde_circle() {
        // the contradiction pair for a loop that is not a Q-tantrix
        let a = annulus_area(&tilde_circle(1.0)).unwrap();
        assert!((a - 2.0 * TAU * 1f64.sinh()).abs() < 1e-10);
        assert!(annulus_area(&tilde_circle(0.0)).is_err());
    }
}
