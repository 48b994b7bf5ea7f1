//! Spherical side: the connection form `−sin v du` on tantrices of sphere
//! loops, Fenchel's bisection property and the regular homotopy
//! `σ cos θ + τ sin θ` from a spherical loop to its tantrix.

use serde::{Deserialize, Serialize};

use super::loops::{sample_jet, Rotated};
use super::lorentz::{angular_integrand, converge, pole_clearance};
use super::QuadricError;
use crate::curve::{SampledC1, SmoothLoop};
use crate::quadrature::{periodic_derivative, sampled_trapezoid, Quadrature};
use crate::{Mat3, Vec3};

/// Loops whose tantrix comes closer than this to the poles (in `x² + y²`) are
/// rejected; the integrand grows like the inverse of it.
pub const POLE_TOL: f64 = 1e-6;
const SPHERE_TOL: f64 = 1e-8;
/// Largest polygon used for the embeddedness test.
const EMBED_POINTS: usize = 2048;

fn check_sphere(points: &[Vec3]) -> Result<(), QuadricError> {
    for (index, p) in points.iter().enumerate() {
        let residual = (p.norm_squared() - 1.0).abs();
        if residual > SPHERE_TOL {
            return Err(QuadricError::NotOnSurface { index, residual });
        }
    }
    Ok(())
}

/// Unit tangent `σ'/‖σ'‖` and its derivative at `m` uniform parameters.
/// The derivative is exact when the loop supplies accelerations.
pub fn tantrix_samples(sigma: &dyn SmoothLoop, m: usize) -> Result<SampledC1, QuadricError> {
    let (_, vel, acc) = sample_jet(sigma, m);
    let mut tau = Vec::with_capacity(m);
    let mut dtau = Vec::with_capacity(m);
    for (index, (d1, d2)) in vel.iter().zip(&acc).enumerate() {
        let n = d1.norm();
        if n == 0.0 {
            return Err(QuadricError::NullVelocity { index });
        }
        let t = d1 / n;
        dtau.push((d2 - t * t.dot(d2)) / n);
        tau.push(t);
    }
    SampledC1::new(sigma.period(), tau, dtau).map_err(|_| QuadricError::NullVelocity { index: 0 })
}

/// `∫ −sin v du` along a sampled loop on the unit sphere, `v` the latitude.
pub fn sphere_connection(alpha: &SampledC1) -> Result<Quadrature, QuadricError> {
    check_sphere(alpha.positions())?;
    let clearance = pole_clearance(alpha.positions());
    if clearance < POLE_TOL {
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

/// The connection integral over a tantrix and its distance to the nearest
/// multiple of 2π.
///
/// On the sphere the angle between `σ` and the latitude frame along the
/// tantrix is circle valued, so the integral vanishes only modulo 2π; a loop
/// whose position turns once relative to that frame gives ±2π.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionResidual {
    pub integral: f64,
    /// `|integral|`.
    pub residual: f64,
    /// Distance from `integral` to `2π · turns`.
    pub residual_mod_2pi: f64,
    pub turns: i64,
    pub error_estimate: f64,
    pub samples: usize,
}

impl ConnectionResidual {
    fn from_quadrature(q: Quadrature) -> Self {
        let turns = (q.value / std::f64::consts::TAU).round();
        Self {
            integral: q.value,
            residual: q.value.abs(),
            residual_mod_2pi: (q.value - turns * std::f64::consts::TAU).abs(),
            turns: turns as i64,
            error_estimate: q.error_estimate,
            samples: q.points,
        }
    }
}

/// `∫ −sin v du` over the tantrix of a loop on the unit sphere, refined
/// until the error estimate is below `tol`.
pub fn sphere_connection_residual(sigma: &dyn SmoothLoop, tol: f64) -> Result<ConnectionResidual, QuadricError> {
    check_sphere(SampledC1::sample(sigma, 64).positions())?;
    let q = converge(tol, |m| sphere_connection(&tantrix_samples(sigma, m)?))?;
    Ok(ConnectionResidual::from_quadrature(q))
}

/// Rotation taking the direction that stays furthest from the tantrix of
/// `sigma` to the north pole, with the resulting clearance `min (x² + y²)`.
/// Candidate directions are a Fibonacci lattice on the sphere.
pub fn avoid_poles(sigma: &dyn SmoothLoop, m: usize) -> Result<(Mat3, f64), QuadricError> {
    let tau = tantrix_samples(sigma, m)?;
    let candidates = 4000;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = (Vec3::z(), f64::NEG_INFINITY);
    for i in 0..candidates {
        let z = 1.0 - (i as f64 + 0.5) / candidates as f64;
        let r = (1.0 - z * z).sqrt();
        let (s, c) = (golden * i as f64).sin_cos();
        let n = Vec3::new(r * c, r * s, z);
        // the tantrix must avoid both n and -n, so only the upper half is scanned
        let clearance = tau
            .positions()
            .iter()
            .map(|p| 1.0 - n.dot(p).powi(2))
            .fold(f64::INFINITY, f64::min);
        if clearance > best.1 {
            best = (n, clearance);
        }
    }
    Ok((rotation_to_pole(&best.0), best.1))
}

fn rotation_to_pole(n: &Vec3) -> Mat3 {
    nalgebra::Rotation3::rotation_between(n, &Vec3::z())
        .unwrap_or_else(|| nalgebra::Rotation3::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI))
        .into_inner()
}

/// [`sphere_connection_residual`] after rotating the loop away from the poles.
pub fn sphere_connection_residual_rotated(
    sigma: &dyn SmoothLoop,
    tol: f64,
) -> Result<(ConnectionResidual, Mat3), QuadricError> {
    let (rot, _) = avoid_poles(sigma, 512)?;
    let rotated = Rotated {
        inner: sigma,
        matrix: rot,
    };
    Ok((sphere_connection_residual(&rotated, tol)?, rot))
}

/// Outcome of the Fenchel bisection check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionReport {
    /// `|area − 2π|`, zero when the tantrix bisects the sphere.
    pub defect: f64,
    /// Area on the left of the tantrix, `2π − ∮ κ_g ds`.
    pub area: f64,
    pub error_estimate: f64,
    pub samples: usize,
}

/// Fenchel's bisection defect of the tantrix of a loop on the unit sphere.
///
/// Gauss–Bonnet gives the enclosed area as `2π − ∮ κ_g ds`, and along a
/// spherical curve `T` one has `κ_g ds = det(T, T', T'') / ‖T'‖² dt`. `T'` is
/// exact when the loop supplies accelerations; `T''` comes from an
/// eighth-order periodic difference of `T'`.
pub fn bisection_defect(sigma: &dyn SmoothLoop, tol: f64) -> Result<BisectionReport, QuadricError> {
    check_sphere(SampledC1::sample(sigma, 64).positions())?;
    let probe = tantrix_samples(sigma, EMBED_POINTS)?;
    if let Some((i, j)) = spherical_self_intersection(probe.positions()) {
        return Err(QuadricError::NotEmbedded { i, j });
    }
    let q = converge(tol, |m| {
        let tau = tantrix_samples(sigma, m)?;
        let dd = periodic_derivative(tau.velocities(), tau.spacing());
        let values: Vec<f64> = tau
            .positions()
            .iter()
            .zip(tau.velocities())
            .zip(&dd)
            .map(|((t, d1), d2)| t.dot(&d1.cross(d2)) / d1.norm_squared())
            .collect();
        Ok(sampled_trapezoid(&values, tau.period()))
    })?;
    let area = std::f64::consts::TAU - q.value;
    Ok(BisectionReport {
        defect: q.value.abs(),
        area,
        error_estimate: q.error_estimate,
        samples: q.points,
    })
}

fn on_arc(a: &Vec3, b: &Vec3, n: &Vec3, p: &Vec3) -> bool {
    a.cross(p).dot(n) >= 0.0 && p.cross(b).dot(n) >= 0.0
}

fn arcs_cross(a: &Vec3, b: &Vec3, c: &Vec3, d: &Vec3) -> bool {
    let n1 = a.cross(b);
    let n2 = c.cross(d);
    let line = n1.cross(&n2);
    let len = line.norm();
    if len <= 1e-300 {
        return false;
    }
    let p = line / len;
    [p, -p]
        .iter()
        .any(|q| on_arc(a, b, &n1, q) && on_arc(c, d, &n2, q))
}

/// First pair of non-adjacent great-circle arcs of a closed spherical polygon
/// that meet, if any.
pub fn spherical_self_intersection(points: &[Vec3]) -> Option<(usize, usize)> {
    let n = points.len();
    for i in 0..n {
        let (a, b) = (&points[i], &points[(i + 1) % n]);
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if arcs_cross(a, b, &points[j], &points[(j + 1) % n]) {
                return Some((i, j));
            }
        }
    }
    None
}

const UNIT_SPEED_TOL: f64 = 1e-9;

/// A unit-speed spherical loop together with the arclength derivative of its
/// tantrix `τ = σ'`.
#[derive(Debug, Clone)]
pub struct UnitSpeedLoop {
    pub sigma: SampledC1,
    pub dtau: Vec<Vec3>,
}

impl UnitSpeedLoop {
    /// Takes `τ'` from an eighth-order periodic difference of the velocities.
    pub fn from_sampled(sigma: SampledC1) -> Result<Self, QuadricError> {
        let deviation = unit_speed_deviation(&sigma);
        if deviation > UNIT_SPEED_TOL {
            return Err(QuadricError::NotUnitSpeed { deviation });
        }
        let dtau = periodic_derivative(sigma.velocities(), sigma.spacing());
        Ok(Self { sigma, dtau })
    }

    /// Reparametrizes `curve` by arclength at `m` samples. When the curve
    /// supplies accelerations `τ'` is exact, `(σ'' − (σ''·τ)τ)/‖σ'‖²` at the
    /// original parameter; otherwise it is differenced.
    pub fn from_loop(curve: &dyn SmoothLoop, m: usize) -> Result<Self, QuadricError> {
        let table = crate::arclength::ArclengthTable::new(curve, m.max(256))
            .map_err(|_| QuadricError::NotImmersed { t: f64::NAN })?;
        let length = table.length();
        let h = length / m as f64;
        let mut pos = Vec::with_capacity(m);
        let mut vel = Vec::with_capacity(m);
        let mut dtau = Vec::with_capacity(m);
        for j in 0..m {
            let t = table.parameter_at(h * j as f64);
            let d1 = curve.velocity(t);
            let n = d1.norm();
            if n == 0.0 {
                return Err(QuadricError::NotImmersed { t });
            }
            let tau = d1 / n;
            pos.push(curve.point(t));
            vel.push(tau);
            match curve.acceleration(t) {
                Some(d2) => dtau.push((d2 - tau * tau.dot(&d2)) / (n * n)),
                None => {
                    let sigma = SampledC1::new(length, pos, vel).map_err(|_| QuadricError::NotImmersed { t })?;
                    return Self::from_sampled(SampledC1::unit_speed(&sigma, m).map_err(|_| QuadricError::NotImmersed { t })?);
                }
            }
        }
        let sigma = SampledC1::new(length, pos, vel).map_err(|_| QuadricError::NotImmersed { t: 0.0 })?;
        Ok(Self { sigma, dtau })
    }

    /// `σ_θ = σ cos θ + τ sin θ` with velocity `τ cos θ + τ' sin θ`.
    pub fn homotopy(&self, theta: f64) -> Result<SampledC1, QuadricError> {
        let (s, c) = theta.sin_cos();
        let pos = self
            .sigma
            .positions()
            .iter()
            .zip(self.sigma.velocities())
            .map(|(p, t)| p * c + t * s)
            .collect();
        let vel = self
            .sigma
            .velocities()
            .iter()
            .zip(&self.dtau)
            .map(|(t, d)| t * c + d * s)
            .collect();
        SampledC1::new(self.sigma.period(), pos, vel).map_err(|_| QuadricError::NotImmersed { t: 0.0 })
    }

    /// Minimum of `‖σ_θ'‖` over `thetas` equally spaced angles in `[0, π/2]`
    /// and every sample.
    pub fn min_speed(&self, thetas: usize) -> f64 {
        let k = thetas.max(2);
        let mut min = f64::INFINITY;
        for i in 0..k {
            let (s, c) = (std::f64::consts::FRAC_PI_2 * i as f64 / (k - 1) as f64).sin_cos();
            for (t, d) in self.sigma.velocities().iter().zip(&self.dtau) {
                min = min.min((t * c + d * s).norm());
            }
        }
        min
    }
}

/// The curve `σ_θ = σ cos θ + τ sin θ` of the regular homotopy from a
/// unit-speed spherical loop (`θ = 0`) to its tantrix (`θ = π/2`). The
/// derivative of `τ` is an eighth-order periodic difference of the sampled
/// velocities; use [`UnitSpeedLoop::from_loop`] when exact derivatives exist.
pub fn tantrix_homotopy(sigma: &SampledC1, theta: f64) -> Result<SampledC1, QuadricError> {
    UnitSpeedLoop::from_sampled(sigma.clone())?.homotopy(theta)
}

fn unit_speed_deviation(sigma: &SampledC1) -> f64 {
    sigma
        .velocities()
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Minimum speed of `σ_θ` over `thetas` angles for a sampled unit-speed loop.
pub fn homotopy_min_speed(sigma: &SampledC1, thetas: usize) -> Result<f64, QuadricError> {
    Ok(UnitSpeedLoop::from_sampled(sigma.clone())?.min_speed(thetas))
}
