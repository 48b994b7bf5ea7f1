//! Arclength symmetry of planar loops and the parallel tangents it forces on
//! every loop over such a base.
//!
//! A planar loop `c` of length `L` in unit-speed parametrization is
//! arclength symmetric about `p` when `c(s + L/2) = 2p − c(s)`. Then the
//! tangents at `s` and `s + L/2` are opposite, and for any height `z` the lift
//! `(c, z)` has parallel tangents wherever `z'(s) + z'(s + L/2) = 0`. That
//! function integrates to zero over a period, so it has a root.

use serde::{Deserialize, Serialize};

use super::QuadricError;
use crate::arclength::ArclengthTable;
use crate::curve::{SampledC1, SmoothLoop};
use crate::trigpoly::TrigPoly;
use crate::Vec3;

/// Default number of unit-speed samples.
pub const SYMMETRY_SAMPLES: usize = 4096;
/// Largest arclength defect accepted as symmetric.
pub const SYMMETRY_TOL: f64 = 1e-8;
const PANELS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryDefect {
    pub defect: f64,
    pub center: [f64; 2],
    pub length: f64,
}

fn unit_speed(base: &dyn SmoothLoop, m: usize) -> Result<SampledC1, QuadricError> {
    SampledC1::unit_speed(base, m).map_err(|e| match e {
        crate::curve::CurveError::ZeroVelocity { t } => QuadricError::NotImmersed { t },
        _ => QuadricError::NotImmersed { t: f64::NAN },
    })
}

/// How far the planar projection of `base` is from arclength symmetry, on
/// `m` unit-speed samples (rounded up to an even count).
pub fn arclength_symmetry_defect(base: &dyn SmoothLoop, m: usize) -> Result<SymmetryDefect, QuadricError> {
    let m = m.max(4).next_multiple_of(2);
    let c = unit_speed(base, m)?;
    let pos = c.positions();
    let half = m / 2;
    let plane = |p: &Vec3| [p.x, p.y];
    let mut center = [0.0; 2];
    for j in 0..m {
        let (a, b) = (plane(&pos[j]), plane(&pos[(j + half) % m]));
        center[0] += 0.5 * (a[0] + b[0]);
        center[1] += 0.5 * (a[1] + b[1]);
    }
    center = [center[0] / m as f64, center[1] / m as f64];
    let defect = (0..m)
        .map(|j| {
            let (a, b) = (plane(&pos[j]), plane(&pos[(j + half) % m]));
            0.5 * (b[0] - (2.0 * center[0] - a[0])).hypot(b[1] - (2.0 * center[1] - a[1]))
        })
        .fold(0.0, f64::max);
    Ok(SymmetryDefect {
        defect,
        center,
        length: c.period(),
    })
}

/// A root of `z'(s) + z'(s + L/2)` and the parallel pair it yields.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderWitness {
    /// Root, in the normalized parameter `t = 2π s / L`.
    pub t0: f64,
    pub pair: (f64, f64),
    /// `‖T(t0) × T(t0 + π)‖` for the unit tangents of the lifted loop.
    pub defect: f64,
    pub symmetry: SymmetryDefect,
}

/// Finds `t0` with `z'(t0) + z'(t0 + π) = 0` for the loop lying over an
/// arclength-symmetric base, where `z` is a function of the normalized
/// arclength `t = 2π s / L`.
///
/// The scan runs over `t ∈ [0, π)` and returns the first root it brackets.
/// When the function vanishes identically the first scan point is returned.
pub fn symmetric_cylinder_witness(base: &dyn SmoothLoop, z: &TrigPoly) -> Result<CylinderWitness, QuadricError> {
    let symmetry = arclength_symmetry_defect(base, SYMMETRY_SAMPLES)?;
    if symmetry.defect > SYMMETRY_TOL {
        return Err(QuadricError::NotArclengthSymmetric {
            defect: symmetry.defect,
        });
    }
    let dz = z.differentiate();
    let g = |t: f64| dz.eval(t) + dz.eval(t + std::f64::consts::PI);
    let n = 4 * z.degree().max(1) + 64;
    let h = std::f64::consts::PI / n as f64;
    let floor = 1e-12 * (1.0 + dz.abs_bound());
    let grid: Vec<f64> = (0..=n).map(|j| g(h * j as f64)).collect();
    let t0 = if grid.iter().all(|v| v.abs() <= floor) {
        0.0
    } else {
        let j = (0..n)
            .find(|&j| grid[j] == 0.0 || grid[j].signum() != grid[j + 1].signum())
            .ok_or(QuadricError::NoSignChange)?;
        if grid[j] == 0.0 {
            h * j as f64
        } else {
            bisect(&g, h * j as f64, h * (j + 1) as f64)
        }
    };
    let table = ArclengthTable::new(base, PANELS).map_err(|_| QuadricError::NotImmersed { t: f64::NAN })?;
    let length = table.length();
    let scale = std::f64::consts::TAU / length;
    let tangent = |t: f64| {
        let s = t / scale;
        let u = table.parameter_at(s.rem_euclid(length));
        let v = base.velocity(u);
        let planar = Vec3::new(v.x, v.y, 0.0) / v.x.hypot(v.y);
        (planar + Vec3::z() * (dz.eval(t) * scale)).normalize()
    };
    let pair = (t0, t0 + std::f64::consts::PI);
    let defect = tangent(pair.0).cross(&tangent(pair.1)).norm();
    Ok(CylinderWitness {
        t0,
        pair,
        defect,
        symmetry,
    })
}

/// The loop `(cos t, sin 2t, t/π − (t/π)¹⁵)` for `t ∈ [−π, π)`, sampled at `m`
/// points. Its base is a centrally symmetric figure eight with no
/// arclength-symmetric parametrization, and its height is C¹ but not C² at
/// `t = ±π`, so it is only available on the sampled backend.
pub fn figure_eight_cylinder(m: usize) -> SampledC1 {
    use std::f64::consts::{PI, TAU};
    let wrap = |t: f64| (t + PI).rem_euclid(TAU) - PI;
    let l = crate::curve::FnLoop {
        period: TAU,
        point: move |t: f64| {
            let u = wrap(t);
            let r = u / PI;
            Vec3::new(u.cos(), (2.0 * u).sin(), r - r.powi(15))
        },
        velocity: move |t: f64| {
            let u = wrap(t);
            let r = u / PI;
            Vec3::new(-u.sin(), 2.0 * (2.0 * u).cos(), (1.0 - 15.0 * r.powi(14)) / PI)
        },
    };
    SampledC1::sample(&l, m)
}

fn bisect(g: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = g(lo);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = g(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
