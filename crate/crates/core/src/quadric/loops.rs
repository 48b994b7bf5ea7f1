//! Smooth loops on the sphere and on Σ with exact derivatives.

use crate::curve::{AnalyticCurve, SmoothLoop};
use crate::trigpoly::TrigPoly;
use crate::{Mat3, Vec3};

/// Radial projection `p(t)/‖p(t)‖` of an analytic loop onto the unit sphere.
#[derive(Debug, Clone)]
pub struct ProjectedLoop {
    pub p: AnalyticCurve,
}

impl ProjectedLoop {
    pub fn new(p: AnalyticCurve) -> Self {
        Self { p }
    }

    fn jet(&self, t: f64) -> [Vec3; 3] {
        let [p, d1, d2, _] = self.p.jet(t);
        let n = p.norm();
        let s = p / n;
        let dn = s.dot(&d1);
        let w = d1 - s * dn;
        let ds = w / n;
        let dw = d2 - ds * dn - s * (ds.dot(&d1) + s.dot(&d2));
        let dds = dw / n - w * dn / (n * n);
        [s, ds, dds]
    }
}

impl SmoothLoop for ProjectedLoop {
    fn period(&self) -> f64 {
        std::f64::consts::TAU
    }
    fn point(&self, t: f64) -> Vec3 {
        self.jet(t)[0]
    }
    fn velocity(&self, t: f64) -> Vec3 {
        self.jet(t)[1]
    }
    fn acceleration(&self, t: f64) -> Option<Vec3> {
        Some(self.jet(t)[2])
    }
}

/// The loop `X(u(t), v(t))` on the upper sheet Σ, with
/// `X(u, v) = (cos u sinh v, sin u sinh v, cosh v)` and
/// `u(t) = winding·t + U(t)`.
#[derive(Debug, Clone)]
pub struct SigmaLoop {
    pub u: TrigPoly,
    pub v: TrigPoly,
    pub winding: i32,
}

impl SigmaLoop {
    pub fn new(u: TrigPoly, v: TrigPoly, winding: i32) -> Self {
        Self { u, v, winding }
    }

    /// The horizontal circle `X(t, v0)`.
    pub fn circle(v0: f64) -> Self {
        Self::new(TrigPoly::zero(), TrigPoly::constant(v0), 1)
    }

    fn jet(&self, t: f64) -> [Vec3; 3] {
        let h = crate::trigpoly::Harmonics::at(t, self.u.degree().max(self.v.degree()));
        let [u0, u1, u2, _] = self.u.eval_derivs_with(&h);
        let [v, v1, v2, _] = self.v.eval_derivs_with(&h);
        let u = self.winding as f64 * t + u0;
        let u1 = self.winding as f64 + u1;
        let (su, cu) = u.sin_cos();
        let (sh, ch) = (v.sinh(), v.cosh());
        let x = Vec3::new(cu * sh, su * sh, ch);
        let xu = Vec3::new(-su * sh, cu * sh, 0.0);
        let xv = Vec3::new(cu * ch, su * ch, sh);
        let xuu = Vec3::new(-cu * sh, -su * sh, 0.0);
        let xuv = Vec3::new(-su * ch, cu * ch, 0.0);
        let xvv = x;
        let d1 = xu * u1 + xv * v1;
        let d2 = xuu * (u1 * u1) + xuv * (2.0 * u1 * v1) + xvv * (v1 * v1) + xu * u2 + xv * v2;
        [x, d1, d2]
    }
}

impl SmoothLoop for SigmaLoop {
    fn period(&self) -> f64 {
        std::f64::consts::TAU
    }
    fn point(&self, t: f64) -> Vec3 {
        self.jet(t)[0]
    }
    fn velocity(&self, t: f64) -> Vec3 {
        self.jet(t)[1]
    }
    fn acceleration(&self, t: f64) -> Option<Vec3> {
        Some(self.jet(t)[2])
    }
}

/// A loop composed with a fixed linear map.
pub struct Rotated<'a> {
    pub inner: &'a dyn SmoothLoop,
    pub matrix: Mat3,
}

impl SmoothLoop for Rotated<'_> {
    fn period(&self) -> f64 {
        self.inner.period()
    }
    fn point(&self, t: f64) -> Vec3 {
        self.matrix * self.inner.point(t)
    }
    fn velocity(&self, t: f64) -> Vec3 {
        self.matrix * self.inner.velocity(t)
    }
    fn acceleration(&self, t: f64) -> Option<Vec3> {
        self.inner.acceleration(t).map(|a| self.matrix * a)
    }
}

/// The loop `t ↦ R(u₁, k₁t) ⋯ R(u_n, k_n t) e` on the unit sphere, where
/// `R(u, φ)` is the rotation by `φ` about the unit axis `u`. Every entry of
/// `R(u, kt)` is a trigonometric polynomial of degree `k`, so the loop is an
/// exact trigonometric polynomial of degree `Σ k_i` and unit length.
pub fn rotation_loop(factors: &[(Vec3, usize)], e: &Vec3) -> AnalyticCurve {
    let e = e.normalize();
    let mut v: [TrigPoly; 3] = [0, 1, 2].map(|i| TrigPoly::constant(e[i]));
    for (axis, k) in factors.iter().rev() {
        let u = axis.normalize();
        let c = TrigPoly::cos_k(*k, 1.0);
        let s = TrigPoly::sin_k(*k, 1.0);
        let one_minus_c = &TrigPoly::constant(1.0) - &c;
        // R = cos·I + sin·[u]× + (1 − cos)·u uᵀ
        let cross = [
            [0.0, -u.z, u.y],
            [u.z, 0.0, -u.x],
            [-u.y, u.x, 0.0],
        ];
        let next = [0, 1, 2].map(|i| {
            let mut acc = &c * &v[i];
            for j in 0..3 {
                let w = cross[i][j];
                if w != 0.0 {
                    acc = &acc + &(&s * &v[j]).scale(w);
                }
                let w = u[i] * u[j];
                if w != 0.0 {
                    acc = &acc + &(&one_minus_c * &v[j]).scale(w);
                }
            }
            acc
        });
        v = next;
    }
    let [x, y, z] = v;
    AnalyticCurve::new(x, y, z)
}

/// Positions, velocities and accelerations at `m` uniform parameters.
/// Accelerations come from the loop when it provides them and from an
/// eighth-order periodic difference of the velocities otherwise.
pub fn sample_jet(c: &dyn SmoothLoop, m: usize) -> (Vec<Vec3>, Vec<Vec3>, Vec<Vec3>) {
    let period = c.period();
    let h = period / m as f64;
    let mut pos = Vec::with_capacity(m);
    let mut vel = Vec::with_capacity(m);
    let mut acc = Vec::with_capacity(m);
    let mut exact = true;
    for j in 0..m {
        let t = h * j as f64;
        pos.push(c.point(t));
        vel.push(c.velocity(t));
        match c.acceleration(t) {
            Some(a) if exact => acc.push(a),
            _ => exact = false,
        }
    }
    if !exact {
        acc = crate::quadrature::periodic_derivative(&vel, h);
    }
    (pos, vel, acc)
}
