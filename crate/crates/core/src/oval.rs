//! Strictly convex planar ovals described by their support function.
//!
//! With outward normal `e^{it}` the boundary point is
//! `γ(t) = (h(t) + i h'(t)) e^{it}` and the speed is `v = h'' + h`,
//! which is also the radius of curvature.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundBox};
use crate::curve::{AnalyticCurve, SpaceCurve};
use crate::trigpoly::TrigPoly;

/// Default tolerance on odd coefficients of `v` for calling an oval symmetric.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OvalError {
    #[error("support function is not strictly convex: inf v lies in [{}, {}]", .0.lower, .0.upper)]
    NotStrictlyConvex(BoundBox),
}

/// Support function `h` with its radius of curvature `v = h'' + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportFunction {
    h: TrigPoly,
    v: TrigPoly,
    inf_v: BoundBox,
}

/// `h'' + h`, coefficient by coefficient: harmonic `k` is scaled by `1 - k²`.
pub fn radius_of_curvature(h: &TrigPoly) -> TrigPoly {
    let mut v = h.clone();
    for k in 1..=h.degree() {
        let (a, b) = h.coeff(k);
        let f = 1.0 - (k * k) as f64;
        v.set(k, f * a, f * b);
    }
    v
}

/// Builds the oval data for `h` and certifies `inf v > 0`.
pub fn make_support_oval(h: TrigPoly) -> Result<SupportFunction, OvalError> {
    let v = radius_of_curvature(&h);
    let tol = 1e-9 * v.abs_bound().max(1.0);
    let inf_v = bounds::inf_sign(&v, tol);
    if !inf_v.is_positive() {
        return Err(OvalError::NotStrictlyConvex(inf_v));
    }
    Ok(SupportFunction { h, v, inf_v })
}

impl SupportFunction {
    pub fn h(&self) -> &TrigPoly {
        &self.h
    }

    pub fn v(&self) -> &TrigPoly {
        &self.v
    }

    /// Certified enclosure of `inf v`.
    pub fn convexity(&self) -> BoundBox {
        self.inf_v
    }

    /// Curvature `κ = 1/v` at normal angle `t`.
    pub fn curvature(&self, t: f64) -> f64 {
        1.0 / self.v.eval(t)
    }

    pub fn parametrize(&self) -> PlanarOval {
        support_parametrization(self)
    }

    pub fn symmetry(&self, tol: f64) -> SymmetryReport {
        symmetry_analysis(self, tol)
    }
}

/// Boundary of a strictly convex oval, parametrized by normal angle.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarOval {
    pub x: TrigPoly,
    pub y: TrigPoly,
    pub asymmetry: f64,
}

impl PlanarOval {
    pub fn point(&self, t: f64) -> [f64; 2] {
        [self.x.eval(t), self.y.eval(t)]
    }

    /// The oval as a space curve in the plane `z = 0`.
    pub fn to_space_curve(&self) -> SpaceCurve {
        self.with_height(TrigPoly::zero())
    }

    /// The cylinder loop `(x(t), y(t), z(t))`.
    pub fn with_height(&self, z: TrigPoly) -> SpaceCurve {
        SpaceCurve::Analytic(AnalyticCurve::new(self.x.clone(), self.y.clone(), z))
    }
}

/// `γ = (h cos t − h' sin t, h sin t + h' cos t)` as exact products.
pub fn support_parametrization(s: &SupportFunction) -> PlanarOval {
    let h = &s.h;
    let dh = h.differentiate();
    let c = TrigPoly::cos_k(1, 1.0);
    let sn = TrigPoly::sin_k(1, 1.0);
    let x = &(h * &c) - &(&dh * &sn);
    let y = &(h * &sn) + &(&dh * &c);
    PlanarOval {
        x,
        y,
        asymmetry: s.v.odd_part().max_abs_coeff(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub asymmetry: f64,
    pub v_odd: TrigPoly,
}

/// Central symmetry holds exactly when `v` is π-periodic, i.e. its odd
/// harmonics vanish.
pub fn symmetry_analysis(s: &SupportFunction, tol: f64) -> SymmetryReport {
    let v_odd = s.v.odd_part();
    let asymmetry = v_odd.max_abs_coeff();
    SymmetryReport {
        symmetric: asymmetry <= tol,
        asymmetry,
        v_odd,
    }
}

impl SupportFunction {
    /// The boundary as a planar space curve.
    pub fn to_curve(&self) -> SpaceCurve {
        self.parametrize().to_space_curve()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec3;
    use std::f64::consts::TAU;

    fn asym3() -> TrigPoly {
        TrigPoly::constant(1.0) + TrigPoly::cos_k(3, 0.05)
    }

    #[test]
    fn circle() {
        let s = make_support_oval(TrigPoly::constant(1.0)).unwrap();
        assert_eq!(s.v(), &TrigPoly::constant(1.0));
        let o = s.parametrize();
        for j in 0..16 {
            let t = 0.4 * j as f64;
            let [x, y] = o.point(t);
            assert!((x - t.cos()).abs() < 1e-15 && (y - t.sin()).abs() < 1e-15);
        }
        assert_eq!(s.curvature(1.234), 1.0);
        let s2 = make_support_oval(TrigPoly::constant(2.0)).unwrap();
        assert_eq!(s2.curvature(0.3), 0.5);
        let [x, y] = s2.parametrize().point(0.7);
        assert!((x.hypot(y) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn asym3_convex() {
        let s = make_support_oval(asym3()).unwrap();
        let want = TrigPoly::constant(1.0) + TrigPoly::cos_k(3, -0.4);
        assert!((s.v() - &want).max_abs_coeff() < 1e-15);
        assert!(s.convexity().contains(0.6) || (s.convexity().lower - 0.6).abs() < 1e-8);
        assert!((s.curvature(0.0) - 1.0 / 0.6).abs() < 1e-14);
    }

    #[test]
    fn not_convex() {
        let h = TrigPoly::constant(1.0) + TrigPoly::cos_k(3, 0.2);
        match make_support_oval(h) {
            Err(OvalError::NotStrictlyConvex(b)) => assert!(b.contains(-0.6) || b.upper <= 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn speed_equals_v() {
        let s = make_support_oval(asym3()).unwrap();
        let o = s.to_curve();
        for j in 0..10_000 {
            let t = TAU * j as f64 / 10_000.0;
            let speed = o.velocity(t).norm();
            assert!((speed - (1.0 - 0.4 * (3.0 * t).cos())).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_matches_direct_formula() {
        let s = make_support_oval(asym3()).unwrap();
        let c = s.to_curve();
        let a = c.as_analytic().unwrap();
        for j in 0..50 {
            let t = 0.1234 * j as f64;
            let [_, d1, d2, _] = a.jet(t);
            let kappa = (d1.x * d2.y - d1.y * d2.x) / d1.norm().powi(3);
            assert!((kappa - s.curvature(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetry_examples() {
        let ell = make_support_oval(TrigPoly::constant(1.0) + TrigPoly::cos_k(2, 0.3)).unwrap();
        let r = ell.symmetry(DEFAULT_SYMMETRY_TOL);
        assert!(r.symmetric);
        assert_eq!(r.asymmetry, 0.0);
        let r = make_support_oval(asym3()).unwrap().symmetry(DEFAULT_SYMMETRY_TOL);
        assert!(!r.symmetric);
        assert!((r.asymmetry - 0.4).abs() < 1e-15);
        let small = TrigPoly::constant(1.0) + TrigPoly::cos_k(3, 1e-3);
        let r = make_support_oval(small).unwrap().symmetry(DEFAULT_SYMMETRY_TOL);
        assert!(!r.symmetric);
        assert!((r.asymmetry - 8e-3).abs() < 1e-15);
    }

    #[test]
    fn symmetric_oval_is_centrally_symmetric() {
        let h = TrigPoly::new(1.0, vec![0.3, 0.1, 0.0, 0.02], vec![-0.2, 0.0, 0.0, 0.01]);
        let s = make_support_oval(h).unwrap();
        assert!(s.symmetry(DEFAULT_SYMMETRY_TOL).symmetric);
        let c = s.to_curve();
        let w = 0.5 * (c.eval(0.0) + c.eval(std::f64::consts::PI));
        for j in 0..100 {
            let t = 0.0625 * j as f64;
            let p = c.eval(t + std::f64::consts::PI) + c.eval(t) - 2.0 * w;
            assert!(p.norm() < 1e-10);
        }
        assert_eq!(w.z, 0.0);
    }

    #[test]
    fn translation_leaves_v() {
        let h = asym3();
        let shifted = &h + &(TrigPoly::cos_k(1, 0.7) + TrigPoly::sin_k(1, -0.2));
        let a = make_support_oval(h).unwrap();
        let b = make_support_oval(shifted).unwrap();
        assert_eq!(a.v().clone().trimmed(), b.v().clone().trimmed());
        for j in 0..20 {
            let t = 0.3 * j as f64;
            let d = b.to_curve().eval(t) - a.to_curve().eval(t);
            assert!((d - Vec3::new(0.7, -0.2, 0.0)).norm() < 1e-14);
        }
    }
}
