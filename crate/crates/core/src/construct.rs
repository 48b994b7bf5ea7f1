//! Height functions that lift an asymmetric oval to a skew loop on its cylinder.
//!
//! Given `v = v₊ + v₋` (even and odd harmonics), the loop `(γ(t), z(t))` is
//! skew exactly when `v₊ z'₊ − v₋ z'₋` has no zero. Taking `z'₋ = −v₋`
//! reduces this to `v₊ z'₊ + v₋² > 0`, and `z'₊ = μ` is built so that the
//! left side is bounded below by a positive constant.

use serde::Serialize;
use thiserror::Error;

use crate::bounds::{self, BoundBox, Stop};
use crate::curve::{AnalyticCurve, SpaceCurve};
use crate::oval::SupportFunction;
use crate::trigpoly::{fourier_projection, TrigPoly, TrigPolyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructError {
    #[error("odd part is identically zero; the oval is centrally symmetric")]
    OddPartZero,
    #[error("e + o is not certified positive (inf in [{}, {}])", .0.lower, .0.upper)]
    Nonpositive(BoundBox),
    #[error("projection degree cap {cap} reached without certifying e·μ + o² > 0 (inf in [{}, {}])", .inf.lower, .inf.upper)]
    ProjectionFailure { cap: usize, inf: BoundBox },
    #[error("base oval is centrally symmetric (v has no odd harmonics)")]
    SymmetricBase,
    #[error("curvature of the lifted loop is not certified nonvanishing")]
    CurvatureVanishes,
    #[error(transparent)]
    TrigPoly(#[from] TrigPolyError),
}

/// Tuning for the μ projection.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConstructOptions {
    /// Largest projection degree tried before giving up.
    pub degree_cap: usize,
    /// Agreement required between successive quadrature refinements.
    pub quad_tol: f64,
    /// Coefficients of `o` at or below this size count as zero.
    pub odd_tol: f64,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            degree_cap: 512,
            quad_tol: 1e-13,
            odd_tol: 1e-12,
        }
    }
}

/// The correction `μ` with its mean-value constant and projection data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mu {
    pub mu: TrigPoly,
    pub tau: f64,
    pub degree: usize,
    /// Certified enclosure of `inf (e·μ + o²)`.
    pub margin: BoundBox,
}

/// Enclosure of `inf f` to relative width `1e-10`; valid even if the grid cap fires.
fn certify_positive(f: &TrigPoly) -> BoundBox {
    let scale = f.abs_bound().max(f64::MIN_POSITIVE);
    bounds::inf_enclosure(f, Stop::Width(1e-10 * scale), bounds::DEFAULT_MAX_GRID).0
}

/// Builds `μ = τ − o²/(1+e)` (projected to a trigonometric polynomial),
/// with `τ` the mean of `o²/(1+e)`, and certifies `e·μ + o² > 0`.
pub fn construct_mu(e: &TrigPoly, o: &TrigPoly, opts: &ConstructOptions) -> Result<Mu, ConstructError> {
    if o.max_abs_coeff() <= opts.odd_tol {
        return Err(ConstructError::OddPartZero);
    }
    let sum = e + o;
    let pos = certify_positive(&sum);
    if !pos.is_positive() {
        return Err(ConstructError::Nonpositive(pos));
    }
    let o2 = o.square();
    let g = |t: f64| {
        let ov = o.eval(t);
        ov * ov / (1.0 + e.eval(t))
    };
    let scale = o2.abs_bound().max(1.0);
    let mut degree = (4 * e.degree().max(o.degree())).max(4);
    let last = loop {
        degree = degree.min(opts.degree_cap);
        let (proj, _) = fourier_projection(g, degree, opts.quad_tol * scale, 1 << 16);
        let tau = proj.a0();
        let mut mu = TrigPoly::zero().with_degree(degree);
        for k in (2..=degree).step_by(2) {
            let (a, b) = proj.coeff(k);
            mu.set(k, -a, -b);
        }
        let mu = mu.trimmed();
        let margin_fn = &(e * &mu) + &o2;
        let margin = certify_positive(&margin_fn);
        if margin.is_positive() {
            return Ok(Mu {
                mu,
                tau,
                degree,
                margin,
            });
        }
        if degree >= opts.degree_cap {
            break margin;
        }
        degree *= 2;
    };
    Err(ConstructError::ProjectionFailure {
        cap: opts.degree_cap,
        inf: last,
    })
}

/// A height function `z = z₊ + z₋` with its construction log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightFunction {
    pub z: TrigPoly,
    pub z_even: TrigPoly,
    pub z_odd: TrigPoly,
    pub tau: f64,
    pub mu: TrigPoly,
    pub projection_degree: usize,
    /// `v₊ μ + v₋²`, whose infimum is the cylinder margin.
    pub margin_function: TrigPoly,
    /// Certified enclosure of `inf (v₊ μ + v₋²)`.
    pub margin: BoundBox,
}

/// Builds a height function making the cylinder loop over `v` skew.
pub fn construct_height(v: &TrigPoly, opts: &ConstructOptions) -> Result<HeightFunction, ConstructError> {
    let (e, o) = v.parity_split();
    if o.max_abs_coeff() <= opts.odd_tol {
        return Err(ConstructError::SymmetricBase);
    }
    let z_odd = o.scale(-1.0).antiderivative_zero_mean(0.0)?;
    let m = construct_mu(&e, &o, opts)?;
    let z_even = m.mu.antiderivative_zero_mean(0.0)?;
    let z = &z_even + &z_odd;
    let margin_function = &(&e * &m.mu) + &o.square();
    Ok(HeightFunction {
        z,
        z_even,
        z_odd,
        tau: m.tau,
        mu: m.mu,
        projection_degree: m.degree,
        margin: certify_positive(&margin_function),
        margin_function,
    })
}

/// The loop `(γ(t), z(t))` over the oval, with curvature certified nonvanishing.
pub fn build_cylinder_loop(s: &SupportFunction, z: &TrigPoly) -> Result<SpaceCurve, ConstructError> {
    let oval = s.parametrize();
    let curve = AnalyticCurve::new(oval.x, oval.y, z.clone());
    let d1 = curve.derivative();
    let d2 = d1.derivative();
    let k2 = d1.cross(&d2).norm_squared();
    if !certify_positive(&k2).is_positive() {
        return Err(ConstructError::CurvatureVanishes);
    }
    Ok(SpaceCurve::Analytic(curve))
}

/// `v₊ z'₊ − v₋ z'₋` as an exact polynomial.
pub fn cylinder_margin_function(v: &TrigPoly, z: &TrigPoly) -> TrigPoly {
    let (ve, vo) = v.parity_split();
    let (ze, zo) = z.differentiate().parity_split();
    &(&ve * &ze) - &(&vo * &zo)
}

/// Certified enclosure of `inf (v₊ z'₊ − v₋ z'₋)`, refined to width `tol`.
pub fn cylinder_margin(v: &TrigPoly, z: &TrigPoly, tol: f64) -> BoundBox {
    let m = cylinder_margin_function(v, z);
    bounds::inf_enclosure(&m, Stop::Width(tol), bounds::DEFAULT_MAX_GRID).0
}

/// Whether the cylinder loop over `v` with height `z` is skew, decided by the
/// one-variable test. `Some(true)` if the margin function has a certified
/// constant sign, `Some(false)` if it certifiably changes sign or vanishes,
/// `None` if undecided.
pub fn cylinder_skew_test(v: &TrigPoly, z: &TrigPoly) -> Option<bool> {
    let m = cylinder_margin_function(v, z);
    if m.is_zero() {
        return Some(false);
    }
    let tol = 1e-12 * m.abs_bound();
    let lo = bounds::inf_sign(&m, tol);
    let hi = bounds::inf_sign(&m.scale(-1.0), tol).neg();
    if lo.is_positive() || hi.upper < 0.0 {
        Some(true)
    } else if lo.upper <= 0.0 && hi.lower >= 0.0 {
        Some(false)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oval::make_support_oval;

    fn close_poly(a: &TrigPoly, b: &TrigPoly, tol: f64) -> bool {
        (a - b).max_abs_coeff() <= tol
    }

    #[test]
    fn mu_constant_e() {
        let e = TrigPoly::constant(1.0);
        let o = TrigPoly::cos_k(3, -0.4);
        let m = construct_mu(&e, &o, &ConstructOptions::default()).unwrap();
        assert!((m.tau - 0.04).abs() < 1e-14);
        assert!(close_poly(&m.mu, &TrigPoly::cos_k(6, -0.04), 1e-14));
        assert!(m.margin.is_positive());
    }

    #[test]
    fn mu_odd_zero() {
        let r = construct_mu(&TrigPoly::constant(1.0), &TrigPoly::zero(), &ConstructOptions::default());
        assert_eq!(r.unwrap_err(), ConstructError::OddPartZero);
    }

    #[test]
    fn mu_sin() {
        let m = construct_mu(&TrigPoly::constant(3.0), &TrigPoly::sin_k(1, 1.0), &ConstructOptions::default()).unwrap();
        assert!((m.tau - 0.125).abs() < 1e-14);
        assert!(close_poly(&m.mu, &TrigPoly::cos_k(2, 0.125), 1e-14));
        // 3μ + sin² = 1/2 − cos 2t / 8, minimum 3/8
        assert!((m.margin.lower - 0.375).abs() < 1e-9);
    }

    #[test]
    fn mu_nonpositive() {
        let r = construct_mu(&TrigPoly::constant(0.5), &TrigPoly::cos_k(1, 1.0), &ConstructOptions::default());
        assert!(matches!(r, Err(ConstructError::Nonpositive(_))));
    }

    #[test]
    fn height_closed_form() {
        let v = TrigPoly::constant(1.0) + TrigPoly::cos_k(3, -0.4);
        let hf = construct_height(&v, &ConstructOptions::default()).unwrap();
        let want = TrigPoly::sin_k(3, 0.4 / 3.0) + TrigPoly::sin_k(6, -0.04 / 6.0);
        assert!(close_poly(&hf.z, &want, 1e-12));
        let mf = TrigPoly::constant(0.08) + TrigPoly::cos_k(6, 0.04);
        assert!(close_poly(&hf.margin_function, &mf, 1e-12));
        assert!(hf.margin.lower >= 0.04 - 1e-9 && hf.margin.lower <= 0.04 + 1e-12);
        let cm = cylinder_margin(&v, &hf.z, 1e-9);
        assert!(cm.lower >= 0.04 - 1e-9 && cm.lower <= 0.04 + 1e-12);
    }

    #[test]
    fn symmetric_base_rejected() {
        let o = ConstructOptions::default();
        assert_eq!(construct_height(&TrigPoly::constant(1.0), &o).unwrap_err(), ConstructError::SymmetricBase);
        let v = TrigPoly::constant(1.0) + TrigPoly::cos_k(2, 0.1);
        assert_eq!(construct_height(&v, &o).unwrap_err(), ConstructError::SymmetricBase);
    }

    #[test]
    fn cylinder_margin_trivial() {
        let v = TrigPoly::constant(1.0) + TrigPoly::cos_k(3, -0.4);
        let b = cylinder_margin(&v, &TrigPoly::zero(), 1e-9);
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
        let b = cylinder_margin(&TrigPoly::constant(1.0), &TrigPoly::new(0.0, vec![0.3, 0.2], vec![0.1, -0.5]), 1e-9);
        assert!(b.lower <= 0.0);
        assert_eq!(cylinder_skew_test(&v, &TrigPoly::zero()), Some(false));
    }

    #[test]
    fn loop_builds() {
        let s = make_support_oval(TrigPoly::constant(1.0) + TrigPoly::cos_k(3, 0.05)).unwrap();
        let hf = construct_height(s.v(), &ConstructOptions::default()).unwrap();
        let c = build_cylinder_loop(&s, &hf.z).unwrap();
        assert!(c.is_certifiable());
    }

    #[test]
    fn cross_product_identity() {
        // γ̃'(t)×γ̃'(s) = v(t)v(s) sin(s−t) k + v(t) z'(s) e^{it} − v(s) z'(t) e^{is}
        let s = make_support_oval(TrigPoly::new(1.0, vec![0.0, 0.02, 0.03], vec![0.0, 0.0, -0.01])).unwrap();
        let hf = construct_height(s.v(), &ConstructOptions::default()).unwrap();
        let c = build_cylinder_loop(&s, &hf.z).unwrap();
        let dz = hf.z.differentiate();
        for j in 0..40 {
            let t = 0.37 * j as f64;
            let u = 1.9 * j as f64 + 0.2;
            let lhs = c.velocity(t).cross(&c.velocity(u));
            let (vt, vs) = (s.v().eval(t), s.v().eval(u));
            let rhs = crate::Vec3::new(
                vt * dz.eval(u) * t.cos() - vs * dz.eval(t) * u.cos(),
                vt * dz.eval(u) * t.sin() - vs * dz.eval(t) * u.sin(),
                vt * vs * (u - t).sin(),
            );
            assert!((lhs - rhs).norm() < 1e-10, "{lhs:?} {rhs:?}");
        }
    }
}
