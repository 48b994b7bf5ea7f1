//! Standard positively curved quadrics, their plane sections and the
//! paraboloid-approximating ellipsoids.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use super::QuadricError;
use crate::curve::SampledC1;
use crate::oval::{make_support_oval, PlanarOval, SupportFunction, SymmetryReport, DEFAULT_SYMMETRY_TOL};
use crate::trigpoly::{fourier_projection, Harmonics, TrigPoly};
use crate::{Mat3, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QuadricKind {
    /// `x²/a² + y²/b² + z²/c² = 1`.
    Ellipsoid { a: f64, b: f64, c: f64 },
    /// `z = x² + y²`.
    EllipticParaboloid,
    /// Upper sheet of `x² + y² − z² = −1`.
    HyperboloidTwoSheets,
    /// `x² + y² + (z/2r − r)² = r²`, tangent to the paraboloid at the origin.
    ParaboloidApproxEllipsoid { r: f64 },
}

/// A standard quadric moved by `x ↦ A x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadricModel {
    pub kind: QuadricKind,
    pub matrix: Mat3,
    pub offset: Vec3,
}

/// The implicit form `xᵀ M x + 2 q·x + r = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    pub m: Mat3,
    pub q: Vec3,
    pub r: f64,
}

impl QuadraticForm {
    pub fn eval(&self, x: &Vec3) -> f64 {
        x.dot(&(self.m * x)) + 2.0 * self.q.dot(x) + self.r
    }
}

impl QuadricModel {
    pub fn new(kind: QuadricKind) -> Result<Self, QuadricError> {
        match kind {
            QuadricKind::Ellipsoid { a, b, c } if !(a > 0.0 && b > 0.0 && c > 0.0) => {
                return Err(QuadricError::InvalidModel("semi-axes must be positive".into()))
            }
            QuadricKind::ParaboloidApproxEllipsoid { r } if !(r > 0.0) => {
                return Err(QuadricError::InvalidModel("radius must be positive".into()))
            }
            _ => {}
        }
        Ok(Self {
            kind,
            matrix: Mat3::identity(),
            offset: Vec3::zeros(),
        })
    }

    pub fn sphere() -> Self {
        Self::new(QuadricKind::Ellipsoid { a: 1.0, b: 1.0, c: 1.0 }).expect("valid")
    }

    /// Composes the current placement with `x ↦ A x + b`.
    pub fn with_affine(mut self, a: &Mat3, b: &Vec3) -> Result<Self, QuadricError> {
        if a.determinant().abs() <= 1e-14 * a.norm().powi(3) {
            return Err(QuadricError::InvalidModel("singular affine map".into()));
        }
        self.matrix = a * self.matrix;
        self.offset = a * self.offset + b;
        Ok(self)
    }

    pub fn standard_form(&self) -> QuadraticForm {
        let diag = |x: f64, y: f64, z: f64| Mat3::from_diagonal(&Vec3::new(x, y, z));
        match self.kind {
            QuadricKind::Ellipsoid { a, b, c } => QuadraticForm {
                m: diag(1.0 / (a * a), 1.0 / (b * b), 1.0 / (c * c)),
                q: Vec3::zeros(),
                r: -1.0,
            },
            QuadricKind::EllipticParaboloid => QuadraticForm {
                m: diag(1.0, 1.0, 0.0),
                q: Vec3::new(0.0, 0.0, -0.5),
                r: 0.0,
            },
            QuadricKind::HyperboloidTwoSheets => QuadraticForm {
                m: diag(1.0, 1.0, -1.0),
                q: Vec3::zeros(),
                r: 1.0,
            },
            QuadricKind::ParaboloidApproxEllipsoid { r } => QuadraticForm {
                m: diag(1.0, 1.0, 1.0 / (4.0 * r * r)),
                q: Vec3::new(0.0, 0.0, -0.5),
                r: 0.0,
            },
        }
    }

    fn inverse(&self) -> (Mat3, Vec3) {
        let b = self.matrix.try_inverse().expect("placement is invertible");
        (b, -(b * self.offset))
    }

    /// The implicit form in world coordinates.
    pub fn world_form(&self) -> QuadraticForm {
        let s = self.standard_form();
        let (b, c) = self.inverse();
        QuadraticForm {
            m: b.transpose() * s.m * b,
            q: b.transpose() * (s.m * c + s.q),
            r: c.dot(&(s.m * c)) + 2.0 * s.q.dot(&c) + s.r,
        }
    }

    /// Value of the world implicit form; zero on the surface.
    pub fn residual(&self, x: &Vec3) -> f64 {
        self.world_form().eval(x)
    }

    /// Standard coordinates of a world point.
    pub fn to_standard(&self, x: &Vec3) -> Vec3 {
        let (b, c) = self.inverse();
        b * x + c
    }

    pub fn contains(&self, x: &Vec3, tol: f64) -> bool {
        let on_sheet = !matches!(self.kind, QuadricKind::HyperboloidTwoSheets) || self.to_standard(x).z > 0.0;
        on_sheet && self.residual(x).abs() <= tol
    }

    /// Standard parametrization and its partial derivatives.
    fn param(&self, u: f64, v: f64) -> [Vec3; 3] {
        let (su, cu) = u.sin_cos();
        match self.kind {
            QuadricKind::Ellipsoid { a, b, c } => {
                let (sv, cv) = v.sin_cos();
                [
                    Vec3::new(a * cu * cv, b * su * cv, c * sv),
                    Vec3::new(-a * su * cv, b * cu * cv, 0.0),
                    Vec3::new(-a * cu * sv, -b * su * sv, c * cv),
                ]
            }
            QuadricKind::EllipticParaboloid => [
                Vec3::new(v * cu, v * su, v * v),
                Vec3::new(-v * su, v * cu, 0.0),
                Vec3::new(cu, su, 2.0 * v),
            ],
            QuadricKind::HyperboloidTwoSheets => {
                let (sh, ch) = (v.sinh(), v.cosh());
                [
                    Vec3::new(cu * sh, su * sh, ch),
                    Vec3::new(-su * sh, cu * sh, 0.0),
                    Vec3::new(cu * ch, su * ch, sh),
                ]
            }
            QuadricKind::ParaboloidApproxEllipsoid { r } => {
                let (sv, cv) = v.sin_cos();
                [
                    Vec3::new(r * cu * cv, r * su * cv, 2.0 * r * r * (1.0 + sv)),
                    Vec3::new(-r * su * cv, r * cu * cv, 0.0),
                    Vec3::new(-r * cu * sv, -r * su * sv, 2.0 * r * r * cv),
                ]
            }
        }
    }

    /// World point at surface coordinates `(u, v)`: longitude and latitude on
    /// ellipsoids, polar radius on the paraboloid, hyperbolic radius on Σ.
    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        self.matrix * self.param(u, v)[0] + self.offset
    }

    /// The loop `t ↦ point(winding·t + U(t), V(t))` sampled at `m` parameters.
    pub fn surface_loop(&self, u: &TrigPoly, v: &TrigPoly, winding: i32, m: usize) -> Result<SampledC1, QuadricError> {
        let n = u.degree().max(v.degree());
        let mut pos = Vec::with_capacity(m);
        let mut vel = Vec::with_capacity(m);
        for j in 0..m {
            let t = std::f64::consts::TAU * j as f64 / m as f64;
            let h = Harmonics::at(t, n);
            let [u0, u1, ..] = u.eval_derivs_with(&h);
            let [v0, v1, ..] = v.eval_derivs_with(&h);
            let w = winding as f64;
            let [p, pu, pv] = self.param(w * t + u0, v0);
            pos.push(self.matrix * p + self.offset);
            vel.push(self.matrix * (pu * (w + u1) + pv * v1));
        }
        SampledC1::new(std::f64::consts::TAU, pos, vel).map_err(|_| QuadricError::NotImmersed { t: 0.0 })
    }
}

/// Compact plane section of a quadric: an ellipse in the plane coordinates
/// `x = origin + s e1 + w e2`.
#[derive(Debug, Clone, PartialEq)]
pub struct EllipseSection {
    pub origin: Vec3,
    pub e1: Vec3,
    pub e2: Vec3,
    /// Centre of the ellipse in plane coordinates.
    pub center: [f64; 2],
    /// Squared support function about the centre, `ρ uᵀ K⁻¹ u`; exact and of
    /// degree 2.
    pub centered_support_sq: TrigPoly,
    pub support: SupportFunction,
    pub oval: PlanarOval,
    pub symmetry: SymmetryReport,
}

impl EllipseSection {
    /// World point of the oval at normal angle `t`.
    pub fn world_point(&self, t: f64) -> Vec3 {
        let [s, w] = self.oval.point(t);
        self.origin + self.e1 * s + self.e2 * w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Section {
    Ellipse(Box<EllipseSection>),
    Empty,
}

fn plane_basis(n: &Vec3) -> (Vec3, Vec3) {
    let a = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let e1 = (a - n * a.dot(n)).normalize();
    (e1, n.cross(&e1))
}

/// Intersection of `q` with the plane `n·x = d`.
pub fn planar_section(q: &QuadricModel, normal: &Vec3, d: f64) -> Result<Section, QuadricError> {
    let len = normal.norm();
    if !(len > 0.0) {
        return Err(QuadricError::InvalidModel("plane normal must be nonzero".into()));
    }
    let n = normal / len;
    let d = d / len;
    let origin = n * d;
    let (e1, e2) = plane_basis(&n);
    let f = q.world_form();
    let mut k = Matrix2::new(
        e1.dot(&(f.m * e1)),
        e1.dot(&(f.m * e2)),
        e2.dot(&(f.m * e1)),
        e2.dot(&(f.m * e2)),
    );
    let g = f.m * origin + f.q;
    let mut l = Vector2::new(e1.dot(&g), e2.dot(&g));
    let mut k0 = f.eval(&origin);
    if k.trace() < 0.0 {
        k = -k;
        l = -l;
        k0 = -k0;
    }
    let scale = k.norm().max(f64::MIN_POSITIVE);
    if k.determinant() <= 1e-14 * scale * scale {
        return Ok(Section::Empty);
    }
    let kinv = k.try_inverse().expect("positive definite");
    let c = -(kinv * l);
    let rho = l.dot(&(kinv * l)) - k0;
    let tol = 1e-12 * (1.0 + k0.abs() + l.dot(&(kinv * l)).abs());
    let center_world = origin + e1 * c.x + e2 * c.y;
    if matches!(q.kind, QuadricKind::HyperboloidTwoSheets) && q.to_standard(&center_world).z <= 0.0 {
        return Ok(Section::Empty);
    }
    if rho.abs() <= tol {
        return Err(QuadricError::TangentPlane);
    }
    if rho < 0.0 {
        return Ok(Section::Empty);
    }
    let p = kinv * rho;
    let sq = TrigPoly::new(
        0.5 * (p[(0, 0)] + p[(1, 1)]),
        vec![0.0, 0.5 * (p[(0, 0)] - p[(1, 1)])],
        vec![0.0, p[(0, 1)]],
    );
    // √q is π-periodic, so it is projected as a function of 2θ and spread
    // onto the even harmonics; the centre contributes the exact first harmonic
    let (half, _) = fourier_projection(
        |phi| (sq.a0() + sq.coeff(2).0 * phi.cos() + sq.coeff(2).1 * phi.sin()).max(0.0).sqrt(),
        support_degree(&p).div_ceil(2),
        1e-15 * (1.0 + sq.a0().sqrt()),
        1 << 14,
    );
    let mut h = TrigPoly::zero();
    h.set(0, half.a0(), 0.0);
    h.set(1, c.x, c.y);
    for k in 1..=half.degree() {
        let (a, b) = half.coeff(k);
        h.set(2 * k, a, b);
    }
    let support = make_support_oval(h.trimmed()).map_err(|_| QuadricError::TangentPlane)?;
    let oval = support.parametrize();
    let symmetry = support.symmetry(DEFAULT_SYMMETRY_TOL);
    Ok(Section::Ellipse(Box::new(EllipseSection {
        origin,
        e1,
        e2,
        center: [c.x, c.y],
        centered_support_sq: sq,
        support,
        oval,
        symmetry,
    })))
}

/// Degree needed for the square root of the support data to reach rounding
/// level; the harmonics decay like `((√λ₁ − √λ₂)/(√λ₁ + √λ₂))^k`.
fn support_degree(p: &Matrix2<f64>) -> usize {
    let e = p.symmetric_eigenvalues();
    let (a, b) = (e.max().sqrt(), e.min().max(0.0).sqrt());
    let ratio = (a - b) / (a + b);
    if ratio < 1e-16 {
        return 2;
    }
    let k = (36.0 * std::f64::consts::LN_10 / -ratio.ln()).ceil() as usize;
    (k + 2).clamp(4, 2048)
}

/// Largest vertical gap between the paraboloid `z = ρ²` and the lower cap of
/// the approximating ellipsoid of radius `r` over the disk `ρ ≤ radius`.
/// The ellipsoid height is `2rρ²/(r + √(r² − ρ²))`, and the gap grows with `ρ`.
pub fn paraboloid_gap(r: f64, radius: f64) -> f64 {
    assert!(radius <= r, "disk must fit inside the ellipsoid");
    let rho = radius;
    let z = 2.0 * r * rho * rho / (r + (r * r - rho * rho).sqrt());
    (z - rho * rho).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn ellipse(s: Section) -> EllipseSection {
        match s {
            Section::Ellipse(e) => *e,
            Section::Empty => panic!("empty section"),
        }
    }

    #[test]
    fn sphere_equator() {
        let e = ellipse(planar_section(&QuadricModel::sphere(), &Vec3::z(), 0.0).unwrap());
        assert!(e.symmetry.symmetric && e.symmetry.asymmetry == 0.0);
        assert!((e.support.h().a0() - 1.0).abs() < 1e-15);
        assert!(e.support.h().odd_part().max_abs_coeff() < 1e-15);
        assert!((e.support.h() - &TrigPoly::constant(1.0)).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn ellipsoid_section_is_symmetric_and_on_surface() {
        let q = QuadricModel::new(QuadricKind::Ellipsoid { a: 2.0, b: 1.0, c: 1.0 }).unwrap();
        let e = ellipse(planar_section(&q, &Vec3::z(), 0.3).unwrap());
        assert!(e.symmetry.asymmetry < 1e-12);
        for j in 0..64 {
            let x = e.world_point(TAU * j as f64 / 64.0);
            assert!(q.residual(&x).abs() < 1e-12, "{}", q.residual(&x));
        }
        // semi-axes of the section are 2√0.91 and √0.91
        let h = e.support.h();
        assert!((h.eval(0.0) - 2.0 * 0.91f64.sqrt()).abs() < 1e-13);
        assert!((h.eval(TAU / 4.0) - 0.91f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn tangent_and_empty() {
        let s = QuadricModel::sphere();
        assert_eq!(planar_section(&s, &Vec3::z(), 1.0), Err(QuadricError::TangentPlane));
        assert_eq!(planar_section(&s, &Vec3::z(), 1.5).unwrap(), Section::Empty);
        let p = QuadricModel::new(QuadricKind::EllipticParaboloid).unwrap();
        assert_eq!(planar_section(&p, &Vec3::x(), 0.0).unwrap(), Section::Empty);
        let h = QuadricModel::new(QuadricKind::HyperboloidTwoSheets).unwrap();
        assert_eq!(planar_section(&h, &Vec3::z(), -2.0).unwrap(), Section::Empty);
        assert!(matches!(planar_section(&h, &Vec3::z(), 2.0).unwrap(), Section::Ellipse(_)));
    }

    #[test]
    fn tilted_section_of_moved_ellipsoid() {
        let a = Mat3::new(1.0, 0.2, 0.0, 0.0, 1.5, 0.1, 0.3, 0.0, 0.8);
        let q = QuadricModel::new(QuadricKind::Ellipsoid { a: 1.0, b: 2.0, c: 0.5 })
            .unwrap()
            .with_affine(&a, &Vec3::new(0.1, -0.2, 0.3))
            .unwrap();
        let n = Vec3::new(0.3, -0.4, 1.0);
        let e = ellipse(planar_section(&q, &n, 0.35).unwrap());
        assert!(e.symmetry.asymmetry < 1e-12, "{} {:?}", e.symmetry.asymmetry, e.support.h());
        for j in 0..64 {
            let x = e.world_point(TAU * j as f64 / 64.0);
            assert!(q.residual(&x).abs() < 1e-10, "{}", q.residual(&x));
            assert!((x.dot(&n.normalize()) - 0.35 / n.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn surface_loops_stay_on_surface() {
        let kinds = [
            QuadricKind::Ellipsoid { a: 1.0, b: 2.0, c: 3.0 },
            QuadricKind::EllipticParaboloid,
            QuadricKind::HyperboloidTwoSheets,
            QuadricKind::ParaboloidApproxEllipsoid { r: 3.0 },
        ];
        for kind in kinds {
            let q = QuadricModel::new(kind).unwrap();
            let l = q
                .surface_loop(&TrigPoly::sin_k(2, 0.2), &TrigPoly::new(0.6, vec![0.1], vec![0.0, 0.05]), 1, 128)
                .unwrap();
            let scale = 1.0 + l.positions().iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
            for p in l.positions() {
                assert!(q.contains(p, 1e-12 * scale), "{kind:?}");
            }
            // velocity agrees with a difference quotient of the loop
            let h = 1e-6;
            let fd = (l.point(1.0 + h) - l.point(1.0 - h)) / (2.0 * h);
            assert!((fd - l.velocity(1.0)).norm() < 1e-4 * scale);
        }
    }

    #[test]
    fn paraboloid_gap_shrinks() {
        let g: Vec<f64> = [10.0, 100.0, 1000.0].iter().map(|&r| paraboloid_gap(r, 1.0)).collect();
        assert!(g[0] > g[1] && g[1] > g[2] && g[2] > 0.0);
        // z_ell - ρ² ≈ ρ⁴/(4r²) for large r
        assert!((g[2] - 0.25e-6).abs() < 1e-9);
    }

    #[test]
    fn invalid_models() {
        assert!(QuadricModel::new(QuadricKind::Ellipsoid { a: 0.0, b: 1.0, c: 1.0 }).is_err());
        assert!(QuadricModel::new(QuadricKind::ParaboloidApproxEllipsoid { r: -1.0 }).is_err());
        assert!(QuadricModel::sphere().with_affine(&Mat3::zeros(), &Vec3::zeros()).is_err());
    }
}
