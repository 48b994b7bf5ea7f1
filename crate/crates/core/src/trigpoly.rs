//! Exact calculus on real trigonometric polynomials of period 2π.
//!
//! A [`TrigPoly`] stores `f(t) = a0 + Σ_k (a_k cos kt + b_k sin kt)` and is
//! closed under differentiation, half-shift, parity split, addition and
//! multiplication (the latter by exact coefficient convolution).

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::BoundBox;

/// High part of 2π (the nearest double).
pub const TAU_HI: f64 = TAU;
/// Low part of 2π, `2π - TAU_HI` to double precision.
pub const TAU_LO: f64 = 2.449_293_598_294_706_4e-16;

/// Default tolerance for treating a constant term as zero.
pub const DEFAULT_MEAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrigPolyError {
    #[error("antiderivative is not periodic: constant term {a0:e} exceeds tolerance {tol:e}")]
    NonzeroMean { a0: f64, tol: f64 },
    #[error("coefficient arrays have different lengths ({cos} cosine vs {sin} sine)")]
    LengthMismatch { cos: usize, sin: usize },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Reduces an angle to `[0, 2π)` using a two-part representation of 2π.
#[inline]
pub fn reduce_angle(t: f64) -> f64 {
    if (0.0..TAU_HI).contains(&t) {
        return t;
    }
    let n = (t / TAU_HI).floor();
    let mut r = (-n).mul_add(TAU_HI, t);
    r = (-n).mul_add(TAU_LO, r);
    if r < 0.0 {
        r += TAU_HI;
    }
    if r >= TAU_HI {
        r -= TAU_HI;
    }
    r
}

/// `cos kt` and `sin kt` for `k = 0..=n` at a single angle.
#[derive(Debug, Clone)]
pub struct Harmonics {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Harmonics {
    // Re-anchor the rotation recurrence every RESYNC steps to bound drift.
    const RESYNC: usize = 32;

    pub fn at(t: f64, n: usize) -> Self {
        let r = reduce_angle(t);
        let mut cos = Vec::with_capacity(n + 1);
        let mut sin = Vec::with_capacity(n + 1);
        cos.push(1.0);
        sin.push(0.0);
        if n == 0 {
            return Self { cos, sin };
        }
        let (s1, c1) = r.sin_cos();
        let (mut c, mut s) = (c1, s1);
        cos.push(c);
        sin.push(s);
        for k in 2..=n {
            if k % Self::RESYNC == 0 {
                let (sk, ck) = (k as f64 * r).sin_cos();
                c = ck;
                s = sk;
            } else {
                let cn = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = cn;
            }
            cos.push(c);
            sin.push(s);
        }
        Self { cos, sin }
    }

    pub fn degree(&self) -> usize {
        self.cos.len() - 1
    }
}

/// Real trigonometric polynomial of period 2π.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    a0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Default for TrigPoly {
    fn default() -> Self {
        Self::zero()
    }
}

impl TrigPoly {
    /// Builds a polynomial from its constant term and harmonic coefficients.
    /// Shorter coefficient lists are zero-padded to the common degree.
    pub fn new(a0: f64, mut cos: Vec<f64>, mut sin: Vec<f64>) -> Self {
        let n = cos.len().max(sin.len());
        cos.resize(n, 0.0);
        sin.resize(n, 0.0);
        Self { a0, cos, sin }
    }

    /// Like [`TrigPoly::new`] but rejects mismatched or non-finite input.
    pub fn try_new(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self, TrigPolyError> {
        if cos.len() != sin.len() {
            return Err(TrigPolyError::LengthMismatch {
                cos: cos.len(),
                sin: sin.len(),
            });
        }
        if !a0.is_finite() || cos.iter().chain(&sin).any(|c| !c.is_finite()) {
            return Err(TrigPolyError::NonFinite);
        }
        Ok(Self { a0, cos, sin })
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn constant(c: f64) -> Self {
        Self {
            a0: c,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    /// `amp * cos(k t)`.
    pub fn cos_k(k: usize, amp: f64) -> Self {
        let mut p = Self::constant(0.0);
        p.set(k, amp, 0.0);
        p
    }

    /// `amp * sin(k t)`.
    pub fn sin_k(k: usize, amp: f64) -> Self {
        let mut p = Self::constant(0.0);
        p.set(k, 0.0, amp);
        p
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// `(a_k, b_k)`; index 0 returns `(a0, 0)`, indices past the degree are zero.
    pub fn coeff(&self, k: usize) -> (f64, f64) {
        if k == 0 {
            (self.a0, 0.0)
        } else if k <= self.degree() {
            (self.cos[k - 1], self.sin[k - 1])
        } else {
            (0.0, 0.0)
        }
    }

    /// Sets harmonic `k` (or the constant term for `k = 0`), growing the degree if needed.
    pub fn set(&mut self, k: usize, a: f64, b: f64) {
        if k == 0 {
            self.a0 = a;
            return;
        }
        if k > self.degree() {
            self.cos.resize(k, 0.0);
            self.sin.resize(k, 0.0);
        }
        self.cos[k - 1] = a;
        self.sin[k - 1] = b;
    }

    /// Drops trailing harmonics whose coefficients are exactly zero.
    pub fn trimmed(mut self) -> Self {
        while let (Some(&a), Some(&b)) = (self.cos.last(), self.sin.last()) {
            if a == 0.0 && b == 0.0 {
                self.cos.pop();
                self.sin.pop();
            } else {
                break;
            }
        }
        self
    }

    /// Truncates (or zero-pads) to the given degree.
    pub fn with_degree(mut self, n: usize) -> Self {
        self.cos.resize(n, 0.0);
        self.sin.resize(n, 0.0);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.a0 == 0.0 && self.cos.iter().chain(&self.sin).all(|&c| c == 0.0)
    }

    /// Largest coefficient magnitude, including the constant term.
    pub fn max_abs_coeff(&self) -> f64 {
        self.cos
            .iter()
            .chain(&self.sin)
            .fold(self.a0.abs(), |m, c| m.max(c.abs()))
    }

    /// `|a0| + Σ hypot(a_k, b_k)`, an upper bound for `sup |f|`.
    pub fn abs_bound(&self) -> f64 {
        self.weighted_amplitude(0) + self.a0.abs()
    }

    /// `Σ k^p hypot(a_k, b_k)`, an upper bound for `sup |f^(p)|` when `p ≥ 1`.
    pub fn weighted_amplitude(&self, p: i32) -> f64 {
        self.cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(i, (a, b))| ((i + 1) as f64).powi(p) * a.hypot(*b))
            .sum()
    }

    /// Lipschitz constant of `f` from its coefficients.
    pub fn lipschitz_bound(&self) -> f64 {
        self.weighted_amplitude(1)
    }

    pub fn eval(&self, t: f64) -> f64 {
        if self.degree() == 0 {
            return self.a0;
        }
        self.eval_with(&Harmonics::at(t, self.degree()))
    }

    /// Evaluates against a precomputed harmonic table of sufficient degree.
    pub fn eval_with(&self, h: &Harmonics) -> f64 {
        debug_assert!(h.degree() >= self.degree());
        let mut acc = 0.0;
        for k in (0..self.degree()).rev() {
            acc += self.cos[k] * h.cos[k + 1] + self.sin[k] * h.sin[k + 1];
        }
        self.a0 + acc
    }

    /// Value and first three derivatives from one harmonic table.
    pub fn eval_derivs_with(&self, h: &Harmonics) -> [f64; 4] {
        let (mut f0, mut f1, mut f2, mut f3) = (0.0, 0.0, 0.0, 0.0);
        for i in (0..self.degree()).rev() {
            let k = (i + 1) as f64;
            let (a, b) = (self.cos[i], self.sin[i]);
            let (c, s) = (h.cos[i + 1], h.sin[i + 1]);
            let even = a * c + b * s;
            let odd = b * c - a * s;
            f0 += even;
            f1 += k * odd;
            f2 -= k * k * even;
            f3 -= k * k * k * odd;
        }
        [self.a0 + f0, f1, f2, f3]
    }

    /// Coefficient map `(a_k, b_k) -> (k b_k, -k a_k)`.
    pub fn differentiate(&self) -> Self {
        let mut cos = Vec::with_capacity(self.degree());
        let mut sin = Vec::with_capacity(self.degree());
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (i + 1) as f64;
            cos.push(k * b);
            sin.push(-k * a);
        }
        Self { a0: 0.0, cos, sin }
    }

    /// The antiderivative with zero mean. Fails if `|a0|` exceeds `tol`.
    pub fn antiderivative_zero_mean(&self, tol: f64) -> Result<Self, TrigPolyError> {
        if self.a0.abs() > tol {
            return Err(TrigPolyError::NonzeroMean { a0: self.a0, tol });
        }
        let mut cos = Vec::with_capacity(self.degree());
        let mut sin = Vec::with_capacity(self.degree());
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = (i + 1) as f64;
            cos.push(-b / k);
            sin.push(a / k);
        }
        Ok(Self { a0: 0.0, cos, sin })
    }

    /// `f(t + π)`: harmonic `k` picks up the sign `(-1)^k`.
    pub fn half_shift(&self) -> Self {
        let mut out = self.clone();
        for i in (0..self.degree()).step_by(2) {
            out.cos[i] = -out.cos[i];
            out.sin[i] = -out.sin[i];
        }
        out
    }

    /// Splits into the π-periodic part (even harmonics, including the constant)
    /// and the π-antiperiodic part (odd harmonics).
    pub fn parity_split(&self) -> (Self, Self) {
        let mut even = self.clone();
        let mut odd = Self::new(0.0, vec![0.0; self.degree()], vec![0.0; self.degree()]);
        for i in (0..self.degree()).step_by(2) {
            odd.cos[i] = self.cos[i];
            odd.sin[i] = self.sin[i];
            even.cos[i] = 0.0;
            even.sin[i] = 0.0;
        }
        (even, odd)
    }

    pub fn even_part(&self) -> Self {
        self.parity_split().0
    }

    pub fn odd_part(&self) -> Self {
        self.parity_split().1
    }

    /// `f(-t)`.
    pub fn reversed(&self) -> Self {
        Self {
            a0: self.a0,
            cos: self.cos.clone(),
            sin: self.sin.iter().map(|b| -b).collect(),
        }
    }

    /// `f(t + c)` for an arbitrary phase `c`.
    pub fn shifted(&self, c: f64) -> Self {
        let h = Harmonics::at(c, self.degree());
        let mut out = self.clone();
        for i in 0..self.degree() {
            let (a, b) = (self.cos[i], self.sin[i]);
            let (ck, sk) = (h.cos[i + 1], h.sin[i + 1]);
            // a cos k(t+c) + b sin k(t+c)
            out.cos[i] = a * ck + b * sk;
            out.sin[i] = b * ck - a * sk;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            a0: self.a0 * s,
            cos: self.cos.iter().map(|c| c * s).collect(),
            sin: self.sin.iter().map(|c| c * s).collect(),
        }
    }

    /// `Σ w_i p_i` for polynomials of possibly different degrees.
    pub fn linear_combination(terms: &[(f64, &TrigPoly)]) -> Self {
        let n = terms.iter().map(|(_, p)| p.degree()).max().unwrap_or(0);
        let mut out = Self::new(0.0, vec![0.0; n], vec![0.0; n]);
        for (w, p) in terms {
            out.a0 += w * p.a0;
            for i in 0..p.degree() {
                out.cos[i] += w * p.cos[i];
                out.sin[i] += w * p.sin[i];
            }
        }
        out
    }

    /// Exact product via convolution of the complex exponential coefficients.
    pub fn product(&self, other: &TrigPoly) -> TrigPoly {
        let (n, m) = (self.degree(), other.degree());
        let p = self.to_exponential();
        let q = other.to_exponential();
        // p, q indexed by k + degree for k in -degree..=degree
        let deg = n + m;
        let mut r = vec![(0.0f64, 0.0f64); 2 * deg + 1];
        for (i, &(pr, pi)) in p.iter().enumerate() {
            if pr == 0.0 && pi == 0.0 {
                continue;
            }
            for (j, &(qr, qi)) in q.iter().enumerate() {
                let slot = &mut r[i + j];
                slot.0 += pr * qr - pi * qi;
                slot.1 += pr * qi + pi * qr;
            }
        }
        let mut out = Self::new(r[deg].0, vec![0.0; deg], vec![0.0; deg]);
        for k in 1..=deg {
            // c_k = (a_k - i b_k) / 2; average with conj(c_{-k}) for symmetry
            let (cr, ci) = r[deg + k];
            let (dr, di) = r[deg - k];
            let re = 0.5 * (cr + dr);
            let im = 0.5 * (ci - di);
            out.cos[k - 1] = 2.0 * re;
            out.sin[k - 1] = -2.0 * im;
        }
        out
    }

    pub fn square(&self) -> TrigPoly {
        self.product(self)
    }

    fn to_exponential(&self) -> Vec<(f64, f64)> {
        let n = self.degree();
        let mut c = vec![(0.0, 0.0); 2 * n + 1];
        c[n] = (self.a0, 0.0);
        for k in 1..=n {
            let (a, b) = (self.cos[k - 1], self.sin[k - 1]);
            c[n + k] = (0.5 * a, -0.5 * b);
            c[n - k] = (0.5 * a, 0.5 * b);
        }
        c
    }

    /// Certified enclosure of `max f` over the circle.
    pub fn sup_bound(&self, tol: f64) -> Result<BoundBox, crate::bounds::BoundError> {
        crate::bounds::sup_bound(self, tol)
    }

    /// Certified enclosure of `min f` over the circle.
    pub fn inf_bound(&self, tol: f64) -> Result<BoundBox, crate::bounds::BoundError> {
        crate::bounds::inf_bound(self, tol)
    }
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::linear_combination(&[(1.0, self), (1.0, rhs)])
    }
}

impl Add for TrigPoly {
    type Output = TrigPoly;
    fn add(self, rhs: TrigPoly) -> TrigPoly {
        &self + &rhs
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: &TrigPoly) -> TrigPoly {
        TrigPoly::linear_combination(&[(1.0, self), (-1.0, rhs)])
    }
}

impl Sub for TrigPoly {
    type Output = TrigPoly;
    fn sub(self, rhs: TrigPoly) -> TrigPoly {
        &self - &rhs
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Neg for TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale(-1.0)
    }
}

impl Mul for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: &TrigPoly) -> TrigPoly {
        self.product(rhs)
    }
}

impl Mul for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: TrigPoly) -> TrigPoly {
        self.product(&rhs)
    }
}

impl Mul<f64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}

impl Mul<f64> for TrigPoly {
    type Output = TrigPoly;
    fn mul(self, rhs: f64) -> TrigPoly {
        self.scale(rhs)
    }
}

/// Table of `cos(2π m / n)`, `m = 0..n`, for exact-index DFT sums on a uniform grid.
#[derive(Debug, Clone)]
pub(crate) struct UnitRoots {
    n: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl UnitRoots {
    pub(crate) fn new(n: usize) -> Self {
        let mut cos = Vec::with_capacity(n);
        let mut sin = Vec::with_capacity(n);
        for m in 0..n {
            let (s, c) = (TAU * m as f64 / n as f64).sin_cos();
            cos.push(c);
            sin.push(s);
        }
        Self { n, cos, sin }
    }

    #[inline]
    pub(crate) fn cos_at(&self, k: usize, j: usize) -> f64 {
        self.cos[(k * j) % self.n]
    }

    #[inline]
    pub(crate) fn sin_at(&self, k: usize, j: usize) -> f64 {
        self.sin[(k * j) % self.n]
    }

    /// Evaluates `f` at `t_j = 2π j / n` for every `j`.
    pub(crate) fn eval_grid(&self, f: &TrigPoly) -> Vec<f64> {
        (0..self.n)
            .map(|j| {
                let mut acc = 0.0;
                for i in (0..f.degree()).rev() {
                    let k = i + 1;
                    acc += f.cos[i] * self.cos_at(k, j) + f.sin[i] * self.sin_at(k, j);
                }
                f.a0 + acc
            })
            .collect()
    }

    /// Trapezoid-rule Fourier coefficients of grid samples up to `degree`.
    pub(crate) fn project(&self, samples: &[f64], degree: usize) -> TrigPoly {
        debug_assert_eq!(samples.len(), self.n);
        let n = self.n as f64;
        let a0 = samples.iter().sum::<f64>() / n;
        let mut cos = vec![0.0; degree];
        let mut sin = vec![0.0; degree];
        for k in 1..=degree {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, g) in samples.iter().enumerate() {
                a += g * self.cos_at(k, j);
                b += g * self.sin_at(k, j);
            }
            cos[k - 1] = 2.0 * a / n;
            sin[k - 1] = 2.0 * b / n;
        }
        TrigPoly::new(a0, cos, sin)
    }
}

/// Fourier projection of a smooth periodic function to the given degree, using
/// trapezoid sums on a doubling grid until successive coefficient vectors agree
/// to `tol`. Returns the projection and the final grid size.
pub fn fourier_projection(
    f: impl Fn(f64) -> f64,
    degree: usize,
    tol: f64,
    max_grid: usize,
) -> (TrigPoly, usize) {
    let mut n = (2 * degree + 2).next_power_of_two().max(16);
    let sample = |n: usize| -> Vec<f64> { (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect() };
    let mut prev = UnitRoots::new(n).project(&sample(n), degree);
    loop {
        let next_n = 2 * n;
        let next = UnitRoots::new(next_n).project(&sample(next_n), degree);
        let diff = (&next - &prev).max_abs_coeff();
        n = next_n;
        if diff <= tol || n >= max_grid {
            return (next, n);
        }
        prev = next;
    }
}
