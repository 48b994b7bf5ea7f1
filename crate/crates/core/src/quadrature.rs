//! Quadrature and differentiation helpers for smooth periodic data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::Vec3;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P_n'(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels.
pub struct CompositeGauss {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl CompositeGauss {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let lo = a + h * p as f64;
            let mid = lo + 0.5 * h;
            let mut acc = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                acc += w * f(mid + 0.5 * h * x);
            }
            total += 0.5 * h * acc;
        }
        total
    }
}

/// Result of a quadrature with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub points: usize,
}

/// Periodic trapezoid rule on a doubling grid, stopping when two successive
/// values agree to `tol`. Spectrally accurate for smooth periodic integrands.
pub fn periodic_trapezoid(
    f: impl Fn(f64) -> f64,
    period: f64,
    tol: f64,
    min_points: usize,
    max_points: usize,
) -> Quadrature {
    let mut n = min_points.max(8);
    let mut sum: f64 = (0..n).map(|j| f(period * j as f64 / n as f64)).sum();
    let mut value = sum * period / n as f64;
    loop {
        // reuse previous nodes; add midpoints
        let mid: f64 = (0..n)
            .map(|j| f(period * (j as f64 + 0.5) / n as f64))
            .sum();
        sum += mid;
        n *= 2;
        let next = sum * period / n as f64;
        let err = (next - value).abs();
        value = next;
        if err <= tol || n >= max_points {
            return Quadrature {
                value,
                error_estimate: err,
                points: n,
            };
        }
    }
}

/// Periodic trapezoid over pre-sampled values, with the error estimated from
/// the sum over every other sample.
pub fn sampled_trapezoid(values: &[f64], period: f64) -> Quadrature {
    let n = values.len();
    let fine = values.iter().sum::<f64>() * period / n as f64;
    let err = if n >= 4 && n % 2 == 0 {
        let coarse = values.iter().step_by(2).sum::<f64>() * period / (n / 2) as f64;
        (fine - coarse).abs()
    } else {
        f64::NAN
    };
    Quadrature {
        value: fine,
        error_estimate: err,
        points: n,
    }
}

const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 5] = [
    -205.0 / 72.0,
    8.0 / 5.0,
    -1.0 / 5.0,
    8.0 / 315.0,
    -1.0 / 560.0,
];

/// Eighth-order central first derivative of uniformly spaced periodic samples.
pub fn periodic_derivative(samples: &[Vec3], spacing: f64) -> Vec<Vec3> {
    let n = samples.len();
    (0..n)
        .map(|i| {
            let mut acc = Vec3::zeros();
            for (k, c) in D1.iter().enumerate() {
                let k = k + 1;
                acc += *c * (samples[(i + k) % n] - samples[(i + n - k) % n]);
            }
            acc / spacing
        })
        .collect()
}

/// Eighth-order central second derivative of uniformly spaced periodic samples.
pub fn periodic_second_derivative(samples: &[Vec3], spacing: f64) -> Vec<Vec3> {
    let n = samples.len();
    (0..n)
        .map(|i| {
            let mut acc = D2[0] * samples[i];
            for (k, c) in D2.iter().enumerate().skip(1) {
                acc += *c * (samples[(i + k) % n] + samples[(i + n - k) % n]);
            }
            acc / (spacing * spacing)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^18 over [-1,1] = 2/19, exact for 10 nodes
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((v - 2.0 / 19.0).abs() < 1e-14);
    }

    #[test]
    fn trapezoid_spectral() {
        let q = periodic_trapezoid(|t| (t.cos()).exp(), TAU, 1e-14, 8, 1 << 16);
        // 2π I0(1)
        assert!((q.value - TAU * 1.266_065_877_752_008_4).abs() < 1e-13);
    }

    #[test]
    fn fd_derivatives() {
        let n = 256;
        let h = TAU / n as f64;
        let s: Vec<Vec3> = (0..n)
            .map(|j| {
                let t = j as f64 * h;
                Vec3::new(t.cos(), (2.0 * t).sin(), 0.0)
            })
            .collect();
        let d1 = periodic_derivative(&s, h);
        let d2 = periodic_second_derivative(&s, h);
        for j in 0..n {
            let t = j as f64 * h;
            assert!((d1[j] - Vec3::new(-t.sin(), 2.0 * (2.0 * t).cos(), 0.0)).norm() < 1e-11);
            assert!((d2[j] - Vec3::new(-t.cos(), -4.0 * (2.0 * t).sin(), 0.0)).norm() < 1e-9);
        }
    }
}
