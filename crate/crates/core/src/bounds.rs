//! Certified enclosures of the extrema of trigonometric polynomials.
//!
//! The circle is covered by cells of half-width `r` centred on a uniform grid.
//! On a cell with centre `c` Taylor's theorem gives
//! `f ≤ f(c) + |f'(c)| r + L2 r² / 2`, where `L2 = Σ k² hypot(a_k, b_k)`
//! bounds `|f''|`. The largest centre value is a lower bound for `max f` and
//! the largest cell bound an upper bound. Cells whose bound falls below the
//! current lower bound cannot hold the maximum and are dropped; the rest are
//! halved until the enclosure is narrow enough or an evaluation cap fires.
//! A rounding allowance covering the evaluation error is added on both sides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trigpoly::{Harmonics, TrigPoly, UnitRoots};

/// Evaluation cap for the adaptive refinement.
pub const DEFAULT_MAX_GRID: usize = 1 << 20;

/// Closed interval `[lower, upper]` known to contain a bounded quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundBox {
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
}

impl BoundBox {
    pub fn new(lower: f64, upper: f64, certified: bool) -> Self {
        debug_assert!(lower <= upper, "empty enclosure [{lower}, {upper}]");
        Self {
            lower,
            upper,
            certified,
        }
    }

    pub fn exact(value: f64, certified: bool) -> Self {
        Self::new(value, value, certified)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn is_positive(&self) -> bool {
        self.lower > 0.0
    }

    pub fn is_nonpositive(&self) -> bool {
        self.upper <= 0.0
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.upper, -self.lower, self.certified)
    }

    /// Image under a nondecreasing map on `[0, ∞)` such as `sqrt`.
    pub fn sqrt(&self) -> Self {
        Self::new(
            self.lower.max(0.0).sqrt(),
            self.upper.max(0.0).sqrt(),
            self.certified,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    /// The grid cap fired before the enclosure reached the requested width.
    /// The carried enclosure is still valid.
    #[error("iteration cap reached; enclosure [{0:?}] wider than requested")]
    IterationCap(BoundBox),
}

impl BoundError {
    pub fn enclosure(&self) -> BoundBox {
        match self {
            BoundError::IterationCap(b) => *b,
        }
    }
}

/// When to stop refining.
#[derive(Debug, Clone, Copy)]
pub enum Stop {
    /// Enclosure narrower than this absolute width.
    Width(f64),
    /// Sign of the extremum decided (`lower > 0` or `upper <= 0`), or width below the value.
    SignOrWidth(f64),
}

fn coefficient_sum(f: &TrigPoly, p: i32) -> f64 {
    let harmonics: f64 = f
        .cos_coeffs()
        .iter()
        .zip(f.sin_coeffs())
        .enumerate()
        .map(|(i, (a, b))| ((i + 1) as f64).powi(p) * (a.abs() + b.abs()))
        .sum();
    if p == 0 {
        harmonics + f.a0().abs()
    } else {
        harmonics
    }
}

fn rounding_allowance(f: &TrigPoly, p: i32) -> f64 {
    8.0 * (f.degree() as f64 + 2.0) * f64::EPSILON * coefficient_sum(f, p)
}

#[derive(Clone, Copy)]
struct Cell {
    centre: f64,
    value: f64,
    slope: f64,
}

/// Enclosure of `max f` refined until `stop` holds or about `max_evals`
/// evaluations have been spent. Returns the enclosure and whether the stop
/// criterion was met.
pub fn sup_enclosure(f: &TrigPoly, stop: Stop, max_evals: usize) -> (BoundBox, bool) {
    if f.degree() == 0 || f.cos_coeffs().iter().chain(f.sin_coeffs()).all(|&c| c == 0.0) {
        return (BoundBox::exact(f.a0(), true), true);
    }
    let df = f.differentiate();
    let curv = f.weighted_amplitude(2);
    let slack = rounding_allowance(f, 0);
    let slope_slack = rounding_allowance(&df, 0);
    let m = (4 * f.degree()).next_power_of_two().max(64);
    let roots = UnitRoots::new(m);
    let values = roots.eval_grid(f);
    let slopes = roots.eval_grid(&df);
    let mut cells: Vec<Cell> = (0..m)
        .map(|j| Cell {
            centre: std::f64::consts::TAU * j as f64 / m as f64,
            value: values[j],
            slope: slopes[j],
        })
        .collect();
    let mut r = std::f64::consts::PI / m as f64;
    let mut evals = m;
    let mut lower = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    loop {
        let bound = |c: &Cell, r: f64| c.value + (c.slope.abs() + slope_slack) * r + 0.5 * curv * r * r;
        let upper = cells.iter().map(|c| bound(c, r)).fold(f64::NEG_INFINITY, f64::max);
        let enc = BoundBox::new(lower - slack, upper.max(lower) + slack, true);
        let done = match stop {
            Stop::Width(w) => enc.width() <= w,
            Stop::SignOrWidth(w) => enc.lower > 0.0 || enc.upper <= 0.0 || enc.width() <= w,
        };
        if done {
            return (enc, true);
        }
        // no surviving cells: the enclosure cannot get any narrower
        if evals >= max_evals || cells.is_empty() || r == 0.0 {
            return (enc, false);
        }
        let keep: Vec<Cell> = cells.into_iter().filter(|c| bound(c, r) >= lower).collect();
        let h = 0.5 * r;
        let children: Vec<Cell> = keep
            .iter()
            .flat_map(|c| [c.centre - h, c.centre + h])
            .map(|t| {
                let d = f.eval_derivs_with(&Harmonics::at(t, f.degree()));
                Cell {
                    centre: t,
                    value: d[0],
                    slope: d[1],
                }
            })
            .collect();
        evals += children.len();
        for c in &children {
            lower = lower.max(c.value);
        }
        cells = children;
        r = h;
    }
}

/// Enclosure of `min f`; see [`sup_enclosure`].
pub fn inf_enclosure(f: &TrigPoly, stop: Stop, max_grid: usize) -> (BoundBox, bool) {
    // the sign of min f is decided exactly when the sign of max(-f) is
    let (b, ok) = sup_enclosure(&f.scale(-1.0), stop, max_grid);
    (b.neg(), ok)
}

/// Certified enclosure of `max f` of width at most `tol`.
pub fn sup_bound(f: &TrigPoly, tol: f64) -> Result<BoundBox, BoundError> {
    match sup_enclosure(f, Stop::Width(tol), DEFAULT_MAX_GRID) {
        (b, true) => Ok(b),
        (b, false) => Err(BoundError::IterationCap(b)),
    }
}

/// Certified enclosure of `min f` of width at most `tol`.
pub fn inf_bound(f: &TrigPoly, tol: f64) -> Result<BoundBox, BoundError> {
    match inf_enclosure(f, Stop::Width(tol), DEFAULT_MAX_GRID) {
        (b, true) => Ok(b),
        (b, false) => Err(BoundError::IterationCap(b)),
    }
}

/// Enclosure of `min f` refined until its sign is decided or it is `tol` wide.
pub fn inf_sign(f: &TrigPoly, tol: f64) -> BoundBox {
    inf_enclosure(f, Stop::SignOrWidth(tol), DEFAULT_MAX_GRID).0
}
