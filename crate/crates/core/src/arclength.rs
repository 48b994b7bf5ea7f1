//! Arclength tables and their inversion for smooth closed loops.

use crate::curve::{CurveError, SmoothLoop};
use crate::quadrature::CompositeGauss;

const GAUSS_ORDER: usize = 16;

/// Cumulative arclength at the nodes of a uniform parameter partition,
/// computed panel by panel with a composite Gauss rule.
pub struct ArclengthTable<'a> {
    curve: &'a dyn SmoothLoop,
    rule: CompositeGauss,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl<'a> ArclengthTable<'a> {
    pub fn new(curve: &'a dyn SmoothLoop, panels: usize) -> Result<Self, CurveError> {
        let rule = CompositeGauss::new(GAUSS_ORDER);
        let period = curve.period();
        let knots: Vec<f64> = (0..=panels).map(|j| period * j as f64 / panels as f64).collect();
        let mut cumulative = Vec::with_capacity(panels + 1);
        cumulative.push(0.0);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            if curve.velocity(mid).norm() == 0.0 {
                return Err(CurveError::ZeroVelocity { t: mid });
            }
            total += rule.integrate(|t| curve.velocity(t).norm(), w[0], w[1], 1);
            cumulative.push(total);
        }
        Ok(Self {
            curve,
            rule,
            knots,
            cumulative,
        })
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    /// Arclength from 0 to `t` for `t` in `[0, period]`.
    pub fn arclength_at(&self, t: f64) -> f64 {
        let panels = self.knots.len() - 1;
        let h = self.knots[1];
        let j = ((t / h).floor() as usize).min(panels - 1);
        self.cumulative[j] + self.rule.integrate(|x| self.curve.velocity(x).norm(), self.knots[j], t, 1)
    }

    /// Parameter `t` with arclength `s`, by safeguarded Newton iteration.
    pub fn parameter_at(&self, s: f64) -> f64 {
        let panels = self.knots.len() - 1;
        let j = match self.cumulative.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(j) => return self.knots[j.min(panels)],
            Err(j) => j.clamp(1, panels) - 1,
        };
        let (mut lo, mut hi) = (self.knots[j], self.knots[j + 1]);
        let frac = (s - self.cumulative[j]) / (self.cumulative[j + 1] - self.cumulative[j]);
        let mut t = lo + frac * (hi - lo);
        for _ in 0..60 {
            let r = self.arclength_at(t) - s;
            if r > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let speed = self.curve.velocity(t).norm();
            let mut next = t - r / speed;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                return next;
            }
            t = next;
        }
        t
    }
}
