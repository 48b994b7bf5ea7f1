//! Global verification of skewness.
//!
//! The defect `F(t, s) = ‖τ(t) × τ(s)‖` vanishes exactly at pairs with parallel
//! tangent lines. Because `F` is symmetric it suffices to search pairs
//! `(t, t + d)` with `d ∈ [δ, π]`, where `δ` is a curvature-controlled band
//! around the diagonal inside which `F` is provably positive. The search is a
//! level-synchronous branch and bound: every level is processed in parallel
//! and merged in a fixed order, so results do not depend on the worker count.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, BoundBox};
use crate::curve::{AnalyticCurve, CurveError, SpaceCurve};
use crate::trigpoly::TrigPoly;
use crate::Vec3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("velocity vanishes at t = {t}")]
    ZeroVelocity { t: f64 },
    #[error("operation requires the analytic backend")]
    Unsupported,
    #[error("curve is not immersed: inf |γ'| lies in [{}, {}]", .0.lower, .0.upper)]
    NotImmersed(BoundBox),
    #[error("curvature is not certified nonvanishing: inf |γ'×γ''|² lies in [{}, {}]", .0.lower, .0.upper)]
    FlatPoint(BoundBox),
    #[error("input must be an analytic curve certified skew (got status {0:?})")]
    NotCertifiedSkew(SkewStatus),
}

impl From<CurveError> for VerifyError {
    fn from(e: CurveError) -> Self {
        match e {
            CurveError::ZeroVelocity { t } => VerifyError::ZeroVelocity { t },
            _ => VerifyError::Unsupported,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SkewStatus {
    /// Positive lower bound on the defect, machine-validated.
    CertifiedSkew,
    /// Sampled search found no parallel pair; no certificate is possible.
    UncertifiedSkew,
    /// A parallel pair was found and polished.
    NotSkew,
    /// Budget exhausted or the diagonal could not be controlled.
    Inconclusive,
}

impl SkewStatus {
    /// Whether the status asserts that the loop is skew (certified or not).
    pub fn is_skew(self) -> bool {
        matches!(self, SkewStatus::CertifiedSkew | SkewStatus::UncertifiedSkew)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub s: f64,
    pub defect: f64,
}

/// Certified derivative bounds of an analytic curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBounds {
    /// Enclosures of `sup ‖γ^(k)‖` for `k = 1, 2, 3`.
    pub b1: BoundBox,
    pub b2: BoundBox,
    pub b3: BoundBox,
    /// Enclosure of `inf ‖γ'‖`.
    pub m1: BoundBox,
}

/// The excluded neighbourhood of the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalBand {
    /// Half-width: for `0 < |t − s| ≤ delta`, `F(t, s) ≥ constant · |t − s|`.
    pub delta: f64,
    pub constant: f64,
    /// Lower bound of `inf ‖γ' × γ''‖`.
    pub m_kappa: f64,
    /// Upper bound of `sup ‖γ' × γ''‖`.
    pub c_kappa: f64,
}

/// Constants entering the box lower bounds, recorded for audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub m1: f64,
    pub m_kappa: f64,
    pub c_kappa: f64,
    /// Lipschitz constant of the tantrix, `sup ‖τ'‖ ≤ lip`.
    pub lip: f64,
    /// `sup ‖τ''‖ ≤ lip2`.
    pub lip2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub refute_tol: f64,
    /// Defect a polished candidate must reach before it counts as a witness.
    pub polish_tol: f64,
    pub budget: u64,
    /// Worker threads; `None` runs in the ambient thread pool.
    pub workers: Option<usize>,
    /// A box becomes a leaf once its lower bound reaches this fraction of the
    /// best value seen.
    pub leaf_ratio: f64,
    /// Grid size for sampled curves (and analytic curves with a flat point).
    /// `None` uses the sample count, or 2048 for analytic curves.
    pub grid: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            refute_tol: 1e-10,
            polish_tol: 1e-12,
            budget: 1_000_000,
            workers: None,
            leaf_ratio: 0.5,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewCertificate {
    pub status: SkewStatus,
    /// Certified lower bound of the defect off the band (CertifiedSkew), or
    /// the grid minimum (UncertifiedSkew).
    pub margin: Option<f64>,
    pub witness: Option<Witness>,
    /// Best polished candidate that did not reach the witness threshold.
    pub near_witness: Option<Witness>,
    pub band_width: f64,
    pub band_constant: f64,
    pub boxes_processed: u64,
    pub budget: u64,
    pub refute_tol: f64,
    pub polish_tol: f64,
    pub leaf_ratio: f64,
    pub certified: bool,
    pub constants: Option<BoundConstants>,
    /// Smallest defect value evaluated anywhere during the search.
    pub best_value: f64,
    pub diagnostics: Vec<String>,
}

impl SkewCertificate {
    fn blank(opts: &VerifyOptions) -> Self {
        Self {
            status: SkewStatus::Inconclusive,
            margin: None,
            witness: None,
            near_witness: None,
            band_width: 0.0,
            band_constant: 0.0,
            boxes_processed: 0,
            budget: opts.budget,
            refute_tol: opts.refute_tol,
            polish_tol: opts.polish_tol,
            leaf_ratio: opts.leaf_ratio,
            certified: false,
            constants: None,
            best_value: f64::INFINITY,
            diagnostics: Vec::new(),
        }
    }
}

/// `‖τ(t) × τ(s)‖`.
pub fn defect(c: &SpaceCurve, t: f64, s: f64) -> Result<f64, VerifyError> {
    Ok(c.tantrix_at(t)?.cross(&c.tantrix_at(s)?).norm())
}

const REL_TOL: f64 = 1e-9;

/// Certified `sup ‖γ^(k)‖` for `k = 1..3` and `inf ‖γ'‖`.
pub fn derivative_bounds(c: &SpaceCurve) -> Result<DerivativeBounds, VerifyError> {
    let a = c.as_analytic().ok_or(VerifyError::Unsupported)?;
    let d1 = a.derivative();
    let d2 = d1.derivative();
    let d3 = d2.derivative();
    let m1 = d1.inf_norm(REL_TOL);
    if !m1.is_positive() {
        return Err(VerifyError::NotImmersed(m1));
    }
    Ok(DerivativeBounds {
        b1: d1.sup_norm(REL_TOL),
        b2: d2.sup_norm(REL_TOL),
        b3: d3.sup_norm(REL_TOL),
        m1,
    })
}

fn curvature_polynomial(a: &AnalyticCurve) -> TrigPoly {
    let d1 = a.derivative();
    let d2 = d1.derivative();
    d1.cross(&d2).norm_squared()
}

/// The diagonal band. With `m_κ ≤ inf ‖γ'×γ''‖`, Taylor's theorem gives
/// `‖γ'(t) × γ'(t+h)‖ ≥ |h| (m_κ − |h| B1 B3 / 2)`; at `|h| ≤ 1.5 m_κ/(B1 B3)`
/// the bracket is at least `m_κ/4`, so `F ≥ |h| m_κ / (4 B1²)`.
pub fn diagonal_band(c: &SpaceCurve) -> Result<DiagonalBand, VerifyError> {
    let a = c.as_analytic().ok_or(VerifyError::Unsupported)?;
    let k2 = curvature_polynomial(a);
    let scale = k2.abs_bound().max(f64::MIN_POSITIVE);
    let inf = bounds::inf_sign(&k2, REL_TOL * scale);
    if !inf.is_positive() {
        return Err(VerifyError::FlatPoint(inf));
    }
    let sup = match bounds::sup_bound(&k2, REL_TOL * scale) {
        Ok(b) => b,
        Err(e) => e.enclosure(),
    };
    let db = derivative_bounds(c)?;
    let m_kappa = inf.lower.sqrt();
    let (b1, b3) = (db.b1.upper, db.b3.upper);
    let delta = (1.5 * m_kappa / (b1 * b3)).min(PI / 2.0);
    Ok(DiagonalBand {
        delta,
        constant: m_kappa / (4.0 * b1 * b1),
        m_kappa,
        c_kappa: sup.upper.sqrt(),
    })
}

/// Tantrix and its derivative.
fn tjet(c: &SpaceCurve, t: f64) -> Option<(Vec3, Vec3)> {
    c.tantrix_jet(t)
}

/// Local descent on `τ(t) × τ(s) = 0` (Levenberg–Marquardt on the three
/// components). Returns the final pair and its defect.
pub fn polish(c: &SpaceCurve, t: f64, s: f64) -> Option<Witness> {
    let residual = |t: f64, s: f64| -> Option<(Vec3, Vec3, Vec3)> {
        let (a, da) = tjet(c, t)?;
        let (b, db) = tjet(c, s)?;
        Some((a.cross(&b), da.cross(&b), a.cross(&db)))
    };
    let (mut t, mut s) = (t, s);
    let (mut r, mut jt, mut js) = residual(t, s)?;
    let mut lambda = 1e-3;
    for _ in 0..100 {
        let f = r.norm();
        if f < 1e-17 {
            break;
        }
        let a11 = jt.dot(&jt);
        let a12 = jt.dot(&js);
        let a22 = js.dot(&js);
        let g1 = jt.dot(&r);
        let g2 = js.dot(&r);
        let mut improved = false;
        for _ in 0..30 {
            let m11 = a11 * (1.0 + lambda) + 1e-300;
            let m22 = a22 * (1.0 + lambda) + 1e-300;
            let det = m11 * m22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                lambda *= 4.0;
                continue;
            }
            let dt = -(m22 * g1 - a12 * g2) / det;
            let ds = -(m11 * g2 - a12 * g1) / det;
            let (nt, ns) = (t + dt, s + ds);
            if let Some((nr, njt, njs)) = residual(nt, ns) {
                if nr.norm() < f {
                    t = nt;
                    s = ns;
                    r = nr;
                    jt = njt;
                    js = njs;
                    lambda = (lambda / 3.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    Some(Witness {
        t,
        s,
        defect: r.norm(),
    })
}

/// Distance of `d` from `0` modulo `period`.
fn circular_gap(d: f64, period: f64) -> f64 {
    let r = d.rem_euclid(period);
    r.min(period - r)
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    t0: f64,
    t1: f64,
    d0: f64,
    d1: f64,
}

enum Outcome {
    Leaf { lb: f64, fc: f64, tc: f64, dc: f64 },
    Split { cells: [Cell; 2], fc: f64, tc: f64, dc: f64 },
    Failed { t: f64 },
}

struct Bnb<'a> {
    curve: &'a SpaceCurve,
    k: BoundConstants,
}

impl Bnb<'_> {
    fn process(&self, cell: &Cell, upper: f64, ratio: f64) -> Outcome {
        let tc = 0.5 * (cell.t0 + cell.t1);
        let dc = 0.5 * (cell.d0 + cell.d1);
        let rt = 0.5 * (cell.t1 - cell.t0);
        let rd = 0.5 * (cell.d1 - cell.d0);
        let sc = tc + dc;
        let (Some((a, da)), Some((b, db))) = (tjet(self.curve, tc), tjet(self.curve, sc)) else {
            return Outcome::Failed { t: tc };
        };
        let r = a.cross(&b);
        let fc = r.norm();
        let k = &self.k;
        // first order: each tantrix moves at most lip·(distance)
        let lb1 = fc - k.lip * (2.0 * rt + rd);
        // second order around the center, componentwise for the linear part
        let jt = da.cross(&b) + a.cross(&db);
        let jd = a.cross(&db);
        let mut lin2 = 0.0;
        for i in 0..3 {
            let m = (r[i].abs() - jt[i].abs() * rt - jd[i].abs() * rd).max(0.0);
            lin2 += m * m;
        }
        let (at, as_) = (rt, rt + rd);
        let rem = 0.5 * k.lip2 * (at * at + as_ * as_) + k.lip * k.lip * at * as_;
        let lb2 = lin2.sqrt() - rem;
        let lb = lb1.max(lb2) - 1e-14;
        let threshold = ratio * upper.min(fc);
        if lb > 0.0 && lb >= threshold {
            return Outcome::Leaf { lb, fc, tc, dc };
        }
        let cells = if 2.0 * rt >= rd {
            [
                Cell { t1: tc, ..*cell },
                Cell { t0: tc, ..*cell },
            ]
        } else {
            [
                Cell { d1: dc, ..*cell },
                Cell { d0: dc, ..*cell },
            ]
        };
        Outcome::Split { cells, fc, tc, dc }
    }
}

fn run_in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            Ok(pool) => pool.install(f),
            Err(_) => f(),
        },
        None => f(),
    }
}

/// Decides skewness of a closed curve. See the module documentation.
pub fn verify_skew(c: &SpaceCurve, opts: &VerifyOptions) -> Result<SkewCertificate, VerifyError> {
    run_in_pool(opts.workers, || match c {
        SpaceCurve::Analytic(_) => verify_analytic(c, opts),
        SpaceCurve::SampledC1(s) => {
            let m = s.velocities().iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
            if !(m > 0.0) {
                return Err(VerifyError::NotImmersed(BoundBox::new(0.0, m.max(0.0), false)));
            }
            let grid = opts.grid.unwrap_or(s.len());
            Ok(verify_grid(c, grid, opts, SkewStatus::UncertifiedSkew, Vec::new()))
        }
    })
}

fn verify_analytic(c: &SpaceCurve, opts: &VerifyOptions) -> Result<SkewCertificate, VerifyError> {
    let db = derivative_bounds(c)?;
    let band = match diagonal_band(c) {
        Ok(b) => b,
        Err(VerifyError::FlatPoint(inf)) => {
            let note = format!(
                "curvature not certified nonvanishing (inf |γ'×γ''|² in [{:e}, {:e}]); grid search only",
                inf.lower, inf.upper
            );
            let grid = opts.grid.unwrap_or(2048);
            return Ok(verify_grid(c, grid, opts, SkewStatus::Inconclusive, vec![note]));
        }
        Err(e) => return Err(e),
    };
    let (b1, b2, b3, m1) = (db.b1.upper, db.b2.upper, db.b3.upper, db.m1.lower);
    let lip = (b2 / m1).min(band.c_kappa / (m1 * m1));
    let lip2 = b3 / m1 + 3.0 * b2 * b2 / (m1 * m1);
    let k = BoundConstants {
        b1,
        b2,
        b3,
        m1,
        m_kappa: band.m_kappa,
        c_kappa: band.c_kappa,
        lip,
        lip2,
    };
    let mut cert = SkewCertificate::blank(opts);
    cert.band_width = band.delta;
    cert.band_constant = band.constant;
    cert.certified = true;
    cert.constants = Some(k);

    let bnb = Bnb { curve: c, k };
    let deg = c.as_analytic().map(|a| a.degree()).unwrap_or(1);
    let nt = (8 * deg).clamp(16, 512);
    let nd = (nt / 2).max(8);
    let span = PI - band.delta;
    let mut frontier: Vec<Cell> = Vec::with_capacity(nt * nd);
    for i in 0..nt {
        for j in 0..nd {
            frontier.push(Cell {
                t0: TAU * i as f64 / nt as f64,
                t1: TAU * (i + 1) as f64 / nt as f64,
                d0: band.delta + span * j as f64 / nd as f64,
                d1: band.delta + span * (j + 1) as f64 / nd as f64,
            });
        }
    }
    let mut upper = f64::INFINITY;
    let mut best_pt = (0.0, PI);
    let mut margin = f64::INFINITY;
    let mut processed: u64 = 0;
    let mut last_polished = f64::INFINITY;
    let separation = (0.5 * band.delta).max(1e-6);

    while !frontier.is_empty() {
        if processed + frontier.len() as u64 > opts.budget {
            cert.diagnostics.push(format!(
                "box budget {} exhausted with {} boxes open",
                opts.budget,
                frontier.len()
            ));
            break;
        }
        processed += frontier.len() as u64;
        let outcomes: Vec<Outcome> = frontier
            .par_iter()
            .map(|cell| bnb.process(cell, upper, opts.leaf_ratio))
            .collect();
        let mut next = Vec::new();
        for o in outcomes {
            match o {
                Outcome::Leaf { lb, fc, tc, dc } => {
                    margin = margin.min(lb);
                    if fc < upper {
                        upper = fc;
                        best_pt = (tc, dc);
                    }
                }
                Outcome::Split { cells, fc, tc, dc } => {
                    if fc < upper {
                        upper = fc;
                        best_pt = (tc, dc);
                    }
                    next.extend_from_slice(&cells);
                }
                Outcome::Failed { t } => return Err(VerifyError::ZeroVelocity { t }),
            }
        }
        frontier = next;
        // try to refute once the best value is small and has improved
        if upper < 1e-2 && upper < 0.5 * last_polished && !frontier.is_empty() {
            last_polished = upper;
            if let Some(w) = polish(c, best_pt.0, best_pt.0 + best_pt.1) {
                if let Some(done) = judge_candidate(&mut cert, w, c.period(), separation, opts) {
                    cert.boxes_processed = processed;
                    cert.best_value = upper.min(w.defect);
                    return Ok(done);
                }
            }
        }
    }
    cert.boxes_processed = processed;
    cert.best_value = upper;
    if frontier.is_empty() && margin > 0.0 && margin.is_finite() {
        cert.status = SkewStatus::CertifiedSkew;
        cert.margin = Some(margin);
    } else {
        cert.status = SkewStatus::Inconclusive;
        // a last refutation attempt from the best point found
        if let Some(w) = polish(c, best_pt.0, best_pt.0 + best_pt.1) {
            if let Some(done) = judge_candidate(&mut cert, w, c.period(), separation, opts) {
                return Ok(done);
            }
        }
    }
    Ok(cert)
}

/// Accepts a polished candidate as a witness (returning the finished
/// certificate) or files it as a near-witness.
fn judge_candidate(
    cert: &mut SkewCertificate,
    w: Witness,
    period: f64,
    separation: f64,
    opts: &VerifyOptions,
) -> Option<SkewCertificate> {
    let gap = circular_gap(w.s - w.t, period);
    if gap < separation {
        cert.diagnostics
            .push(format!("polished candidate collapsed toward the diagonal (gap {gap:e})"));
        return None;
    }
    if w.defect < opts.polish_tol.min(opts.refute_tol) {
        let mut done = cert.clone();
        done.status = SkewStatus::NotSkew;
        done.witness = Some(Witness {
            t: w.t.rem_euclid(period),
            s: w.s.rem_euclid(period),
            defect: w.defect,
        });
        done.margin = None;
        return Some(done);
    }
    if cert.near_witness.is_none_or(|n| w.defect < n.defect) {
        cert.near_witness = Some(w);
    }
    None
}

/// Tantrix values on a uniform grid of `n` parameters.
fn tantrix_grid(c: &SpaceCurve, n: usize) -> Option<Vec<Vec3>> {
    let p = c.period();
    (0..n)
        .into_par_iter()
        .map(|j| c.tantrix_at(p * j as f64 / n as f64).ok())
        .collect()
}

/// Grid minima of `F(j, k) = ‖τ_j × τ_{j+k}‖` for `k` in `[k_min, n/2]`
/// that are no larger than any grid neighbour, sorted by value.
fn grid_local_minima(tau: &[Vec3], k_min: usize) -> (f64, Vec<(f64, usize, usize)>) {
    let n = tau.len();
    let half = n / 2;
    let f = |j: usize, k: usize| tau[j % n].cross(&tau[(j + k) % n]).norm();
    let rows: Vec<(f64, Vec<(f64, usize, usize)>)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut row_min = f64::INFINITY;
            let mut mins = Vec::new();
            for k in k_min..=half {
                let v = f(j, k);
                row_min = row_min.min(v);
                let mut is_min = true;
                'nb: for dj in [n - 1, 0, 1] {
                    for dk in [-1i64, 0, 1] {
                        if dj == 0 && dk == 0 {
                            continue;
                        }
                        let kk = k as i64 + dk;
                        if kk < k_min as i64 {
                            continue;
                        }
                        let jj = j + dj;
                        let kk = kk as usize;
                        // columns past n/2 are the swapped pairs
                        let w = if kk > half { f(jj + kk, n - kk) } else { f(jj, kk) };
                        if w < v {
                            is_min = false;
                            break 'nb;
                        }
                    }
                }
                if is_min {
                    mins.push((v, j, k));
                }
            }
            (row_min, mins)
        })
        .collect();
    let mut global = f64::INFINITY;
    let mut all = Vec::new();
    for (m, mins) in rows {
        global = global.min(m);
        all.extend(mins);
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    (global, all)
}

/// Grid search with polishing, for curves without derivative bounds.
fn verify_grid(
    c: &SpaceCurve,
    n: usize,
    opts: &VerifyOptions,
    fallback: SkewStatus,
    diagnostics: Vec<String>,
) -> SkewCertificate {
    let mut cert = SkewCertificate::blank(opts);
    cert.diagnostics = diagnostics;
    let n = n.max(16);
    let period = c.period();
    let Some(tau) = tantrix_grid(c, n) else {
        cert.diagnostics.push("velocity vanishes on the grid".into());
        return cert;
    };
    let band_samples = 2;
    cert.band_width = band_samples as f64 * period / n as f64;
    let (global, minima) = grid_local_minima(&tau, band_samples);
    cert.boxes_processed = (n * (n / 2 + 1 - band_samples)) as u64;
    cert.best_value = global;
    let h = period / n as f64;
    let separation = cert.band_width;
    for &(_, j, k) in minima.iter().take(32) {
        let t = h * j as f64;
        if let Some(w) = polish(c, t, t + h * k as f64) {
            if let Some(done) = judge_candidate(&mut cert, w, period, separation, opts) {
                return done;
            }
        }
    }
    cert.status = fallback;
    if fallback == SkewStatus::UncertifiedSkew {
        cert.margin = Some(global);
    }
    cert
}

/// All distinct local minima of the defect below `refute_tol`, found by a
/// multistart search from the local minima of a `seeds × seeds/2` grid.
pub fn find_parallel_pair(c: &SpaceCurve, seeds: usize, refute_tol: f64) -> Vec<Witness> {
    let n = seeds.max(8);
    let period = c.period();
    let Some(tau) = tantrix_grid(c, n) else {
        return Vec::new();
    };
    let (_, minima) = grid_local_minima(&tau, 1);
    let h = period / n as f64;
    let candidates: Vec<Witness> = minima
        .iter()
        .take(64)
        .collect::<Vec<_>>()
        .par_iter()
        .filter_map(|&&(_, j, k)| {
            let t = h * j as f64;
            polish(c, t, t + h * k as f64)
        })
        .collect();
    let min_gap = 1e-3 * period;
    let mut out: Vec<Witness> = Vec::new();
    for w in candidates {
        if !(w.defect < refute_tol) || circular_gap(w.s - w.t, period) < min_gap {
            continue;
        }
        let w = canonical_pair(w, period);
        let dup = out.iter().any(|o| same_pair(o, &w, period));
        if !dup {
            out.push(w);
        }
    }
    out
}

fn canonical_pair(w: Witness, period: f64) -> Witness {
    let a = w.t.rem_euclid(period);
    let b = w.s.rem_euclid(period);
    let d = (b - a).rem_euclid(period);
    if d > 0.5 * period {
        Witness { t: b, s: a, defect: w.defect }
    } else {
        Witness { t: a, s: b, defect: w.defect }
    }
}

fn same_pair(x: &Witness, y: &Witness, period: f64) -> bool {
    let tol = 1e-6 * period.max(1.0);
    let direct = circular_gap(x.t - y.t, period) < tol && circular_gap(x.s - y.s, period) < tol;
    let swapped = circular_gap(x.t - y.s, period) < tol && circular_gap(x.s - y.t, period) < tol;
    direct || swapped
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub trials: usize,
    pub survived: usize,
    pub fraction: f64,
}

/// Bound on the C² norm of a vector of trigonometric polynomials:
/// `Σ_components (|a0| + Σ_k (1 + k + k²) hypot(a_k, b_k))`.
pub fn c2_coefficient_bound(a: &AnalyticCurve) -> f64 {
    a.components()
        .iter()
        .map(|p| p.abs_bound() + p.weighted_amplitude(1) + p.weighted_amplitude(2))
        .sum()
}

/// Fraction of random perturbations of C² size `epsilon` that remain certified skew.
pub fn perturbation_stability(
    c: &SpaceCurve,
    epsilon: f64,
    trials: usize,
    seed: u64,
    opts: &VerifyOptions,
) -> Result<StabilityReport, VerifyError> {
    let a = c.as_analytic().ok_or(VerifyError::Unsupported)?;
    let base = verify_skew(c, opts)?;
    if base.status != SkewStatus::CertifiedSkew {
        return Err(VerifyError::NotCertifiedSkew(base.status));
    }
    let deg = a.degree();
    let inner = VerifyOptions { workers: None, ..*opts };
    let survived = run_in_pool(opts.workers, || {
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
                let mut rand_poly = || {
                    let a0 = rng.random_range(-1.0..1.0);
                    let cos = (0..deg).map(|_| rng.random_range(-1.0..1.0)).collect();
                    let sin = (0..deg).map(|_| rng.random_range(-1.0..1.0)).collect();
                    TrigPoly::new(a0, cos, sin)
                };
                let p = AnalyticCurve::new(rand_poly(), rand_poly(), rand_poly());
                let size = c2_coefficient_bound(&p);
                let scale = if size > 0.0 { epsilon / size } else { 0.0 };
                let q = AnalyticCurve::new(
                    &a.x + &p.x.scale(scale),
                    &a.y + &p.y.scale(scale),
                    &a.z + &p.z.scale(scale),
                );
                matches!(
                    verify_skew(&SpaceCurve::Analytic(q), &inner),
                    Ok(SkewCertificate { status: SkewStatus::CertifiedSkew, .. })
                )
            })
            .filter(|&ok| ok)
            .count()
    });
    Ok(StabilityReport {
        epsilon,
        trials,
        survived,
        fraction: if trials == 0 { 1.0 } else { survived as f64 / trials as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_cylinder_loop, construct_height, ConstructOptions};
    use crate::oval::make_support_oval;

    fn circle() -> SpaceCurve {
        SpaceCurve::unit_circle()
    }

    fn asym3_loop() -> SpaceCurve {
        let s = make_support_oval(TrigPoly::constant(1.0) + TrigPoly::cos_k(3, 0.05)).unwrap();
        let hf = construct_height(s.v(), &ConstructOptions::default()).unwrap();
        build_cylinder_loop(&s, &hf.z).unwrap()
    }

    #[test]
    fn defect_examples() {
        let c = circle();
        assert!(defect(&c, 0.0, PI).unwrap() < 1e-15);
        assert!((defect(&c, 0.0, PI / 2.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bounds_examples() {
        let db = derivative_bounds(&circle()).unwrap();
        assert!(db.b1.lower >= 1.0 - 1e-9 && db.b1.upper <= 1.0 + 1e-8);
        assert!(db.m1.upper <= 1.0 + 1e-15 && db.m1.lower >= 1.0 - 1e-8);
        let c = SpaceCurve::analytic(TrigPoly::cos_k(1, 1.0), TrigPoly::sin_k(1, 1.0), TrigPoly::sin_k(2, 0.1));
        let db = derivative_bounds(&c).unwrap();
        assert!(db.b1.upper <= 1.16f64.sqrt() + 1e-8);
        let flat = SpaceCurve::analytic(TrigPoly::constant(1.0), TrigPoly::zero(), TrigPoly::zero());
        assert!(matches!(derivative_bounds(&flat), Err(VerifyError::NotImmersed(_))));
        let samp = SpaceCurve::SampledC1(c.to_sampled(32));
        assert_eq!(derivative_bounds(&samp), Err(VerifyError::Unsupported));
    }

    #[test]
    fn band_examples() {
        let b = diagonal_band(&circle()).unwrap();
        assert!(b.delta >= 1.0);
        let seg = SpaceCurve::analytic(TrigPoly::cos_k(1, 1.0), TrigPoly::zero(), TrigPoly::zero());
        assert!(matches!(diagonal_band(&seg), Err(VerifyError::FlatPoint(_))));
        let b = diagonal_band(&asym3_loop()).unwrap();
        assert!(b.delta > 0.0);
    }

    #[test]
    fn planar_oval_not_skew() {
        let s = make_support_oval(TrigPoly::constant(1.0) + TrigPoly::cos_k(3, 0.05)).unwrap();
        let cert = verify_skew(&s.to_curve(), &VerifyOptions::default()).unwrap();
        assert_eq!(cert.status, SkewStatus::NotSkew);
        let w = cert.witness.unwrap();
        assert!(w.defect < 1e-12);
        assert!((circular_gap(w.s - w.t, TAU) - PI).abs() < 1e-8);
    }

    #[test]
    fn constructed_loop_certified() {
        let cert = verify_skew(&asym3_loop(), &VerifyOptions::default()).unwrap();
        assert_eq!(cert.status, SkewStatus::CertifiedSkew, "{cert:?}");
        assert!(cert.margin.unwrap() > 0.0);
        assert!(find_parallel_pair(&asym3_loop(), 128, 1e-10).is_empty());
    }

    #[test]
    fn round_cylinder_sin_not_skew() {
        let c = SpaceCurve::analytic(TrigPoly::cos_k(1, 1.0), TrigPoly::sin_k(1, 1.0), TrigPoly::sin_k(1, 1.0));
        let cert = verify_skew(&c, &VerifyOptions::default()).unwrap();
        assert_eq!(cert.status, SkewStatus::NotSkew);
        let w = cert.witness.unwrap();
        assert!((circular_gap(w.s - w.t, TAU) - PI).abs() < 1e-6);
    }

    #[test]
    fn worker_count_does_not_matter() {
        let c = asym3_loop();
        let a = verify_skew(&c, &VerifyOptions { workers: Some(1), ..Default::default() }).unwrap();
        let b = verify_skew(&c, &VerifyOptions { workers: Some(4), ..Default::default() }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn latitude_witness() {
        let c = SpaceCurve::analytic(TrigPoly::cos_k(1, 0.6), TrigPoly::sin_k(1, 0.6), TrigPoly::constant(0.8));
        let w = find_parallel_pair(&c, 64, 1e-10);
        assert!(!w.is_empty());
        for x in &w {
            assert!((circular_gap(x.s - x.t, TAU) - PI).abs() < 1e-8);
        }
    }

    #[test]
    fn stability_zero_eps() {
        let r = perturbation_stability(&asym3_loop(), 0.0, 3, 7, &VerifyOptions::default()).unwrap();
        assert_eq!(r.fraction, 1.0);
        let s = make_support_oval(TrigPoly::constant(1.0)).unwrap();
        assert!(matches!(
            perturbation_stability(&s.to_curve(), 1e-3, 3, 7, &VerifyOptions::default()),
            Err(VerifyError::NotCertifiedSkew(_))
        ));
    }
}
