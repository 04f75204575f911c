//! Brute-force cross-checks: random-state censuses, grid maximization and
//! threshold scans over one-parameter state families.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{fine_grained_bound, top_k_sum, BoundVector};
use crate::criteria::{DetectionReport, Verdict};
use crate::error::{Error, Result};
use crate::probvec::{ProbVec, SUM_TOL};
use crate::quantum::cmatrix::{normalized, CMatrix};
use crate::quantum::measurement::Povm;
use crate::quantum::random::{random_mixed, random_pure};
use crate::quantum::state::{born_stats, DensityState};
use crate::rng::{stream_rng, UwRng};

pub const DEFAULT_BISECT_TOL: f64 = 1e-4;
const ZOOM_ROUNDS: usize = 4;
const ZOOM_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationCensus {
    pub samples: usize,
    pub violations: usize,
    /// Largest margin seen; positive margins are violations.
    pub worst_margin: f64,
    pub seed: u64,
}

impl ViolationCensus {
    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

/// Runs `trial` on `samples` independent streams of `seed`. Each trial
/// returns its margin and whether it counts as a violation.
pub fn census<F>(samples: usize, seed: u64, trial: F) -> Result<ViolationCensus>
where
    F: Fn(&mut UwRng) -> Result<(f64, bool)> + Sync,
{
    let outcomes: Vec<(f64, bool)> = (0..samples)
        .into_par_iter()
        .map(|i| trial(&mut stream_rng(seed, i as u64)))
        .collect::<Result<_>>()?;
    Ok(ViolationCensus {
        samples,
        violations: outcomes.iter().filter(|o| o.1).count(),
        worst_margin: outcomes.iter().map(|o| o.0).fold(f64::NEG_INFINITY, f64::max),
        seed,
    })
}

/// Counts sampled states whose tensor statistics are not majorized by `ω`.
/// Pure and mixed states are drawn with equal odds.
pub fn verify_majorization_bound(
    bound: &BoundVector,
    meas: &[Povm],
    samples: usize,
    seed: u64,
) -> Result<ViolationCensus> {
    if samples == 0 {
        return Err(Error::BadParameter("samples must be at least 1".into()));
    }
    let d = meas
        .first()
        .ok_or_else(|| Error::BadParameter("empty measurement set".into()))?
        .dim();
    let omega = bound.omega.clone();
    census(samples, seed, |rng| {
        let state = if rand::Rng::random_bool(rng, 0.5) {
            random_pure(d, rng)
        } else {
            random_mixed(d, rng)
        };
        majorization_margin(&state, meas, &omega)
    })
}

fn majorization_margin(state: &DensityState, meas: &[Povm], omega: &ProbVec) -> Result<(f64, bool)> {
    let stats = meas.iter().map(|m| born_stats(state, m)).collect::<Result<Vec<_>>>()?;
    let t = ProbVec::tensor_all(&stats).expect("nonempty");
    let gap = t.majorization_gap(omega);
    Ok((gap, gap > SUM_TOL))
}

/// `(cos θ/2, e^{iφ} sin θ/2)`.
pub fn bloch_ket(theta: f64, phi: f64) -> Vec<Complex64> {
    vec![
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// Maximum of `f` over a `(θ, φ)` grid with equal-area rings, then refined
/// by repeated local grids around the incumbent.
fn qubit_grid_max<F>(grid_density: usize, f: F) -> (f64, f64, f64)
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let n_theta = ((grid_density as f64 / 2.0).sqrt().ceil() as usize).max(2);
    let n_phi = (grid_density / n_theta).max(4);
    let best = (0..=n_theta)
        .into_par_iter()
        .map(|i| {
            let z = 1.0 - 2.0 * i as f64 / n_theta as f64;
            let theta = z.clamp(-1.0, 1.0).acos();
            let mut local = (f64::NEG_INFINITY, 0.0, 0.0);
            for j in 0..n_phi {
                let phi = 2.0 * PI * j as f64 / n_phi as f64;
                let v = f(&bloch_ket(theta, phi));
                if v > local.0 {
                    local = (v, theta, phi);
                }
            }
            local
        })
        .reduce(|| (f64::NEG_INFINITY, 0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    let (mut value, mut theta, mut phi) = best;
    let mut span_t = PI / n_theta as f64;
    let mut span_p = 2.0 * PI / n_phi as f64;
    for _ in 0..ZOOM_ROUNDS {
        let (t0, p0) = (theta, phi);
        for a in 0..ZOOM_POINTS {
            for b in 0..ZOOM_POINTS {
                let t = t0 + span_t * (2.0 * a as f64 / (ZOOM_POINTS - 1) as f64 - 1.0);
                let p = p0 + span_p * (2.0 * b as f64 / (ZOOM_POINTS - 1) as f64 - 1.0);
                let v = f(&bloch_ket(t, p));
                if v > value {
                    value = v;
                    theta = t;
                    phi = p;
                }
            }
        }
        span_t /= 5.0;
        span_p /= 5.0;
    }
    (value, theta, phi)
}

/// Normalized vectors from a grid on `[-1, 1]^6`, read as three complex
/// amplitudes.
fn qutrit_grid_max<F>(grid_density: usize, f: F) -> f64
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let n = ((grid_density as f64).powf(1.0 / 6.0).round() as usize).max(3);
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
    let total = n.pow(6);
    (0..total)
        .into_par_iter()
        .filter_map(|flat| {
            let mut idx = flat;
            let mut x = [0.0; 6];
            for slot in x.iter_mut() {
                *slot = coord(idx % n);
                idx /= n;
            }
            let raw: Vec<Complex64> = (0..3).map(|k| Complex64::new(x[2 * k], x[2 * k + 1])).collect();
            if crate::quantum::cmatrix::norm(&raw) < 1e-6 {
                return None;
            }
            normalized(&raw).map(|v| f(&v))
        })
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Grid maximum of the top-`k` tensor sum over pure qubit or qutrit states.
pub fn brute_force_topk(meas: &[Povm], k: usize, grid_density: usize) -> Result<f64> {
    let d = meas
        .first()
        .ok_or_else(|| Error::BadParameter("empty measurement set".into()))?
        .dim();
    if meas.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("measurements act on different dimensions".into()));
    }
    if k == 0 {
        return Err(Error::BadParameter("k must be at least 1".into()));
    }
    let f = |psi: &[Complex64]| top_k_sum(meas, psi, k);
    match d {
        2 => Ok(qubit_grid_max(grid_density, f).0),
        3 => Ok(qutrit_grid_max(grid_density, f)),
        _ => Err(Error::BadParameter(format!("brute force supports d ≤ 3, got {d}"))),
    }
}

/// Eigenvalue bound versus a dense Bloch-sphere maximization of the same
/// linear functional.
pub fn cross_check_fine_grained(
    meas: &[Povm],
    outcomes: &[usize],
    priors: &ProbVec,
    grid_density: usize,
) -> Result<(f64, f64)> {
    if meas.iter().any(|m| m.dim() != 2) {
        return Err(Error::BadParameter("grid cross-check needs qubit measurements".into()));
    }
    let exact = fine_grained_bound(meas, outcomes, priors)?;
    let mut w = CMatrix::zeros(2, 2);
    for ((m, &a), &p) in meas.iter().zip(outcomes).zip(priors.entries()) {
        w = &w + &m.effect(a).scale_real(p);
    }
    let (grid, _, _) = qubit_grid_max(grid_density, |psi| w.expectation(psi).re);
    Ok((exact.value, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Werner,
    Isotropic,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Werner => "werner",
            Family::Isotropic => "isotropic",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub family: Family,
    pub criterion: String,
    pub parameter_grid: Vec<f64>,
    pub lhs_values: Vec<f64>,
    pub bound: f64,
    pub verdicts: Vec<Verdict>,
    pub threshold_estimate: Option<f64>,
    pub bisection_tolerance: f64,
}

impl ScanResult {
    pub fn flips(&self) -> usize {
        self.verdicts.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,lhs,bound,verdict\n");
        for ((p, l), v) in self.parameter_grid.iter().zip(&self.lhs_values).zip(&self.verdicts) {
            let _ = writeln!(out, "{p},{l},{},{v}", self.bound);
        }
        out
    }
}

/// Evaluates `criterion` along `grid`; a single verdict change is bisected
/// down to `bisect_tol`, more than one aborts the scan.
pub fn threshold_scan<F>(family: Family, criterion: F, grid: &[f64], bisect_tol: f64) -> Result<ScanResult>
where
    F: Fn(f64) -> Result<DetectionReport> + Sync,
{
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadParameter("scan grid must be nonempty and strictly ascending".into()));
    }
    if !(0.0..=1.0).contains(&grid[0]) || !(0.0..=1.0).contains(grid.last().unwrap()) {
        return Err(Error::BadParameter(format!("{} parameters live in [0, 1]", family.name())));
    }
    if bisect_tol.is_nan() || bisect_tol <= 0.0 {
        return Err(Error::BadParameter("bisection tolerance must be positive".into()));
    }
    let reports: Vec<DetectionReport> = grid.par_iter().map(|&w| criterion(w)).collect::<Result<_>>()?;
    let verdicts: Vec<Verdict> = reports.iter().map(|r| r.verdict).collect();
    let flip_at: Vec<usize> = (1..verdicts.len()).filter(|&i| verdicts[i] != verdicts[i - 1]).collect();
    if flip_at.len() > 1 {
        return Err(Error::NonMonotoneScan(flip_at.len()));
    }
    let threshold_estimate = match flip_at.first() {
        None => None,
        Some(&i) => {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            let low_verdict = verdicts[i - 1];
            while hi - lo > bisect_tol {
                let mid = 0.5 * (lo + hi);
                if criterion(mid)?.verdict == low_verdict {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Some(0.5 * (lo + hi))
        }
    };
    Ok(ScanResult {
        family,
        criterion: reports[0].criterion.name().to_string(),
        parameter_grid: grid.to_vec(),
        lhs_values: reports.iter().map(|r| r.lhs_value).collect(),
        bound: reports[0].bound_value,
        verdicts,
        threshold_estimate,
        bisection_tolerance: bisect_tol,
    })
}

/// `start, start + step, …` up to and including `end` (within rounding).
pub fn linear_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let n = ((end - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect()
}
