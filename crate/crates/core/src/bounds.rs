//! State-independent uncertainty bounds.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::probvec::ProbVec;
use crate::quantum::cmatrix::{inner, normalized, CMatrix};
use crate::quantum::eigen::lambda_max;
use crate::quantum::measurement::{Observable, Povm};
use crate::quantum::random::random_unit_vector;
use crate::quantum::state::DensityState;
use crate::rng::stream_rng;

/// Added to every numerically maximized quantity before it is used as a bound.
pub const CERTIFIED_SLACK: f64 = 1e-6;
pub const DEFAULT_RESTARTS: usize = 64;
/// Largest tensor distribution `omega_numeric` will enumerate.
pub const MAX_TENSOR_LEN: usize = 1_000_000;

const ASCENT_MAX_STEPS: usize = 20_000;
const ASCENT_TOL: f64 = 1e-10;
const ALTERNATING_MAX_STEPS: usize = 10_000;
const ALTERNATING_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    AnalyticTwoDichotomic,
    NumericTopk,
}

/// Majorization upper bound `ω` for the tensor product of a set of
/// measured distributions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundVector {
    pub omega: ProbVec,
    pub method: BoundMethod,
    pub measurement_fingerprint: String,
    pub certified_slack: f64,
    /// `γ_k` for `k = 1..=d` before differencing.
    pub top_sums: Vec<f64>,
}

impl BoundVector {
    pub fn omega(&self) -> &ProbVec {
        &self.omega
    }
}

/// SHA-256 over the effects of each measurement, entries rounded to 1e-10.
pub fn fingerprint(meas: &[Povm]) -> String {
    let mut h = Sha256::new();
    for povm in meas {
        h.update((povm.len() as u64).to_le_bytes());
        for e in povm.effects() {
            h.update((e.rows() as u64).to_le_bytes());
            for z in e.data() {
                for part in [z.re, z.im] {
                    let r = (part * 1e10).round() as i64;
                    h.update(r.to_le_bytes());
                }
            }
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn observables_fingerprint(obs: &[Observable]) -> String {
    let povms: Vec<Povm> = obs.iter().map(Observable::to_povm).collect();
    fingerprint(&povms)
}

fn qubit_basis(o: &Observable) -> Result<Vec<Vec<Complex64>>> {
    if o.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "two-outcome formula needs qubit observables, got dimension {}",
            o.dim()
        )));
    }
    o.eigenbasis()
}

/// Closed form for two nondegenerate qubit observables:
/// `ω = (γ₁, γ₂ − γ₁, 0, 0)` with `γ₁ = (1+c)²/4`, `γ₂ = (1+c′)²/4`.
pub fn omega_two_dichotomic(x: &Observable, y: &Observable) -> Result<BoundVector> {
    let phi = qubit_basis(x)?;
    let psi = qubit_basis(y)?;
    let ov = |k: usize, j: usize| inner(&phi[k], &psi[j]).norm();
    let mut c: f64 = 0.0;
    for k in 0..2 {
        for j in 0..2 {
            c = c.max(ov(k, j));
        }
    }
    let mut c2: f64 = 0.0;
    for k in 0..2 {
        for j in 0..2 {
            for kp in 0..2 {
                for jp in 0..2 {
                    if (k == kp) != (j == jp) {
                        let s = (ov(k, j).powi(2) + ov(kp, jp).powi(2)).sqrt();
                        c2 = c2.max(s);
                    }
                }
            }
        }
    }
    let c = c.min(1.0);
    let c2 = c2.min(1.0);
    let g1 = (1.0 + c).powi(2) / 4.0;
    let g2 = ((1.0 + c2).powi(2) / 4.0).min(1.0);
    let omega = ProbVec::new(vec![g1, g2 - g1, 0.0, 0.0])?;
    Ok(BoundVector {
        omega,
        method: BoundMethod::AnalyticTwoDichotomic,
        measurement_fingerprint: observables_fingerprint(&[x.clone(), y.clone()]),
        certified_slack: 0.0,
        top_sums: vec![g1, g2],
    })
}

fn check_common_dim(meas: &[Povm]) -> Result<usize> {
    let d = meas
        .first()
        .ok_or_else(|| Error::BadParameter("empty measurement set".into()))?
        .dim();
    if meas.iter().any(|m| m.dim() != d) {
        return Err(Error::DimensionMismatch("measurements act on different dimensions".into()));
    }
    Ok(d)
}

/// Tensor product of the Born distributions of `psi`, flattened with the
/// first measurement most significant.
fn tensor_stats(meas: &[Povm], psi: &[Complex64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let marginals: Vec<Vec<f64>> = meas
        .iter()
        .map(|m| {
            m.effects()
                .iter()
                .map(|e| e.expectation(psi).re.max(0.0))
                .collect()
        })
        .collect();
    let mut t = vec![1.0];
    for p in &marginals {
        let mut next = Vec::with_capacity(t.len() * p.len());
        for &a in &t {
            for &b in p {
                next.push(a * b);
            }
        }
        t = next;
    }
    (marginals, t)
}

fn top_k_indices(t: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..t.len()).collect();
    if k < idx.len() {
        idx.select_nth_unstable_by(k, |&a, &b| t[b].total_cmp(&t[a]));
        idx.truncate(k);
    }
    idx
}

/// Sum of the `k` largest entries of `⊗_i p_{x_i}(ψ)`.
pub fn top_k_sum(meas: &[Povm], psi: &[Complex64], k: usize) -> f64 {
    top_k_value(meas, psi, k)
}

fn top_k_value(meas: &[Povm], psi: &[Complex64], k: usize) -> f64 {
    let (_, t) = tensor_stats(meas, psi);
    top_k_indices(&t, k).iter().map(|&i| t[i]).sum()
}

/// Decodes a flat tensor index into per-measurement outcome indices.
fn decode(mut index: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for (slot, &n) in out.iter_mut().zip(sizes).rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

/// Ascent direction `G ψ` for the active set of the current top-k sum.
fn top_k_gradient(meas: &[Povm], psi: &[Complex64], k: usize) -> (f64, Vec<Complex64>) {
    let (marginals, t) = tensor_stats(meas, psi);
    let sizes: Vec<usize> = meas.iter().map(Povm::len).collect();
    let active = top_k_indices(&t, k);
    let value = active.iter().map(|&i| t[i]).sum();
    let mut coeff: Vec<Vec<f64>> = sizes.iter().map(|&n| vec![0.0; n]).collect();
    for &flat in &active {
        let outcome = decode(flat, &sizes);
        for i in 0..meas.len() {
            let rest: f64 = (0..meas.len())
                .filter(|&j| j != i)
                .map(|j| marginals[j][outcome[j]])
                .product();
            coeff[i][outcome[i]] += rest;
        }
    }
    let d = psi.len();
    let mut g = vec![Complex64::new(0.0, 0.0); d];
    for (m, cs) in meas.iter().zip(&coeff) {
        for (e, &c) in m.effects().iter().zip(cs) {
            if c != 0.0 {
                for (gi, v) in g.iter_mut().zip(e.mul_vec(psi)) {
                    *gi += v * c;
                }
            }
        }
    }
    (value, g)
}

/// Projected gradient ascent of the top-k sum on the unit sphere.
fn ascend_top_k(meas: &[Povm], start: Vec<Complex64>, k: usize) -> f64 {
    let mut psi = start;
    let mut step = 0.5;
    let (mut value, mut grad) = top_k_gradient(meas, &psi, k);
    for _ in 0..ASCENT_MAX_STEPS {
        let along = inner(&psi, &grad);
        let tangent: Vec<Complex64> = grad.iter().zip(&psi).map(|(g, p)| g - along * p).collect();
        let candidate: Vec<Complex64> =
            psi.iter().zip(&tangent).map(|(p, t)| p + t * step).collect();
        let Some(candidate) = normalized(&candidate) else {
            break;
        };
        let cand_value = top_k_value(meas, &candidate, k);
        if cand_value > value {
            let gain = cand_value - value;
            psi = candidate;
            let next = top_k_gradient(meas, &psi, k);
            value = next.0;
            grad = next.1;
            step = (step * 1.5).min(4.0);
            if gain < ASCENT_TOL {
                break;
            }
        } else {
            step *= 0.5;
            if step < 1e-12 {
                break;
            }
        }
    }
    value
}

fn starting_points(meas: &[Povm], restarts: usize, seed: u64, k: usize) -> Vec<Vec<Complex64>> {
    let d = meas[0].dim();
    let mut starts = Vec::new();
    // effect eigenvectors are frequent maximizers
    for m in meas {
        for e in m.effects() {
            if let Ok((_, v)) = lambda_max(e) {
                starts.push(v);
            }
        }
    }
    for r in 0..restarts {
        let mut rng = stream_rng(seed, (k as u64) << 32 | r as u64);
        starts.push(random_unit_vector(d, &mut rng));
    }
    starts
}

/// Upper concave envelope of `(k, g[k])`, evaluated at every `k`.
fn concave_envelope(g: &[f64]) -> Vec<f64> {
    let n = g.len();
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // drop b if it lies on or below the chord a–i
            let lhs = (g[b] - g[a]) * (i - a) as f64;
            let rhs = (g[i] - g[a]) * (b - a) as f64;
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut out = vec![0.0; n];
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (k, slot) in out.iter_mut().enumerate().take(b + 1).skip(a) {
            let t = (k - a) as f64 / (b - a) as f64;
            *slot = g[a] + t * (g[b] - g[a]);
        }
    }
    if hull.len() == 1 {
        out[0] = g[0];
    }
    out
}

/// Numeric `ω` from maximized top-k sums over pure states.
pub fn omega_numeric(meas: &[Povm], restarts: usize, seed: u64) -> Result<BoundVector> {
    if restarts < 1 {
        return Err(Error::BadParameter("restarts must be at least 1".into()));
    }
    check_common_dim(meas)?;
    let sizes: Vec<usize> = meas.iter().map(Povm::len).collect();
    let total = sizes
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n).filter(|&t| t <= MAX_TENSOR_LEN))
        .ok_or_else(|| {
            Error::BadParameter(format!("tensor distribution exceeds {MAX_TENSOR_LEN} entries"))
        })?;
    let d = *sizes.iter().max().unwrap();

    let mut raw = Vec::with_capacity(d);
    for k in 1..d {
        let best = starting_points(meas, restarts, seed, k)
            .into_par_iter()
            .map(|s| ascend_top_k(meas, s, k))
            .reduce(|| 0.0, f64::max);
        raw.push(best);
    }
    raw.push(1.0);

    let mut gamma = vec![0.0];
    gamma.extend(raw.iter().map(|g| (g + CERTIFIED_SLACK).min(1.0)));
    *gamma.last_mut().unwrap() = 1.0;
    for k in 1..gamma.len() {
        gamma[k] = gamma[k].max(gamma[k - 1]);
    }
    let repaired = concave_envelope(&gamma);
    let mut omega = vec![0.0; total];
    for k in 1..repaired.len() {
        omega[k - 1] = (repaired[k] - repaired[k - 1]).max(0.0);
    }
    Ok(BoundVector {
        omega: ProbVec::new(omega)?,
        method: BoundMethod::NumericTopk,
        measurement_fingerprint: fingerprint(meas),
        certified_slack: CERTIFIED_SLACK,
        top_sums: repaired[1..].to_vec(),
    })
}

fn max_overlap_sq(x: &Observable, y: &Observable) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch("observables on different dimensions".into()));
    }
    let phi = x.eigenbasis()?;
    let psi = y.eigenbasis()?;
    let mut c: f64 = 0.0;
    for u in &phi {
        for v in &psi {
            c = c.max(inner(u, v).norm_sqr());
        }
    }
    // overlaps come out of an eigensolver; drop the last few ulps
    Ok(((c * 1e12).round() / 1e12).min(1.0))
}

/// `−log₂ max_{i,j} |⟨φ_i|ψ_j⟩|²` in bits.
pub fn maassen_uffink(x: &Observable, y: &Observable) -> Result<f64> {
    let c = max_overlap_sq(x, y)?;
    Ok(if c >= 1.0 { 0.0 } else { -c.log2() })
}

/// State-dependent form: adds the von Neumann entropy of `rho`.
pub fn maassen_uffink_with_state(x: &Observable, y: &Observable, rho: &DensityState) -> Result<f64> {
    if rho.dim() != x.dim() {
        return Err(Error::DimensionMismatch("state and observables differ in dimension".into()));
    }
    Ok(maassen_uffink(x, y)? + rho.entropy())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FineGrainedMethod {
    Exact,
    ProductAlternating,
}

/// Largest prior-weighted hit probability for one outcome string.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FineGrainedBound {
    pub value: f64,
    pub outcome_string: Vec<String>,
    pub priors: ProbVec,
    /// State attaining (or, for product bounds, approaching) the value.
    pub operator_norm_witness: Vec<Complex64>,
    pub method: FineGrainedMethod,
    pub measurement_fingerprint: String,
    pub certified_slack: f64,
}

fn pick_effects<'a>(meas: &'a [Povm], outcomes: &[usize]) -> Result<Vec<&'a CMatrix>> {
    if meas.len() != outcomes.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} outcomes for {} measurements",
            outcomes.len(),
            meas.len()
        )));
    }
    meas.iter()
        .zip(outcomes)
        .map(|(m, &a)| {
            if a < m.len() {
                Ok(m.effect(a))
            } else {
                Err(Error::BadParameter(format!("outcome {a} out of range for {} effects", m.len())))
            }
        })
        .collect()
}

/// Resolves outcome labels against a measurement sequence.
pub fn resolve_outcomes(meas: &[Povm], labels: &[&str]) -> Result<Vec<usize>> {
    if meas.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} outcome labels for {} measurements",
            labels.len(),
            meas.len()
        )));
    }
    meas.iter()
        .zip(labels)
        .map(|(m, l)| {
            m.outcome_index(l)
                .ok_or_else(|| Error::BadParameter(format!("unknown outcome label `{l}`")))
        })
        .collect()
}

fn outcome_labels(meas: &[Povm], outcomes: &[usize]) -> Vec<String> {
    meas.iter().zip(outcomes).map(|(m, &a)| m.labels()[a].clone()).collect()
}

/// `λ_max(Σ_i p_i F_{a_i|x_i})` with a maximizing eigenvector.
pub fn fine_grained_bound(
    meas: &[Povm],
    outcomes: &[usize],
    priors: &ProbVec,
) -> Result<FineGrainedBound> {
    let d = check_common_dim(meas)?;
    if priors.dim() != meas.len() {
        return Err(Error::DimensionMismatch("one prior per measurement expected".into()));
    }
    let effects = pick_effects(meas, outcomes)?;
    let mut w = CMatrix::zeros(d, d);
    for (e, &p) in effects.iter().zip(priors.entries()) {
        w = &w + &e.scale_real(p);
    }
    let (value, witness) = lambda_max(&w)?;
    Ok(FineGrainedBound {
        value: value.clamp(0.0, 1.0),
        outcome_string: outcome_labels(meas, outcomes),
        priors: priors.clone(),
        operator_norm_witness: witness,
        method: FineGrainedMethod::Exact,
        measurement_fingerprint: fingerprint(meas),
        certified_slack: 0.0,
    })
}

/// Weighted sum of conditioned local operators: `Σ_ij p_ij ⟨v|G_j|v⟩ F_i`.
fn conditioned(
    local: &[&CMatrix],
    other: &[&CMatrix],
    v: &[Complex64],
    weight: impl Fn(usize, usize) -> f64,
) -> CMatrix {
    let d = local[0].rows();
    let mut acc = CMatrix::zeros(d, d);
    let other_vals: Vec<f64> = other.iter().map(|g| g.expectation(v).re).collect();
    for (i, f) in local.iter().enumerate() {
        let c: f64 = other_vals.iter().enumerate().map(|(j, &g)| weight(i, j) * g).sum();
        if c != 0.0 {
            acc = &acc + &f.scale_real(c);
        }
    }
    acc
}

fn alternate(
    fa: &[&CMatrix],
    gb: &[&CMatrix],
    priors: &[f64],
    mut v: Vec<Complex64>,
) -> Result<(f64, Vec<Complex64>, Vec<Complex64>)> {
    let mb = gb.len();
    let mut value = f64::NEG_INFINITY;
    for _ in 0..ALTERNATING_MAX_STEPS {
        let a_op = conditioned(fa, gb, &v, |i, j| priors[i * mb + j]);
        let u = lambda_max(&a_op)?.1;
        let b_op = conditioned(gb, fa, &u, |j, i| priors[i * mb + j]);
        let (next, nv) = lambda_max(&b_op)?;
        v = nv;
        if next - value < ALTERNATING_TOL {
            return Ok((next.max(value), u, v));
        }
        value = next;
    }
    Err(Error::NoConvergence {
        what: "alternating product-state maximization".into(),
        iterations: ALTERNATING_MAX_STEPS,
    })
}

/// Value and the optimal Alice and Bob vectors.
type ProductOptimum = (f64, Vec<Complex64>, Vec<Complex64>);

/// Maximum of `Σ_ij p_ij tr((F_i ⊗ G_j) ρ)` over product states, with
/// priors indexed `i·|meas_b| + j`.
///
/// The returned `value` is the best value found plus `CERTIFIED_SLACK`,
/// capped at 1.
pub fn fine_grained_bound_product(
    meas_a: &[Povm],
    meas_b: &[Povm],
    outcomes_a: &[usize],
    outcomes_b: &[usize],
    priors: &ProbVec,
    restarts: usize,
    seed: u64,
) -> Result<FineGrainedBound> {
    let da = check_common_dim(meas_a)?;
    let db = check_common_dim(meas_b)?;
    if priors.dim() != meas_a.len() * meas_b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} priors for {}x{} setting pairs",
            priors.dim(),
            meas_a.len(),
            meas_b.len()
        )));
    }
    let fa = pick_effects(meas_a, outcomes_a)?;
    let gb = pick_effects(meas_b, outcomes_b)?;
    let p = priors.entries();

    let mut starts: Vec<Vec<Complex64>> = Vec::new();
    for g in &gb {
        starts.push(lambda_max(g)?.1);
    }
    for r in 0..restarts.max(1) {
        let mut rng = stream_rng(seed, r as u64);
        starts.push(random_unit_vector(db, &mut rng));
    }
    let results: Vec<Result<ProductOptimum>> = starts
        .into_par_iter()
        .map(|v| alternate(&fa, &gb, p, v))
        .collect();
    let mut best: Option<ProductOptimum> = None;
    let mut failure = None;
    for r in results {
        match r {
            Ok(cand) => {
                if best.as_ref().is_none_or(|b| cand.0 > b.0) {
                    best = Some(cand);
                }
            }
            Err(e) => failure = Some(e),
        }
    }
    let (value, u, v) = match (best, failure) {
        (Some(b), _) => b,
        (None, Some(e)) => return Err(e),
        (None, None) => unreachable!("at least one start"),
    };
    debug_assert_eq!(u.len(), da);
    let witness = crate::quantum::cmatrix::kron_vec(&u, &v);
    let mut labels = outcome_labels(meas_a, outcomes_a);
    labels.extend(outcome_labels(meas_b, outcomes_b));
    Ok(FineGrainedBound {
        value: (value + CERTIFIED_SLACK).min(1.0),
        outcome_string: labels,
        priors: priors.clone(),
        operator_norm_witness: witness,
        method: FineGrainedMethod::ProductAlternating,
        measurement_fingerprint: product_fingerprint(meas_a, meas_b),
        certified_slack: CERTIFIED_SLACK,
    })
}

/// Fingerprint of a pair of local measurement sets.
pub fn product_fingerprint(meas_a: &[Povm], meas_b: &[Povm]) -> String {
    let mut all = meas_a.to_vec();
    all.extend_from_slice(meas_b);
    format!("{}:{}", fingerprint(&all), meas_a.len())
}

/// `(1/d)(1 + (d − 1)/√m)` for `m` MUBs with uniform priors.
pub fn mub_fine_grained_bound(d: usize, m: usize) -> Result<f64> {
    if d < 2 || m < 2 {
        return Err(Error::BadParameter(format!("need d ≥ 2 and m ≥ 2, got d={d}, m={m}")));
    }
    let (d, m) = (d as f64, m as f64);
    Ok((1.0 + (d - 1.0) / m.sqrt()) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantifier::shannon;
    use approx::assert_abs_diff_eq;

    fn qubit_povms(obs: &[Observable]) -> Vec<Povm> {
        obs.iter().map(Observable::to_povm).collect()
    }

    #[test]
    fn two_dichotomic_examples() {
        let s2 = 2f64.sqrt();
        let b = omega_two_dichotomic(&Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        let w = b.omega.entries();
        assert_abs_diff_eq!(w[0], (3.0 + 2.0 * s2) / 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w[1], (5.0 - 2.0 * s2) / 8.0, epsilon = 1e-12);
        assert_eq!(&w[2..], &[0.0, 0.0]);
        assert_abs_diff_eq!(shannon(&b.omega), 0.8435, epsilon = 5e-4);

        let zz = omega_two_dichotomic(&Observable::pauli_z(), &Observable::pauli_z()).unwrap();
        assert_eq!(zz.omega.entries(), &[1.0, 0.0, 0.0, 0.0]);

        let zx = omega_two_dichotomic(&Observable::pauli_z(), &Observable::pauli_x()).unwrap();
        for (a, b) in zx.omega.entries().iter().zip(w) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_dichotomic_errors() {
        let deg = Observable::new(CMatrix::identity(2)).unwrap();
        assert!(matches!(
            omega_two_dichotomic(&deg, &Observable::pauli_x()),
            Err(Error::Degenerate(_))
        ));
        let qutrit = crate::quantum::families::mub_bases(3, 2).unwrap();
        assert!(matches!(
            omega_two_dichotomic(&qutrit[0], &qutrit[1]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn numeric_matches_closed_form() {
        let meas = qubit_povms(&[Observable::pauli_x(), Observable::pauli_y()]);
        let num = omega_numeric(&meas, 16, 1).unwrap();
        let exact = omega_two_dichotomic(&Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        for (a, b) in num.omega.entries().iter().zip(exact.omega.entries()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-5);
        }
        let one = omega_numeric(&meas[..1], 4, 1).unwrap();
        assert_eq!(one.omega.entries(), &[1.0, 0.0]);
        let zz = qubit_povms(&[Observable::pauli_z(), Observable::pauli_z()]);
        assert_eq!(omega_numeric(&zz, 4, 1).unwrap().omega.entries(), &[1.0, 0.0, 0.0, 0.0]);
        assert!(omega_numeric(&meas, 0, 1).is_err());
    }

    #[test]
    fn envelope_is_concave_and_dominating() {
        let g = [0.0, 0.3, 0.8, 0.9, 1.0];
        let h = concave_envelope(&g);
        for (a, b) in h.iter().zip(&g) {
            assert!(a >= b);
        }
        let inc: Vec<f64> = h.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(inc.windows(2).all(|w| w[0] >= w[1] - 1e-15));
    }

    #[test]
    fn maassen_uffink_examples() {
        assert_eq!(maassen_uffink(&Observable::pauli_x(), &Observable::pauli_y()).unwrap(), 1.0);
        assert_eq!(maassen_uffink(&Observable::pauli_z(), &Observable::pauli_z()).unwrap(), 0.0);
        let m = crate::quantum::families::mub_bases(3, 2).unwrap();
        assert_abs_diff_eq!(maassen_uffink(&m[0], &m[1]).unwrap(), 3f64.log2(), epsilon = 1e-9);
        let mixed = DensityState::maximally_mixed(2);
        assert_abs_diff_eq!(
            maassen_uffink_with_state(&Observable::pauli_x(), &Observable::pauli_z(), &mixed).unwrap(),
            2.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn fine_grained_examples() {
        let meas = qubit_povms(&[Observable::pauli_x(), Observable::pauli_z()]);
        let out = resolve_outcomes(&meas, &["+", "0"]).unwrap();
        let b = fine_grained_bound(&meas, &out, &ProbVec::uniform(2)).unwrap();
        assert_abs_diff_eq!(b.value, 0.5 + 0.5 / 2f64.sqrt(), epsilon = 1e-9);
        assert_eq!(b.outcome_string, vec!["+1".to_string(), "+1".to_string()]);

        let single = fine_grained_bound(&meas[..1], &[1], &ProbVec::point_mass(1, 0)).unwrap();
        assert_abs_diff_eq!(single.value, 1.0, epsilon = 1e-12);

        let mub = qubit_povms(&crate::quantum::families::mub_bases(2, 3).unwrap());
        let t = fine_grained_bound(&mub, &[0, 0, 0], &ProbVec::uniform(3)).unwrap();
        assert_abs_diff_eq!(t.value, mub_fine_grained_bound(2, 3).unwrap(), epsilon = 1e-9);
        assert_abs_diff_eq!(t.value, 0.5 + 0.5 / 3f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn product_bound_examples() {
        let meas = qubit_povms(&[Observable::pauli_x(), Observable::pauli_z()]);
        let priors = ProbVec::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let b = fine_grained_bound_product(&meas, &meas, &[0, 0], &[0, 0], &priors, 16, 3).unwrap();
        let exact = (3.0 + 2.0 * 2f64.sqrt()) / 8.0;
        assert!(b.value >= exact && b.value <= exact + 2e-6, "{}", b.value);

        let one = ProbVec::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let s = fine_grained_bound_product(&meas, &meas, &[1, 0], &[0, 1], &one, 4, 3).unwrap();
        assert_eq!(s.value, 1.0);
    }

    #[test]
    fn mub_formula() {
        assert_abs_diff_eq!(mub_fine_grained_bound(2, 2).unwrap(), 0.8535533905932737, epsilon = 1e-12);
        assert_abs_diff_eq!(mub_fine_grained_bound(2, 3).unwrap(), 0.7886751345948129, epsilon = 1e-12);
        assert_abs_diff_eq!(mub_fine_grained_bound(3, 2).unwrap(), 0.8047378541243649, epsilon = 1e-12);
        assert!(mub_fine_grained_bound(1, 2).is_err());
        assert!(mub_fine_grained_bound(2, 1).is_err());
    }

    #[test]
    fn fingerprints_distinguish_sets() {
        let a = qubit_povms(&[Observable::pauli_x(), Observable::pauli_y()]);
        let b = qubit_povms(&[Observable::pauli_y(), Observable::pauli_x()]);
        assert_eq!(fingerprint(&a), fingerprint(&a.clone()));
        assert_ne!(fingerprint(&a), fingerprint(&b));
        assert_eq!(fingerprint(&a).len(), 64);
    }
}
