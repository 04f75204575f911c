//! Entanglement and steering tests built on uncertainty bounds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::assemblage::{conditional_stats, Assemblage};
use crate::bounds::{
    fingerprint, fine_grained_bound, mub_fine_grained_bound, observables_fingerprint,
    product_fingerprint, BoundMethod, BoundVector, FineGrainedBound, CERTIFIED_SLACK,
};
use crate::error::{Error, Result};
use crate::probvec::ProbVec;
use crate::quantifier::{Quantifier, QuantifierKind};
use crate::quantum::measurement::{Observable, Povm};
use crate::quantum::state::{joint_probability, product_observable_stats, DensityState};

/// Verdicts inside this margin are reported as not detected.
pub const DETECTION_MARGIN: f64 = 1e-9;
/// Eigenvalues this close to zero break the product-outcome pooling.
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-9;
/// Largest number of response-function inequalities enumerated at once.
pub const MAX_RESPONSE_COLUMNS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    EntanglementUniversal,
    SteeringUniversal,
    EntanglementFineGrained,
    SteeringFineGrained,
    SteeringFineGrainedTensor,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Criterion::EntanglementUniversal => "entanglement_universal",
            Criterion::SteeringUniversal => "steering_universal",
            Criterion::EntanglementFineGrained => "entanglement_fine_grained",
            Criterion::SteeringFineGrained => "steering_fine_grained",
            Criterion::SteeringFineGrainedTensor => "steering_fine_grained_tensor",
        }
    }

    /// Universal criteria detect when the lhs falls below the bound.
    pub fn is_universal(&self) -> bool {
        matches!(self, Criterion::EntanglementUniversal | Criterion::SteeringUniversal)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Detected,
    NotDetected,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Detected => "Detected",
            Verdict::NotDetected => "NotDetected",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionReport {
    pub criterion: Criterion,
    pub lhs_value: f64,
    pub bound_value: f64,
    /// Positive means the inequality is violated.
    pub margin: f64,
    pub verdict: Verdict,
    pub quantifier_name: Option<String>,
    pub certified: bool,
    /// Which inequality of a family this report belongs to.
    pub column: Option<String>,
}

impl DetectionReport {
    pub fn new(criterion: Criterion, lhs: f64, bound: f64, quantifier: Option<&Quantifier>, certified: bool) -> Self {
        let margin = if criterion.is_universal() { bound - lhs } else { lhs - bound };
        let verdict = if margin > DETECTION_MARGIN {
            Verdict::Detected
        } else {
            Verdict::NotDetected
        };
        Self {
            criterion,
            lhs_value: lhs,
            bound_value: bound,
            margin,
            verdict,
            quantifier_name: quantifier.map(Quantifier::name),
            certified,
            column: None,
        }
    }

    pub fn with_column(mut self, column: String) -> Self {
        self.column = Some(column);
        self
    }

    pub fn detected(&self) -> bool {
        self.verdict == Verdict::Detected
    }
}

/// The report with the largest margin.
pub fn strongest(reports: &[DetectionReport]) -> Option<&DetectionReport> {
    reports.iter().max_by(|a, b| a.margin.total_cmp(&b.margin))
}

fn is_certified(b: &BoundVector) -> bool {
    b.method == BoundMethod::AnalyticTwoDichotomic || b.certified_slack >= CERTIFIED_SLACK
}

/// Quantifiers usable in the summed inequalities.
///
/// Summing per-setting values needs concavity under mixing together with
/// `Ω(p ⊗ q) ≤ Ω(p) + Ω(q)`; Tsallis entropies satisfy the latter only for
/// `α > 1`. Min-entropy is not concave, but its max-probability is convex and
/// for two rank-one qubit measurements the set of achievable
/// max-probability pairs is convex, which is all the argument needs.
pub fn check_quantifier(q: &Quantifier, two_qubit_settings: bool) -> Result<()> {
    let subadditive = q.tensor_additive() || matches!(q.kind(), QuantifierKind::Tsallis(a) if a > 1.0);
    if q.mixing_monotone() && subadditive {
        return Ok(());
    }
    if q.kind() == QuantifierKind::MinEntropy {
        if two_qubit_settings {
            return Ok(());
        }
        return Err(Error::UnsoundQuantifier(format!(
            "{} is only admitted for two rank-one qubit measurements per party",
            q.name()
        )));
    }
    let why = if q.mixing_monotone() {
        "it is superadditive on product distributions"
    } else {
        "it is not concave under mixing"
    };
    Err(Error::UnsoundQuantifier(format!("{}: {why}", q.name())))
}

fn qubit_pair_observables(obs: &[Observable]) -> bool {
    obs.len() == 2 && obs.iter().all(|o| o.dim() == 2 && o.is_nondegenerate())
}

fn qubit_pair_povms(meas: &[Povm]) -> bool {
    meas.len() == 2 && meas.iter().all(|m| m.dim() == 2 && m.is_rank_one_projective())
}

fn check_fingerprint(expected: &str, actual: String) -> Result<()> {
    if expected != actual {
        return Err(Error::FingerprintMismatch {
            expected: expected.to_string(),
            actual,
        });
    }
    Ok(())
}

/// `Σ_i Ω(p_{x_i ⊗ y_i}) ≥ max{Ω(ω_x), Ω(ω_y)}` for separable states.
pub fn entanglement_universal(
    state: &DensityState,
    x: &[Observable],
    y: &[Observable],
    q: &Quantifier,
    bound_x: &BoundVector,
    bound_y: &BoundVector,
) -> Result<DetectionReport> {
    check_quantifier(q, qubit_pair_observables(x) && qubit_pair_observables(y))?;
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "{} settings for Alice and {} for Bob",
            x.len(),
            y.len()
        )));
    }
    check_fingerprint(&bound_x.measurement_fingerprint, observables_fingerprint(x))?;
    check_fingerprint(&bound_y.measurement_fingerprint, observables_fingerprint(y))?;
    for o in x.iter().chain(y) {
        if o.eigenvalues().iter().any(|l| l.abs() <= ZERO_EIGENVALUE_TOL) {
            return Err(Error::BadParameter(
                "product observables need nonzero eigenvalues".into(),
            ));
        }
    }
    let mut lhs = 0.0;
    for (a, b) in x.iter().zip(y) {
        lhs += q.evaluate(&product_observable_stats(state, a, b)?.probs);
    }
    let bound = q.evaluate(&bound_x.omega).max(q.evaluate(&bound_y.omega));
    let certified = is_certified(bound_x) && is_certified(bound_y);
    Ok(DetectionReport::new(Criterion::EntanglementUniversal, lhs, bound, Some(q), certified))
}

fn check_pairing(asm: &Assemblage, pairing: &[usize], settings: usize) -> Result<()> {
    if pairing.len() != settings {
        return Err(Error::DimensionMismatch(format!(
            "pairing lists {} Alice settings for {settings} Bob measurements",
            pairing.len()
        )));
    }
    for &p in pairing {
        asm.check_setting(p)?;
    }
    Ok(())
}

/// `Σ_i Σ_{a′} p(a′) Ω(p_{x_i|x′_i = a′}) ≥ Ω(ω_x)` for unsteerable
/// assemblages, with Bob's measurement `i` conditioned on Alice's setting
/// `pairing[i]`.
pub fn steering_universal(
    asm: &Assemblage,
    bob_meas: &[Povm],
    pairing: &[usize],
    q: &Quantifier,
    bound: &BoundVector,
) -> Result<DetectionReport> {
    check_quantifier(q, qubit_pair_povms(bob_meas))?;
    check_pairing(asm, pairing, bob_meas.len())?;
    check_fingerprint(&bound.measurement_fingerprint, fingerprint(bob_meas))?;
    let mut lhs = 0.0;
    for (m, &setting) in bob_meas.iter().zip(pairing) {
        let stats = conditional_stats(asm, setting, m)?;
        lhs += stats
            .conditionals
            .iter()
            .map(|c| c.weight * q.evaluate(&c.distribution))
            .sum::<f64>();
    }
    let b = q.evaluate(&bound.omega);
    Ok(DetectionReport::new(Criterion::SteeringUniversal, lhs, b, Some(q), is_certified(bound)))
}

/// `Σ_ij p_ij p(a_i b_j | x_i y_j) ≤ B` for separable states, where `B` is
/// the product-state maximum.
pub fn entanglement_fine_grained(
    state: &DensityState,
    meas_a: &[Povm],
    meas_b: &[Povm],
    outcomes_a: &[usize],
    outcomes_b: &[usize],
    priors: &ProbVec,
    bound: &FineGrainedBound,
) -> Result<DetectionReport> {
    check_fingerprint(&bound.measurement_fingerprint, product_fingerprint(meas_a, meas_b))?;
    if outcomes_a.len() != meas_a.len() || outcomes_b.len() != meas_b.len() {
        return Err(Error::DimensionMismatch("one outcome per setting expected".into()));
    }
    let mut labels: Vec<String> = meas_a
        .iter()
        .zip(outcomes_a)
        .chain(meas_b.iter().zip(outcomes_b))
        .map(|(m, &a)| m.labels().get(a).cloned().unwrap_or_default())
        .collect();
    if labels != bound.outcome_string || priors.entries() != bound.priors.entries() {
        let actual = std::mem::take(&mut labels).join(",");
        return Err(Error::FingerprintMismatch {
            expected: bound.outcome_string.join(","),
            actual,
        });
    }
    let mb = meas_b.len();
    let mut lhs = 0.0;
    for (i, (ma, &a)) in meas_a.iter().zip(outcomes_a).enumerate() {
        for (j, (mbj, &b)) in meas_b.iter().zip(outcomes_b).enumerate() {
            let p = priors.get(i * mb + j);
            if p > 0.0 {
                lhs += p * joint_probability(state, ma.effect(a), mbj.effect(b))?;
            }
        }
    }
    let certified = bound.certified_slack >= CERTIFIED_SLACK;
    Ok(DetectionReport::new(Criterion::EntanglementFineGrained, lhs, bound.value, None, certified))
}

/// `B_a` for every Bob outcome string, in lexicographic order.
pub fn fine_grained_bounds_all(bob_meas: &[Povm], priors: &ProbVec) -> Result<Vec<FineGrainedBound>> {
    let sizes: Vec<usize> = bob_meas.iter().map(Povm::len).collect();
    let total = sizes.iter().product::<usize>();
    (0..total)
        .map(|flat| fine_grained_bound(bob_meas, &digits(flat, &sizes), priors))
        .collect()
}

fn digits(mut flat: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for (slot, &n) in out.iter_mut().zip(sizes).rev() {
        *slot = flat % n;
        flat /= n;
    }
    out
}

/// A response table: for every Bob measurement `i`, the Bob outcome aimed at
/// for each outcome of the paired Alice setting.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Response(Vec<Vec<usize>>);

fn responses(alice_outcomes: &[usize], bob_outcomes: &[usize]) -> Result<Vec<Response>> {
    let mut count: usize = 1;
    for (&k, &d) in alice_outcomes.iter().zip(bob_outcomes) {
        let per = (d as u32)
            .checked_pow(k as u32)
            .map(|v| v as usize)
            .filter(|&v| v <= MAX_RESPONSE_COLUMNS);
        count = per
            .and_then(|v| count.checked_mul(v))
            .filter(|&c| c <= MAX_RESPONSE_COLUMNS)
            .ok_or_else(|| Error::BadParameter("too many response functions to enumerate".into()))?;
    }
    let sizes: Vec<usize> = alice_outcomes
        .iter()
        .zip(bob_outcomes)
        .flat_map(|(&k, &d)| std::iter::repeat_n(d, k))
        .collect();
    Ok((0..count)
        .map(|flat| {
            let flat_digits = digits(flat, &sizes);
            let mut it = flat_digits.into_iter();
            Response(
                alice_outcomes
                    .iter()
                    .map(|&k| it.by_ref().take(k).collect())
                    .collect(),
            )
        })
        .collect())
}

fn describe(r: &Response, alice_labels: &[Vec<String>], bob: &[Vec<String>]) -> String {
    r.0.iter()
        .enumerate()
        .map(|(i, targets)| {
            let arrows: Vec<String> = targets
                .iter()
                .enumerate()
                .map(|(a, &b)| format!("{}->{}", alice_labels[i][a], bob[i][b]))
                .collect();
            format!("y{i}[{}]", arrows.join(" "))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Hit probabilities `h[i][a′][b] = tr(F_{b|x_i} σ_{a′|x′_π(i)})`, i.e. the
/// joint probability of Alice's `a′` and Bob's `b`.
fn evaluate_responses(
    criterion: Criterion,
    hits: &[Vec<Vec<f64>>],
    priors: &ProbVec,
    bound: f64,
    certified: bool,
    alice_labels: &[Vec<String>],
    bob_labels: &[Vec<String>],
) -> Result<Vec<DetectionReport>> {
    let alice_outcomes: Vec<usize> = hits.iter().map(Vec::len).collect();
    let bob_outcomes: Vec<usize> = hits.iter().map(|h| h[0].len()).collect();
    Ok(responses(&alice_outcomes, &bob_outcomes)?
        .into_iter()
        .map(|r| {
            let lhs: f64 = r
                .0
                .iter()
                .enumerate()
                .map(|(i, targets)| {
                    priors.get(i) * targets.iter().enumerate().map(|(a, &b)| hits[i][a][b]).sum::<f64>()
                })
                .sum();
            DetectionReport::new(criterion, lhs, bound, None, certified)
                .with_column(describe(&r, alice_labels, bob_labels))
        })
        .collect())
}

/// Fine-grained steering test, one inequality per response table.
///
/// For every way `g` of choosing Bob's target outcome on measurement `i` as
/// a function of Alice's outcome on setting `pairing[i]`, the value
/// `Σ_i p_i Σ_{a′} p(a′) p(x_i = g_i(a′) | a′)` is compared with the largest
/// `B_a` over Bob outcome strings. An LHS model gives every hidden state a
/// deterministic-or-mixed choice of string, so the value never exceeds that
/// maximum; comparing a single Alice outcome column without the average is
/// not bounded this way.
pub fn steering_fine_grained(
    asm: &Assemblage,
    bob_meas: &[Povm],
    pairing: &[usize],
    priors: &ProbVec,
    bounds: &[FineGrainedBound],
) -> Result<Vec<DetectionReport>> {
    check_pairing(asm, pairing, bob_meas.len())?;
    if priors.dim() != bob_meas.len() {
        return Err(Error::DimensionMismatch("one prior per Bob measurement expected".into()));
    }
    let fp = fingerprint(bob_meas);
    let sizes: Vec<usize> = bob_meas.iter().map(Povm::len).collect();
    let expected_strings = sizes.iter().product::<usize>();
    if bounds.len() != expected_strings {
        return Err(Error::DimensionMismatch(format!(
            "{} bounds for {expected_strings} Bob outcome strings",
            bounds.len()
        )));
    }
    for b in bounds {
        check_fingerprint(&b.measurement_fingerprint, fp.clone())?;
        if b.priors.entries() != priors.entries() {
            return Err(Error::FingerprintMismatch {
                expected: format!("{:?}", b.priors.entries()),
                actual: format!("{:?}", priors.entries()),
            });
        }
    }
    let bound = bounds.iter().map(|b| b.value).fold(0.0, f64::max);
    let certified = bounds.iter().all(|b| b.certified_slack == 0.0 || b.certified_slack >= CERTIFIED_SLACK);

    let mut hits = Vec::with_capacity(bob_meas.len());
    for (m, &setting) in bob_meas.iter().zip(pairing) {
        if m.dim() != asm.bob_dim() {
            return Err(Error::DimensionMismatch("Bob POVM vs assemblage dimension".into()));
        }
        hits.push(
            asm.elements(setting)
                .iter()
                .map(|sigma| m.effects().iter().map(|f| f.trace_product(sigma).re.max(0.0)).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
    }
    let alice_labels: Vec<Vec<String>> = pairing.iter().map(|&s| asm.outcome_labels(s).to_vec()).collect();
    let bob_labels: Vec<Vec<String>> = bob_meas.iter().map(|m| m.labels().to_vec()).collect();
    evaluate_responses(
        Criterion::SteeringFineGrained,
        &hits,
        priors,
        bound,
        certified,
        &alice_labels,
        &bob_labels,
    )
}

/// Conditional probability tables per Alice column, kept for reporting.
pub fn column_conditionals(
    asm: &Assemblage,
    bob_meas: &[Povm],
    pairing: &[usize],
) -> Result<Vec<Vec<Option<ProbVec>>>> {
    check_pairing(asm, pairing, bob_meas.len())?;
    bob_meas
        .iter()
        .zip(pairing)
        .map(|(m, &s)| {
            let stats = conditional_stats(asm, s, m)?;
            Ok((0..asm.outcome_count(s))
                .map(|a| stats.get(a).map(|c| c.distribution.clone()))
                .collect())
        })
        .collect()
}

fn check_unit(s: &[f64; 3]) -> Result<()> {
    let n = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::BadParameter(format!("direction has norm {n}")));
    }
    Ok(())
}

/// Two-qubit fine-grained steering test computed from the correlation
/// tensor, with Bob measuring `σ_x` then `σ_z` at priors ½ and Alice
/// measuring `(1 ± s_i·σ)/2` for her two directions.
///
/// Equivalent to `steering_fine_grained` on
/// `steer(ρ, [spin(s_0), spin(s_1)])` with the same Bob measurements.
pub fn steering_fine_grained_tensor(t: &[[f64; 4]; 4], alice_directions: &[[f64; 3]]) -> Result<Vec<DetectionReport>> {
    if alice_directions.len() != 2 {
        return Err(Error::BadParameter(format!(
            "the tensor test uses two Alice directions, got {}",
            alice_directions.len()
        )));
    }
    for s in alice_directions {
        check_unit(s)?;
    }
    let bob_axes = [1usize, 3];
    let mut hits = Vec::with_capacity(2);
    for (s, &k) in alice_directions.iter().zip(&bob_axes) {
        let local: f64 = (0..3).map(|j| s[j] * t[j + 1][0]).sum();
        let corr: f64 = (0..3).map(|j| s[j] * t[j + 1][k]).sum();
        let table: Vec<Vec<f64>> = [1.0, -1.0]
            .iter()
            .map(|&sa| {
                [1.0, -1.0]
                    .iter()
                    .map(|&sb| 0.25 * (1.0 + sa * local + sb * t[0][k] + sa * sb * corr))
                    .map(|p: f64| p.max(0.0))
                    .collect()
            })
            .collect();
        hits.push(table);
    }
    let pm = vec!["+1".to_string(), "-1".to_string()];
    let labels = vec![pm.clone(), pm];
    evaluate_responses(
        Criterion::SteeringFineGrainedTensor,
        &hits,
        &ProbVec::uniform(2),
        mub_fine_grained_bound(2, 2)?,
        true,
        &labels,
        &labels,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemblage::{lhs_assemblage, steer};
    use crate::bounds::{fine_grained_bound_product, omega_two_dichotomic};
    use crate::quantum::cmatrix::{ONE, ZERO};
    use crate::quantum::families::{bell_phi_plus, werner};
    use crate::quantum::state::correlation_tensor;
    use approx::assert_abs_diff_eq;

    fn xy() -> Vec<Observable> {
        vec![Observable::pauli_x(), Observable::pauli_y()]
    }

    fn povms(o: &[Observable]) -> Vec<Povm> {
        o.iter().map(Observable::to_povm).collect()
    }

    fn zero_zero() -> DensityState {
        DensityState::pure_bipartite(&[ONE, ZERO, ZERO, ZERO], 2, 2).unwrap()
    }

    #[test]
    fn entanglement_universal_examples() {
        let b = omega_two_dichotomic(&Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        let q = Quantifier::shannon();
        let r = entanglement_universal(&bell_phi_plus(2), &xy(), &xy(), &q, &b, &b).unwrap();
        assert_abs_diff_eq!(r.lhs_value, 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.bound_value, 0.8435, epsilon = 5e-4);
        assert!(r.detected() && r.certified);

        let r = entanglement_universal(&zero_zero(), &xy(), &xy(), &q, &b, &b).unwrap();
        assert_abs_diff_eq!(r.lhs_value, 2.0, epsilon = 1e-9);
        assert_eq!(r.verdict, Verdict::NotDetected);

        let mixed = DensityState::maximally_mixed_bipartite(2, 2);
        let r = entanglement_universal(&mixed, &xy(), &xy(), &q, &b, &b).unwrap();
        assert_abs_diff_eq!(r.lhs_value, 2.0, epsilon = 1e-9);
        assert!(!r.detected());
    }

    #[test]
    fn quantifier_gate() {
        let b = omega_two_dichotomic(&Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        for q in [Quantifier::renyi(2.0).unwrap(), Quantifier::tsallis(0.5).unwrap()] {
            let r = entanglement_universal(&bell_phi_plus(2), &xy(), &xy(), &q, &b, &b);
            assert!(matches!(r, Err(Error::UnsoundQuantifier(_))), "{}", q.name());
        }
        assert!(check_quantifier(&Quantifier::min_entropy(), true).is_ok());
        assert!(check_quantifier(&Quantifier::min_entropy(), false).is_err());
        assert!(check_quantifier(&Quantifier::tsallis(2.0).unwrap(), false).is_ok());
        assert!(check_quantifier(&Quantifier::renyi(0.5).unwrap(), false).is_ok());
    }

    #[test]
    fn fingerprint_mismatch() {
        let b = omega_two_dichotomic(&Observable::pauli_x(), &Observable::pauli_z()).unwrap();
        let q = Quantifier::shannon();
        let r = entanglement_universal(&bell_phi_plus(2), &xy(), &xy(), &q, &b, &b);
        assert!(matches!(r, Err(Error::FingerprintMismatch { .. })));
    }

    #[test]
    fn steering_universal_examples() {
        let b = omega_two_dichotomic(&Observable::pauli_x(), &Observable::pauli_y()).unwrap();
        let q = Quantifier::shannon();
        let asm = steer(&bell_phi_plus(2), &povms(&xy())).unwrap();
        let r = steering_universal(&asm, &povms(&xy()), &[0, 1], &q, &b).unwrap();
        // σ_y steers Bob to the conjugate basis; ±1 labels swap but entropy is 0
        assert_abs_diff_eq!(r.lhs_value, 0.0, epsilon = 1e-9);
        assert!(r.detected());

        for w in [0.3, 0.9] {
            let asm = steer(&werner(w).unwrap(), &povms(&xy())).unwrap();
            let r = steering_universal(&asm, &povms(&xy()), &[0, 1], &q, &b).unwrap();
            let p = (1.0 + w) / 2.0;
            let h = -(p * p.log2() + (1.0 - p) * (1.0 - p).log2());
            assert_abs_diff_eq!(r.lhs_value, 2.0 * h, epsilon = 1e-9);
        }
    }

    #[test]
    fn fine_grained_entanglement_is_bounded_by_product_maximum() {
        let m = povms(&[Observable::pauli_x(), Observable::pauli_z()]);
        let priors = ProbVec::new(vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let bound = fine_grained_bound_product(&m, &m, &[0, 0], &[0, 0], &priors, 16, 1).unwrap();
        let r = entanglement_fine_grained(&bell_phi_plus(2), &m, &m, &[0, 0], &[0, 0], &priors, &bound).unwrap();
        assert_abs_diff_eq!(r.lhs_value, 0.5, epsilon = 1e-12);
        assert!(!r.detected());

        // (|00⟩ + |++⟩)/N reaches λ_max of the functional, 3/4
        let s = 0.5f64;
        let raw = [1.0 + s, s, s, s];
        let n = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
        let psi: Vec<_> = raw.iter().map(|v| num_complex::Complex64::new(v / n, 0.0)).collect();
        let state = DensityState::pure_bipartite(&psi, 2, 2).unwrap();
        let r = entanglement_fine_grained(&state, &m, &m, &[0, 0], &[0, 0], &priors, &bound).unwrap();
        assert_abs_diff_eq!(r.lhs_value, 0.75, epsilon = 1e-12);
        assert!(r.detected());
    }

    #[test]
    fn fine_grained_steering_examples() {
        let bob = povms(&[Observable::pauli_x(), Observable::pauli_z()]);
        let priors = ProbVec::uniform(2);
        let bounds = fine_grained_bounds_all(&bob, &priors).unwrap();
        assert_eq!(bounds.len(), 4);
        let asm = steer(&bell_phi_plus(2), &bob).unwrap();
        let reports = steering_fine_grained(&asm, &bob, &[0, 1], &priors, &bounds).unwrap();
        assert_eq!(reports.len(), 16);
        let best = strongest(&reports).unwrap();
        assert_abs_diff_eq!(best.lhs_value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(best.bound_value, 0.5 + 0.5 / 2f64.sqrt(), epsilon = 1e-9);
        assert!(best.detected());

        let mixed = DensityState::maximally_mixed_bipartite(2, 2);
        let asm = steer(&mixed, &bob).unwrap();
        for r in steering_fine_grained(&asm, &bob, &[0, 1], &priors, &bounds).unwrap() {
            assert_abs_diff_eq!(r.lhs_value, 0.5, epsilon = 1e-12);
            assert!(!r.detected());
        }
    }

    #[test]
    fn unaveraged_columns_are_not_lhs_bounded() {
        // hidden states |+⟩,|−⟩,|0⟩,|1⟩; Alice flags |+⟩ on x0 and |0⟩ on x1
        let h = 0.5f64.sqrt();
        let kets = [[h, h], [h, -h], [1.0, 0.0], [0.0, 1.0]];
        let hidden: Vec<(f64, DensityState)> = kets
            .iter()
            .map(|k| (0.25, DensityState::pure(&[k[0] * ONE, k[1] * ONE]).unwrap()))
            .collect();
        let flag = |hit: bool| ProbVec::point_mass(2, if hit { 0 } else { 1 });
        let response: Vec<Vec<ProbVec>> = (0..4).map(|l| vec![flag(l == 0), flag(l == 2)]).collect();
        let asm = lhs_assemblage(&hidden, &response).unwrap();
        let bob = povms(&[Observable::pauli_x(), Observable::pauli_z()]);
        let cond = column_conditionals(&asm, &bob, &[0, 1]).unwrap();
        let column = 0.5 * cond[0][0].as_ref().unwrap().get(0) + 0.5 * cond[1][0].as_ref().unwrap().get(0);
        assert_abs_diff_eq!(column, 1.0, epsilon = 1e-12);

        let priors = ProbVec::uniform(2);
        let bounds = fine_grained_bounds_all(&bob, &priors).unwrap();
        let reports = steering_fine_grained(&asm, &bob, &[0, 1], &priors, &bounds).unwrap();
        assert!(reports.iter().all(|r| !r.detected()));
    }

    #[test]
    fn tensor_path_matches_state_path() {
        let bob = povms(&[Observable::pauli_x(), Observable::pauli_z()]);
        let priors = ProbVec::uniform(2);
        let bounds = fine_grained_bounds_all(&bob, &priors).unwrap();
        for w in [0.0, 0.5, 0.8, 1.0] {
            let state = werner(w).unwrap();
            let t = correlation_tensor(&state).unwrap();
            let dirs = [[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]];
            let a = steering_fine_grained_tensor(&t, &dirs).unwrap();
            let alice: Vec<Povm> = dirs.iter().map(|d| Observable::spin(*d).unwrap().to_povm()).collect();
            let asm = steer(&state, &alice).unwrap();
            let b = steering_fine_grained(&asm, &bob, &[0, 1], &priors, &bounds).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x.lhs_value, y.lhs_value, epsilon = 1e-12);
                assert_eq!(x.verdict, y.verdict);
                assert_eq!(x.column, y.column);
            }
            let best = strongest(&a).unwrap().lhs_value;
            assert_abs_diff_eq!(best, (1.0 + w) / 2.0, epsilon = 1e-12);
        }
        assert!(steering_fine_grained_tensor(&[[0.0; 4]; 4], &[[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_err());
    }
}
