//! Steering assemblages `{σ_{a′|x′}}` on Bob's side.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probvec::ProbVec;
use crate::quantum::cmatrix::CMatrix;
use crate::quantum::eigen::eig_hermitian;
use crate::quantum::measurement::Povm;
use crate::quantum::random::{random_distribution, random_state};
use crate::quantum::state::{born_stats, DensityState, Party};

pub const PSD_TOL: f64 = 1e-9;
pub const NO_SIGNALING_TOL: f64 = 1e-8;
/// Alice outcomes rarer than this get no conditional distribution.
pub const EPS_COND: f64 = 1e-10;

/// Subnormalized operators indexed by Alice's setting and outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "AssemblageJson", into = "AssemblageJson")]
pub struct Assemblage {
    settings: Vec<String>,
    outcome_labels: Vec<Vec<String>>,
    elements: Vec<Vec<CMatrix>>,
    bob_dim: usize,
}

impl Assemblage {
    pub fn new(
        settings: Vec<String>,
        outcome_labels: Vec<Vec<String>>,
        elements: Vec<Vec<CMatrix>>,
    ) -> Result<Self> {
        if settings.is_empty() || settings.len() != elements.len() || settings.len() != outcome_labels.len() {
            return Err(Error::DimensionMismatch("settings, labels and elements disagree".into()));
        }
        let bob_dim = elements
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::InvalidState("assemblage without elements".into()))?
            .rows();
        let mut reduced: Option<CMatrix> = None;
        for (x, (ops, labels)) in elements.iter().zip(&outcome_labels).enumerate() {
            if ops.is_empty() || ops.len() != labels.len() {
                return Err(Error::DimensionMismatch(format!(
                    "setting {}: {} labels for {} operators",
                    settings[x],
                    labels.len(),
                    ops.len()
                )));
            }
            let mut sum = CMatrix::zeros(bob_dim, bob_dim);
            for op in ops {
                if !op.is_square() || op.rows() != bob_dim {
                    return Err(Error::DimensionMismatch("assemblage operators differ in size".into()));
                }
                let min = *eig_hermitian(op)?.values.last().unwrap();
                if min < -PSD_TOL {
                    return Err(Error::InvalidState(format!(
                        "setting {}: element with eigenvalue {min:.3e}",
                        settings[x]
                    )));
                }
                sum = &sum + op;
            }
            match &reduced {
                None => {
                    let tr = sum.trace();
                    if (tr.re - 1.0).abs() > NO_SIGNALING_TOL || tr.im.abs() > NO_SIGNALING_TOL {
                        return Err(Error::InvalidState(format!("assemblage has trace {}", tr.re)));
                    }
                    reduced = Some(sum);
                }
                Some(r) => {
                    let defect = r.max_abs_diff(&sum);
                    if defect > NO_SIGNALING_TOL {
                        return Err(Error::InvalidState(format!(
                            "setting {} signals: marginal differs by {defect:.3e}",
                            settings[x]
                        )));
                    }
                }
            }
        }
        let elements = elements
            .into_iter()
            .map(|ops| ops.into_iter().map(|o| o.hermitian_part()).collect())
            .collect();
        Ok(Self {
            settings,
            outcome_labels,
            elements,
            bob_dim,
        })
    }

    pub fn settings(&self) -> &[String] {
        &self.settings
    }

    pub fn setting_count(&self) -> usize {
        self.settings.len()
    }

    pub fn setting_index(&self, name: &str) -> Option<usize> {
        self.settings.iter().position(|s| s == name)
    }

    pub fn outcome_count(&self, setting: usize) -> usize {
        self.elements[setting].len()
    }

    pub fn outcome_labels(&self, setting: usize) -> &[String] {
        &self.outcome_labels[setting]
    }

    pub fn bob_dim(&self) -> usize {
        self.bob_dim
    }

    pub fn element(&self, setting: usize, outcome: usize) -> &CMatrix {
        &self.elements[setting][outcome]
    }

    pub fn elements(&self, setting: usize) -> &[CMatrix] {
        &self.elements[setting]
    }

    /// `p(a′|x′) = tr σ_{a′|x′}`.
    pub fn probability(&self, setting: usize, outcome: usize) -> f64 {
        self.elements[setting][outcome].trace().re.clamp(0.0, 1.0)
    }

    /// `ρ_B = Σ_{a′} σ_{a′|x′}` for the first setting.
    pub fn reduced_state(&self) -> CMatrix {
        self.elements[0].iter().fold(CMatrix::zeros(self.bob_dim, self.bob_dim), |a, b| &a + b)
    }

    /// Largest entrywise spread of the per-setting marginals.
    pub fn no_signaling_defect(&self) -> f64 {
        let r = self.reduced_state();
        self.elements
            .iter()
            .map(|ops| {
                let s = ops.iter().fold(CMatrix::zeros(self.bob_dim, self.bob_dim), |a, b| &a + b);
                s.max_abs_diff(&r)
            })
            .fold(0.0, f64::max)
    }

    pub fn check_setting(&self, setting: usize) -> Result<()> {
        if setting >= self.settings.len() {
            return Err(Error::BadParameter(format!(
                "setting {setting} out of range for {} settings",
                self.settings.len()
            )));
        }
        Ok(())
    }
}

/// `σ_{a′|x′} = tr_A((F_{a′|x′} ⊗ 1) ρ)`.
pub fn steer(state: &DensityState, alice_meas: &[Povm]) -> Result<Assemblage> {
    let (da, _) = state.require_factors()?;
    if alice_meas.is_empty() {
        return Err(Error::BadParameter("Alice needs at least one setting".into()));
    }
    let mut elements = Vec::with_capacity(alice_meas.len());
    for m in alice_meas {
        if m.dim() != da {
            return Err(Error::DimensionMismatch(format!(
                "Alice POVM of dimension {} on a {da}-dimensional factor",
                m.dim()
            )));
        }
        elements.push(
            m.effects()
                .iter()
                .map(|f| state.steered_operator(f))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let settings = (0..alice_meas.len()).map(|i| format!("x{i}")).collect();
    let labels = alice_meas.iter().map(|m| m.labels().to_vec()).collect();
    Assemblage::new(settings, labels, elements)
}

/// One Alice outcome's weight and Bob's normalized conditional statistics.
#[derive(Debug, Clone)]
pub struct Conditional {
    pub outcome: usize,
    pub weight: f64,
    pub distribution: ProbVec,
}

#[derive(Debug, Clone)]
pub struct ConditionalStats {
    pub conditionals: Vec<Conditional>,
    /// Alice outcomes with `p(a′) ≤ EPS_COND`.
    pub omitted: Vec<usize>,
}

impl ConditionalStats {
    pub fn has_omissions(&self) -> bool {
        !self.omitted.is_empty()
    }

    pub fn get(&self, outcome: usize) -> Option<&Conditional> {
        self.conditionals.iter().find(|c| c.outcome == outcome)
    }
}

/// `p(x = j | x′ = a′) = tr(F_j σ_{a′|x′}) / p(a′|x′)` for every `a′`.
pub fn conditional_stats(asm: &Assemblage, setting: usize, bob_meas: &Povm) -> Result<ConditionalStats> {
    asm.check_setting(setting)?;
    if bob_meas.dim() != asm.bob_dim() {
        return Err(Error::DimensionMismatch(format!(
            "Bob POVM of dimension {} on a {}-dimensional assemblage",
            bob_meas.dim(),
            asm.bob_dim()
        )));
    }
    let mut conditionals = Vec::new();
    let mut omitted = Vec::new();
    for (a, sigma) in asm.elements(setting).iter().enumerate() {
        let weight = sigma.trace().re;
        if weight <= EPS_COND {
            omitted.push(a);
            continue;
        }
        let raw = bob_meas
            .effects()
            .iter()
            .map(|f| (f.trace_product(sigma).re / weight).max(0.0))
            .collect();
        conditionals.push(Conditional {
            outcome: a,
            weight: weight.min(1.0),
            distribution: ProbVec::from_weights(raw)?,
        });
    }
    Ok(ConditionalStats {
        conditionals,
        omitted,
    })
}

/// `σ_{a′|x′} = Σ_λ p(λ) p(a′|x′, λ) σ_λ`.
///
/// `response[λ][x′]` is the distribution of Alice's outcome for setting
/// `x′` given `λ`.
pub fn lhs_assemblage(hidden: &[(f64, DensityState)], response: &[Vec<ProbVec>]) -> Result<Assemblage> {
    if hidden.is_empty() || hidden.len() != response.len() {
        return Err(Error::DimensionMismatch("one response table per hidden state expected".into()));
    }
    let weights: Vec<f64> = hidden.iter().map(|(p, _)| *p).collect();
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&p| p < 0.0 || !p.is_finite()) || (total - 1.0).abs() > crate::probvec::SUM_TOL {
        return Err(Error::NotADistribution(format!("hidden weights sum to {total}")));
    }
    let d = hidden[0].1.dim();
    if hidden.iter().any(|(_, s)| s.dim() != d) {
        return Err(Error::DimensionMismatch("hidden states differ in dimension".into()));
    }
    let settings = response[0].len();
    if settings == 0 {
        return Err(Error::BadParameter("no Alice settings".into()));
    }
    let outcomes: Vec<usize> = response[0].iter().map(ProbVec::dim).collect();
    if response
        .iter()
        .any(|r| r.len() != settings || r.iter().map(ProbVec::dim).ne(outcomes.iter().copied()))
    {
        return Err(Error::DimensionMismatch("response tables differ in shape".into()));
    }
    let mut elements: Vec<Vec<CMatrix>> = outcomes.iter().map(|&k| vec![CMatrix::zeros(d, d); k]).collect();
    for ((p, sigma), table) in hidden.iter().zip(response) {
        for (x, dist) in table.iter().enumerate() {
            for (a, &q) in dist.entries().iter().enumerate() {
                let w = p * q;
                if w != 0.0 {
                    elements[x][a] = &elements[x][a] + &sigma.matrix().scale_real(w);
                }
            }
        }
    }
    let names = (0..settings).map(|i| format!("x{i}")).collect();
    let labels = outcomes.iter().map(|&k| (0..k).map(|a| a.to_string()).collect()).collect();
    Assemblage::new(names, labels, elements)
}

/// Random LHS model: up to `max_hidden` random hidden states with random,
/// sometimes deterministic, response functions.
pub fn random_lhs_assemblage<R: Rng + ?Sized>(
    bob_dim: usize,
    alice_outcomes: &[usize],
    max_hidden: usize,
    rng: &mut R,
) -> Assemblage {
    let n = rng.random_range(1..=max_hidden.max(1));
    let weights = random_distribution(n, rng);
    let hidden: Vec<(f64, DensityState)> = weights
        .entries()
        .iter()
        .map(|&p| (p, random_state(bob_dim, rng)))
        .collect();
    let response: Vec<Vec<ProbVec>> = (0..n)
        .map(|_| {
            alice_outcomes
                .iter()
                .map(|&k| {
                    if rng.random_bool(0.5) {
                        ProbVec::point_mass(k, rng.random_range(0..k))
                    } else {
                        random_distribution(k, rng)
                    }
                })
                .collect()
        })
        .collect();
    lhs_assemblage(&hidden, &response).expect("well-formed LHS model")
}

/// Bob's reduced state computed directly from the bipartite state.
pub fn bob_marginal(state: &DensityState) -> Result<DensityState> {
    state.partial_trace(Party::B)
}

/// Unconditioned Bob statistics, equal to the weighted mean of the
/// conditionals of any setting.
pub fn bob_statistics(asm: &Assemblage, bob_meas: &Povm) -> Result<ProbVec> {
    let rho = DensityState::new(asm.reduced_state())?;
    born_stats(&rho, bob_meas)
}

#[derive(Serialize, Deserialize)]
struct OutcomeJson {
    label: String,
    operator: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct SettingJson {
    name: String,
    outcomes: Vec<OutcomeJson>,
}

#[derive(Serialize, Deserialize)]
struct AssemblageJson {
    settings: Vec<SettingJson>,
}

impl TryFrom<AssemblageJson> for Assemblage {
    type Error = Error;

    fn try_from(j: AssemblageJson) -> Result<Self> {
        let mut names = Vec::new();
        let mut labels = Vec::new();
        let mut elements = Vec::new();
        for s in j.settings {
            names.push(s.name);
            let mut ls = Vec::new();
            let mut ops = Vec::new();
            for o in s.outcomes {
                ls.push(o.label);
                ops.push(CMatrix::from_pairs(&o.operator)?);
            }
            labels.push(ls);
            elements.push(ops);
        }
        Assemblage::new(names, labels, elements)
    }
}

impl From<Assemblage> for AssemblageJson {
    fn from(a: Assemblage) -> Self {
        let settings = a
            .settings
            .into_iter()
            .zip(a.outcome_labels)
            .zip(a.elements)
            .map(|((name, labels), ops)| SettingJson {
                name,
                outcomes: labels
                    .into_iter()
                    .zip(ops)
                    .map(|(label, op)| OutcomeJson {
                        label,
                        operator: op.to_pairs(),
                    })
                    .collect(),
            })
            .collect();
        AssemblageJson { settings }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::families::bell_phi_plus;
    use crate::quantum::measurement::Observable;
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;

    fn z() -> Povm {
        Observable::pauli_z().to_povm()
    }
    fn x() -> Povm {
        Observable::pauli_x().to_povm()
    }

    #[test]
    fn steer_bell_state() {
        let asm = steer(&bell_phi_plus(2), &[z(), x()]).unwrap();
        let half = |v: [f64; 4]| CMatrix::from_real(2, 2, &v).unwrap();
        assert!(asm.element(0, 0).approx_eq(&half([0.5, 0.0, 0.0, 0.0]), 1e-12));
        assert!(asm.element(0, 1).approx_eq(&half([0.0, 0.0, 0.0, 0.5]), 1e-12));
        assert!(asm.element(1, 0).approx_eq(&half([0.25, 0.25, 0.25, 0.25]), 1e-12));
        assert!(asm.element(1, 1).approx_eq(&half([0.25, -0.25, -0.25, 0.25]), 1e-12));
        assert!(asm.no_signaling_defect() < 1e-12);
        assert!(asm.reduced_state().approx_eq(&CMatrix::identity(2).scale_real(0.5), 1e-12));
    }

    #[test]
    fn product_states_are_unsteered() {
        let mut rng = stream_rng(5, 0);
        let eta = random_state(2, &mut rng);
        let sigma = random_state(2, &mut rng);
        let state = DensityState::product(&eta, &sigma);
        let asm = steer(&state, &[x(), z()]).unwrap();
        for s in 0..2 {
            for a in 0..2 {
                let p = asm.probability(s, a);
                assert!(asm.element(s, a).approx_eq(&sigma.matrix().scale_real(p), 1e-12));
            }
        }
    }

    #[test]
    fn conditionals() {
        let asm = steer(&bell_phi_plus(2), &[z()]).unwrap();
        let zz = conditional_stats(&asm, 0, &z()).unwrap();
        assert_eq!(zz.conditionals.len(), 2);
        assert_abs_diff_eq!(zz.conditionals[0].weight, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(zz.conditionals[0].distribution.get(0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(zz.conditionals[1].distribution.get(1), 1.0, epsilon = 1e-12);
        let zx = conditional_stats(&asm, 0, &x()).unwrap();
        for c in &zx.conditionals {
            assert_abs_diff_eq!(c.distribution.get(0), 0.5, epsilon = 1e-12);
        }

        let mixed = DensityState::maximally_mixed_bipartite(2, 2);
        let asm = steer(&mixed, &[x()]).unwrap();
        let c = conditional_stats(&asm, 0, &z()).unwrap();
        for cond in &c.conditionals {
            assert_abs_diff_eq!(cond.distribution.get(0), 0.5, epsilon = 1e-12);
        }
        assert!(conditional_stats(&asm, 3, &z()).is_err());
    }

    #[test]
    fn omitted_outcomes_are_flagged() {
        let zero = DensityState::pure(&[crate::quantum::cmatrix::ONE, crate::quantum::cmatrix::ZERO]).unwrap();
        let state = DensityState::product(&zero, &DensityState::maximally_mixed(2));
        let asm = steer(&state, &[z()]).unwrap();
        let c = conditional_stats(&asm, 0, &x()).unwrap();
        assert!(c.has_omissions());
        assert_eq!(c.omitted, vec![1]);
    }

    #[test]
    fn lhs_examples() {
        let zero = DensityState::pure(&[crate::quantum::cmatrix::ONE, crate::quantum::cmatrix::ZERO]).unwrap();
        let one = DensityState::pure(&[crate::quantum::cmatrix::ZERO, crate::quantum::cmatrix::ONE]).unwrap();
        let det = vec![vec![ProbVec::point_mass(2, 0), ProbVec::point_mass(2, 1)]];
        let asm = lhs_assemblage(&[(1.0, zero.clone())], &det).unwrap();
        assert!(asm.element(0, 0).approx_eq(zero.matrix(), 1e-15));
        assert!(asm.element(1, 1).approx_eq(zero.matrix(), 1e-15));

        let copy = vec![vec![ProbVec::point_mass(2, 0)], vec![ProbVec::point_mass(2, 1)]];
        let asm = lhs_assemblage(&[(0.5, zero.clone()), (0.5, one.clone())], &copy).unwrap();
        assert!(asm.element(0, 1).approx_eq(&one.matrix().scale_real(0.5), 1e-15));

        let bad = lhs_assemblage(&[(0.7, zero), (0.7, one)], &copy);
        assert!(matches!(bad, Err(Error::NotADistribution(_))));
    }

    #[test]
    fn json_round_trip() {
        let asm = steer(&bell_phi_plus(2), &[z(), x()]).unwrap();
        let text = serde_json::to_string(&asm).unwrap();
        assert!(text.contains("\"operator\""));
        let back: Assemblage = serde_json::from_str(&text).unwrap();
        for s in 0..2 {
            for a in 0..2 {
                assert!(back.element(s, a).approx_eq(asm.element(s, a), 1e-15));
            }
        }
    }

    #[test]
    fn signaling_is_rejected() {
        let e = |v: [f64; 4]| CMatrix::from_real(2, 2, &v).unwrap();
        let bad = Assemblage::new(
            vec!["a".into(), "b".into()],
            vec![vec!["0".into()], vec!["0".into()]],
            vec![vec![e([1.0, 0.0, 0.0, 0.0])], vec![e([0.0, 0.0, 0.0, 1.0])]],
        );
        assert!(matches!(bad, Err(Error::InvalidState(_))));
    }
}
