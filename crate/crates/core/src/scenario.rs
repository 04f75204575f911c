//! JSON scenario descriptions, built-in presets and the runner behind the
//! command-line tool.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::assemblage::{steer, Assemblage};
use crate::bounds::{
    fine_grained_bound, fine_grained_bound_product, fingerprint, maassen_uffink, mub_fine_grained_bound,
    omega_numeric, omega_two_dichotomic, resolve_outcomes, BoundVector, DEFAULT_RESTARTS,
};
use crate::criteria::{
    entanglement_fine_grained, entanglement_universal, fine_grained_bounds_all, steering_fine_grained,
    steering_fine_grained_tensor, steering_universal, strongest, Criterion, DetectionReport,
};
use crate::error::{Error, Result};
use crate::oracle::{linear_grid, threshold_scan, verify_majorization_bound, Family, ScanResult, ViolationCensus};
use crate::probvec::ProbVec;
use crate::quantifier::Quantifier;
use crate::quantum::cmatrix::{CMatrix, ONE, ZERO};
use crate::quantum::families::{bell_phi_plus, isotropic, mub_bases, mub_partner_bases, werner};
use crate::quantum::measurement::{Observable, Povm};
use crate::quantum::state::{correlation_tensor, DensityState};
use crate::rng::DEFAULT_SEED;

pub const SCHEMA_VERSION: u32 = 1;
pub const PRESETS: [&str; 3] = ["paper-example-1", "paper-example-2", "paper-eq12"];

type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Entanglement,
    Steering,
    BoundOnly,
    Scan,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Family {
        family: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        parameter: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Matrix {
        matrix: MatrixJson,
        dims: [usize; 2],
    },
}

impl StateSpec {
    pub fn family(name: &str) -> Self {
        StateSpec::Family {
            family: name.to_string(),
            parameter: None,
            dim: None,
        }
    }

    /// `name` or `name:parameter`.
    pub fn parse_short(text: &str) -> Result<Self> {
        let (name, param) = match text.split_once(':') {
            Some((n, p)) => (
                n,
                Some(p.parse::<f64>().map_err(|_| Error::ConfigParse(format!("bad state parameter `{p}`")))?),
            ),
            None => (text, None),
        };
        Ok(StateSpec::Family {
            family: name.to_string(),
            parameter: param,
            dim: None,
        })
    }

    pub fn build(&self) -> Result<DensityState> {
        match self {
            StateSpec::Matrix { matrix, dims } => {
                DensityState::bipartite(CMatrix::from_pairs(matrix)?, dims[0], dims[1])
            }
            StateSpec::Family { family, parameter, dim } => {
                let d = dim.unwrap_or(2);
                let need = |what: &str| {
                    parameter.ok_or_else(|| Error::ConfigParse(format!("state family `{what}` needs a parameter")))
                };
                match family.as_str() {
                    "bell_phi_plus" => Ok(bell_phi_plus(d)),
                    "werner" => werner(need("werner")?),
                    "isotropic" => isotropic(d, need("isotropic")?),
                    "maximally_mixed" => Ok(DensityState::maximally_mixed_bipartite(d, d)),
                    "product_zero" => {
                        let mut psi = vec![ZERO; d * d];
                        psi[0] = ONE;
                        DensityState::pure_bipartite(&psi, d, d)
                    }
                    other => Err(Error::ConfigParse(format!(
                        "unknown state family `{other}` (expected bell_phi_plus, werner, isotropic, maximally_mixed, product_zero)"
                    ))),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeasurementEntry {
    Name(String),
    Spin {
        spin: [f64; 3],
    },
    Observable {
        observable: MatrixJson,
    },
    Povm {
        effects: Vec<MatrixJson>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<Vec<String>>,
    },
}

/// A resolved measurement: an observable when one is available.
#[derive(Debug, Clone)]
pub enum Measurement {
    Observable(Observable),
    Povm(Povm),
}

impl Measurement {
    pub fn povm(&self) -> Povm {
        match self {
            Measurement::Observable(o) => o.to_povm(),
            Measurement::Povm(p) => p.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Measurement::Observable(o) => o.dim(),
            Measurement::Povm(p) => p.dim(),
        }
    }
}

impl MeasurementEntry {
    pub fn resolve(&self) -> Result<Vec<Measurement>> {
        match self {
            MeasurementEntry::Name(name) => resolve_name(name),
            MeasurementEntry::Spin { spin } => Ok(vec![Measurement::Observable(Observable::spin(*spin)?)]),
            MeasurementEntry::Observable { observable } => {
                Ok(vec![Measurement::Observable(Observable::new(CMatrix::from_pairs(observable)?)?)])
            }
            MeasurementEntry::Povm { effects, labels } => {
                let effects = effects.iter().map(|m| CMatrix::from_pairs(m)).collect::<Result<Vec<_>>>()?;
                let povm = match labels {
                    Some(l) => Povm::new(effects, l.clone())?,
                    None => Povm::from_effects(effects)?,
                };
                Ok(vec![Measurement::Povm(povm)])
            }
        }
    }
}

fn resolve_name(name: &str) -> Result<Vec<Measurement>> {
    let single = |o: Observable| Ok(vec![Measurement::Observable(o)]);
    match name {
        "pauli_x" => single(Observable::pauli_x()),
        "pauli_y" => single(Observable::pauli_y()),
        "pauli_z" => single(Observable::pauli_z()),
        other => {
            let parts: Vec<&str> = other.split(':').collect();
            if parts.len() == 3 && (parts[0] == "mub" || parts[0] == "mub_conj") {
                let d = parts[1].parse::<usize>();
                let m = parts[2].parse::<usize>();
                if let (Ok(d), Ok(m)) = (d, m) {
                    let obs = if parts[0] == "mub" { mub_bases(d, m)? } else { mub_partner_bases(d, m)? };
                    return Ok(obs.into_iter().map(Measurement::Observable).collect());
                }
            }
            Err(Error::ConfigParse(format!(
                "unknown measurement `{other}` (expected pauli_x, pauli_y, pauli_z, mub:d:m or mub_conj:d:m)"
            )))
        }
    }
}

fn resolve_list(entries: &[MeasurementEntry]) -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for e in entries {
        out.extend(e.resolve()?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyMeasurements {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alice: Vec<MeasurementEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bob: Vec<MeasurementEntry>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyOutcomes {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alice: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bob: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundChoice {
    #[default]
    Auto,
    Analytic,
    Numeric,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSpec {
    pub family: Family,
    pub criterion: String,
    #[serde(default)]
    pub start: f64,
    #[serde(default = "one")]
    pub end: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_bisect")]
    pub bisect_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

fn one() -> f64 {
    1.0
}
fn default_step() -> f64 {
    0.01
}
fn default_bisect() -> f64 {
    crate::oracle::DEFAULT_BISECT_TOL
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario_kind: ScenarioKind,
    /// `universal`, `fine_grained` or, for steering, `fine_grained_tensor`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub criterion: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assemblage: Option<Assemblage>,
    #[serde(default)]
    pub measurements: PartyMeasurements,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantifier: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub priors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<PartyOutcomes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Vec<usize>>,
    #[serde(default)]
    pub bound_method: BoundChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSpec>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn fingerprint(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn base(kind: ScenarioKind, criterion: &str, alice: &[&str], bob: &[&str]) -> Self {
        let names = |v: &[&str]| v.iter().map(|s| MeasurementEntry::Name(s.to_string())).collect();
        ScenarioConfig {
            scenario_kind: kind,
            criterion: Some(criterion.to_string()),
            state: Some(StateSpec::family("bell_phi_plus")),
            assemblage: None,
            measurements: PartyMeasurements {
                alice: names(alice),
                bob: names(bob),
            },
            quantifier: None,
            priors: None,
            outcomes: None,
            pairing: None,
            bound_method: BoundChoice::Auto,
            oracle: None,
            scan: None,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        let xy = ["pauli_x", "pauli_y"];
        let xz = ["pauli_x", "pauli_z"];
        match name {
            "paper-example-1" => {
                let mut c = Self::base(ScenarioKind::Entanglement, "universal", &xy, &xy);
                c.quantifier = Some("shannon".into());
                Ok(c)
            }
            "paper-example-2" => {
                let mut c = Self::base(ScenarioKind::Steering, "universal", &xy, &xy);
                c.quantifier = Some("shannon".into());
                Ok(c)
            }
            "paper-eq12" => {
                let mut c = Self::base(ScenarioKind::Steering, "fine_grained", &xz, &xz);
                c.priors = Some(vec![0.5, 0.5]);
                Ok(c)
            }
            other => Err(Error::ConfigParse(format!(
                "unknown preset `{other}` (available: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    fn criterion_for(&self, kind: ScenarioKind) -> Result<Criterion> {
        let c = self.criterion.as_deref().unwrap_or("universal");
        match (kind, c) {
            (ScenarioKind::Entanglement, "universal") => Ok(Criterion::EntanglementUniversal),
            (ScenarioKind::Entanglement, "fine_grained") => Ok(Criterion::EntanglementFineGrained),
            (ScenarioKind::Steering, "universal") => Ok(Criterion::SteeringUniversal),
            (ScenarioKind::Steering, "fine_grained") => Ok(Criterion::SteeringFineGrained),
            (ScenarioKind::Steering, "fine_grained_tensor") => Ok(Criterion::SteeringFineGrainedTensor),
            _ => Err(Error::ConfigParse(format!("criterion `{c}` does not apply to this scenario kind"))),
        }
    }
}

pub fn criterion_from_name(name: &str) -> Result<Criterion> {
    match name {
        "entanglement_universal" => Ok(Criterion::EntanglementUniversal),
        "steering_universal" => Ok(Criterion::SteeringUniversal),
        "entanglement_fine_grained" => Ok(Criterion::EntanglementFineGrained),
        "steering_fine_grained" => Ok(Criterion::SteeringFineGrained),
        "steering_fine_grained_tensor" => Ok(Criterion::SteeringFineGrainedTensor),
        other => Err(Error::ConfigParse(format!("unknown criterion `{other}`"))),
    }
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
}

struct Settings {
    seed: u64,
    restarts: usize,
}

fn observables(list: &[Measurement], party: &str) -> Result<Vec<Observable>> {
    list.iter()
        .map(|m| match m {
            Measurement::Observable(o) => Ok(o.clone()),
            Measurement::Povm(_) => Err(Error::ConfigParse(format!(
                "{party}: this criterion needs observables, not inline POVMs"
            ))),
        })
        .collect()
}

fn povms(list: &[Measurement]) -> Vec<Povm> {
    list.iter().map(Measurement::povm).collect()
}

fn majorization_bound(obs: &[Measurement], choice: BoundChoice, s: &Settings) -> Result<BoundVector> {
    let two_qubit = obs.len() == 2
        && obs.iter().all(|m| matches!(m, Measurement::Observable(o) if o.dim() == 2 && o.is_nondegenerate()));
    let use_analytic = match choice {
        BoundChoice::Analytic => {
            if !two_qubit {
                return Err(Error::ConfigParse(
                    "analytic bounds need exactly two nondegenerate qubit observables".into(),
                ));
            }
            true
        }
        BoundChoice::Numeric => false,
        BoundChoice::Auto => two_qubit,
    };
    if use_analytic {
        match (&obs[0], &obs[1]) {
            (Measurement::Observable(a), Measurement::Observable(b)) => omega_two_dichotomic(a, b),
            _ => unreachable!("checked above"),
        }
    } else {
        omega_numeric(&povms(obs), s.restarts, s.seed)
    }
}

/// Without explicit measurements the product test uses both outcomes of
/// `Z` and of `X` on each side, the smallest such game that Φ⁺ wins.
fn default_names(criterion: Criterion) -> &'static [&'static str] {
    match criterion {
        Criterion::EntanglementUniversal | Criterion::SteeringUniversal => &["pauli_x", "pauli_y"],
        Criterion::EntanglementFineGrained => &["pauli_z", "pauli_z", "pauli_x", "pauli_x"],
        _ => &["pauli_x", "pauli_z"],
    }
}

/// Repeated settings cycle through their outcomes.
fn default_outcomes(meas: &[Povm]) -> Vec<usize> {
    let prints: Vec<String> = meas.iter().map(|m| fingerprint(std::slice::from_ref(m))).collect();
    (0..meas.len())
        .map(|i| prints[..i].iter().filter(|p| **p == prints[i]).count() % meas[i].len())
        .collect()
}

fn party(entries: &[MeasurementEntry], criterion: Criterion) -> Result<Vec<Measurement>> {
    if entries.is_empty() {
        let names: Vec<MeasurementEntry> =
            default_names(criterion).iter().map(|n| MeasurementEntry::Name(n.to_string())).collect();
        return resolve_list(&names);
    }
    resolve_list(entries)
}

fn quantifier(cfg: &ScenarioConfig) -> Result<Quantifier> {
    cfg.quantifier
        .as_deref()
        .unwrap_or("shannon")
        .parse::<Quantifier>()
        .map_err(|e| Error::ConfigParse(e.to_string()))
}

fn parse_labels(meas: &[Povm], labels: &[String]) -> Result<Vec<usize>> {
    let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    resolve_outcomes(meas, &refs)
}

fn pairing(cfg: &ScenarioConfig, n: usize) -> Vec<usize> {
    cfg.pairing.clone().unwrap_or_else(|| (0..n).collect())
}

fn unit_direction(o: &Observable) -> Result<[f64; 3]> {
    let n = [1, 2, 3].map(|k| 0.5 * o.matrix().trace_product(&crate::quantum::pauli(k)).re);
    let trace = o.matrix().trace().re;
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if o.dim() != 2 || trace.abs() > 1e-9 || (norm - 1.0).abs() > 1e-9 {
        return Err(Error::ConfigParse("the tensor test needs Alice spin observables n·σ".into()));
    }
    Ok(n)
}

/// A criterion with its measurements and bounds fixed, ready to be applied
/// to states or assemblages.
pub enum Pipeline {
    EntanglementUniversal {
        x: Vec<Observable>,
        y: Vec<Observable>,
        q: Quantifier,
        bx: BoundVector,
        by: BoundVector,
    },
    EntanglementFineGrained {
        ma: Vec<Povm>,
        mb: Vec<Povm>,
        oa: Vec<usize>,
        ob: Vec<usize>,
        priors: ProbVec,
        bound: crate::bounds::FineGrainedBound,
    },
    SteeringUniversal {
        alice: Vec<Povm>,
        bob: Vec<Povm>,
        pairing: Vec<usize>,
        q: Quantifier,
        bound: BoundVector,
    },
    SteeringFineGrained {
        alice: Vec<Povm>,
        bob: Vec<Povm>,
        pairing: Vec<usize>,
        priors: ProbVec,
        bounds: Vec<crate::bounds::FineGrainedBound>,
    },
    SteeringTensor {
        directions: Vec<[f64; 3]>,
    },
}

impl Pipeline {
    fn build(cfg: &ScenarioConfig, criterion: Criterion, s: &Settings) -> Result<Self> {
        let alice = party(&cfg.measurements.alice, criterion)?;
        let bob = party(&cfg.measurements.bob, criterion)?;
        match criterion {
            Criterion::EntanglementUniversal => {
                let q = quantifier(cfg)?;
                Ok(Pipeline::EntanglementUniversal {
                    bx: majorization_bound(&alice, cfg.bound_method, s)?,
                    by: majorization_bound(&bob, cfg.bound_method, s)?,
                    x: observables(&alice, "alice")?,
                    y: observables(&bob, "bob")?,
                    q,
                })
            }
            Criterion::EntanglementFineGrained => {
                let (ma, mb) = (povms(&alice), povms(&bob));
                let outcomes = cfg.outcomes.clone().unwrap_or_default();
                let pick = |m: &[Povm], l: &[String]| {
                    if l.is_empty() {
                        Ok(default_outcomes(m))
                    } else {
                        parse_labels(m, l)
                    }
                };
                let oa = pick(&ma, &outcomes.alice)?;
                let ob = pick(&mb, &outcomes.bob)?;
                let priors = match &cfg.priors {
                    Some(p) => ProbVec::new(p.clone())?,
                    None if ma.len() == mb.len() => {
                        let n = ma.len();
                        let w = (0..n * n).map(|k| if k / n == k % n { 1.0 } else { 0.0 }).collect();
                        ProbVec::from_weights(w)?
                    }
                    None => ProbVec::uniform(ma.len() * mb.len()),
                };
                let bound = fine_grained_bound_product(&ma, &mb, &oa, &ob, &priors, s.restarts, s.seed)?;
                Ok(Pipeline::EntanglementFineGrained {
                    ma,
                    mb,
                    oa,
                    ob,
                    priors,
                    bound,
                })
            }
            Criterion::SteeringUniversal => {
                let q = quantifier(cfg)?;
                let bound = majorization_bound(&bob, cfg.bound_method, s)?;
                Ok(Pipeline::SteeringUniversal {
                    pairing: pairing(cfg, bob.len()),
                    alice: povms(&alice),
                    bob: povms(&bob),
                    q,
                    bound,
                })
            }
            Criterion::SteeringFineGrained => {
                let bob = povms(&bob);
                let priors = match &cfg.priors {
                    Some(p) => ProbVec::new(p.clone())?,
                    None => ProbVec::uniform(bob.len()),
                };
                let bounds = fine_grained_bounds_all(&bob, &priors)?;
                Ok(Pipeline::SteeringFineGrained {
                    pairing: pairing(cfg, bob.len()),
                    alice: povms(&alice),
                    bob,
                    priors,
                    bounds,
                })
            }
            Criterion::SteeringFineGrainedTensor => {
                let directions = observables(&alice, "alice")?
                    .iter()
                    .map(unit_direction)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Pipeline::SteeringTensor { directions })
            }
        }
    }

    pub fn evaluate_state(&self, state: &DensityState) -> Result<Vec<DetectionReport>> {
        match self {
            Pipeline::EntanglementUniversal { x, y, q, bx, by } => {
                Ok(vec![entanglement_universal(state, x, y, q, bx, by)?])
            }
            Pipeline::EntanglementFineGrained {
                ma,
                mb,
                oa,
                ob,
                priors,
                bound,
            } => Ok(vec![entanglement_fine_grained(state, ma, mb, oa, ob, priors, bound)?]),
            Pipeline::SteeringUniversal { alice, .. } | Pipeline::SteeringFineGrained { alice, .. } => {
                self.evaluate_assemblage(&steer(state, alice)?)
            }
            Pipeline::SteeringTensor { directions } => {
                steering_fine_grained_tensor(&correlation_tensor(state)?, directions)
            }
        }
    }

    pub fn evaluate_assemblage(&self, asm: &Assemblage) -> Result<Vec<DetectionReport>> {
        match self {
            Pipeline::SteeringUniversal {
                bob, pairing, q, bound, ..
            } => Ok(vec![steering_universal(asm, bob, pairing, q, bound)?]),
            Pipeline::SteeringFineGrained {
                bob,
                pairing,
                priors,
                bounds,
                ..
            } => steering_fine_grained(asm, bob, pairing, priors, bounds),
            _ => Err(Error::ConfigParse("this criterion needs a state, not an assemblage".into())),
        }
    }

    /// Dimension checks between the pipeline and a bipartite state.
    fn check_state(&self, state: &DensityState) -> Result<()> {
        let (da, db) = state.require_factors()?;
        let mismatch = |who: &str, d: usize, want: usize| {
            Err(Error::DimensionMismatch(format!("{who} measurements act on dimension {d}, state factor has {want}")))
        };
        let check = |who: &str, dims: Vec<usize>, want: usize| -> Result<()> {
            match dims.into_iter().find(|&d| d != want) {
                Some(d) => mismatch(who, d, want),
                None => Ok(()),
            }
        };
        match self {
            Pipeline::EntanglementUniversal { x, y, .. } => {
                check("alice", x.iter().map(Observable::dim).collect(), da)?;
                check("bob", y.iter().map(Observable::dim).collect(), db)
            }
            Pipeline::EntanglementFineGrained { ma, mb, .. } => {
                check("alice", ma.iter().map(Povm::dim).collect(), da)?;
                check("bob", mb.iter().map(Povm::dim).collect(), db)
            }
            Pipeline::SteeringUniversal { alice, bob, .. } | Pipeline::SteeringFineGrained { alice, bob, .. } => {
                check("alice", alice.iter().map(Povm::dim).collect(), da)?;
                check("bob", bob.iter().map(Povm::dim).collect(), db)
            }
            Pipeline::SteeringTensor { .. } => {
                if (da, db) != (2, 2) {
                    return Err(Error::DimensionMismatch("the tensor test needs two qubits".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundSummary {
    pub party: String,
    pub omega: Vec<f64>,
    pub method: crate::bounds::BoundMethod,
    pub measurement_fingerprint: String,
    pub certified_slack: f64,
    pub quantifier_name: String,
    pub quantifier_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maassen_uffink: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fine_grained: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mub_formula: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedCensus {
    pub name: String,
    pub census: ViolationCensus,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub kind: ScenarioKind,
    pub reports: Vec<DetectionReport>,
    pub bounds: Vec<BoundSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanResult>,
    pub censuses: Vec<NamedCensus>,
    pub seed: u64,
    pub restarts: usize,
}

impl ScenarioOutcome {
    /// A certified violation among the reports.
    pub fn detected(&self) -> bool {
        self.reports.iter().any(|r| r.detected() && r.certified)
    }

    pub fn all_certified(&self) -> bool {
        self.reports.iter().all(|r| r.certified)
    }
}

/// Machine-readable report written by `--json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool: String,
    pub tool_version: String,
    pub config_fingerprint: String,
    pub seed: u64,
    pub restarts: usize,
    pub certified: bool,
    pub verdict: String,
    pub outcome: ScenarioOutcome,
}

impl ReportDocument {
    pub fn new(cfg: &ScenarioConfig, outcome: ScenarioOutcome) -> Self {
        let verdict = match outcome.kind {
            ScenarioKind::BoundOnly | ScenarioKind::Scan => "ran",
            _ if outcome.detected() => "Detected",
            _ => "NotDetected",
        };
        Self {
            schema_version: SCHEMA_VERSION,
            tool: "uw".into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_fingerprint: cfg.fingerprint(),
            seed: outcome.seed,
            restarts: outcome.restarts,
            certified: outcome.all_certified(),
            verdict: verdict.into(),
            outcome,
        }
    }
}

fn settings(cfg: &ScenarioConfig, opts: &RunOptions) -> Settings {
    let oracle = cfg.oracle.clone().unwrap_or_default();
    Settings {
        seed: opts.seed.or(oracle.seed).unwrap_or(DEFAULT_SEED),
        restarts: opts.restarts.or(oracle.restarts).unwrap_or(DEFAULT_RESTARTS),
    }
}

fn summarize(party: &str, meas: &[Measurement], cfg: &ScenarioConfig, s: &Settings) -> Result<BoundSummary> {
    let bound = majorization_bound(meas, cfg.bound_method, s)?;
    let q = quantifier(cfg)?;
    let mu = match meas {
        [Measurement::Observable(a), Measurement::Observable(b)] if a.is_nondegenerate() && b.is_nondegenerate() => {
            Some(maassen_uffink(a, b)?)
        }
        _ => None,
    };
    let ps = povms(meas);
    let fine = match &cfg.outcomes {
        Some(o) if !o.alice.is_empty() => {
            let out = parse_labels(&ps, &o.alice)?;
            let priors = match &cfg.priors {
                Some(p) => ProbVec::new(p.clone())?,
                None => ProbVec::uniform(ps.len()),
            };
            Some(fine_grained_bound(&ps, &out, &priors)?.value)
        }
        _ => None,
    };
    let mub_formula = cfg
        .measurements
        .alice
        .iter()
        .find_map(|e| match e {
            MeasurementEntry::Name(n) if n.starts_with("mub") => {
                let p: Vec<usize> = n.split(':').skip(1).filter_map(|x| x.parse().ok()).collect();
                (p.len() == 2).then(|| mub_fine_grained_bound(p[0], p[1]).ok()).flatten()
            }
            _ => None,
        });
    Ok(BoundSummary {
        party: party.into(),
        omega: bound.omega.entries().to_vec(),
        method: bound.method,
        measurement_fingerprint: bound.measurement_fingerprint.clone(),
        certified_slack: bound.certified_slack,
        quantifier_name: q.name(),
        quantifier_value: q.evaluate(&bound.omega),
        maassen_uffink: mu,
        fine_grained: fine,
        mub_formula,
    })
}

fn oracle_census(cfg: &ScenarioConfig, meas: &[Measurement], s: &Settings) -> Result<Option<NamedCensus>> {
    match cfg.oracle.as_ref().and_then(|o| o.samples) {
        Some(samples) => {
            let bound = majorization_bound(meas, cfg.bound_method, s)?;
            let census = verify_majorization_bound(&bound, &povms(meas), samples, s.seed)?;
            Ok(Some(NamedCensus {
                name: "majorization_bound".into(),
                census,
            }))
        }
        None => Ok(None),
    }
}

fn family_state(family: Family, dim: usize, w: f64) -> Result<DensityState> {
    match family {
        Family::Werner => werner(w),
        Family::Isotropic => isotropic(dim, w),
    }
}

/// Executes a scenario end to end.
pub fn run(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioOutcome> {
    let s = settings(cfg, opts);
    let mut outcome = ScenarioOutcome {
        kind: cfg.scenario_kind,
        reports: Vec::new(),
        bounds: Vec::new(),
        scan: None,
        censuses: Vec::new(),
        seed: s.seed,
        restarts: s.restarts,
    };
    match cfg.scenario_kind {
        ScenarioKind::BoundOnly => {
            let entries = if cfg.measurements.alice.is_empty() {
                &cfg.measurements.bob
            } else {
                &cfg.measurements.alice
            };
            if entries.is_empty() {
                return Err(Error::ConfigParse("bound_only needs at least one measurement".into()));
            }
            let meas = resolve_list(entries)?;
            outcome.bounds.push(summarize("alice", &meas, cfg, &s)?);
            outcome.censuses.extend(oracle_census(cfg, &meas, &s)?);
        }
        ScenarioKind::Entanglement | ScenarioKind::Steering => {
            let criterion = cfg.criterion_for(cfg.scenario_kind)?;
            let pipeline = Pipeline::build(cfg, criterion, &s)?;
            outcome.reports = match (&cfg.state, &cfg.assemblage) {
                (Some(spec), None) => {
                    let state = spec.build()?;
                    pipeline.check_state(&state)?;
                    pipeline.evaluate_state(&state)?
                }
                (None, Some(asm)) if cfg.scenario_kind == ScenarioKind::Steering => pipeline.evaluate_assemblage(asm)?,
                (Some(_), Some(_)) => {
                    return Err(Error::ConfigParse("give either a state or an assemblage, not both".into()))
                }
                _ => return Err(Error::ConfigParse("scenario needs a state".into())),
            };
            if criterion.is_universal() {
                let bob = party(&cfg.measurements.bob, criterion)?;
                outcome.censuses.extend(oracle_census(cfg, &bob, &s)?);
            }
        }
        ScenarioKind::Scan => {
            let spec = cfg
                .scan
                .as_ref()
                .ok_or_else(|| Error::ConfigParse("scan scenario needs a `scan` section".into()))?;
            let criterion = criterion_from_name(&spec.criterion)?;
            let pipeline = Pipeline::build(cfg, criterion, &s)?;
            let dim = spec.dim.unwrap_or(2);
            pipeline.check_state(&family_state(spec.family, dim, spec.start.clamp(0.0, 1.0))?)?;
            let grid = linear_grid(spec.start, spec.end, spec.step);
            let eval = |w: f64| -> Result<DetectionReport> {
                let reports = pipeline.evaluate_state(&family_state(spec.family, dim, w)?)?;
                strongest(&reports)
                    .cloned()
                    .ok_or_else(|| Error::BadParameter("criterion produced no reports".into()))
            };
            outcome.scan = Some(threshold_scan(spec.family, eval, &grid, spec.bisect_tol)?);
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn presets_parse_and_run() {
        let one = run(&ScenarioConfig::preset("paper-example-1").unwrap(), &RunOptions::default()).unwrap();
        assert_eq!(one.reports.len(), 1);
        assert_abs_diff_eq!(one.reports[0].lhs_value, 0.0, epsilon = 1e-9);
        assert!(one.detected());

        let two = run(&ScenarioConfig::preset("paper-example-2").unwrap(), &RunOptions::default()).unwrap();
        assert_abs_diff_eq!(two.reports[0].lhs_value, 0.0, epsilon = 1e-9);
        assert!(two.detected());

        let eq = run(&ScenarioConfig::preset("paper-eq12").unwrap(), &RunOptions::default()).unwrap();
        assert_eq!(eq.reports.len(), 16);
        assert!(eq.detected());
        assert!(ScenarioConfig::preset("nope").is_err());
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "scenario_kind": "entanglement",
            "state": {"family": "werner", "parameter": 0.9},
            "measurements": {"alice": ["pauli_x", {"spin": [0, 1, 0]}], "bob": ["pauli_x", "pauli_y"]},
            "quantifier": "min_entropy"
        }"#;
        let cfg = ScenarioConfig::from_json(text).unwrap();
        let again = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg.fingerprint(), again.fingerprint());
        let out = run(&cfg, &RunOptions::default()).unwrap();
        assert!(out.detected());
    }

    #[test]
    fn config_errors() {
        assert!(matches!(ScenarioConfig::from_json("{"), Err(Error::ConfigParse(_))));
        let bad_meas = r#"{"scenario_kind": "bound_only", "measurements": {"alice": ["pauli_w"]}}"#;
        let cfg = ScenarioConfig::from_json(bad_meas).unwrap();
        assert!(matches!(run(&cfg, &RunOptions::default()), Err(Error::ConfigParse(_))));
        let mismatch = r#"{"scenario_kind": "entanglement", "state": {"family": "bell_phi_plus", "dim": 3},
            "measurements": {"alice": ["pauli_x", "pauli_y"], "bob": ["pauli_x", "pauli_y"]}}"#;
        let cfg = ScenarioConfig::from_json(mismatch).unwrap();
        assert!(matches!(run(&cfg, &RunOptions::default()), Err(Error::DimensionMismatch(_))));
        let unsound = r#"{"scenario_kind": "entanglement", "state": {"family": "bell_phi_plus"},
            "quantifier": "renyi:2"}"#;
        let cfg = ScenarioConfig::from_json(unsound).unwrap();
        assert!(matches!(run(&cfg, &RunOptions::default()), Err(Error::UnsoundQuantifier(_))));
    }

    #[test]
    fn qutrit_partner_bases_detect_isotropic() {
        let text = r#"{"scenario_kind": "entanglement", "state": {"family": "isotropic", "dim": 3, "parameter": 0.95},
            "measurements": {"alice": ["mub:3:2"], "bob": ["mub_conj:3:2"]}}"#;
        let out = run(&ScenarioConfig::from_json(text).unwrap(), &RunOptions::default()).unwrap();
        assert!(out.detected());
        let same = text.replace("mub_conj", "mub");
        let out = run(&ScenarioConfig::from_json(&same).unwrap(), &RunOptions::default()).unwrap();
        assert!(!out.detected());
    }

    #[test]
    fn bound_only_summary() {
        let text = r#"{"scenario_kind": "bound_only", "measurements": {"alice": ["pauli_x", "pauli_y"]}}"#;
        let out = run(&ScenarioConfig::from_json(text).unwrap(), &RunOptions::default()).unwrap();
        let b = &out.bounds[0];
        assert_abs_diff_eq!(b.omega[0], 0.7285533905932737, epsilon = 1e-12);
        assert_eq!(b.maassen_uffink, Some(1.0));
    }
}
