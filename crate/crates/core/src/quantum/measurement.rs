use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cmatrix::{normalized, pauli, CMatrix};
use super::eigen::eig_hermitian;
use crate::error::{Error, Result};

/// Tolerance for effects summing to the identity and for positivity.
pub const POVM_TOL: f64 = 1e-9;
/// Eigenvalues closer than this are merged into a single outcome.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A projective measurement given by a Hermitian matrix.
///
/// Outcomes are the distinct eigenvalues in descending order; each carries
/// the projector onto its eigenspace.
#[derive(Debug, Clone)]
pub struct Observable {
    matrix: CMatrix,
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
    eigenspaces: Vec<Vec<Vec<Complex64>>>,
}

impl Observable {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let eig = eig_hermitian(&matrix)?;
        let mut eigenvalues: Vec<f64> = Vec::new();
        let mut eigenspaces: Vec<Vec<Vec<Complex64>>> = Vec::new();
        let mut sums: Vec<(f64, usize)> = Vec::new();
        for (k, &lam) in eig.values.iter().enumerate() {
            let joins = matches!(eigenvalues.last(), Some(&last) if (last - lam).abs() <= DEGENERACY_TOL);
            if joins {
                eigenspaces.last_mut().unwrap().push(eig.vector(k));
                let s = sums.last_mut().unwrap();
                s.0 += lam;
                s.1 += 1;
            } else {
                eigenvalues.push(lam);
                eigenspaces.push(vec![eig.vector(k)]);
                sums.push((lam, 1));
            }
        }
        for (ev, (sum, count)) in eigenvalues.iter_mut().zip(&sums) {
            *ev = sum / *count as f64;
        }
        let projectors = eigenspaces
            .iter()
            .map(|space| {
                space
                    .iter()
                    .map(|v| CMatrix::projector(v))
                    .reduce(|a, b| &a + &b)
                    .unwrap()
            })
            .collect();
        Ok(Self {
            matrix: matrix.hermitian_part(),
            eigenvalues,
            projectors,
            eigenspaces,
        })
    }

    /// `Σ_j λ_j |e_j⟩⟨e_j|` for an orthonormal basis `e_j`.
    pub fn from_basis(basis: &[Vec<Complex64>], eigenvalues: &[f64]) -> Result<Self> {
        let d = basis.len();
        if d == 0 || eigenvalues.len() != d || basis.iter().any(|v| v.len() != d) {
            return Err(Error::DimensionMismatch("basis and eigenvalue counts disagree".into()));
        }
        let mut m = CMatrix::zeros(d, d);
        for (v, &lam) in basis.iter().zip(eigenvalues) {
            let v = normalized(v).ok_or_else(|| Error::BadParameter("zero basis vector".into()))?;
            m = &m + &CMatrix::projector(&v).scale_real(lam);
        }
        let obs = Self::new(m)?;
        let total = obs.projectors.iter().fold(CMatrix::zeros(d, d), |acc, p| &acc + p);
        if !total.approx_eq(&CMatrix::identity(d), POVM_TOL) {
            return Err(Error::InvalidState("basis vectors are not orthonormal".into()));
        }
        Ok(obs)
    }

    pub fn pauli_x() -> Self {
        Self::new(pauli(1)).unwrap()
    }

    pub fn pauli_y() -> Self {
        Self::new(pauli(2)).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::new(pauli(3)).unwrap()
    }

    /// `n·σ` for a unit vector `n`.
    pub fn spin(direction: [f64; 3]) -> Result<Self> {
        let len = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (len - 1.0).abs() > 1e-9 {
            return Err(Error::BadParameter(format!("direction has length {len}, expected 1")));
        }
        let mut m = CMatrix::zeros(2, 2);
        for (k, &n) in direction.iter().enumerate() {
            m = &m + &pauli(k + 1).scale_real(n);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn outcome_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.eigenvalues.len() == self.dim()
    }

    /// Eigenbasis ordered by descending eigenvalue; only meaningful when
    /// the spectrum is nondegenerate.
    pub fn eigenbasis(&self) -> Result<Vec<Vec<Complex64>>> {
        if !self.is_nondegenerate() {
            return Err(Error::Degenerate(format!(
                "{} distinct eigenvalues in dimension {}",
                self.eigenvalues.len(),
                self.dim()
            )));
        }
        Ok(self.eigenspaces.iter().map(|s| s[0].clone()).collect())
    }

    /// Projective measurement with outcomes labelled by eigenvalue.
    pub fn to_povm(&self) -> Povm {
        let labels = self.eigenvalues.iter().map(|l| format_label(*l)).collect();
        Povm {
            effects: self.projectors.clone(),
            labels,
        }
    }
}

fn format_label(x: f64) -> String {
    let r = (x * 1e6).round() / 1e6;
    if r == r.trunc() {
        format!("{:+}", r as i64)
    } else {
        format!("{r:+}")
    }
}

/// A positive operator-valued measure.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Povm {
    effects: Vec<CMatrix>,
    labels: Vec<String>,
}

impl Povm {
    pub fn new(effects: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidState("POVM without effects".into()))?;
        let d = first.rows();
        if labels.len() != effects.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} effects",
                labels.len(),
                effects.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidState(format!("duplicate outcome label `{l}`")));
            }
        }
        let mut total = CMatrix::zeros(d, d);
        let mut clean = Vec::with_capacity(effects.len());
        for e in &effects {
            if !e.is_square() || e.rows() != d {
                return Err(Error::DimensionMismatch("POVM effects of different sizes".into()));
            }
            let eig = eig_hermitian(e)?;
            let min = *eig.values.last().unwrap();
            if min < -POVM_TOL {
                return Err(Error::InvalidState(format!(
                    "effect has negative eigenvalue {min:.3e}"
                )));
            }
            let h = e.hermitian_part();
            total = &total + &h;
            clean.push(h);
        }
        let defect = total.max_abs_diff(&CMatrix::identity(d));
        if defect > POVM_TOL {
            return Err(Error::InvalidState(format!(
                "effects sum to identity only within {defect:.3e}"
            )));
        }
        Ok(Self {
            effects: clean,
            labels,
        })
    }

    /// Effects labelled `0, 1, ...`.
    pub fn from_effects(effects: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..effects.len()).map(|i| i.to_string()).collect();
        Self::new(effects, labels)
    }

    /// Rank-one projective measurement onto an orthonormal basis.
    pub fn from_basis(basis: &[Vec<Complex64>]) -> Result<Self> {
        let effects = basis
            .iter()
            .map(|v| {
                normalized(v)
                    .map(|u| CMatrix::projector(&u))
                    .ok_or_else(|| Error::BadParameter("zero basis vector".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_effects(effects)
    }

    pub fn dim(&self) -> usize {
        self.effects[0].rows()
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn effect(&self, k: usize) -> &CMatrix {
        &self.effects[k]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Index of an outcome given its label, its position as a number, or
    /// `+`/`-` as shorthand for the `+1`/`-1` labels of a dichotomic
    /// observable.
    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        let alias = match label {
            "+" => "+1",
            "-" => "-1",
            other => other,
        };
        self.labels
            .iter()
            .position(|l| l == alias)
            .or_else(|| label.parse::<usize>().ok().filter(|&i| i < self.len()))
    }

    /// Every effect is a rank-one orthogonal projector.
    pub fn is_rank_one_projective(&self) -> bool {
        if self.len() != self.dim() {
            return false;
        }
        self.effects.iter().all(|e| {
            let sq = e * e;
            sq.approx_eq(e, 1e-8) && (e.trace().re - 1.0).abs() < 1e-8
        })
    }
}
