use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cmatrix::{normalized, CMatrix, ZERO};
use super::eigen::eig_hermitian;
use super::measurement::{Observable, Povm};
use crate::error::{Error, Result};
use crate::probvec::ProbVec;

/// Tolerance on Hermiticity, unit trace and positivity of states.
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalue products closer than this share one product outcome.
pub const PRODUCT_MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// A density matrix, optionally carrying a bipartite factorization
/// `d = d_A · d_B`.
#[derive(Debug, Clone)]
pub struct DensityState {
    matrix: CMatrix,
    factors: Option<(usize, usize)>,
}

impl DensityState {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}")));
        }
        let matrix = matrix.hermitian_part();
        let eig = eig_hermitian(&matrix)?;
        let min = *eig.values.last().unwrap();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self {
            matrix,
            factors: None,
        })
    }

    pub fn bipartite(matrix: CMatrix, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != matrix.rows() {
            return Err(Error::DimensionMismatch(format!(
                "{dim_a}x{dim_b} factorization of a {}-dimensional state",
                matrix.rows()
            )));
        }
        let mut s = Self::new(matrix)?;
        s.factors = Some((dim_a, dim_b));
        Ok(s)
    }

    /// `|ψ⟩⟨ψ|` for `ψ` normalized here.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let v = normalized(psi).ok_or_else(|| Error::InvalidState("zero state vector".into()))?;
        Ok(Self {
            matrix: CMatrix::projector(&v),
            factors: None,
        })
    }

    pub fn pure_bipartite(psi: &[Complex64], dim_a: usize, dim_b: usize) -> Result<Self> {
        if psi.len() != dim_a * dim_b {
            return Err(Error::DimensionMismatch("state vector length vs factors".into()));
        }
        let mut s = Self::pure(psi)?;
        s.factors = Some((dim_a, dim_b));
        Ok(s)
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: CMatrix::identity(d).scale_real(1.0 / d as f64),
            factors: None,
        }
    }

    pub fn maximally_mixed_bipartite(dim_a: usize, dim_b: usize) -> Self {
        let mut s = Self::maximally_mixed(dim_a * dim_b);
        s.factors = Some((dim_a, dim_b));
        s
    }

    /// `η ⊗ σ`.
    pub fn product(eta: &DensityState, sigma: &DensityState) -> Self {
        Self {
            matrix: eta.matrix.kron(&sigma.matrix),
            factors: Some((eta.dim(), sigma.dim())),
        }
    }

    /// `Σ_λ p(λ) ρ_λ`; the factorization of the first component is kept.
    pub fn mixture(weights: &ProbVec, states: &[DensityState]) -> Result<Self> {
        if weights.dim() != states.len() || states.is_empty() {
            return Err(Error::DimensionMismatch("mixture weights vs states".into()));
        }
        let d = states[0].dim();
        let factors = states[0].factors;
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in weights.entries().iter().zip(states) {
            if s.dim() != d || s.factors != factors {
                return Err(Error::DimensionMismatch("mixing states of different shape".into()));
            }
            m = &m + &s.matrix.scale_real(*w);
        }
        Ok(Self { matrix: m, factors })
    }

    pub fn with_factors(mut self, dim_a: usize, dim_b: usize) -> Result<Self> {
        if dim_a * dim_b != self.dim() {
            return Err(Error::DimensionMismatch("factorization does not match dimension".into()));
        }
        self.factors = Some((dim_a, dim_b));
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn factors(&self) -> Option<(usize, usize)> {
        self.factors
    }

    pub fn require_factors(&self) -> Result<(usize, usize)> {
        self.factors
            .ok_or_else(|| Error::DimensionMismatch("state has no bipartite factorization".into()))
    }

    /// `Re tr(E ρ)`.
    pub fn expectation(&self, op: &CMatrix) -> f64 {
        op.trace_product(&self.matrix).re
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        let eig = eig_hermitian(&self.matrix).expect("state is Hermitian");
        eig.values
            .iter()
            .filter(|&&l| l > 1e-15)
            .map(|&l| -l * l.log2())
            .sum::<f64>()
            .max(0.0)
    }

    pub fn partial_trace(&self, keep: Party) -> Result<DensityState> {
        let (da, db) = self.require_factors()?;
        let rho = &self.matrix;
        let out = match keep {
            Party::A => {
                let mut m = CMatrix::zeros(da, da);
                for i in 0..da {
                    for j in 0..da {
                        m[(i, j)] = (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum();
                    }
                }
                m
            }
            Party::B => {
                let mut m = CMatrix::zeros(db, db);
                for k in 0..db {
                    for l in 0..db {
                        m[(k, l)] = (0..da).map(|i| rho[(i * db + k, i * db + l)]).sum();
                    }
                }
                m
            }
        };
        Ok(DensityState {
            matrix: out,
            factors: None,
        })
    }

    /// `tr_A((F ⊗ 1) ρ)`: Bob's unnormalized state conditioned on Alice's
    /// effect `F`.
    pub fn steered_operator(&self, alice_effect: &CMatrix) -> Result<CMatrix> {
        let (da, db) = self.require_factors()?;
        if alice_effect.rows() != da || !alice_effect.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "Alice effect of size {} on a {da}-dimensional factor",
                alice_effect.rows()
            )));
        }
        let rho = &self.matrix;
        let mut out = CMatrix::zeros(db, db);
        for k in 0..db {
            for l in 0..db {
                let mut acc = ZERO;
                for a in 0..da {
                    for c in 0..da {
                        let f = alice_effect[(a, c)];
                        if f != ZERO {
                            acc += f * rho[(c * db + k, a * db + l)];
                        }
                    }
                }
                out[(k, l)] = acc;
            }
        }
        Ok(out)
    }
}

/// Born-rule statistics `(tr(F_k ρ))_k`.
pub fn born_stats(state: &DensityState, meas: &Povm) -> Result<ProbVec> {
    if meas.dim() != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional POVM on a {}-dimensional state",
            meas.dim(),
            state.dim()
        )));
    }
    let probs = meas.effects().iter().map(|e| state.expectation(e)).collect();
    ProbVec::new(probs)
}

/// Statistics of a product observable `a ⊗ b` together with its outcome labels.
#[derive(Debug, Clone)]
pub struct ProductStats {
    /// Distinct eigenvalue products, descending.
    pub outcomes: Vec<f64>,
    pub probs: ProbVec,
}

/// Outcome distribution of the joint observable `a ⊗ b`, whose outcomes are
/// the eigenvalue products `α β`. Pairs with equal products are pooled.
pub fn product_observable_stats(
    state: &DensityState,
    a: &Observable,
    b: &Observable,
) -> Result<ProductStats> {
    let (da, db) = state.require_factors()?;
    if a.dim() != da || b.dim() != db {
        return Err(Error::DimensionMismatch(format!(
            "observables of size {}x{} on a {da}x{db} state",
            a.dim(),
            b.dim()
        )));
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    for (alpha, p) in a.eigenvalues().iter().zip(a.projectors()) {
        for (beta, q) in b.eigenvalues().iter().zip(b.projectors()) {
            let label = alpha * beta;
            let prob = state.expectation(&p.kron(q));
            match bins
                .iter_mut()
                .find(|(l, _)| (l - label).abs() <= PRODUCT_MERGE_TOL)
            {
                Some(bin) => bin.1 += prob,
                None => bins.push((label, prob)),
            }
        }
    }
    bins.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (outcomes, probs): (Vec<f64>, Vec<f64>) = bins.into_iter().unzip();
    Ok(ProductStats {
        outcomes,
        probs: ProbVec::new(probs)?,
    })
}

/// Joint outcome probability `tr((F ⊗ G) ρ)`.
pub fn joint_probability(state: &DensityState, fa: &CMatrix, gb: &CMatrix) -> Result<f64> {
    let (da, db) = state.require_factors()?;
    if fa.rows() != da || gb.rows() != db {
        return Err(Error::DimensionMismatch("local effects vs factorization".into()));
    }
    Ok(state.expectation(&fa.kron(gb)))
}

/// Two-qubit correlation tensor `T^{μν} = tr(σ_μ ⊗ σ_ν ρ)`.
pub fn correlation_tensor(state: &DensityState) -> Result<[[f64; 4]; 4]> {
    if state.factors() != Some((2, 2)) {
        return Err(Error::DimensionMismatch("correlation tensor needs a two-qubit state".into()));
    }
    let mut t = [[0.0; 4]; 4];
    for (mu, row) in t.iter_mut().enumerate() {
        for (nu, entry) in row.iter_mut().enumerate() {
            *entry = state.expectation(&super::pauli(mu).kron(&super::pauli(nu)));
        }
    }
    Ok(t)
}

/// `ρ = ¼ Σ T^{μν} σ_μ ⊗ σ_ν`.
pub fn state_from_correlation_tensor(t: &[[f64; 4]; 4]) -> Result<DensityState> {
    let mut m = CMatrix::zeros(4, 4);
    for (mu, row) in t.iter().enumerate() {
        for (nu, &v) in row.iter().enumerate() {
            m = &m + &super::pauli(mu).kron(&super::pauli(nu)).scale_real(v / 4.0);
        }
    }
    DensityState::bipartite(m, 2, 2)
}
