//! Finite probability vectors and the majorization order on them.
//!
//! A [`ProbVec`] is always normalized. Majorization `p ≼ q` is decided by the
//! partial-sum test on the descending rearrangements, padding the shorter
//! vector with trailing zeros.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the total mass and on every majorization comparison.
pub const SUM_TOL: f64 = 1e-9;
/// Slack allowed for slightly negative entries produced by floating point.
pub const CLAMP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVec {
    entries: Vec<f64>,
}

impl ProbVec {
    /// Validates `raw` as a distribution, clamps tiny negatives to zero and
    /// renormalizes.
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::NotADistribution("empty vector".into()));
        }
        if let Some(bad) = raw.iter().find(|x| !x.is_finite()) {
            return Err(Error::NotADistribution(format!("non-finite entry {bad}")));
        }
        if let Some(neg) = raw.iter().find(|&&x| x < -CLAMP_SLACK) {
            return Err(Error::NotADistribution(format!("negative entry {neg}")));
        }
        let mut entries = raw;
        for x in entries.iter_mut() {
            if *x < 0.0 {
                *x = 0.0;
            }
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(Error::NotADistribution(format!("entries sum to {total}")));
        }
        for x in entries.iter_mut() {
            *x /= total;
        }
        Ok(Self { entries })
    }

    /// Builds a distribution from nonnegative weights by dividing by their sum.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if total.is_nan() || total <= 0.0 || total.is_infinite() {
            return Err(Error::NotADistribution(format!("weights sum to {total}")));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be at least 1");
        Self {
            entries: vec![1.0 / dim as f64; dim],
        }
    }

    pub fn point_mass(dim: usize, index: usize) -> Self {
        assert!(index < dim, "index {index} outside dimension {dim}");
        let mut entries = vec![0.0; dim];
        entries[index] = 1.0;
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries[i]
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    /// The non-increasing rearrangement `p↓`.
    pub fn sort_desc(&self) -> ProbVec {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| b.total_cmp(a));
        ProbVec { entries }
    }

    /// Partial sums of `p↓`, of length `dim`.
    pub fn partial_sums_desc(&self) -> Vec<f64> {
        let sorted = self.sort_desc();
        sorted
            .entries
            .iter()
            .scan(0.0, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    /// Kronecker product; entry `i * other.dim() + j` is `p_i q_j`.
    pub fn tensor(&self, other: &ProbVec) -> ProbVec {
        let mut entries = Vec::with_capacity(self.dim() * other.dim());
        for &p in &self.entries {
            for &q in &other.entries {
                entries.push(p * q);
            }
        }
        ProbVec { entries }
    }

    /// Tensor product of a nonempty sequence of distributions.
    pub fn tensor_all<'a, I>(vecs: I) -> Option<ProbVec>
    where
        I: IntoIterator<Item = &'a ProbVec>,
    {
        let mut iter = vecs.into_iter();
        let first = iter.next()?.clone();
        Some(iter.fold(first, |acc, v| acc.tensor(v)))
    }

    /// `self ≼ other`: every partial sum of `self↓` is dominated by the
    /// corresponding partial sum of `other↓`.
    pub fn majorized_by(&self, other: &ProbVec) -> bool {
        self.majorization_gap(other) <= SUM_TOL
    }

    /// Largest amount by which a partial sum of `self↓` exceeds the matching
    /// partial sum of `other↓` (nonpositive when `self ≼ other`).
    pub fn majorization_gap(&self, other: &ProbVec) -> f64 {
        let a = self.partial_sums_desc();
        let b = other.partial_sums_desc();
        let n = a.len().max(b.len());
        let at = |v: &[f64], k: usize| if k < v.len() { v[k] } else { *v.last().unwrap() };
        (0..n)
            .map(|k| at(&a, k) - at(&b, k))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Convex combination `Σ w(π) R_π p` of permuted copies of `self`.
    pub fn random_relabel(&self, weights: &[(Permutation, f64)]) -> Result<ProbVec> {
        let w = ProbVec::new(weights.iter().map(|(_, w)| *w).collect())?;
        let mut out = vec![0.0; self.dim()];
        for ((perm, _), &wt) in weights.iter().zip(w.entries()) {
            if perm.len() != self.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "permutation of {} elements applied to a {}-vector",
                    perm.len(),
                    self.dim()
                )));
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o += wt * self.entries[perm.image(i)];
            }
        }
        ProbVec::new(out)
    }

    /// `Σ λ_i p_i` for equal-dimension vectors.
    pub fn mixture(lambdas: &ProbVec, vecs: &[ProbVec]) -> Result<ProbVec> {
        if lambdas.dim() != vecs.len() || vecs.is_empty() {
            return Err(Error::DimensionMismatch("mixture weights vs vectors".into()));
        }
        let d = vecs[0].dim();
        if vecs.iter().any(|v| v.dim() != d) {
            return Err(Error::DimensionMismatch("mixture of vectors of unequal length".into()));
        }
        let mut out = vec![0.0; d];
        for (lam, v) in lambdas.entries.iter().zip(vecs) {
            for (o, x) in out.iter_mut().zip(&v.entries) {
                *o += lam * x;
            }
        }
        ProbVec::new(out)
    }

    /// Copy with trailing zeros appended up to `dim`.
    pub fn padded(&self, dim: usize) -> ProbVec {
        let mut entries = self.entries.clone();
        if entries.len() < dim {
            entries.resize(dim, 0.0);
        }
        ProbVec { entries }
    }
}

impl TryFrom<Vec<f64>> for ProbVec {
    type Error = Error;

    fn try_from(raw: Vec<f64>) -> Result<Self> {
        ProbVec::new(raw)
    }
}

impl From<ProbVec> for Vec<f64> {
    fn from(p: ProbVec) -> Vec<f64> {
        p.entries
    }
}

/// A permutation of `{0, .., n-1}` stored as its image table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::BadParameter(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Transposition of `a` and `b` on `n` elements.
    pub fn swap(n: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(a, b);
        Self(images)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn apply(&self, p: &ProbVec) -> ProbVec {
        ProbVec {
            entries: (0..p.dim()).map(|i| p.entries[self.0[i]]).collect(),
        }
    }
}
