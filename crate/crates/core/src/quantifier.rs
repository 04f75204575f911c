//! Schur-concave uncertainty quantifiers.
//!
//! Every quantifier vanishes on point masses and is monotone under the
//! majorization order. The two property flags are statements about the
//! function itself and are checked by the property tests:
//!
//! - `mixing_monotone`: `Ω(Σ λ_i p_i) ≥ Σ λ_i Ω(p_i)` (concavity).
//! - `tensor_additive`: `Ω(p ⊗ q) = Ω(p) + Ω(q)`.
//!
//! Logarithms are base 2.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probvec::ProbVec;

/// `−Σ p_i log₂ p_i` with `0 log 0 = 0`.
pub fn shannon(p: &ProbVec) -> f64 {
    let h: f64 = p
        .entries()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum();
    h.max(0.0)
}

/// `−log₂ max_i p_i`.
pub fn min_entropy(p: &ProbVec) -> f64 {
    (-p.max_entry().log2()).max(0.0)
}

fn power_sum(p: &ProbVec, alpha: f64) -> f64 {
    p.entries()
        .iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| x.powf(alpha))
        .sum()
}

fn check_order(alpha: f64) -> Result<()> {
    if alpha.is_nan() || alpha <= 0.0 || alpha == 1.0 {
        return Err(Error::BadParameter(format!(
            "entropy order must be positive and different from 1, got {alpha}"
        )));
    }
    Ok(())
}

/// Rényi entropy of order `alpha`; `alpha = ∞` is the min-entropy.
pub fn renyi(p: &ProbVec, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if alpha.is_infinite() {
        return Ok(min_entropy(p));
    }
    Ok((power_sum(p, alpha).log2() / (1.0 - alpha)).max(0.0))
}

/// Tsallis entropy `(1 − Σ p_i^α)/(α − 1)`.
pub fn tsallis(p: &ProbVec, alpha: f64) -> Result<f64> {
    check_order(alpha)?;
    if alpha.is_infinite() {
        return Err(Error::BadParameter("Tsallis order must be finite".into()));
    }
    Ok(((1.0 - power_sum(p, alpha)) / (alpha - 1.0)).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuantifierKind {
    Shannon,
    MinEntropy,
    Renyi(f64),
    Tsallis(f64),
}

/// A named uncertainty measure together with its algebraic properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantifier {
    kind: QuantifierKind,
}

impl Quantifier {
    pub fn shannon() -> Self {
        Self {
            kind: QuantifierKind::Shannon,
        }
    }

    pub fn min_entropy() -> Self {
        Self {
            kind: QuantifierKind::MinEntropy,
        }
    }

    /// Rényi entropy; `alpha = ∞` yields the min-entropy quantifier.
    pub fn renyi(alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        if alpha.is_infinite() {
            return Ok(Self::min_entropy());
        }
        Ok(Self {
            kind: QuantifierKind::Renyi(alpha),
        })
    }

    pub fn tsallis(alpha: f64) -> Result<Self> {
        check_order(alpha)?;
        if alpha.is_infinite() {
            return Err(Error::BadParameter("Tsallis order must be finite".into()));
        }
        Ok(Self {
            kind: QuantifierKind::Tsallis(alpha),
        })
    }

    pub fn kind(&self) -> QuantifierKind {
        self.kind
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn parameter(&self) -> Option<f64> {
        match self.kind {
            QuantifierKind::Renyi(a) | QuantifierKind::Tsallis(a) => Some(a),
            _ => None,
        }
    }

    pub fn evaluate(&self, p: &ProbVec) -> f64 {
        match self.kind {
            QuantifierKind::Shannon => shannon(p),
            QuantifierKind::MinEntropy => min_entropy(p),
            // orders were validated at construction
            QuantifierKind::Renyi(a) => renyi(p, a).expect("validated order"),
            QuantifierKind::Tsallis(a) => tsallis(p, a).expect("validated order"),
        }
    }

    /// Concavity under probabilistic mixing.
    ///
    /// The min-entropy is not concave: `(1,0)` and `(½,½)` mixed equally give
    /// `0.415 < ½`. Rényi entropies are concave for orders in `(0, 1)`.
    pub fn mixing_monotone(&self) -> bool {
        match self.kind {
            QuantifierKind::Shannon => true,
            QuantifierKind::MinEntropy => false,
            QuantifierKind::Renyi(a) => a < 1.0,
            QuantifierKind::Tsallis(_) => true,
        }
    }

    pub fn tensor_additive(&self) -> bool {
        !matches!(self.kind, QuantifierKind::Tsallis(_))
    }

    /// Built-in quantifiers exercised by the property suites.
    pub fn registry() -> Vec<Quantifier> {
        vec![
            Self::shannon(),
            Self::min_entropy(),
            Self::renyi(0.5).unwrap(),
            Self::renyi(2.0).unwrap(),
            Self::tsallis(0.5).unwrap(),
            Self::tsallis(2.0).unwrap(),
        ]
    }
}

impl fmt::Display for Quantifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            QuantifierKind::Shannon => write!(f, "shannon"),
            QuantifierKind::MinEntropy => write!(f, "min_entropy"),
            QuantifierKind::Renyi(a) => write!(f, "renyi:{a}"),
            QuantifierKind::Tsallis(a) => write!(f, "tsallis:{a}"),
        }
    }
}

impl FromStr for Quantifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let order = |rest: &str| -> Result<f64> {
            match rest {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                _ => rest
                    .parse::<f64>()
                    .map_err(|_| Error::BadParameter(format!("bad entropy order `{rest}`"))),
            }
        };
        match s {
            "shannon" => Ok(Self::shannon()),
            "min_entropy" => Ok(Self::min_entropy()),
            _ => {
                if let Some(rest) = s.strip_prefix("renyi:") {
                    Self::renyi(order(rest)?)
                } else if let Some(rest) = s.strip_prefix("tsallis:") {
                    Self::tsallis(order(rest)?)
                } else {
                    Err(Error::BadParameter(format!("unknown quantifier `{s}`")))
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pv(v: &[f64]) -> ProbVec {
        ProbVec::new(v.to_vec()).unwrap()
    }

    fn example_bound() -> ProbVec {
        let s = 2f64.sqrt();
        pv(&[(3.0 + 2.0 * s) / 8.0, (5.0 - 2.0 * s) / 8.0, 0.0, 0.0])
    }

    #[test]
    fn shannon_values() {
        assert_abs_diff_eq!(shannon(&pv(&[0.5, 0.5])), 1.0, epsilon = 1e-15);
        assert_eq!(shannon(&pv(&[1.0, 0.0])), 0.0);
        assert_abs_diff_eq!(shannon(&example_bound()), 0.8435, epsilon = 5e-4);
    }

    #[test]
    fn min_entropy_values() {
        assert_eq!(min_entropy(&pv(&[1.0, 0.0])), 0.0);
        assert_abs_diff_eq!(min_entropy(&pv(&[0.5, 0.5])), 1.0, epsilon = 1e-15);
        let top = (3.0 + 2.0 * 2f64.sqrt()) / 8.0;
        assert_abs_diff_eq!(min_entropy(&example_bound()), -top.log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(min_entropy(&example_bound()), 0.4569, epsilon = 1e-4);
    }

    #[test]
    fn renyi_values() {
        let p = pv(&[0.7, 0.3]);
        assert_eq!(renyi(&p, f64::INFINITY).unwrap(), min_entropy(&p));
        assert_abs_diff_eq!(renyi(&p, 400.0).unwrap(), min_entropy(&p), epsilon = 5e-3);
        assert_abs_diff_eq!(renyi(&pv(&[0.5, 0.5]), 2.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            renyi(&pv(&[0.75, 0.25]), 2.0).unwrap(),
            -(0.625f64).log2(),
            epsilon = 1e-15
        );
        assert!(matches!(renyi(&p, 1.0), Err(Error::BadParameter(_))));
        assert!(matches!(renyi(&p, 0.0), Err(Error::BadParameter(_))));
        assert!(matches!(renyi(&p, -2.0), Err(Error::BadParameter(_))));
    }

    #[test]
    fn tsallis_values() {
        assert_eq!(tsallis(&pv(&[1.0, 0.0]), 0.5).unwrap(), 0.0);
        assert_eq!(tsallis(&pv(&[1.0, 0.0]), 3.0).unwrap(), 0.0);
        assert_abs_diff_eq!(tsallis(&pv(&[0.5, 0.5]), 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(tsallis(&pv(&[0.75, 0.25]), 2.0).unwrap(), 0.375, epsilon = 1e-15);
        assert!(tsallis(&pv(&[1.0]), 1.0).is_err());
    }

    #[test]
    fn parse_names() {
        for q in Quantifier::registry() {
            assert_eq!(q.name().parse::<Quantifier>().unwrap(), q);
        }
        assert_eq!("renyi:inf".parse::<Quantifier>().unwrap(), Quantifier::min_entropy());
        assert!("renyi:1".parse::<Quantifier>().is_err());
        assert!("entropy".parse::<Quantifier>().is_err());
    }

    #[test]
    fn flags() {
        assert!(Quantifier::shannon().mixing_monotone());
        assert!(!Quantifier::min_entropy().mixing_monotone());
        assert!(!Quantifier::renyi(2.0).unwrap().mixing_monotone());
        assert!(Quantifier::renyi(0.5).unwrap().mixing_monotone());
        assert!(!Quantifier::tsallis(2.0).unwrap().tensor_additive());
    }

    #[test]
    fn min_entropy_is_not_concave() {
        let p = pv(&[1.0, 0.0]);
        let q = pv(&[0.5, 0.5]);
        let mix = ProbVec::mixture(&pv(&[0.5, 0.5]), &[p.clone(), q.clone()]).unwrap();
        assert!(min_entropy(&mix) < 0.5 * min_entropy(&p) + 0.5 * min_entropy(&q) - 0.05);
    }

    #[test]
    fn tsallis_is_not_additive() {
        let t = Quantifier::tsallis(2.0).unwrap();
        let p = pv(&[0.5, 0.5]);
        // T2(p⊗p) = 0.75 but 2·T2(p) = 1
        assert_abs_diff_eq!(t.evaluate(&p.tensor(&p)), 0.75, epsilon = 1e-15);
        assert!((t.evaluate(&p.tensor(&p)) - 2.0 * t.evaluate(&p)).abs() > 0.2);
    }

    #[test]
    fn renyi_above_one_is_not_concave() {
        // Rényi of order 10 on five outcomes: mixing two near-point masses.
        let r = Quantifier::renyi(10.0).unwrap();
        let p = pv(&[1.0, 0.0, 0.0, 0.0, 0.0]);
        let q = ProbVec::uniform(5);
        let mix = ProbVec::mixture(&pv(&[0.5, 0.5]), &[p.clone(), q.clone()]).unwrap();
        assert!(r.evaluate(&mix) < 0.5 * r.evaluate(&p) + 0.5 * r.evaluate(&q));
    }
}
