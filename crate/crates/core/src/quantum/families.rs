//! Named state and measurement families.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::cmatrix::{CMatrix, ONE};
use super::eigen::eig_hermitian;
use super::measurement::Observable;
use super::state::DensityState;
use crate::error::{Error, Result};

/// `|Φ_d⁺⟩ = Σ_i |ii⟩/√d` as a vector.
pub fn phi_plus_vector(d: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    for i in 0..d {
        v[i * d + i] = amp;
    }
    v
}

/// `|Φ_d⁺⟩⟨Φ_d⁺|` on `d ⊗ d`.
pub fn bell_phi_plus(d: usize) -> DensityState {
    DensityState::pure_bipartite(&phi_plus_vector(d), d, d).expect("valid Bell state")
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::BadParameter(format!("{name} = {x} outside [0, 1]")));
    }
    Ok(())
}

/// `w |Φ⁺⟩⟨Φ⁺| + (1 − w) 1/4` on two qubits.
pub fn werner(w: f64) -> Result<DensityState> {
    check_unit_interval("w", w)?;
    let phi = CMatrix::projector(&phi_plus_vector(2));
    let m = &phi.scale_real(w) + &CMatrix::identity(4).scale_real((1.0 - w) / 4.0);
    DensityState::bipartite(m, 2, 2)
}

/// `f |Φ_d⁺⟩⟨Φ_d⁺| + (1 − f)(1 − |Φ_d⁺⟩⟨Φ_d⁺|)/(d² − 1)`.
pub fn isotropic(d: usize, f: f64) -> Result<DensityState> {
    if d < 2 {
        return Err(Error::BadParameter(format!("isotropic state needs d ≥ 2, got {d}")));
    }
    check_unit_interval("f", f)?;
    let n = d * d;
    let phi = CMatrix::projector(&phi_plus_vector(d));
    let rest = &CMatrix::identity(n) - &phi;
    let m = &phi.scale_real(f) + &rest.scale_real((1.0 - f) / (n as f64 - 1.0));
    DensityState::bipartite(m, d, d)
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|k| k * k <= n).all(|k| !n.is_multiple_of(k))
}

/// `m` mutually unbiased bases in prime dimension `d`.
///
/// Basis 0 is the computational basis. For odd `d`, basis `k + 1` consists of
/// `(1/√d) Σ_n ω^{k n² + j n} |n⟩` with `ω = e^{2πi/d}`. For `d = 2` the
/// triple is the eigenbases of `σ_z, σ_x, σ_y`. Qubit observables carry the
/// Pauli spectrum `±1`; for odd `d` vector `j` gets eigenvalue `d − j`.
pub fn mub_bases(d: usize, m: usize) -> Result<Vec<Observable>> {
    if !is_prime(d) {
        return Err(Error::BadParameter(format!("MUB construction needs prime d, got {d}")));
    }
    if m < 2 || m > d + 1 {
        return Err(Error::BadParameter(format!("need 2 ≤ m ≤ {}, got {m}", d + 1)));
    }
    if d == 2 {
        let all = [Observable::pauli_z(), Observable::pauli_x(), Observable::pauli_y()];
        return Ok(all.into_iter().take(m).collect());
    }
    let eigenvalues: Vec<f64> = (0..d).map(|j| (d - j) as f64).collect();
    let scale = 1.0 / (d as f64).sqrt();
    let mut out = Vec::with_capacity(m);
    let computational: Vec<Vec<Complex64>> = (0..d)
        .map(|j| {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[j] = ONE;
            v
        })
        .collect();
    out.push(Observable::from_basis(&computational, &eigenvalues)?);
    for k in 0..(m - 1) {
        let basis: Vec<Vec<Complex64>> = (0..d)
            .map(|j| {
                (0..d)
                    .map(|n| {
                        let exponent = (k * n * n + j * n) % d;
                        Complex64::from_polar(scale, 2.0 * PI * exponent as f64 / d as f64)
                    })
                    .collect()
            })
            .collect();
        out.push(Observable::from_basis(&basis, &eigenvalues)?);
    }
    Ok(out)
}

/// Bob-side partners of [`mub_bases`]: complex-conjugate bases with
/// reciprocal eigenvalues. `Φ⁺ = Σ_j |e_j⟩|ē_j⟩/√d` for every basis, so the
/// correlated outcome pairs all share the product eigenvalue 1.
pub fn mub_partner_bases(d: usize, m: usize) -> Result<Vec<Observable>> {
    mub_bases(d, m)?
        .iter()
        .map(|o| {
            let basis: Vec<Vec<Complex64>> =
                o.eigenbasis()?.iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect();
            let inverse: Vec<f64> = o.eigenvalues().iter().map(|l| 1.0 / l).collect();
            Observable::from_basis(&basis, &inverse)
        })
        .collect()
}

/// Schmidt decomposition `ψ = Σ_i s_i |u_i⟩|w_i⟩` with `s` descending.
#[derive(Debug, Clone)]
pub struct Schmidt {
    pub coefficients: Vec<f64>,
    pub alice: Vec<Vec<Complex64>>,
    pub bob: Vec<Vec<Complex64>>,
}

pub fn schmidt_decomposition(psi: &[Complex64], dim_a: usize, dim_b: usize) -> Result<Schmidt> {
    if psi.len() != dim_a * dim_b {
        return Err(Error::DimensionMismatch("state vector length vs factors".into()));
    }
    let c = CMatrix::from_vec(dim_a, dim_b, psi.to_vec())?;
    let cc = &c * &c.adjoint();
    let eig = eig_hermitian(&cc)?;
    let rank = dim_a.min(dim_b);
    let ct = c.transpose();
    let mut coefficients = Vec::with_capacity(rank);
    let mut alice = Vec::with_capacity(rank);
    let mut bob = Vec::with_capacity(rank);
    for i in 0..rank {
        // Eigenvalues of CC† carry rounding noise near 1e-16, so the cut is
        // made on s² rather than on s.
        if eig.values[i] < 1e-14 {
            break;
        }
        let s = eig.values[i].sqrt();
        let u = eig.vector(i);
        let ubar: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        let w: Vec<Complex64> = ct.mul_vec(&ubar).iter().map(|z| z / s).collect();
        coefficients.push(s);
        alice.push(u);
        bob.push(w);
    }
    Ok(Schmidt {
        coefficients,
        alice,
        bob,
    })
}

/// Two settings per party built in the Schmidt bases of a two-qubit pure
/// state: the Schmidt-diagonal `Z` and the off-diagonal `X`.
///
/// The state is an eigenstate of `Z ⊗ Z`, and `⟨X ⊗ X⟩ = 2 s₀ s₁`.
pub fn schmidt_basis_observables(
    psi: &[Complex64],
) -> Result<(Vec<Observable>, Vec<Observable>)> {
    let sd = schmidt_decomposition(psi, 2, 2)?;
    if sd.coefficients.len() < 2 {
        return Err(Error::BadParameter("state is a product state".into()));
    }
    let build = |basis: &[Vec<Complex64>]| -> Result<Vec<Observable>> {
        let z = &CMatrix::projector(&basis[0]) - &CMatrix::projector(&basis[1]);
        let x = &CMatrix::outer(&basis[0], &basis[1]) + &CMatrix::outer(&basis[1], &basis[0]);
        Ok(vec![Observable::new(z)?, Observable::new(x)?])
    };
    Ok((build(&sd.alice)?, build(&sd.bob)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::cmatrix::inner;
    use approx::assert_abs_diff_eq;

    fn cross_overlaps_ok(bases: &[Observable], d: usize) {
        for (a, oa) in bases.iter().enumerate() {
            for ob in bases.iter().skip(a + 1) {
                for u in oa.eigenbasis().unwrap() {
                    for v in ob.eigenbasis().unwrap() {
                        assert_abs_diff_eq!(inner(&u, &v).norm_sqr(), 1.0 / d as f64, epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn werner_and_isotropic() {
        let w0 = werner(0.0).unwrap();
        assert!(w0.matrix().approx_eq(&CMatrix::identity(4).scale_real(0.25), 1e-15));
        let w1 = werner(1.0).unwrap();
        assert!(w1.matrix().approx_eq(bell_phi_plus(2).matrix(), 1e-15));
        let xx = crate::quantum::pauli(1).kron(&crate::quantum::pauli(1));
        assert_abs_diff_eq!(werner(0.5).unwrap().expectation(&xx), 0.5, epsilon = 1e-12);
        assert!(werner(1.1).is_err());

        let iso = isotropic(3, 1.0).unwrap();
        assert!(iso.matrix().approx_eq(bell_phi_plus(3).matrix(), 1e-12));
        let mixed = isotropic(3, 1.0 / 9.0).unwrap();
        assert!(mixed.matrix().approx_eq(&CMatrix::identity(9).scale_real(1.0 / 9.0), 1e-12));
        let q = isotropic(2, 0.25).unwrap();
        assert!(q.matrix().approx_eq(werner(0.0).unwrap().matrix(), 1e-12));
        assert!(isotropic(1, 0.5).is_err());
    }

    #[test]
    fn qubit_mubs() {
        let b = mub_bases(2, 3).unwrap();
        assert!(b[0].matrix().approx_eq(Observable::pauli_z().matrix(), 1e-15));
        assert!(b[1].matrix().approx_eq(Observable::pauli_x().matrix(), 1e-15));
        assert!(b[2].matrix().approx_eq(Observable::pauli_y().matrix(), 1e-15));
        cross_overlaps_ok(&mub_bases(2, 2).unwrap(), 2);
        cross_overlaps_ok(&b, 2);
    }

    #[test]
    fn odd_prime_mubs() {
        cross_overlaps_ok(&mub_bases(3, 4).unwrap(), 3);
        cross_overlaps_ok(&mub_bases(5, 6).unwrap(), 5);
        assert!(mub_bases(4, 2).is_err());
        assert!(mub_bases(3, 5).is_err());
        assert!(mub_bases(3, 1).is_err());
    }

    #[test]
    fn partner_bases_correlate_on_phi_plus() {
        let pauli_y = Observable::pauli_y();
        let qubit = mub_partner_bases(2, 3).unwrap();
        assert!(qubit[2].matrix().approx_eq(&pauli_y.matrix().scale_real(-1.0), 1e-12));
        for d in [2, 3, 5] {
            let a = mub_bases(d, d + 1).unwrap();
            let b = mub_partner_bases(d, d + 1).unwrap();
            cross_overlaps_ok(&b, d);
            let phi = bell_phi_plus(d);
            for (x, y) in a.iter().zip(&b) {
                let stats = crate::quantum::state::product_observable_stats(&phi, x, y).unwrap();
                let unit = stats.outcomes.iter().position(|&l| (l - 1.0).abs() < 1e-9).unwrap();
                assert_abs_diff_eq!(stats.probs.get(unit), 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn schmidt_round_trip() {
        let t: f64 = 0.3;
        let psi: Vec<Complex64> = [t.cos(), 0.0, 0.0, t.sin()]
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let sd = schmidt_decomposition(&psi, 2, 2).unwrap();
        assert_abs_diff_eq!(sd.coefficients[0], t.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(sd.coefficients[1], t.sin(), epsilon = 1e-12);
        let mut rebuilt = [Complex64::new(0.0, 0.0); 4];
        for i in 0..2 {
            let term = crate::quantum::cmatrix::kron_vec(&sd.alice[i], &sd.bob[i]);
            for (r, x) in rebuilt.iter_mut().zip(term) {
                *r += x * sd.coefficients[i];
            }
        }
        for (a, b) in rebuilt.iter().zip(&psi) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }
}
