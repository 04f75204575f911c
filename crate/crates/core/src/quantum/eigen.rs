//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use num_complex::Complex64;

use super::cmatrix::CMatrix;
use crate::error::{Error, Result};

/// Hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Sweeps stop once the off-diagonal Frobenius norm falls below this
/// (scaled by the matrix norm when that exceeds one).
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;
pub const MAX_DIM: usize = 64;
const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in non-increasing order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `values`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    pub fn reconstruct(&self) -> CMatrix {
        let d = self.values.len();
        let mut out = CMatrix::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vector(k);
            out = &out + &CMatrix::projector(&v).scale_real(lam);
        }
        out
    }
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition `m = V diag(λ) V†` with eigenvalues descending.
pub fn eig_hermitian(m: &CMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    if n > MAX_DIM {
        return Err(Error::BadParameter(format!("dimension {n} exceeds {MAX_DIM}")));
    }
    let defect = m.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let mut a = m.hermitian_part();
    let mut v = CMatrix::identity(n);
    let tol = OFF_DIAGONAL_TOL * a.frobenius_norm().max(1.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) < tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= tol {
        return Err(Error::NoConvergence {
            what: "Jacobi eigensolver".into(),
            iterations: MAX_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Annihilates `a[p][q]` with the unitary
/// `G = [[c, -s e^{iφ}], [s e^{-iφ}, c]]` on coordinates `(p, q)`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let z = a[(p, q)];
    let mag = z.norm();
    if mag < 1e-300 {
        return;
    }
    let n = a.rows();
    let phase = z / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
    let t = -sign / (tau.abs() + (1.0 + tau * tau).sqrt());
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let s_minus = phase.conj() * s; // s e^{-iφ}
    let s_plus = phase * s; // s e^{iφ}

    // columns: X <- X G
    let update_columns = |x: &mut CMatrix| {
        for k in 0..n {
            let xp = x[(k, p)];
            let xq = x[(k, q)];
            x[(k, p)] = xp * c + xq * s_minus;
            x[(k, q)] = -xp * s_plus + xq * c;
        }
    };
    update_columns(a);
    update_columns(v);

    // rows: A <- G† A
    for k in 0..n {
        let ap = a[(p, k)];
        let aq = a[(q, k)];
        a[(p, k)] = ap * c + aq * s_plus;
        a[(q, k)] = -ap * s_minus + aq * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
}

/// Largest eigenvalue and a unit eigenvector achieving it.
pub fn lambda_max(m: &CMatrix) -> Result<(f64, Vec<Complex64>)> {
    let eig = eig_hermitian(m)?;
    Ok((eig.values[0], eig.vector(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::cmatrix::{inner, pauli};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn pauli_spectra() {
        let z = eig_hermitian(&pauli(3)).unwrap();
        assert_eq!(z.values, vec![1.0, -1.0]);
        assert_abs_diff_eq!(z.vector(0)[0].norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.vector(1)[1].norm(), 1.0, epsilon = 1e-12);

        let x = eig_hermitian(&pauli(1)).unwrap();
        assert_abs_diff_eq!(x.values[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(x.values[1], -1.0, epsilon = 1e-12);
        let plus = x.vector(0);
        let r = plus[1] / plus[0];
        assert_abs_diff_eq!(r.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-12);

        let id = eig_hermitian(&CMatrix::identity(2)).unwrap();
        assert_eq!(id.values, vec![1.0, 1.0]);
        assert_abs_diff_eq!(inner(&id.vector(0), &id.vector(1)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sigma_y_spectrum() {
        let y = eig_hermitian(&pauli(2)).unwrap();
        assert_abs_diff_eq!(y.values[0], 1.0, epsilon = 1e-12);
        assert!(y.reconstruct().approx_eq(&pauli(2), 1e-12));
    }

    #[test]
    fn reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 4, 7, 16, 30] {
            for _ in 0..5 {
                let m = random_hermitian(n, &mut rng);
                let eig = eig_hermitian(&m).unwrap();
                let err = (&eig.reconstruct() - &m).frobenius_norm();
                assert!(err < 1e-8, "n={n} err={err}");
                assert!(eig.values.windows(2).all(|w| w[0] >= w[1]));
                let vv = &eig.vectors.adjoint() * &eig.vectors;
                assert!(vv.approx_eq(&CMatrix::identity(n), 1e-10));
            }
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::identity(2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian(_))));
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(eig_hermitian(&rect), Err(Error::DimensionMismatch(_))));
    }
}
