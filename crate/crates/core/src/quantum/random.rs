//! Unitarily invariant random ensembles.
//!
//! Pure states are normalized vectors of independent standard complex
//! Gaussians; mixed states are reductions of pure states on `d ⊗ d`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::cmatrix::{inner, normalized};
use super::measurement::{Observable, Povm};
use super::state::{DensityState, Party};
use crate::probvec::ProbVec;

pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    (0..d)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        if let Some(v) = normalized(&gaussian_vector(d, rng)) {
            return v;
        }
    }
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityState {
    DensityState::pure(&random_unit_vector(d, rng)).expect("unit vector")
}

pub fn random_mixed<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityState {
    let psi = random_unit_vector(d * d, rng);
    DensityState::pure_bipartite(&psi, d, d)
        .and_then(|s| s.partial_trace(Party::A))
        .expect("valid reduction")
}

/// Pure or mixed with equal odds.
pub fn random_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityState {
    if rng.random_bool(0.5) {
        random_pure(d, rng)
    } else {
        random_mixed(d, rng)
    }
}

pub fn random_product<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> DensityState {
    let eta = random_state(dim_a, rng);
    let sigma = random_state(dim_b, rng);
    DensityState::product(&eta, &sigma)
}

/// Mixture of between 1 and `max_terms` random product states.
pub fn random_separable<R: Rng + ?Sized>(
    dim_a: usize,
    dim_b: usize,
    max_terms: usize,
    rng: &mut R,
) -> DensityState {
    let terms = rng.random_range(1..=max_terms.max(1));
    let states: Vec<DensityState> = (0..terms).map(|_| random_product(dim_a, dim_b, rng)).collect();
    let weights = random_distribution(terms, rng);
    DensityState::mixture(&weights, &states).expect("consistent shapes")
}

/// Uniform (flat Dirichlet) random probability vector.
pub fn random_distribution<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProbVec {
    let w: Vec<f64> = (0..d)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    ProbVec::from_weights(w).expect("positive weights")
}

/// Haar-random orthonormal basis via Gram–Schmidt on Gaussian vectors.
pub fn random_basis<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<Complex64>> {
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v = gaussian_vector(d, rng);
        for b in &basis {
            let c = inner(b, &v);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
        if let Some(u) = normalized(&v) {
            if crate::quantum::cmatrix::norm(&v) > 1e-6 {
                basis.push(u);
            }
        }
    }
    basis
}

pub fn random_rank_one_povm<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Povm {
    Povm::from_basis(&random_basis(d, rng)).expect("orthonormal basis")
}

pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-9 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// `n·σ` along a random direction.
pub fn random_qubit_observable<R: Rng + ?Sized>(rng: &mut R) -> Observable {
    Observable::spin(random_direction(rng)).expect("unit direction")
}
