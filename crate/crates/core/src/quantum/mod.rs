//! Finite-dimensional quantum objects.

pub mod cmatrix;
pub mod eigen;
pub mod families;
pub mod measurement;
pub mod random;
pub mod state;

pub use cmatrix::{inner, kron_vec, norm, normalized, pauli, CMatrix};
pub use eigen::{eig_hermitian, lambda_max, HermitianEigen};
pub use measurement::{Observable, Povm};
pub use state::{
    born_stats, correlation_tensor, joint_probability, product_observable_stats,
    state_from_correlation_tensor, DensityState, Party, ProductStats,
};
