//! Majorization-based detection of entanglement and steering.

pub mod error;
pub mod probvec;
pub mod quantifier;
pub mod quantum;

pub use error::{Error, Result};
pub use probvec::{Permutation, ProbVec};
pub use quantifier::{Quantifier, QuantifierKind};
pub mod bounds;
pub mod rng;
pub mod assemblage;
pub mod criteria;
pub mod oracle;
pub mod scenario;
