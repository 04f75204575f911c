use thiserror::Error;

/// Errors raised by the detection library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("observable has a degenerate spectrum: {0}")]
    Degenerate(String),

    #[error("invalid quantum object: {0}")]
    InvalidState(String),

    #[error("no convergence after {iterations} iterations: {what}")]
    NoConvergence { what: String, iterations: usize },

    #[error("unsound quantifier: {0}")]
    UnsoundQuantifier(String),

    #[error("bound was generated from a different measurement set (expected {expected}, got {actual})")]
    FingerprintMismatch { expected: String, actual: String },

    #[error("config error: {0}")]
    ConfigParse(String),

    #[error("threshold scan flipped {0} times; expected at most one flip")]
    NonMonotoneScan(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
