use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown domain id `{0}`")]
    UnknownDomain(String),

    #[error("invalid domain parameters: {0}")]
    InvalidDomain(String),

    #[error("sampling `{id}` accepted no points out of {requested} proposals")]
    DegenerateSample { id: String, requested: usize },

    #[error("sample count {0} is below the minimum of 1000")]
    TooFewSamples(usize),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("empty monomial basis")]
    EmptyBasis,

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("no closed-form Gram matrix for domain `{0}`")]
    UnsupportedDomain(String),

    #[error("Gram matrix has a non-finite entry at ({0}, {1})")]
    NonFiniteGram(usize, usize),

    #[error("degenerate Gram matrix (largest eigenvalue {0})")]
    DegenerateGram(f64),

    #[error("kernel series does not converge at this pair")]
    NonConvergence,

    #[error("kernel value {0:e} is too close to zero")]
    KernelNearZero(f64),

    #[error("matrix is not positive definite (smallest eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("Jacobian is singular")]
    SingularJacobian,

    #[error("invalid map: {0}")]
    InvalidMap(String),
}
