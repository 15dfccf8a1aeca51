use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("oracle contract violated: {0}")]
    OracleContract(String),

    /// The proposal density vanished at an outcome that was drawn from it.
    #[error("mixture density is {density:e} at a proposed outcome")]
    DegenerateOutcome { density: f64 },

    /// `f_psi / (K * mixture)` exceeded one by more than the clamp tolerance.
    #[error("acceptance ratio {ratio} exceeds 1 (bound K = {k})")]
    BoundViolation { ratio: f64, k: f64 },

    #[error("no trial accepted within {trials} trials")]
    BudgetExhausted { trials: usize },

    #[error("index prefix of length {len} has zero probability mass")]
    ZeroMassPrefix { len: u32 },

    #[error("probability oracle is not normalized: total mass {total}")]
    InvalidPmf { total: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NonSymmetric(f64),

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("covariance matrix does not describe a pure state (max deviation {0:e})")]
    NotPure(f64),

    #[error("overlap requires every component to factor across modes")]
    UnsupportedOverlap,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),

    #[error("truncated tail mass {tail:e} exceeds tolerance {tolerance:e}")]
    TailMass { tail: f64, tolerance: f64 },

    #[error("components are not orthonormal (max deviation {0:e})")]
    NonOrthogonal(f64),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("sparsification failed after {attempts} attempts")]
    MaxAttempts { attempts: usize },

    /// The sparsified vector vanished; draw again.
    #[error("sparsified vector has zero norm")]
    ZeroNorm,
}
