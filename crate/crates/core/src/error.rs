use thiserror::Error;

/// Errors raised while building, solving or verifying a moment problem.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MomentError {
    #[error("invalid moment specification: {0}")]
    InvalidSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("gram matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is not positive semidefinite (witness {witness:e})")]
    NotPsd { witness: f64 },
    #[error("polynomial root finding did not converge after {iterations} iterations")]
    RootFindingFailure { iterations: usize },
    #[error("nnls active-set iteration stalled after {iterations} iterations")]
    NnlsStall { iterations: usize },
    #[error("refinement did not converge: residual {residual:e} above target {target:e}")]
    ConvergenceFailure { residual: f64, target: f64 },
    #[error("moment problem is unsolvable: {0}")]
    Unsolvable(String),
}

pub type Result<T> = std::result::Result<T, MomentError>;
