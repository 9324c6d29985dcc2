use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("state is not invariant under the symmetry (deviation {0:e})")]
    NotSymmetric(f64),

    #[error("input leaks outside the symmetric subspace (weight {0:e})")]
    OutsideSymmetricSubspace(f64),

    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("Choi matrix is not positive (min eigenvalue {0:e})")]
    NotCompletelyPositive(f64),

    #[error("channel is not covariant (violation {0:e})")]
    NotCovariant(f64),

    #[error("dephasing map is not idempotent (deviation {0:e})")]
    NotIdempotent(f64),

    #[error("support condition violated: {0}")]
    Support(String),

    #[error("unsupported action: {0}")]
    UnsupportedAction(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
