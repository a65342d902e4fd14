use thiserror::Error;

/// Errors raised by validation and by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix has a non-finite entry")]
    NonFinite,

    #[error("not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),

    #[error("not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("not trace preserving (max |ΣK†K - I| = {0:e})")]
    NotTracePreserving(f64),

    #[error("eigenbasis is not unitary (max |V†V - I| = {0:e})")]
    NotUnitary(f64),

    #[error("invalid argument: {0}")]
    Domain(String),

    /// The constraint set of the requested problem is empty or degenerate
    /// (for example an energy budget at or below the ground energy).
    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
