use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid cycles: {0}")]
    InvalidCycles(String),

    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("not a Laplacian spectrum: no eigenvalue within {tol:e} of zero")]
    NotALaplacian { tol: f64 },

    #[error("permutation set is not closed under composition")]
    NotAGroup,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partitions of different integers ({0} vs {1})")]
    DifferentDegree(usize, usize),

    #[error("infeasible budget: {0}")]
    InfeasibleBudget(String),

    #[error("invariant drift {drift:e} at t = {t}; reduce the step size (dt = {dt})")]
    StepSize { drift: f64, t: f64, dt: f64 },

    #[error("insufficient samples for decay fit: {found} in window, need {needed}")]
    InsufficientSamples { found: usize, needed: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{0}")]
    Parse(String),
}
