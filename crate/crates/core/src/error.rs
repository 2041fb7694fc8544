//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by constructors, solvers and integrators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian: {0}")]
    NonHermitianInput(String),

    #[error("Hamiltonian is not Hermitian: {0}")]
    NonHermitianHamiltonian(String),

    #[error("negative jump rate: {0}")]
    NegativeRate(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("matrix exponential overflow: {0}")]
    Overflow(String),

    #[error("adaptive step size underflow at t = {t}, h = {h}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("integration tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("generator kernel is {dim}-dimensional, expected 1")]
    DegenerateKernel { dim: usize },

    #[error("kernel vector is not a physical state: {0}")]
    NoPhysicalState(String),

    #[error("quadrature did not converge: {0}")]
    QuadratureNotConverged(String),

    #[error("cost guard exceeded: {0}")]
    CostGuardExceeded(String),

    #[error("size guard exceeded: {0}")]
    SizeGuardExceeded(String),

    #[error("linear algebra backend error: {0}")]
    Linalg(#[from] ndarray_linalg::error::LinalgError),
}

pub type Result<T> = std::result::Result<T, Error>;
