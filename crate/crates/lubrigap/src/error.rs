//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("profile domain: {0}")]
    ProfileDomain(String),

    #[error("point outside domain: {0}")]
    OutOfDomain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate contact: {0}")]
    DegenerateContact(String),

    #[error("data evaluation produced a non-finite value at ({x}, {y})")]
    DataEvaluation { x: f64, y: f64 },

    #[error("solver did not converge: relative residual {residual:.3e} after {iterations} iterations")]
    SolverFailure { residual: f64, iterations: usize },

    #[error("grid too coarse: {0}")]
    Resolution(String),

    #[error("quadrature failed: {0}")]
    Integration(String),

    #[error("singular discretization: {0}")]
    Discretization(String),

    #[error("truncation domain too small: far-field fit residual {0:.3e} exceeds 5%")]
    TruncationDomain(f64),

    #[error("scaling fit: {0}")]
    Fit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("h out of regime: {0}")]
    OutOfRegime(String),
}

pub type Result<T> = std::result::Result<T, Error>;
