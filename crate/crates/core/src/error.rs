use thiserror::Error;

/// Errors produced by geometry construction, root finding and the solvers.
#[derive(Debug, Error)]
pub enum CcmtError {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("linear solve failed: {0}")]
    LinearSolve(String),
}

pub type Result<T> = std::result::Result<T, CcmtError>;
