use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Shape(String),

    #[error("non-finite entries in {0}")]
    NonFinite(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("ill-conditioned: {0}")]
    IllConditioned(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{what}: residual {residual:e} exceeds tolerance {tol:e}")]
    Residual { what: String, residual: f64, tol: f64 },

    #[error("not decomposable: largest 2x2 minor {0:e}")]
    NotDecomposable(f64),

    #[error("unresolved: {0}")]
    Unresolved(String),

    #[error("integration failed: {0}")]
    Integration(String),

    #[error("resonant residue: {0}")]
    Resonant(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),
}
