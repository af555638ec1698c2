use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error(
        "singular generator: Delta = 0 makes L singular and the steady state \
         depends on the initial condition; use Delta > 0"
    )]
    SingularGenerator,

    #[error("degenerate zeroth-order eigenvalue {lambda0}: f'({lambda0}) = 0, the single-root correction is inapplicable")]
    DegenerateRoot { lambda0: f64 },

    #[error("ill-conditioned mode-coefficient system: smallest eigenvalue gap {gap:e} (relative to {scale:e})")]
    IllConditioned { gap: f64, scale: f64 },

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("eigendecomposition failed: {0}")]
    Eigendecomposition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
