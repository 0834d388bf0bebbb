//! Error type shared by all modules.

/// Errors produced by construction, quadrature, and diagnostics routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid configuration: bad grid, mismatched grids, missing scenario
    /// parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// Query outside the domain of a tabulated object.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure failed to converge or decompose.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A density matrix violated its validity invariants.
    #[error("validity error: {0}")]
    Validity(String),

    /// Too much probability mass clipped at grid edges.
    #[error("truncation error: {0}")]
    Truncation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
