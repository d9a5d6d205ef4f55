use thiserror::Error;

/// Unified error type for the whole pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter point lies outside a chart's parameter domain, or a
    /// requested region escapes it.
    #[error("domain error: {0}")]
    Domain(String),

    /// The induced metric degenerated (det g <= 0) at a sampled point.
    #[error("immersion failure: {0}")]
    Immersion(String),

    /// Invalid argument (sizes, counts, ranges).
    #[error("argument error: {0}")]
    Argument(String),

    /// Mismatched mesh/chart pairing or malformed configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Element-level assembly failure.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// Eigensolver failure (non-convergence, factorization breakdown).
    #[error("solver error: {0}")]
    Solver(String),

    /// Root finding or special-function evaluation failure.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// An internal invariant was violated.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
