use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A value falls outside the mathematical domain of an operation.
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    /// A design vector violates its design-space bounds.
    #[error("out of bounds: {0}")]
    OutOfBounds(String),
    /// Geometry too degenerate to process (zero chord, zero span, ...).
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    /// A numeric computation produced non-finite values.
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// A least-squares fit could not be solved.
    #[error("fitting failed: {0}")]
    Fit(String),
    /// A linear or nonlinear solver failed.
    #[error("solver failed: {0}")]
    Solver(String),
    /// An object is not in the required state (e.g. untrained network).
    #[error("invalid state: {0}")]
    State(String),
    /// A file has an unexpected layout or inconsistent header.
    #[error("format error: {0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
