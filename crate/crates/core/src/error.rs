use thiserror::Error;

/// Errors produced by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its domain (non-positive distance, bad exponent, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The scenario configuration is inconsistent or infeasible.
    #[error("configuration error: {0}")]
    Config(String),

    /// A channel draw is degenerate for the requested operation
    /// (zero direct gain, no derivative sign change, ...).
    #[error("degenerate scenario: {0}")]
    Degenerate(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
