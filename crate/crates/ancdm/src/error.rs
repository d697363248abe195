//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when building signals, parsing configuration
/// or evaluating the numeric theory.
#[derive(Debug, Error)]
pub enum Error {
    /// Constellation order is not a power of two, or is below 2.
    #[error("invalid constellation: {0}")]
    InvalidConstellation(String),

    /// A symbol index fell outside the alphabet, or a bad reference symbol.
    #[error("invalid symbol: {0}")]
    InvalidSymbol(String),

    /// Sequences that must share a length do not.
    #[error("framing error: {0}")]
    Framing(String),

    /// Frame too short for the requested operation.
    #[error("insufficient frame: need at least {need} symbols, got {got}")]
    InsufficientFrame { need: usize, got: usize },

    /// Signal energy is zero where a positive power is required.
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad experiment configuration (unknown key, invalid value, ...).
    #[error("config error: {0}")]
    Config(String),

    /// Quadrature failed to converge or produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// I/O while reading config or writing results.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 2 for config errors, 3 for numeric
    /// failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Numeric(_) => 3,
            _ => 1,
        }
    }
}
