use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Invalid grid, shape or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Physical sample array does not match the grid.
    #[error("shape mismatch: expected {expected} samples per component, got {got}")]
    Shape { expected: usize, got: usize },

    /// Model or harness parameter outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The frequency is degenerate for the requested operation.
    #[error("degenerate mode at xi = {xi:?}: {reason}")]
    DegenerateMode { xi: [f64; 3], reason: &'static str },

    /// Input violates a structural invariant (divergence-free, Hermitian, ...).
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Matrix exponential argument too large to evaluate reliably.
    #[error("matrix exponential overflow guard: ||tM|| = {norm:e} exceeds {limit:e}")]
    Overflow { norm: f64, limit: f64 },

    /// Non-finite values or norm threshold exceeded during time stepping.
    #[error("blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
