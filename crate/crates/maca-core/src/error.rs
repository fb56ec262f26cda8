//! Shared error type for the whole crate.

use thiserror::Error;

/// Errors produced by the CA engine, classifier, GA, pipelines and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A state, rule vector or pattern has the wrong width.
    #[error("dimension mismatch: expected width {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Exhaustive enumeration requested above the supported cell count.
    #[error("capacity exceeded: n = {n} (exhaustive enumeration supports n <= {max})")]
    CapacityExceeded { n: usize, max: usize },

    /// A trajectory did not repeat within the allotted step budget.
    #[error("step budget exhausted after {max_steps} steps without reaching an attractor")]
    BudgetExhausted { max_steps: usize },

    /// Invalid configuration or argument value.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed input data (sequences, labels, annotations).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Structural parse failure in a text format, with a 1-based line number.
    #[error("format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    /// The convolution system cannot be identified (zero input signal).
    #[error("degenerate system: input signal is identically zero")]
    DegenerateSystem,

    /// A persisted model declares an unsupported format version.
    #[error("model version mismatch: found {found:?}, expected {expected:?}")]
    ModelVersion { found: String, expected: String },

    /// A persisted model failed its integrity check.
    #[error("model integrity failure: {0}")]
    ModelIntegrity(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
