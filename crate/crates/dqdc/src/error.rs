//! Crate-wide error type.

use thiserror::Error;

use crate::trainer::TrainReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input matrix or vector has the wrong shape for the operation.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Input violates a validity precondition (non-Hermitian generator,
    /// non-finite entries, malformed ansatz structure, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A hardware control constraint was violated (negative pulse strength,
    /// idle span not a multiple of pi, adjacent qubits pulsed together, ...).
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Problem size exceeds the dense-simulation capacity.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A propagator failed its unitarity check. This indicates a kernel bug,
    /// not bad user input; it is never silently corrected.
    #[error("unitarity check failed: {0}")]
    UnitarityBroken(String),

    /// Gate training did not reach the admission threshold.
    #[error("compilation of '{name}' did not converge: final error {final_error:.3e} after {rounds} rounds")]
    CompilationFailed {
        name: String,
        final_error: f64,
        rounds: usize,
        report: Box<TrainReport>,
    },

    /// A gate referenced by a circuit is missing from the library.
    #[error("gate '{0}' not found in library")]
    GateNotFound(String),

    /// Persisted file does not match the expected schema or version.
    #[error("file format error: {0}")]
    FileFormat(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

impl Error {
    pub fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }
}
