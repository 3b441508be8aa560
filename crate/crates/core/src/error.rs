use thiserror::Error;

/// Errors raised by the simulation and analysis layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{backend} backend supports 1..={cap} qubits, got {n}")]
    Capacity {
        backend: &'static str,
        cap: usize,
        n: usize,
    },

    #[error("qubit index {index} out of range for {n} qubits{context}")]
    QubitIndex {
        index: usize,
        n: usize,
        context: &'static str,
    },

    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("dimension mismatch: expected {expected}, got {actual} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }

    /// Coarse category used for CLI exit codes and messages.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Capacity { .. } => "capacity",
            Error::QubitIndex { .. } | Error::DimensionMismatch { .. } => "config",
            Error::InvalidParameter { .. } => "config",
            Error::InsufficientData(_) => "numeric",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
