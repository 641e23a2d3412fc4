use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("empty event log")]
    EmptyEventLog,

    #[error("line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    #[error("coverage must lie in (0, 1], got {0}")]
    InvalidCoverage(f64),

    #[error("vocabulary is empty")]
    EmptyVocabulary,

    #[error("no patient has any in-vocabulary code")]
    EmptyCorpus,

    #[error("count for patient {patient:?}, code {code:?} exceeds the 32-bit range")]
    CountOverflow { patient: String, code: String },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("{what} index {index} out of range (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { index: usize, value: f64 },

    #[error("vector sums to {sum}, not 1")]
    NotADistribution { sum: f64 },

    #[error("no distinct pairs")]
    NoDistinctPairs,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid {kind}: {reason}")]
    InvalidArtifact { kind: &'static str, reason: String },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("config: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Data,
    Internal,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidCoverage(_)
            | Error::InvalidHyperparameter(_)
            | Error::InvalidArgument(_)
            | Error::Config(_) => ErrorClass::Usage,
            Error::Invariant(_) => ErrorClass::Internal,
            _ => ErrorClass::Data,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn artifact(kind: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArtifact {
            kind,
            reason: reason.into(),
        }
    }
}
