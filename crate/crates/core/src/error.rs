use std::path::PathBuf;

/// Errors produced by the solver toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The data is well formed but inconsistent (dimensions, ids, invariants).
    #[error("structural error: {0}")]
    Structure(String),

    /// The requested problem cannot be set up with the inputs provided.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("candidate index {0} is out of range")]
    InvalidCandidate(usize),

    #[error("facility {0} is not open")]
    NotOpen(usize),

    /// The cardinality left for a restricted subproblem cannot be met; the
    /// caller should draw another neighborhood.
    #[error("subproblem cardinality {min}..={max} is infeasible for a roster of {roster}")]
    CardinalityInfeasible { min: i64, max: i64, roster: usize },

    #[error("repair failed: unit {0} has no adjacent service area")]
    Repair(usize),

    #[error("solution import: {0}")]
    Import(String),

    #[error("external solver: {0}")]
    External(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
