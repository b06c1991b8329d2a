use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid world state: {0}")]
    InvalidState(String),

    #[error("invalid ORE table: {0}")]
    InvalidOreTable(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no opponent can reach the ball within the interception horizon")]
    NoOwner,

    #[error("win rate needs at least one match result")]
    EmptyResults,

    #[error("malformed weights file {path}: {reason}")]
    WeightsFormat { path: PathBuf, reason: String },

    #[error("weights dimension mismatch: expected {expected:?}, found {found:?}")]
    WeightsDims { expected: Vec<usize>, found: Vec<usize> },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable category, used by the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidState(_) => "invalid_state",
            Error::InvalidOreTable(_) => "invalid_ore_table",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Precondition(_) => "precondition",
            Error::NoOwner => "no_owner",
            Error::EmptyResults => "empty_results",
            Error::WeightsFormat { .. } => "weights_format",
            Error::WeightsDims { .. } => "weights_dims",
            Error::Io { .. } => "io",
            Error::Json { .. } => "json",
        }
    }
}
