use thiserror::Error;

use crate::stability::Condition;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("agent index {index} out of range for swarm of {n}")]
    AgentIndex { index: usize, n: usize },

    #[error("weights sum to zero, steady state undefined")]
    ZeroWeights,

    #[error("APSO parameters fail the stability check (conditions {failed:?}); set allow_unstable = true to run anyway")]
    Unstable { failed: Vec<Condition> },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown config key `{0}`")]
    UnknownKey(String),

    #[error("config digest mismatch: record has {recorded}, current config gives {actual}")]
    DigestMismatch { recorded: String, actual: String },

    #[error("trajectory diverged from record at iteration {iteration}")]
    TrajectoryMismatch { iteration: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
