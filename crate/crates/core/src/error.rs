use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid study: {0}")]
    InvalidStudy(String),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid choice data: {0}")]
    InvalidChoices(String),

    #[error("no choices")]
    NoChoices,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid MCMC configuration: {0}")]
    InvalidMcmcConfig(String),

    #[error("sampler failure: {0}")]
    Sampler(String),

    #[error("non-finite parameter for respondent {0}")]
    NonFinite(String),

    #[error("missing parameters for respondent {0}")]
    MissingParams(String),

    #[error("attribute importance undefined: all ranges are zero")]
    ZeroImportance,

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node {0} has no threshold")]
    MissingThreshold(usize),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
