use std::path::PathBuf;

use thiserror::Error;

use crate::backend::BackendError;

pub type Result<T, E = SurveyError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SurveyError {
    #[error("template slot '{slot}' has no value for respondent {respondent_id}")]
    MissingSlot { slot: String, respondent_id: String },

    #[error("invalid template: {0}")]
    InvalidTemplate(String),

    #[error("no profile for respondent {0}")]
    MissingProfile(String),

    #[error("invalid backend configuration: {0}")]
    Config(String),

    #[error("backend rejected credentials: {0}")]
    Auth(String),

    #[error("backend error: {0}")]
    Backend(#[from] BackendError),

    #[error(transparent)]
    Core(#[from] amplifier_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
