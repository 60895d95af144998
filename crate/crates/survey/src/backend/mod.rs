//! Chat-completion backends.

mod http;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Result, SurveyError};

pub use http::{GeminiBackend, OpenAiBackend};
pub use mock::{MockBackend, ScriptedBackend};

/// One stateless request. The respondent and task fields are bookkeeping
/// and are not sent over the wire.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
    pub respondent_id: String,
    pub task_id: u32,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BackendError {
    #[error("rate limited")]
    RateLimited { retry_after: Option<Duration> },
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl BackendError {
    /// Whether another attempt could succeed.
    pub fn is_retryable(&self) -> bool {
        match self {
            BackendError::RateLimited { .. } | BackendError::Transport(_) => true,
            BackendError::Http { status, .. } => *status >= 500,
            BackendError::Auth(_) | BackendError::Malformed(_) => false,
        }
    }
}

pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<String, BackendError>;
}

impl<B: ChatBackend + ?Sized> ChatBackend for Box<B> {
    fn complete(&self, request: &ChatRequest) -> std::result::Result<String, BackendError> {
        (**self).complete(request)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vendor {
    OpenAi,
    Gemini,
}

impl std::str::FromStr for Vendor {
    type Err = SurveyError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "openai" => Ok(Vendor::OpenAi),
            "gemini" => Ok(Vendor::Gemini),
            other => Err(SurveyError::Config(format!("unknown vendor '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub vendor: Vendor,
    /// Base URL; the vendor default when absent.
    #[serde(default)]
    pub endpoint: Option<String>,
    pub model: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_temperature() -> f64 {
    1.0
}
fn default_retries() -> u32 {
    3
}
fn default_timeout() -> u64 {
    60
}

impl BackendConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(SurveyError::Config(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.model.trim().is_empty() {
            return Err(SurveyError::Config("empty model name".into()));
        }
        if self.timeout_secs == 0 {
            return Err(SurveyError::Config("timeout must be positive".into()));
        }
        Ok(())
    }

    /// Build the backend, reading the key from the configured variable.
    pub fn build(&self) -> Result<Box<dyn ChatBackend>> {
        self.validate()?;
        let key = std::env::var(&self.api_key_env)
            .map_err(|_| SurveyError::Config(format!("environment variable {} is not set", self.api_key_env)))?;
        let timeout = Duration::from_secs(self.timeout_secs);
        Ok(match self.vendor {
            Vendor::OpenAi => Box::new(OpenAiBackend::new(self.endpoint.as_deref(), key, timeout)),
            Vendor::Gemini => Box::new(GeminiBackend::new(self.endpoint.as_deref(), key, timeout)),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> BackendConfig {
        serde_json::from_str(r#"{"vendor":"openai","model":"gpt-3.5-turbo","api_key_env":"AMPLIFIER_TEST_UNSET_KEY"}"#)
            .unwrap()
    }

    #[test]
    fn config_defaults_and_checks() {
        let c = cfg();
        assert_eq!((c.temperature, c.max_retries, c.timeout_secs), (1.0, 3, 60));
        c.validate().unwrap();
        let mut hot = c.clone();
        hot.temperature = 2.5;
        assert!(hot.validate().is_err());
        assert!(matches!(c.build(), Err(SurveyError::Config(_))));
        assert_eq!("Gemini".parse::<Vendor>().unwrap(), Vendor::Gemini);
    }

    #[test]
    fn retryable_errors() {
        assert!(BackendError::RateLimited { retry_after: None }.is_retryable());
        assert!(BackendError::Http { status: 503, body: String::new() }.is_retryable());
        assert!(!BackendError::Http { status: 400, body: String::new() }.is_retryable());
        assert!(!BackendError::Auth("x".into()).is_retryable());
    }
}
