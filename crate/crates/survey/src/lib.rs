//! Survey administration for artificial respondents: prompt rendering,
//! reply parsing and chat-completion backends.

pub mod backend;
mod error;
mod limiter;
mod parse;
mod survey;
mod template;
pub mod texts;

pub use backend::{BackendConfig, BackendError, ChatBackend, ChatRequest, MockBackend, ScriptedBackend, Vendor};
pub use error::{Result, SurveyError};
pub use limiter::RateLimiter;
pub use parse::{parse_choice, ParsedChoice};
pub use survey::{administer_survey, SurveyLogEntry, SurveyOptions, SurveyOutcome, SurveyResponse, TranscriptRecord};
pub use template::{render_options, render_persona, render_prompt, PromptTemplate};
