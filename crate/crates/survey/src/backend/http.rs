use std::time::Duration;

use serde_json::{json, Value};

use super::{BackendError, ChatBackend, ChatRequest};

const OPENAI_URL: &str = "https://api.openai.com/v1/chat/completions";
const GEMINI_URL: &str = "https://generativelanguage.googleapis.com/v1beta/models";

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::AgentBuilder::new().timeout(timeout).build()
}

fn post(req: ureq::Request, body: &Value) -> Result<Value, BackendError> {
    match req.send_json(body) {
        Ok(resp) => resp.into_json().map_err(|e| BackendError::Malformed(e.to_string())),
        Err(ureq::Error::Status(status, resp)) => {
            let retry_after = resp
                .header("retry-after")
                .and_then(|s| s.trim().parse::<u64>().ok())
                .map(Duration::from_secs);
            let body = resp.into_string().unwrap_or_default();
            Err(classify(status, retry_after, body))
        }
        Err(e) => Err(BackendError::Transport(e.to_string())),
    }
}

pub(crate) fn classify(status: u16, retry_after: Option<Duration>, body: String) -> BackendError {
    match status {
        429 => BackendError::RateLimited { retry_after },
        401 | 403 => BackendError::Auth(body),
        _ => BackendError::Http { status, body },
    }
}

/// OpenAI chat completions.
pub struct OpenAiBackend {
    url: String,
    key: String,
    agent: ureq::Agent,
}

impl OpenAiBackend {
    pub fn new(endpoint: Option<&str>, key: String, timeout: Duration) -> Self {
        OpenAiBackend { url: endpoint.unwrap_or(OPENAI_URL).to_string(), key, agent: agent(timeout) }
    }

    pub fn request_body(request: &ChatRequest) -> Value {
        json!({
            "model": request.model,
            "temperature": request.temperature,
            "messages": [{"role": "user", "content": request.prompt}],
        })
    }

    pub fn reply_text(body: &Value) -> Result<String, BackendError> {
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| BackendError::Malformed("no choices[0].message.content".into()))
    }
}

impl ChatBackend for OpenAiBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        let req = self.agent.post(&self.url).set("Authorization", &format!("Bearer {}", self.key));
        Self::reply_text(&post(req, &Self::request_body(request))?)
    }
}

/// Gemini generateContent.
pub struct GeminiBackend {
    base: String,
    key: String,
    agent: ureq::Agent,
}

impl GeminiBackend {
    pub fn new(endpoint: Option<&str>, key: String, timeout: Duration) -> Self {
        GeminiBackend {
            base: endpoint.unwrap_or(GEMINI_URL).trim_end_matches('/').to_string(),
            key,
            agent: agent(timeout),
        }
    }

    pub fn url(&self, model: &str) -> String {
        format!("{}/{model}:generateContent", self.base)
    }

    pub fn request_body(request: &ChatRequest) -> Value {
        json!({
            "contents": [{"role": "user", "parts": [{"text": request.prompt}]}],
            "generationConfig": {"temperature": request.temperature},
        })
    }

    pub fn reply_text(body: &Value) -> Result<String, BackendError> {
        let parts = body
            .pointer("/candidates/0/content/parts")
            .and_then(Value::as_array)
            .ok_or_else(|| BackendError::Malformed("no candidates[0].content.parts".into()))?;
        Ok(parts.iter().filter_map(|p| p.get("text").and_then(Value::as_str)).collect())
    }
}

impl ChatBackend for GeminiBackend {
    fn complete(&self, request: &ChatRequest) -> Result<String, BackendError> {
        let req = self.agent.post(&self.url(&request.model)).set("x-goog-api-key", &self.key);
        Self::reply_text(&post(req, &Self::request_body(request))?)
    }
}
