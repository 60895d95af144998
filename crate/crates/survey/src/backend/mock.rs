use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use super::{BackendError, ChatBackend, ChatRequest};

type Reply = Result<String, BackendError>;

/// Backend answering through a closure.
pub struct MockBackend {
    f: Box<dyn Fn(&ChatRequest) -> Reply + Send + Sync>,
    calls: AtomicUsize,
}

impl MockBackend {
    pub fn new(f: impl Fn(&ChatRequest) -> Reply + Send + Sync + 'static) -> Self {
        MockBackend { f: Box::new(f), calls: AtomicUsize::new(0) }
    }

    /// Always gives the same reply.
    pub fn constant(reply: &str) -> Self {
        let reply = reply.to_string();
        MockBackend::new(move |_| Ok(reply.clone()))
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest) -> Reply {
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.f)(request)
    }
}

/// Replies keyed by (respondent, task, attempt), with a fallback. Lookups
/// do not depend on call order, so concurrent runs stay reproducible.
pub struct ScriptedBackend {
    script: HashMap<(String, u32, u32), Reply>,
    fallback: Reply,
    calls: AtomicUsize,
}

impl ScriptedBackend {
    pub fn new(fallback: Reply) -> Self {
        ScriptedBackend { script: HashMap::new(), fallback, calls: AtomicUsize::new(0) }
    }

    pub fn on(mut self, respondent_id: &str, task_id: u32, attempt: u32, reply: Reply) -> Self {
        self.script.insert((respondent_id.to_string(), task_id, attempt), reply);
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest) -> Reply {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.script
            .get(&(request.respondent_id.clone(), request.task_id, request.attempt))
            .unwrap_or(&self.fallback)
            .clone()
    }
}
