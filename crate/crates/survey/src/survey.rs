use std::collections::HashMap;
use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use amplifier_core::choice_data::{Choice, ChoiceDataset, RespondentProfile};
use amplifier_core::conjoint::{RespondentTasks, StudyDesign};

use crate::backend::{BackendError, ChatBackend, ChatRequest};
use crate::error::{Result, SurveyError};
use crate::limiter::RateLimiter;
use crate::parse::{parse_choice, ParsedChoice};
use crate::template::{render_prompt, PromptTemplate};
use crate::texts::CLARIFICATION;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyOptions {
    pub model: String,
    pub temperature: f64,
    /// Extra attempts per task after the first.
    pub max_retries: u32,
    /// Respondents in flight at once.
    pub concurrency: usize,
    pub backoff_base: Duration,
    pub backoff_max: Duration,
    pub requests_per_second: Option<f64>,
    pub burst: usize,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions {
            model: "gpt-3.5-turbo".into(),
            temperature: 1.0,
            max_retries: 3,
            concurrency: 4,
            backoff_base: Duration::from_millis(500),
            backoff_max: Duration::from_secs(30),
            requests_per_second: None,
            burst: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyResponse {
    pub respondent_id: String,
    pub task_id: u32,
    /// Last reply received, if any.
    pub raw_text: Option<String>,
    pub parsed_choice: ParsedChoice,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurveyLogEntry {
    pub respondent_id: String,
    pub task_id: u32,
    pub attempt: u32,
    pub message: String,
}

/// One request and its outcome, written as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub respondent_id: String,
    pub task_id: u32,
    pub attempt: u32,
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
    pub reply: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SurveyOutcome {
    /// Parsed choices; cells that never parsed are absent.
    pub dataset: ChoiceDataset,
    pub responses: Vec<SurveyResponse>,
    pub errors: Vec<SurveyLogEntry>,
    pub requests: usize,
}

#[derive(Default)]
struct RespondentRun {
    responses: Vec<SurveyResponse>,
    errors: Vec<SurveyLogEntry>,
    transcript: Vec<TranscriptRecord>,
}

struct Shared<'a> {
    backend: &'a dyn ChatBackend,
    template: &'a PromptTemplate,
    options: &'a SurveyOptions,
    limiter: Option<RateLimiter>,
    abort: AtomicBool,
    requests: AtomicUsize,
    alts: usize,
}

fn backoff(options: &SurveyOptions, attempt: u32, hint: Option<Duration>) -> Duration {
    let exp = options.backoff_base.saturating_mul(1u32 << attempt.min(16));
    hint.unwrap_or(exp).min(options.backoff_max)
}

fn run_respondent(
    shared: &Shared<'_>,
    profile: &RespondentProfile,
    tasks: &RespondentTasks,
) -> Result<RespondentRun> {
    let mut run = RespondentRun::default();
    let n_options = shared.alts + 1;
    for task in &tasks.tasks {
        let base = render_prompt(shared.template, profile, task)?;
        let mut clarify = false;
        let mut last_reply = None;
        let mut parsed = ParsedChoice::Unparseable;
        let mut attempts = 0;
        for attempt in 0..=shared.options.max_retries {
            if shared.abort.load(Ordering::Relaxed) {
                return Ok(run);
            }
            attempts = attempt + 1;
            let prompt = if clarify { format!("{base}\n\n{CLARIFICATION}") } else { base.clone() };
            let request = ChatRequest {
                model: shared.options.model.clone(),
                temperature: shared.options.temperature,
                prompt,
                respondent_id: tasks.respondent_id.clone(),
                task_id: task.task_id,
                attempt,
            };
            if let Some(l) = &shared.limiter {
                l.acquire();
            }
            shared.requests.fetch_add(1, Ordering::Relaxed);
            let reply = shared.backend.complete(&request);
            run.transcript.push(TranscriptRecord {
                respondent_id: request.respondent_id.clone(),
                task_id: request.task_id,
                attempt,
                model: request.model.clone(),
                temperature: request.temperature,
                prompt: request.prompt,
                reply: reply.as_ref().ok().cloned(),
                error: reply.as_ref().err().map(|e| e.to_string()),
            });
            let mut log = |message: String| {
                run.errors.push(SurveyLogEntry {
                    respondent_id: tasks.respondent_id.clone(),
                    task_id: task.task_id,
                    attempt,
                    message,
                })
            };
            match reply {
                Ok(text) => {
                    parsed = parse_choice(&text, n_options);
                    last_reply = Some(text);
                    if parsed != ParsedChoice::Unparseable {
                        break;
                    }
                    log("unparseable reply".into());
                    clarify = true;
                }
                Err(BackendError::Auth(msg)) => {
                    shared.abort.store(true, Ordering::Relaxed);
                    return Err(SurveyError::Auth(msg));
                }
                Err(e) => {
                    let retry = e.is_retryable();
                    log(e.to_string());
                    if !retry {
                        break;
                    }
                    if attempt < shared.options.max_retries {
                        let hint = match e {
                            BackendError::RateLimited { retry_after } => retry_after,
                            _ => None,
                        };
                        std::thread::sleep(backoff(shared.options, attempt, hint));
                    }
                }
            }
        }
        if parsed == ParsedChoice::Unparseable {
            log::warn!("respondent {} task {}: no usable reply", tasks.respondent_id, task.task_id);
        }
        run.responses.push(SurveyResponse {
            respondent_id: tasks.respondent_id.clone(),
            task_id: task.task_id,
            raw_text: last_reply,
            parsed_choice: parsed,
            attempts,
        });
    }
    Ok(run)
}

/// Put every task of `design` to the backend, one stateless request per
/// task, and collect the parsed choices.
///
/// Unparseable replies are retried with a clarification line; retryable
/// backend errors back off and retry. Cells still unanswered after
/// `max_retries` are left out of the dataset. An authentication failure
/// stops the whole run. When `transcript` is given, each respondent's
/// requests are appended as one contiguous block of JSON lines.
pub fn administer_survey(
    backend: &dyn ChatBackend,
    template: &PromptTemplate,
    profiles: &[RespondentProfile],
    design: &StudyDesign,
    options: &SurveyOptions,
    transcript: Option<&mut (dyn Write + Send)>,
) -> Result<SurveyOutcome> {
    template.check(&design.study)?;
    let by_id: HashMap<&str, &RespondentProfile> = profiles.iter().map(|p| (p.respondent_id.as_str(), p)).collect();
    let ordered_profiles = design
        .respondents
        .iter()
        .map(|r| {
            by_id
                .get(r.respondent_id.as_str())
                .copied()
                .ok_or_else(|| SurveyError::MissingProfile(r.respondent_id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let shared = Shared {
        backend,
        template,
        options,
        limiter: options.requests_per_second.map(|r| RateLimiter::new(r, options.burst)),
        abort: AtomicBool::new(false),
        requests: AtomicUsize::new(0),
        alts: design.study.alts_per_task,
    };
    let n = design.respondents.len();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RespondentRun>>> = Mutex::new((0..n).map(|_| None).collect());
    let failure: Mutex<Option<SurveyError>> = Mutex::new(None);
    let transcript = transcript.map(Mutex::new);

    std::thread::scope(|s| {
        for _ in 0..options.concurrency.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n || shared.abort.load(Ordering::Relaxed) {
                    return;
                }
                match run_respondent(&shared, ordered_profiles[i], &design.respondents[i]) {
                    Ok(run) => {
                        if let Some(w) = &transcript {
                            let mut w = w.lock().unwrap();
                            let written = run.transcript.iter().try_for_each(|rec| {
                                serde_json::to_writer(&mut **w, rec).map_err(std::io::Error::from)?;
                                w.write_all(b"\n")
                            });
                            if let Err(e) = written.and_then(|_| w.flush()) {
                                shared.abort.store(true, Ordering::Relaxed);
                                failure.lock().unwrap().get_or_insert(SurveyError::Io { path: "<transcript>".into(), source: e });
                            }
                        }
                        results.lock().unwrap()[i] = Some(run);
                    }
                    Err(e) => {
                        shared.abort.store(true, Ordering::Relaxed);
                        failure.lock().unwrap().get_or_insert(e);
                    }
                }
            });
        }
    });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }

    let mut responses = Vec::new();
    let mut errors = Vec::new();
    for run in results.into_inner().unwrap().into_iter().flatten() {
        responses.extend(run.responses);
        errors.extend(run.errors);
    }
    let choices: Vec<Choice> = responses
        .iter()
        .filter_map(|r| {
            r.parsed_choice.selection(shared.alts).map(|selection| Choice {
                respondent_id: r.respondent_id.clone(),
                task_id: r.task_id,
                selection,
            })
        })
        .collect();
    let missing = responses.len() - choices.len();
    if missing > 0 {
        log::warn!("{missing} of {} cells have no parsed choice", responses.len());
    }
    let dataset = ChoiceDataset::new(
        design.clone(),
        choices,
        ordered_profiles.into_iter().cloned().collect(),
    )?;
    Ok(SurveyOutcome { dataset, responses, errors, requests: shared.requests.into_inner() })
}
