//! Uniform client layer over solver/grader/judge backends.
//!
//! One wire shape (system + user chat messages) abstracts every backend;
//! adapters translate. The layer owns prompt rendering, the exponential
//! retry policy (max 5 attempts, doubling the request timeout each time),
//! structured-response parsing, and an append-only exchange journal keyed
//! by (item, variant, role) so a run can be replayed without re-querying.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub mod prompts;

/// Transport/config settings for one model role.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    /// Base request timeout; attempt `i` uses `base * 2^(i-1)`.
    pub timeout: Duration,
    pub max_attempts: u32,
}

/// O-series reasoning models reject temperature 0 and require 1.
pub fn requires_unit_temperature(model: &str) -> bool {
    let mut chars = model.chars();
    matches!(
        (chars.next(), chars.next()),
        (Some('o'), Some(c)) if c.is_ascii_digit()
    )
}

impl ModelConfig {
    pub fn new(model: impl Into<String>) -> Self {
        let model = model.into();
        let temperature = if requires_unit_temperature(&model) { 1.0 } else { 0.0 };
        ModelConfig {
            model,
            temperature,
            top_p: 1.0,
            max_tokens: 32_000,
            timeout: Duration::from_secs(60),
            max_attempts: 5,
        }
    }
}

/// One rendered request, ready for a backend adapter.
#[derive(Clone, Debug)]
pub struct CompletionRequest {
    pub model: String,
    pub system: String,
    pub user: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub timeout: Duration,
    /// Optional sampling seed; judges get distinct seeds per call.
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("rate limited: {0}")]
    RateLimited(String),
    #[error("server error: {0}")]
    Server(String),
    #[error("authentication/config error: {0}")]
    Auth(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
}

impl BackendError {
    /// Auth and config errors fail fast; everything else is retried.
    pub fn is_retryable(&self) -> bool {
        !matches!(self, BackendError::Auth(_) | BackendError::InvalidRequest(_))
    }
}

/// A completion backend. Implementations translate the uniform chat shape
/// into their own wire format.
pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    /// Hard cap on max_tokens, when the backend declares one.
    fn max_tokens_ceiling(&self) -> Option<u32> {
        None
    }
    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError>;
}

/// Diagnostics for one attempt inside the retry loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AttemptDiagnostic {
    pub attempt: u32,
    pub timeout: Duration,
    pub error: String,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("all {attempts} attempts failed; last: {last}")]
    Exhausted { attempts: u32, last: String, diagnostics: Vec<AttemptDiagnostic> },
    #[error("fail-fast backend error: {0}")]
    FailFast(BackendError),
    #[error("unbound placeholder {{{name}}} in prompt template")]
    UnboundPlaceholder { name: String },
    #[error("structured response does not match schema {schema:?}: {reason}")]
    Schema { schema: SchemaId, reason: String },
    #[error("malformed structured payload: {0}")]
    MalformedPayload(String),
    #[error("journal I/O failure at {path}: {source}")]
    Journal {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Successful completion plus the attempt history that produced it.
#[derive(Clone, Debug)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
    pub diagnostics: Vec<AttemptDiagnostic>,
}

/// Drive a request through the retry policy: attempt `i` (1-based) uses
/// timeout `base * 2^(i-1)`; auth/config errors fail fast.
pub fn complete_with_retry(
    backend: &dyn Backend,
    config: &ModelConfig,
    request: &CompletionRequest,
) -> Result<Completion, ModelError> {
    let mut diagnostics = Vec::new();
    let max_tokens = match backend.max_tokens_ceiling() {
        Some(ceiling) => request.max_tokens.min(ceiling),
        None => request.max_tokens,
    }
    .max(1);
    for attempt in 1..=config.max_attempts.max(1) {
        let mut attempt_request = request.clone();
        attempt_request.max_tokens = max_tokens;
        attempt_request.timeout = config.timeout * 2u32.pow(attempt - 1);
        match backend.complete(&attempt_request) {
            Ok(text) => return Ok(Completion { text, attempts: attempt, diagnostics }),
            Err(err) if err.is_retryable() => {
                diagnostics.push(AttemptDiagnostic {
                    attempt,
                    timeout: attempt_request.timeout,
                    error: err.to_string(),
                });
            }
            Err(err) => return Err(ModelError::FailFast(err)),
        }
    }
    let last = diagnostics.last().map(|d| d.error.clone()).unwrap_or_default();
    Err(ModelError::Exhausted { attempts: config.max_attempts.max(1), last, diagnostics })
}

// ---------------------------------------------------------------------------
// Prompt templates
// ---------------------------------------------------------------------------

/// A system/user template pair with named `{placeholder}`s and the schema
/// its structured response must satisfy. `{{` and `}}` are literal braces.
#[derive(Clone, Debug)]
pub struct PromptTemplate {
    pub system: &'static str,
    pub user: &'static str,
    pub schema: SchemaId,
}

/// Literal substitution of `{name}` placeholders; math content is not
/// escaped. Every placeholder must be bound.
pub fn render_prompt(
    template: &PromptTemplate,
    bindings: &[(&str, &str)],
) -> Result<(String, String), ModelError> {
    Ok((render_text(template.system, bindings)?, render_text(template.user, bindings)?))
}

pub fn render_text(template: &str, bindings: &[(&str, &str)]) -> Result<String, ModelError> {
    let mut out = String::with_capacity(template.len());
    let mut chars = template.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                out.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                out.push('}');
            }
            '{' => {
                let mut name = String::new();
                for n in chars.by_ref() {
                    if n == '}' {
                        break;
                    }
                    name.push(n);
                }
                match bindings.iter().find(|(key, _)| *key == name) {
                    Some((_, value)) => out.push_str(value),
                    None => return Err(ModelError::UnboundPlaceholder { name }),
                }
            }
            other => out.push(other),
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Structured-response schemas
// ---------------------------------------------------------------------------

/// Registered response schemas for [`parse_structured`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemaId {
    SolverAnswer,
    GraderVerdict,
    NameProposal,
    SlotDiscovery,
    CoreSteps,
    KernelDraft,
    KernelQuestion,
    JudgeVote,
    PatchedCandidate,
}

fn require_str<'a>(
    map: &'a serde_json::Map<String, Value>,
    field: &str,
) -> Result<&'a str, String> {
    map.get(field)
        .ok_or_else(|| format!("missing field {field:?}"))?
        .as_str()
        .ok_or_else(|| format!("field {field:?} must be a string"))
}

fn require_nonempty_str<'a>(
    map: &'a serde_json::Map<String, Value>,
    field: &str,
) -> Result<&'a str, String> {
    let s = require_str(map, field)?;
    if s.trim().is_empty() {
        return Err(format!("field {field:?} must be nonempty"));
    }
    Ok(s)
}

impl SchemaId {
    fn validate(self, map: &serde_json::Map<String, Value>) -> Result<(), String> {
        match self {
            SchemaId::SolverAnswer => {
                require_str(map, "solution")?;
                require_str(map, "final_answer")?;
            }
            SchemaId::GraderVerdict => {
                let grade = require_str(map, "grade")?;
                if grade != "CORRECT" && grade != "INCORRECT" {
                    return Err(format!("grade must be CORRECT or INCORRECT, got {grade:?}"));
                }
                require_str(map, "detailed_feedback")?;
                match map.get("major_issues") {
                    Some(Value::String(_)) | Some(Value::Array(_)) => {}
                    Some(_) => return Err("major_issues must be a string or array".into()),
                    None => return Err("missing field \"major_issues\"".into()),
                }
                map.get("final_answer_correct")
                    .and_then(Value::as_bool)
                    .ok_or("final_answer_correct must be a boolean")?;
                let rigor = map
                    .get("reasoning_rigor_score")
                    .and_then(Value::as_u64)
                    .ok_or("reasoning_rigor_score must be a nonnegative integer")?;
                if rigor > 10 {
                    return Err(format!("reasoning_rigor_score {rigor} outside 0-10"));
                }
                require_str(map, "overall_assessment")?;
            }
            SchemaId::NameProposal => {
                require_nonempty_str(map, "replacement")?;
            }
            SchemaId::SlotDiscovery => {
                let slots = map
                    .get("mutable_slots")
                    .and_then(Value::as_object)
                    .ok_or("mutable_slots must be an object")?;
                for (id, slot) in slots {
                    let obj = slot
                        .as_object()
                        .ok_or_else(|| format!("slot {id:?} must be an object"))?;
                    let desc = obj
                        .get("description")
                        .and_then(Value::as_str)
                        .ok_or_else(|| format!("slot {id:?} missing description"))?;
                    if desc.trim().is_empty() {
                        return Err(format!("slot {id:?} has empty description"));
                    }
                    if !obj.contains_key("original") {
                        return Err(format!("slot {id:?} missing original value"));
                    }
                }
            }
            SchemaId::CoreSteps => {
                let steps = map
                    .get("core_steps")
                    .and_then(Value::as_array)
                    .ok_or("core_steps must be an array")?;
                if steps.is_empty() || !steps.iter().all(Value::is_string) {
                    return Err("core_steps must be a nonempty array of strings".into());
                }
            }
            SchemaId::KernelDraft => {
                require_nonempty_str(map, "solution")?;
                require_str(map, "statement_draft")?;
            }
            SchemaId::KernelQuestion => {
                require_nonempty_str(map, "question")?;
            }
            SchemaId::JudgeVote => {
                let verdict = require_str(map, "verdict")?;
                if verdict != "accept" && verdict != "reject" {
                    return Err(format!("verdict must be accept or reject, got {verdict:?}"));
                }
            }
            SchemaId::PatchedCandidate => {
                require_nonempty_str(map, "question")?;
                require_nonempty_str(map, "solution")?;
            }
        }
        Ok(())
    }
}

fn strip_code_fences(raw: &str) -> &str {
    let trimmed = raw.trim();
    if let Some(rest) = trimmed.strip_prefix("```") {
        let rest = match rest.find('\n') {
            Some(pos) => &rest[pos + 1..],
            None => rest,
        };
        return rest.strip_suffix("```").map(str::trim).unwrap_or(rest.trim());
    }
    trimmed
}

/// Parse and validate a structured model response. Code-fence wrappers and
/// surrounding prose are tolerated; extraneous fields are preserved.
pub fn parse_structured(
    raw: &str,
    schema: SchemaId,
) -> Result<serde_json::Map<String, Value>, ModelError> {
    let stripped = strip_code_fences(raw);
    let start = stripped
        .find('{')
        .ok_or_else(|| ModelError::MalformedPayload("no JSON object in response".into()))?;
    let end = stripped
        .rfind('}')
        .ok_or_else(|| ModelError::MalformedPayload("no JSON object in response".into()))?;
    if end < start {
        return Err(ModelError::MalformedPayload("no JSON object in response".into()));
    }
    let value: Value = serde_json::from_str(&stripped[start..=end])
        .map_err(|e| ModelError::MalformedPayload(e.to_string()))?;
    let map = match value {
        Value::Object(map) => map,
        other => {
            return Err(ModelError::MalformedPayload(format!(
                "expected a JSON object, got {other}"
            )))
        }
    };
    schema
        .validate(&map)
        .map_err(|reason| ModelError::Schema { schema, reason })?;
    Ok(map)
}

// ---------------------------------------------------------------------------
// Exchange journal
// ---------------------------------------------------------------------------

/// Journal key: which exchange this is. `seq` separates re-asks of the same
/// role (e.g. a parse failure that triggered a fresh completion).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExchangeKey {
    pub item: String,
    pub variant: String,
    pub role: String,
}

impl ExchangeKey {
    pub fn new(
        item: impl Into<String>,
        variant: impl Into<String>,
        role: impl Into<String>,
    ) -> Self {
        ExchangeKey { item: item.into(), variant: variant.into(), role: role.into() }
    }
}

impl fmt::Display for ExchangeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.item, self.variant, self.role)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JournalRecord {
    pub item: String,
    pub variant: String,
    pub role: String,
    pub seq: u32,
    pub model: String,
    pub attempts: u32,
    pub response: String,
    pub timestamp_secs: u64,
}

/// Append-only run journal. Re-opening a journal replays recorded responses
/// instead of re-querying the backend, which makes interrupted runs
/// resumable and finished runs replayable.
pub struct Journal {
    path: PathBuf,
    replay: Mutex<HashMap<(String, String, String, u32), String>>,
    writer: Mutex<std::fs::File>,
}

impl Journal {
    pub fn open(path: &Path) -> Result<Self, ModelError> {
        let mut replay = HashMap::new();
        if path.exists() {
            let content = std::fs::read_to_string(path)
                .map_err(|source| ModelError::Journal { path: path.to_path_buf(), source })?;
            for line in content.lines() {
                if line.trim().is_empty() {
                    continue;
                }
                // Torn trailing writes from an interrupted run are skipped.
                if let Ok(record) = serde_json::from_str::<JournalRecord>(line) {
                    replay.insert(
                        (record.item, record.variant, record.role, record.seq),
                        record.response,
                    );
                }
            }
        }
        let writer = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| ModelError::Journal { path: path.to_path_buf(), source })?;
        Ok(Journal { path: path.to_path_buf(), replay: Mutex::new(replay), writer: Mutex::new(writer) })
    }

    pub fn lookup(&self, key: &ExchangeKey, seq: u32) -> Option<String> {
        self.replay
            .lock()
            .unwrap()
            .get(&(key.item.clone(), key.variant.clone(), key.role.clone(), seq))
            .cloned()
    }

    pub fn record(
        &self,
        key: &ExchangeKey,
        seq: u32,
        model: &str,
        attempts: u32,
        response: &str,
    ) -> Result<(), ModelError> {
        let record = JournalRecord {
            item: key.item.clone(),
            variant: key.variant.clone(),
            role: key.role.clone(),
            seq,
            model: model.to_string(),
            attempts,
            response: response.to_string(),
            timestamp_secs: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        };
        let line = serde_json::to_string(&record).expect("journal record serializes");
        {
            let mut writer = self.writer.lock().unwrap();
            writeln!(writer, "{line}")
                .and_then(|_| writer.flush())
                .map_err(|source| ModelError::Journal { path: self.path.clone(), source })?;
        }
        self.replay.lock().unwrap().insert(
            (key.item.clone(), key.variant.clone(), key.role.clone(), seq),
            response.to_string(),
        );
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// In-flight limiter
// ---------------------------------------------------------------------------

/// Bounds concurrent in-flight requests per backend.
pub struct InFlightLimiter {
    max: usize,
    state: Mutex<usize>,
    cv: Condvar,
}

impl InFlightLimiter {
    pub fn new(max: usize) -> Self {
        InFlightLimiter { max: max.max(1), state: Mutex::new(0), cv: Condvar::new() }
    }

    pub fn acquire(&self) -> InFlightGuard<'_> {
        let mut in_flight = self.state.lock().unwrap();
        while *in_flight >= self.max {
            in_flight = self.cv.wait(in_flight).unwrap();
        }
        *in_flight += 1;
        InFlightGuard { limiter: self }
    }
}

pub struct InFlightGuard<'a> {
    limiter: &'a InFlightLimiter,
}

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        let mut in_flight = self.limiter.state.lock().unwrap();
        *in_flight -= 1;
        self.limiter.cv.notify_one();
    }
}

// ---------------------------------------------------------------------------
// Client
// ---------------------------------------------------------------------------

/// How many fresh completions to request when a structured response fails
/// to parse (on top of per-request transport retries).
const PARSE_REASKS: u32 = 2;

/// A role-bound client: backend + config + optional journal and limiter.
/// Shareable across worker threads.
#[derive(Clone)]
pub struct Client {
    backend: Arc<dyn Backend>,
    pub config: ModelConfig,
    journal: Option<Arc<Journal>>,
    limiter: Option<Arc<InFlightLimiter>>,
    seed: Option<u64>,
}

impl Client {
    pub fn new(backend: Arc<dyn Backend>, config: ModelConfig) -> Self {
        Client { backend, config, journal: None, limiter: None, seed: None }
    }

    pub fn with_journal(mut self, journal: Arc<Journal>) -> Self {
        self.journal = Some(journal);
        self
    }

    pub fn with_limiter(mut self, limiter: Arc<InFlightLimiter>) -> Self {
        self.limiter = Some(limiter);
        self
    }

    /// Fix the sampling seed sent with every request (used to give judges
    /// independent seeds).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    fn complete_seq(
        &self,
        key: &ExchangeKey,
        seq: u32,
        system: &str,
        user: &str,
    ) -> Result<String, ModelError> {
        if let Some(journal) = &self.journal {
            if let Some(response) = journal.lookup(key, seq) {
                return Ok(response);
            }
        }
        let request = CompletionRequest {
            model: self.config.model.clone(),
            system: system.to_string(),
            user: user.to_string(),
            temperature: self.config.temperature,
            top_p: self.config.top_p,
            max_tokens: self.config.max_tokens,
            timeout: self.config.timeout,
            seed: self.seed,
        };
        let completion = {
            let _guard = self.limiter.as_ref().map(|l| l.acquire());
            complete_with_retry(self.backend.as_ref(), &self.config, &request)?
        };
        if let Some(journal) = &self.journal {
            journal.record(key, seq, &self.config.model, completion.attempts, &completion.text)?;
        }
        Ok(completion.text)
    }

    /// One raw exchange, journal-replayed when a recording exists.
    pub fn complete(&self, key: &ExchangeKey, system: &str, user: &str) -> Result<String, ModelError> {
        self.complete_seq(key, 0, system, user)
    }

    /// An exchange whose response must satisfy `schema`. Parse failures
    /// trigger up to [`PARSE_REASKS`] fresh completions.
    pub fn structured(
        &self,
        key: &ExchangeKey,
        system: &str,
        user: &str,
        schema: SchemaId,
    ) -> Result<serde_json::Map<String, Value>, ModelError> {
        let mut last_err = None;
        for seq in 0..=PARSE_REASKS {
            let text = self.complete_seq(key, seq, system, user)?;
            match parse_structured(&text, schema) {
                Ok(map) => return Ok(map),
                Err(err) => last_err = Some(err),
            }
        }
        Err(last_err.expect("at least one parse attempt"))
    }
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

/// OpenAI-compatible chat-completions backend (remote APIs and local
/// inference servers share this wire format).
pub struct HttpChatBackend {
    label: String,
    base_url: String,
    api_key_env: Option<String>,
    ceiling: Option<u32>,
}

impl HttpChatBackend {
    /// `base_url` up to (not including) `/chat/completions`. Credentials
    /// come only from the named environment variable, never config files.
    pub fn new(label: impl Into<String>, base_url: impl Into<String>, api_key_env: Option<String>) -> Self {
        HttpChatBackend {
            label: label.into(),
            base_url: base_url.into(),
            api_key_env,
            ceiling: None,
        }
    }

    pub fn with_max_tokens_ceiling(mut self, ceiling: u32) -> Self {
        self.ceiling = Some(ceiling);
        self
    }
}

impl Backend for HttpChatBackend {
    fn name(&self) -> &str {
        &self.label
    }

    fn max_tokens_ceiling(&self) -> Option<u32> {
        self.ceiling
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        let api_key = match &self.api_key_env {
            Some(env_name) => Some(
                std::env::var(env_name)
                    .map_err(|_| BackendError::Auth(format!("{env_name} is not set")))?,
            ),
            None => None,
        };
        let mut body = serde_json::json!({
            "model": request.model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.user},
            ],
            "temperature": request.temperature,
            "top_p": request.top_p,
            "max_tokens": request.max_tokens,
        });
        if let Some(seed) = request.seed {
            body["seed"] = serde_json::json!(seed);
        }
        let client = reqwest::blocking::Client::builder()
            .timeout(request.timeout)
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let mut http_request = client
            .post(format!("{}/chat/completions", self.base_url.trim_end_matches('/')))
            .json(&body);
        if let Some(key) = api_key {
            http_request = http_request.bearer_auth(key);
        }
        let response = http_request
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(BackendError::Auth(format!("{status}: {text}")));
        }
        if status.as_u16() == 429 {
            return Err(BackendError::RateLimited(text));
        }
        if status.is_server_error() {
            return Err(BackendError::Server(format!("{status}: {text}")));
        }
        if !status.is_success() {
            return Err(BackendError::InvalidRequest(format!("{status}: {text}")));
        }
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| BackendError::Server(format!("unparsable body: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Server("response lacks choices[0].message.content".into()))
    }
}

/// Test/offline backend that pops pre-scripted results and records every
/// request it saw.
pub struct ScriptedBackend {
    label: String,
    script: Mutex<std::collections::VecDeque<Result<String, BackendError>>>,
    pub requests: Mutex<Vec<CompletionRequest>>,
    ceiling: Option<u32>,
}

impl ScriptedBackend {
    pub fn new(script: Vec<Result<String, BackendError>>) -> Self {
        ScriptedBackend {
            label: "scripted".into(),
            script: Mutex::new(script.into()),
            requests: Mutex::new(Vec::new()),
            ceiling: None,
        }
    }

    pub fn with_max_tokens_ceiling(mut self, ceiling: u32) -> Self {
        self.ceiling = Some(ceiling);
        self
    }

    pub fn recorded_timeouts(&self) -> Vec<Duration> {
        self.requests.lock().unwrap().iter().map(|r| r.timeout).collect()
    }
}

impl Backend for ScriptedBackend {
    fn name(&self) -> &str {
        &self.label
    }

    fn max_tokens_ceiling(&self) -> Option<u32> {
        self.ceiling
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.requests.lock().unwrap().push(request.clone());
        self.script
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| Err(BackendError::Transport("script exhausted".into())))
    }
}

type RuleFn = Box<dyn Fn(&CompletionRequest) -> Result<String, BackendError> + Send + Sync>;

/// Offline backend computing responses from the request itself.
pub struct RuleBackend {
    label: String,
    rule: RuleFn,
    calls: AtomicU32,
}

impl RuleBackend {
    pub fn new(
        label: impl Into<String>,
        rule: impl Fn(&CompletionRequest) -> Result<String, BackendError> + Send + Sync + 'static,
    ) -> Self {
        RuleBackend { label: label.into(), rule: Box::new(rule), calls: AtomicU32::new(0) }
    }

    pub fn calls(&self) -> u32 {
        self.calls.load(Ordering::Relaxed)
    }
}

impl Backend for RuleBackend {
    fn name(&self) -> &str {
        &self.label
    }

    fn complete(&self, request: &CompletionRequest) -> Result<String, BackendError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.rule)(request)
    }
}
