//! Kernel (parametric) variants: slot discovery, uniform resampling inside
//! guards, template back-synthesis, question reverse-engineering, and the
//! repair-and-verify screening loop with its soundness bound.
//!
//! Guards are optional: the verifier loop screens candidates regardless, so
//! a slot without a symbolic range is passed through flagged for
//! verifier-only screening.

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::corpus::{Guard, KernelMeta, KernelVariant, ProblemRecord, Slot};
use crate::modelio::{self, prompts, Client, ExchangeKey, ModelError, SchemaId};

pub type SlotDict = IndexMap<String, Slot>;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("record has no mutable slots; marked \"no kernel variant\"")]
    NoKernelVariant,
    #[error("step-order mismatch at index {index}; route to the patch loop")]
    StepMismatch { index: usize, draft: Box<KernelDraft> },
    #[error("resampling produced no changed slot after {attempts} attempts")]
    AllUnchanged { attempts: u32 },
    #[error("empty solution draft")]
    EmptyDraft,
    #[error("candidate aborted after {rounds} verification rounds")]
    Aborted { rounds: usize },
    #[error("accepted candidate fails the step-isomorphism check at index {index}")]
    IsoAfterAccept { index: usize },
    #[error("invalid soundness parameters: {0}")]
    BadParams(String),
}

/// Does a value satisfy a guard?
pub fn guard_admits(guard: &Guard, value: &Value) -> bool {
    match guard {
        Guard::Range { min, max, integer } => {
            let Some(x) = value.as_f64() else { return false };
            if *integer && x.fract() != 0.0 {
                return false;
            }
            *min <= x && x <= *max
        }
        Guard::Options(options) => options.contains(value),
    }
}

// ---------------------------------------------------------------------------
// Stage 1: slot discovery and core-step extraction
// ---------------------------------------------------------------------------

/// Ask the generator model for the mutable-slot dictionary of a record.
pub fn discover_slots(record: &ProblemRecord, client: &Client) -> Result<SlotDict, KernelError> {
    let user = modelio::render_text(
        prompts::SLOT_DISCOVERY_USER_TEMPLATE,
        &[("question", record.question.as_str()), ("solution", record.solution.as_str())],
    )?;
    let key = ExchangeKey::new(record.index.clone(), "kernel", "slot-discovery");
    let map = client.structured(&key, prompts::SLOT_DISCOVERY_SYSTEM_PROMPT, &user, SchemaId::SlotDiscovery)?;
    let slots_value = map.get("mutable_slots").and_then(Value::as_object).expect("schema");
    let mut slots = SlotDict::new();
    for (id, slot_value) in slots_value {
        let obj = slot_value.as_object().expect("schema");
        let guard = obj.get("guard").and_then(|g| serde_json::from_value(g.clone()).ok());
        slots.insert(
            id.clone(),
            Slot {
                description: obj["description"].as_str().expect("schema").to_string(),
                original: obj["original"].clone(),
                resampled: None,
                guard,
            },
        );
    }
    if slots.is_empty() {
        return Err(KernelError::NoKernelVariant);
    }
    Ok(slots)
}

/// Ask the generator model for the ordered core steps of the solution.
pub fn extract_core_steps(
    record: &ProblemRecord,
    client: &Client,
) -> Result<Vec<String>, KernelError> {
    let user = modelio::render_text(
        prompts::CORE_STEPS_USER_TEMPLATE,
        &[("question", record.question.as_str()), ("solution", record.solution.as_str())],
    )?;
    let key = ExchangeKey::new(record.index.clone(), "kernel", "core-steps");
    let map = client.structured(&key, prompts::CORE_STEPS_SYSTEM_PROMPT, &user, SchemaId::CoreSteps)?;
    Ok(map["core_steps"]
        .as_array()
        .expect("schema")
        .iter()
        .map(|v| v.as_str().expect("schema").to_string())
        .collect())
}

// ---------------------------------------------------------------------------
// Stage 2: resampling
// ---------------------------------------------------------------------------

/// Why a slot was passed through unchanged.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlotFlag {
    /// No guard: verifier-only screening.
    GuardUnavailable { slot: String },
    /// Guard admits no value other than the original.
    DegenerateGuard { slot: String },
    /// Draws kept returning the original value.
    UnchangedAfterResample { slot: String },
}

const RESAMPLE_ATTEMPTS: u32 = 20;

fn draw_from_guard<R: Rng + ?Sized>(guard: &Guard, original: &Value, rng: &mut R) -> Option<Value> {
    for _ in 0..RESAMPLE_ATTEMPTS {
        let drawn = match guard {
            Guard::Options(options) => {
                if options.is_empty() {
                    return None;
                }
                options[rng.gen_range(0..options.len())].clone()
            }
            Guard::Range { min, max, integer: true } => {
                let lo = min.ceil() as i64;
                let hi = max.floor() as i64;
                if hi <= lo {
                    return None;
                }
                Value::from(rng.gen_range(lo..=hi))
            }
            Guard::Range { min, max, integer: false } => {
                if !(max > min) {
                    return None;
                }
                Value::from(rng.gen_range(*min..*max))
            }
        };
        if &drawn != original {
            return Some(drawn);
        }
    }
    None
}

fn guard_is_single_point(guard: &Guard, original: &Value) -> bool {
    match guard {
        Guard::Options(options) => options.iter().all(|o| o == original),
        Guard::Range { min, max, integer: true } => max.floor() <= min.ceil(),
        Guard::Range { min, max, integer: false } => !(max > min),
    }
}

/// Resample every guarded slot uniformly within its guard, excluding the
/// original value. Slots without usable guards pass through flagged; it is
/// an error when guards existed but no slot ended up changed.
pub fn resample_slots<R: Rng + ?Sized>(
    slots: &SlotDict,
    rng: &mut R,
) -> Result<(SlotDict, Vec<SlotFlag>), KernelError> {
    let mut out = slots.clone();
    let mut flags = Vec::new();
    let mut any_changed = false;
    let mut any_usable = false;
    for (id, slot) in out.iter_mut() {
        let Some(guard) = &slot.guard else {
            flags.push(SlotFlag::GuardUnavailable { slot: id.clone() });
            continue;
        };
        if guard_is_single_point(guard, &slot.original) {
            flags.push(SlotFlag::DegenerateGuard { slot: id.clone() });
            continue;
        }
        any_usable = true;
        match draw_from_guard(guard, &slot.original, rng) {
            Some(value) => {
                slot.resampled = Some(value);
                any_changed = true;
            }
            None => flags.push(SlotFlag::UnchangedAfterResample { slot: id.clone() }),
        }
    }
    if any_usable && !any_changed {
        return Err(KernelError::AllUnchanged { attempts: RESAMPLE_ATTEMPTS });
    }
    Ok((out, flags))
}

// ---------------------------------------------------------------------------
// Stage 2b/3: back-synthesis and question reverse-engineering
// ---------------------------------------------------------------------------

/// Regenerated solution plus the statement draft.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelDraft {
    pub solution: String,
    pub statement_draft: String,
}

fn render_slots(slots: &SlotDict) -> String {
    serde_json::to_string_pretty(slots).expect("slots serialize")
}

fn render_steps(steps: &[String]) -> String {
    steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("{}. {s}", i + 1))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Regenerate a proof that reuses the core steps in order, with the
/// resampled constants filled in. A draft whose proof breaks the step
/// order is an error that the caller routes into the patch loop.
pub fn back_synthesize(
    record: &ProblemRecord,
    slots: &SlotDict,
    core_steps: &[String],
    client: &Client,
) -> Result<KernelDraft, KernelError> {
    let slots_text = render_slots(slots);
    let steps_text = render_steps(core_steps);
    let user = modelio::render_text(
        prompts::BACK_SYNTHESIS_USER_TEMPLATE,
        &[
            ("question", record.question.as_str()),
            ("solution", record.solution.as_str()),
            ("core_steps", steps_text.as_str()),
            ("slots", slots_text.as_str()),
        ],
    )?;
    let key = ExchangeKey::new(record.index.clone(), "kernel", "back-synthesis");
    let map = client.structured(&key, prompts::BACK_SYNTHESIS_SYSTEM_PROMPT, &user, SchemaId::KernelDraft)?;
    let draft = KernelDraft {
        solution: map["solution"].as_str().expect("schema").to_string(),
        statement_draft: map["statement_draft"].as_str().unwrap_or_default().to_string(),
    };
    let check = step_isomorphism_check(core_steps, &draft.solution);
    if !check.matched {
        return Err(KernelError::StepMismatch {
            index: check.first_mismatch.unwrap_or(0),
            draft: Box::new(draft),
        });
    }
    Ok(draft)
}

/// Reverse-engineer the self-contained kernel question from an accepted
/// draft. Returns the question plus the ids of resampled slots whose values
/// never appear in the draft or question (inconsistency flags).
pub fn reverse_engineer_question(
    draft: &KernelDraft,
    slots: &SlotDict,
    record_index: &str,
    client: &Client,
) -> Result<(String, Vec<String>), KernelError> {
    if draft.solution.trim().is_empty() {
        return Err(KernelError::EmptyDraft);
    }
    let slots_text = render_slots(slots);
    let user = modelio::render_text(
        prompts::REVERSE_QUESTION_USER_TEMPLATE,
        &[("solution_draft", draft.solution.as_str()), ("slots", slots_text.as_str())],
    )?;
    let key = ExchangeKey::new(record_index.to_string(), "kernel", "reverse-question");
    let map = client.structured(&key, prompts::REVERSE_QUESTION_SYSTEM_PROMPT, &user, SchemaId::KernelQuestion)?;
    let question = map["question"].as_str().expect("schema").to_string();
    let missing = scan_value_presence(&question, &draft.solution, slots);
    Ok((question, missing))
}

/// Ids of resampled slots whose value string occurs in neither text.
pub fn scan_value_presence(question: &str, solution: &str, slots: &SlotDict) -> Vec<String> {
    let mut missing = Vec::new();
    for (id, slot) in slots {
        let Some(value) = &slot.resampled else { continue };
        let rendered = match value {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        if !question.contains(&rendered) && !solution.contains(&rendered) {
            missing.push(id.clone());
        }
    }
    missing
}

// ---------------------------------------------------------------------------
// Stage 4: repair-and-verify loop
// ---------------------------------------------------------------------------

/// Loop parameters: at most `max_rounds` (T) rounds of `judges` (J) votes,
/// accepted after `streak` (K) consecutive all-accept rounds.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LoopParams {
    pub max_rounds: usize,
    pub streak: usize,
    pub judges: usize,
}

impl Default for LoopParams {
    fn default() -> Self {
        LoopParams { max_rounds: 15, streak: 2, judges: 5 }
    }
}

/// A kernel-variant candidate moving through the loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelCandidate {
    pub question: String,
    pub solution: String,
    pub slots: SlotDict,
    pub core_steps: Vec<String>,
}

impl KernelCandidate {
    /// Emit the bundle-shape kernel variant.
    pub fn into_variant(self) -> KernelVariant {
        KernelVariant {
            question: self.question,
            solution: self.solution,
            meta: KernelMeta { core_steps: self.core_steps, mutable_slots: self.slots },
        }
    }
}

#[derive(Clone, Debug)]
pub struct JudgeVote {
    pub accept: bool,
    pub feedback: String,
}

/// One round of J judge votes.
pub trait JudgePanel {
    fn judge_count(&self) -> usize;
    fn round(
        &mut self,
        candidate: &KernelCandidate,
        round: usize,
    ) -> Vec<Result<JudgeVote, ModelError>>;
}

/// Applies a model-suggested patch built from the failing feedback.
pub trait Patcher {
    fn patch(
        &mut self,
        candidate: &KernelCandidate,
        feedback: &[String],
    ) -> Result<KernelCandidate, ModelError>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundAction {
    AcceptStreak,
    Keep,
    Patch,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IterationRecord {
    pub round: usize,
    pub votes: Vec<bool>,
    pub action: RoundAction,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoopOutcome {
    Accepted,
    Aborted,
}

/// The vote history of one candidate through the loop.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationTrace {
    pub params: LoopParams,
    pub iterations: Vec<IterationRecord>,
    pub outcome: LoopOutcome,
}

/// Run the repair-and-verify loop. A round is clean when every judge
/// returns accept; a judge failure marks its round failed and consumes the
/// iteration. Any non-clean round resets the streak and applies a patch.
pub fn verify_loop(
    candidate: KernelCandidate,
    panel: &mut dyn JudgePanel,
    patcher: &mut dyn Patcher,
    params: &LoopParams,
) -> (LoopOutcome, KernelCandidate, VerificationTrace) {
    let mut current = candidate;
    let mut trace = VerificationTrace {
        params: *params,
        iterations: Vec::new(),
        outcome: LoopOutcome::Aborted,
    };
    let mut streak = 0usize;
    for round in 1..=params.max_rounds {
        let results = panel.round(&current, round);
        let mut votes = Vec::with_capacity(results.len());
        let mut feedback = Vec::new();
        let mut failed = results.len() != params.judges;
        for result in results {
            match result {
                Ok(vote) => {
                    if !vote.accept {
                        feedback.push(vote.feedback.clone());
                    }
                    votes.push(vote.accept);
                }
                Err(err) => {
                    feedback.push(format!("judge backend failure: {err}"));
                    votes.push(false);
                    failed = true;
                }
            }
        }
        let clean = !failed && votes.iter().all(|v| *v);
        if clean {
            streak += 1;
            if streak >= params.streak {
                trace.iterations.push(IterationRecord { round, votes, action: RoundAction::AcceptStreak });
                trace.outcome = LoopOutcome::Accepted;
                return (LoopOutcome::Accepted, current, trace);
            }
            trace.iterations.push(IterationRecord { round, votes, action: RoundAction::Keep });
        } else {
            streak = 0;
            if let Ok(patched) = patcher.patch(&current, &feedback) {
                current = patched;
            }
            trace.iterations.push(IterationRecord { round, votes, action: RoundAction::Patch });
        }
    }
    (LoopOutcome::Aborted, current, trace)
}

/// Soundness bound of the two-in-a-row rule: the probability that a flawed
/// candidate survives is at most `(T-K+1) eps^(K J)`.
pub fn soundness_bound(
    max_rounds: usize,
    streak: usize,
    judges: usize,
    eps: f64,
) -> Result<f64, KernelError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(KernelError::BadParams(format!("eps {eps} outside (0,1)")));
    }
    if streak == 0 || judges == 0 || max_rounds < streak {
        return Err(KernelError::BadParams(format!(
            "need T >= K >= 1 and J >= 1, got T={max_rounds}, K={streak}, J={judges}"
        )));
    }
    let windows = (max_rounds - streak + 1) as f64;
    Ok(windows * eps.powi((streak * judges) as i32))
}

/// Deterministic audit sample of accepted items (default fraction 0.1).
pub fn audit_sample(accepted: &[String], fraction: f64, seed: u64) -> Vec<String> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    if accepted.is_empty() || fraction <= 0.0 {
        return Vec::new();
    }
    let take = ((accepted.len() as f64 * fraction).ceil() as usize).min(accepted.len());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut shuffled: Vec<String> = accepted.to_vec();
    shuffled.shuffle(&mut rng);
    let mut sample: Vec<String> = shuffled.into_iter().take(take).collect();
    sample.sort();
    sample
}

// ---------------------------------------------------------------------------
// Step isomorphism
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IsoCheck {
    pub matched: bool,
    pub first_mismatch: Option<usize>,
}

const STOPWORDS: &[&str] = &[
    "a", "about", "all", "alone", "also", "an", "and", "any", "are", "as", "at", "be",
    "between", "both", "by", "can", "each", "every", "for", "from", "get", "given",
    "has", "have", "here", "how", "if", "in", "into", "is", "it", "its", "let", "may",
    "must", "no", "not", "of", "on", "one", "only", "or", "over", "per", "same", "set",
    "shall", "should", "so", "some", "than", "that", "the", "then", "there", "this",
    "thus", "to", "two", "under", "use", "using", "via", "we", "what", "when", "where",
    "which", "will", "with", "would",
];

fn normalize_match_text(text: &str) -> String {
    text.to_ascii_lowercase().replace('-', " ")
}

fn words_with_positions(text: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphanumeric() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            out.push((start, &text[start..i]));
        } else {
            i += 1;
        }
    }
    out
}

fn stem(word: &str) -> &str {
    &word[..word.len().min(6)]
}

struct StepMatcher {
    /// Stems of content words unique to this step among all steps.
    distinctive: Vec<String>,
    /// Single-character identifiers/digits from the description.
    fallback: Vec<String>,
}

fn derive_matchers(core_steps: &[String]) -> Vec<StepMatcher> {
    let normalized: Vec<String> = core_steps.iter().map(|s| normalize_match_text(s)).collect();
    let step_words: Vec<Vec<&str>> = normalized
        .iter()
        .map(|text| words_with_positions(text).into_iter().map(|(_, w)| w).collect())
        .collect();
    let mut matchers = Vec::with_capacity(core_steps.len());
    for (idx, words) in step_words.iter().enumerate() {
        let mut distinctive = Vec::new();
        let mut fallback = Vec::new();
        for word in words {
            if word.len() == 1 {
                if !fallback.iter().any(|f| f == word) {
                    fallback.push(word.to_string());
                }
                continue;
            }
            if word.len() < 4 || STOPWORDS.contains(word) {
                continue;
            }
            let s = stem(word);
            let shared = step_words
                .iter()
                .enumerate()
                .any(|(other, other_words)| {
                    other != idx && other_words.iter().any(|w| w.len() >= 4 && stem(w) == s)
                });
            if !shared && !distinctive.iter().any(|d| d == s) {
                distinctive.push(s.to_string());
            }
        }
        matchers.push(StepMatcher { distinctive, fallback });
    }
    matchers
}

fn find_match(
    matcher: &StepMatcher,
    proof_words: &[(usize, &str)],
    from: usize,
) -> Option<usize> {
    let tier1 = proof_words
        .iter()
        .filter(|(pos, word)| *pos >= from && matcher.distinctive.iter().any(|s| word.starts_with(s.as_str())))
        .map(|(pos, _)| *pos)
        .next();
    if tier1.is_some() {
        return tier1;
    }
    proof_words
        .iter()
        .filter(|(pos, word)| *pos >= from && matcher.fallback.iter().any(|f| f == word))
        .map(|(pos, _)| *pos)
        .next()
}

/// Check that each core step's derived matcher occurs in the proof, in
/// order. Matching is greedy: step i+1 must occur after step i's match.
/// On failure the reported index comes from an independent first-occurrence
/// scan: an absent step reports its own index, an order inversion reports
/// the earlier index of the inverted pair.
pub fn step_isomorphism_check(core_steps: &[String], proof: &str) -> IsoCheck {
    if core_steps.is_empty() {
        return IsoCheck { matched: true, first_mismatch: None };
    }
    let normalized = normalize_match_text(proof);
    let proof_words = words_with_positions(&normalized);
    let matchers = derive_matchers(core_steps);

    let mut cursor = 0usize;
    let mut greedy_failed_at = None;
    for (idx, matcher) in matchers.iter().enumerate() {
        match find_match(matcher, &proof_words, cursor) {
            Some(pos) => cursor = pos + 1,
            None => {
                greedy_failed_at = Some(idx);
                break;
            }
        }
    }
    if greedy_failed_at.is_none() {
        return IsoCheck { matched: true, first_mismatch: None };
    }

    // diagnostic pass: independent first occurrences
    let independent: Vec<Option<usize>> =
        matchers.iter().map(|m| find_match(m, &proof_words, 0)).collect();
    for (idx, pos) in independent.iter().enumerate() {
        if pos.is_none() {
            return IsoCheck { matched: false, first_mismatch: Some(idx) };
        }
    }
    for idx in 0..independent.len() - 1 {
        if independent[idx] >= independent[idx + 1] {
            return IsoCheck { matched: false, first_mismatch: Some(idx) };
        }
    }
    IsoCheck { matched: false, first_mismatch: greedy_failed_at }
}

// ---------------------------------------------------------------------------
// Model-backed panel and patcher
// ---------------------------------------------------------------------------

/// Judge panel of J calls against one backend, each with its own sampling
/// seed. Calls within a round run concurrently.
pub struct ModelJudgePanel {
    clients: Vec<Client>,
    record_index: String,
}

impl ModelJudgePanel {
    /// Judges get seeds `base_seed + j` to approximate independence.
    pub fn new(client: &Client, judges: usize, record_index: &str, base_seed: u64) -> Self {
        let clients = (0..judges)
            .map(|j| client.clone().with_seed(base_seed + j as u64))
            .collect();
        ModelJudgePanel { clients, record_index: record_index.to_string() }
    }
}

impl JudgePanel for ModelJudgePanel {
    fn judge_count(&self) -> usize {
        self.clients.len()
    }

    fn round(
        &mut self,
        candidate: &KernelCandidate,
        round: usize,
    ) -> Vec<Result<JudgeVote, ModelError>> {
        use rayon::prelude::*;
        let user = match modelio::render_text(
            prompts::JUDGE_USER_TEMPLATE,
            &[("question", candidate.question.as_str()), ("solution", candidate.solution.as_str())],
        ) {
            Ok(user) => user,
            Err(err) => return vec![Err(err)],
        };
        self.clients
            .par_iter()
            .enumerate()
            .map(|(j, client)| {
                let key = ExchangeKey::new(
                    self.record_index.clone(),
                    "kernel",
                    format!("judge{j}-round{round}"),
                );
                let map =
                    client.structured(&key, prompts::JUDGE_SYSTEM_PROMPT, &user, SchemaId::JudgeVote)?;
                Ok(JudgeVote {
                    accept: map["verdict"] == "accept",
                    feedback: map
                        .get("feedback")
                        .and_then(Value::as_str)
                        .unwrap_or_default()
                        .to_string(),
                })
            })
            .collect()
    }
}

/// Patcher that hands the failing feedback verbatim to the model.
pub struct ModelPatcher {
    client: Client,
    record_index: String,
    patches: usize,
}

impl ModelPatcher {
    pub fn new(client: Client, record_index: &str) -> Self {
        ModelPatcher { client, record_index: record_index.to_string(), patches: 0 }
    }
}

impl Patcher for ModelPatcher {
    fn patch(
        &mut self,
        candidate: &KernelCandidate,
        feedback: &[String],
    ) -> Result<KernelCandidate, ModelError> {
        self.patches += 1;
        let feedback_text = feedback.join("\n");
        let user = modelio::render_text(
            prompts::PATCH_USER_TEMPLATE,
            &[
                ("question", candidate.question.as_str()),
                ("solution", candidate.solution.as_str()),
                ("feedback", feedback_text.as_str()),
            ],
        )?;
        let key = ExchangeKey::new(
            self.record_index.clone(),
            "kernel",
            format!("patch{}", self.patches),
        );
        let map = self.client.structured(
            &key,
            prompts::PATCH_SYSTEM_PROMPT,
            &user,
            SchemaId::PatchedCandidate,
        )?;
        Ok(KernelCandidate {
            question: map["question"].as_str().expect("schema").to_string(),
            solution: map["solution"].as_str().expect("schema").to_string(),
            slots: candidate.slots.clone(),
            core_steps: candidate.core_steps.clone(),
        })
    }
}

/// Scripted panel for tests and offline runs: one vote vector per round.
pub struct ScriptedPanel {
    pub rounds: Vec<Vec<bool>>,
    pub judges: usize,
}

impl ScriptedPanel {
    pub fn new(judges: usize, rounds: Vec<Vec<bool>>) -> Self {
        ScriptedPanel { rounds, judges }
    }

    pub fn always_accept(judges: usize) -> Self {
        ScriptedPanel { rounds: Vec::new(), judges }
    }
}

impl JudgePanel for ScriptedPanel {
    fn judge_count(&self) -> usize {
        self.judges
    }

    fn round(
        &mut self,
        _candidate: &KernelCandidate,
        round: usize,
    ) -> Vec<Result<JudgeVote, ModelError>> {
        let votes = self
            .rounds
            .get(round - 1)
            .cloned()
            .unwrap_or_else(|| vec![true; self.judges]);
        votes
            .into_iter()
            .map(|accept| {
                Ok(JudgeVote {
                    accept,
                    feedback: if accept { String::new() } else { "scripted reject".into() },
                })
            })
            .collect()
    }
}

/// Patcher that leaves the candidate unchanged.
pub struct NoopPatcher;

impl Patcher for NoopPatcher {
    fn patch(
        &mut self,
        candidate: &KernelCandidate,
        _feedback: &[String],
    ) -> Result<KernelCandidate, ModelError> {
        Ok(candidate.clone())
    }
}

/// The full four-stage kernel pipeline for one record.
pub fn generate_kernel_variant<R: Rng + ?Sized>(
    record: &ProblemRecord,
    generator: &Client,
    panel: &mut dyn JudgePanel,
    patcher: &mut dyn Patcher,
    rng: &mut R,
    params: &LoopParams,
) -> Result<(KernelVariant, VerificationTrace, Vec<SlotFlag>), KernelError> {
    let slots = discover_slots(record, generator)?;
    let core_steps = extract_core_steps(record, generator)?;
    let (resampled, flags) = resample_slots(&slots, rng)?;
    let draft = match back_synthesize(record, &resampled, &core_steps, generator) {
        Ok(draft) => draft,
        // a step mismatch routes into the patch loop rather than failing
        Err(KernelError::StepMismatch { draft, .. }) => *draft,
        Err(other) => return Err(other),
    };
    let (question, _missing) =
        reverse_engineer_question(&draft, &resampled, &record.index, generator)?;
    let candidate = KernelCandidate {
        question,
        solution: draft.solution,
        slots: resampled,
        core_steps: core_steps.clone(),
    };
    let (outcome, accepted, trace) = verify_loop(candidate, panel, patcher, params);
    if outcome == LoopOutcome::Aborted {
        return Err(KernelError::Aborted { rounds: trace.iterations.len() });
    }
    let check = step_isomorphism_check(&core_steps, &accepted.solution);
    if !check.matched {
        return Err(KernelError::IsoAfterAccept { index: check.first_mismatch.unwrap_or(0) });
    }
    Ok((accepted.into_variant(), trace, flags))
}
