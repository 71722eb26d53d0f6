//! Batch orchestration behind the CLI: variant generation, matrix
//! evaluation, and report emission, plus the offline mock backends.
//!
//! Orchestration is single-threaded; per-record and per-cell work fans out
//! through a bounded worker pool and is collected back in input order, so
//! the same manifest and journal always produce a byte-identical bundle.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ProblemRecord, ProblemType, VariantBundle};
use crate::evalmatrix::{
    self, CorrectnessMatrix, Column, MatrixError, VerdictEntry,
};
use crate::grading::{self, classify_error};
use crate::kernelgen::{
    self, KernelError, LoopParams, ModelJudgePanel, ModelPatcher, VerificationTrace,
};
use crate::metrics::RobustnessConfig;
use crate::modelio::{
    Backend, BackendError, Client, CompletionRequest, ExchangeKey, ModelConfig, ModelError,
    RuleBackend, SchemaId,
};
use crate::report::{self, ReportBundle};
use crate::surfacegen::{self, RenameFamily};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Report(#[from] report::ReportError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unknown backend spec {0:?}")]
    BadBackendSpec(String),
    #[error("unknown variant selector {0:?}")]
    BadVariantSelector(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Everything needed to replay a run, given the exchange journal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub corpus: PathBuf,
    pub solver: String,
    pub grader: String,
    pub judge: String,
    pub columns: Vec<Column>,
    pub robustness: RobustnessConfig,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<(), PipelineError> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text)
            .map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| PipelineError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| PipelineError::BadBackendSpec(e.to_string()))
    }
}

/// Which variants a command operates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariantSelector {
    Surface(RenameFamily),
    Kernel,
}

impl VariantSelector {
    pub const ALL: [VariantSelector; 5] = [
        VariantSelector::Surface(RenameFamily::DescriptiveLong),
        VariantSelector::Surface(RenameFamily::DescriptiveLongConfusing),
        VariantSelector::Surface(RenameFamily::DescriptiveLongMisleading),
        VariantSelector::Surface(RenameFamily::GarbledString),
        VariantSelector::Kernel,
    ];

    pub fn parse_list(spec: &str) -> Result<Vec<VariantSelector>, PipelineError> {
        if spec == "all" {
            return Ok(Self::ALL.to_vec());
        }
        spec.split(',')
            .map(|part| match part.trim() {
                "DL" => Ok(VariantSelector::Surface(RenameFamily::DescriptiveLong)),
                "DLC" => Ok(VariantSelector::Surface(RenameFamily::DescriptiveLongConfusing)),
                "DLM" => Ok(VariantSelector::Surface(RenameFamily::DescriptiveLongMisleading)),
                "GS" => Ok(VariantSelector::Surface(RenameFamily::GarbledString)),
                "KV" => Ok(VariantSelector::Kernel),
                other => Err(PipelineError::BadVariantSelector(other.to_string())),
            })
            .collect()
    }

    pub fn column(self) -> Column {
        match self {
            VariantSelector::Surface(RenameFamily::DescriptiveLong) => Column::Dl,
            VariantSelector::Surface(RenameFamily::DescriptiveLongConfusing) => Column::Dlc,
            VariantSelector::Surface(RenameFamily::DescriptiveLongMisleading) => Column::Dlm,
            VariantSelector::Surface(RenameFamily::GarbledString) => Column::Gs,
            VariantSelector::Kernel => Column::Kv,
        }
    }
}

fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.bytes() {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
pub struct GenerateOutcome {
    pub records: Vec<ProblemRecord>,
    /// (record index, what failed) for unrecoverable per-record failures.
    pub failures: Vec<(String, String)>,
    /// Records with no mutable slots, marked and carried through.
    pub no_kernel: Vec<String>,
    pub traces: Vec<(String, VerificationTrace)>,
    /// Deterministic 10% audit sample of accepted kernel variants.
    pub audit_sample: Vec<String>,
}

/// Audit fraction for accepted kernel variants.
pub const AUDIT_FRACTION: f64 = 0.1;

/// Generate the requested variant families for every record. Records are
/// processed by a worker pool and re-assembled in input order; per-record
/// failures are collected, not fatal.
pub fn cmd_generate(
    records: &[ProblemRecord],
    families: &[VariantSelector],
    generator: &Client,
    judge: &Client,
    loop_params: &LoopParams,
    seed: u64,
) -> GenerateOutcome {
    struct PerRecord {
        record: ProblemRecord,
        failures: Vec<(String, String)>,
        no_kernel: bool,
        trace: Option<VerificationTrace>,
    }

    let results: Vec<PerRecord> = records
        .par_iter()
        .map(|record| {
            let mut out = PerRecord {
                record: record.clone(),
                failures: Vec::new(),
                no_kernel: false,
                trace: None,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(&record.index));
            for family in families {
                match family {
                    VariantSelector::Surface(family) => {
                        let map_result = if *family == RenameFamily::GarbledString {
                            surfacegen::generate_garbled_map(record, &mut rng)
                        } else {
                            surfacegen::propose_names(record, *family, generator)
                        };
                        match map_result {
                            Ok(map) => {
                                let variant = surfacegen::generate_surface_variant(record, &map);
                                let bundle =
                                    out.record.variants.get_or_insert_with(VariantBundle::default);
                                *bundle.surface_mut(*family) = Some(variant);
                            }
                            Err(err) => out
                                .failures
                                .push((record.index.clone(), format!("{}: {err}", family.label()))),
                        }
                    }
                    VariantSelector::Kernel => {
                        let mut panel = ModelJudgePanel::new(
                            judge,
                            loop_params.judges,
                            &record.index,
                            seed,
                        );
                        let mut patcher = ModelPatcher::new(judge.clone(), &record.index);
                        match kernelgen::generate_kernel_variant(
                            record,
                            generator,
                            &mut panel,
                            &mut patcher,
                            &mut rng,
                            loop_params,
                        ) {
                            Ok((variant, trace, _flags)) => {
                                let bundle =
                                    out.record.variants.get_or_insert_with(VariantBundle::default);
                                bundle.kernel_variant = Some(variant);
                                out.trace = Some(trace);
                            }
                            Err(KernelError::NoKernelVariant) => out.no_kernel = true,
                            Err(err) => {
                                out.failures.push((record.index.clone(), format!("KV: {err}")))
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();

    let mut outcome = GenerateOutcome::default();
    let mut accepted_kernels = Vec::new();
    for per_record in results {
        if per_record.no_kernel {
            outcome.no_kernel.push(per_record.record.index.clone());
        }
        if let Some(trace) = per_record.trace {
            accepted_kernels.push(per_record.record.index.clone());
            outcome.traces.push((per_record.record.index.clone(), trace));
        }
        outcome.failures.extend(per_record.failures);
        outcome.records.push(per_record.record);
    }
    outcome.audit_sample = kernelgen::audit_sample(&accepted_kernels, AUDIT_FRACTION, seed);
    outcome
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct EvaluateOutcome {
    pub matrix: CorrectnessMatrix,
    pub verdicts: Vec<VerdictEntry>,
    /// (item, column, error) for cells that could not be graded.
    pub failures: Vec<(String, &'static str, String)>,
}

fn cell_texts(record: &ProblemRecord, column: Column) -> Option<(&str, &str)> {
    match column {
        Column::Original => Some((record.question.as_str(), record.solution.as_str())),
        Column::Kv => {
            let kernel = record.variants.as_ref()?.kernel_variant.as_ref()?;
            Some((kernel.question.as_str(), kernel.solution.as_str()))
        }
        other => {
            let family = other.surface_family().expect("surface column");
            let variant = record.variants.as_ref()?.surface(family)?;
            Some((variant.question.as_str(), variant.solution.as_str()))
        }
    }
}

fn grade_cell(
    record: &ProblemRecord,
    column: Column,
    question: &str,
    reference: &str,
    solver: &Client,
    grader: &Client,
) -> Result<VerdictEntry, String> {
    let solver_key = ExchangeKey::new(record.index.clone(), column.name(), "solver");
    let user = crate::modelio::render_text(
        crate::modelio::prompts::SOLVER_USER_TEMPLATE,
        &[("problem_statement", question)],
    )
    .map_err(|e| e.to_string())?;
    let answer = solver
        .structured(
            &solver_key,
            crate::modelio::prompts::SOLVER_SYSTEM_PROMPT,
            &user,
            SchemaId::SolverAnswer,
        )
        .map_err(|e| e.to_string())?;
    let solution = answer["solution"].as_str().unwrap_or_default().to_string();
    let final_answer = answer["final_answer"].as_str().unwrap_or_default().to_string();

    let grader_key = ExchangeKey::new(record.index.clone(), column.name(), "grader");
    match record.problem_type {
        ProblemType::Proof => {
            let verdict =
                grading::proof_grade(&grader_key, question, &solution, reference, grader)
                    .map_err(|e| e.to_string())?;
            let taxonomy = (!verdict.grade.is_correct())
                .then(|| classify_error(&verdict.detailed_feedback));
            Ok(VerdictEntry {
                item: record.index.clone(),
                column,
                grade: verdict.grade.is_correct(),
                feedback: Some(verdict.detailed_feedback),
                taxonomy,
                rigor: Some(verdict.reasoning_rigor_score),
                audit_flag: verdict.audit_flag,
            })
        }
        ProblemType::Calculation => {
            let strict = grading::strict_match(&final_answer, reference);
            let verdict =
                grading::latent_verdict(&grader_key, question, &solution, reference, grader)
                    .map_err(|e| e.to_string())?;
            let (grade, audit_flag) = grading::adjudicate_computation(strict, verdict.grade);
            let taxonomy =
                (!grade.is_correct()).then(|| classify_error(&verdict.detailed_feedback));
            Ok(VerdictEntry {
                item: record.index.clone(),
                column,
                grade: grade.is_correct(),
                feedback: Some(verdict.detailed_feedback),
                taxonomy,
                rigor: Some(verdict.reasoning_rigor_score),
                audit_flag,
            })
        }
    }
}

/// Query the solver once per (item, column), grade by problem type, and
/// freeze the matrix. Already-journaled exchanges replay instead of
/// re-querying, which makes interrupted runs resumable.
pub fn cmd_evaluate(
    records: &[ProblemRecord],
    columns: &[Column],
    solver: &Client,
    grader: &Client,
) -> Result<EvaluateOutcome, PipelineError> {
    let tasks: Vec<(&ProblemRecord, Column, &str, &str)> = records
        .iter()
        .flat_map(|record| {
            columns.iter().filter_map(move |col| {
                cell_texts(record, *col).map(|(q, s)| (record, *col, q, s))
            })
        })
        .collect();

    let graded: Vec<Result<VerdictEntry, (String, &'static str, String)>> = tasks
        .par_iter()
        .map(|(record, column, question, reference)| {
            grade_cell(record, *column, question, reference, solver, grader)
                .map_err(|e| (record.index.clone(), column.name(), e))
        })
        .collect();

    let mut verdicts = Vec::new();
    let mut failures = Vec::new();
    for result in graded {
        match result {
            Ok(entry) => verdicts.push(entry),
            Err(failure) => failures.push(failure),
        }
    }
    let matrix = evalmatrix::matrix_from_verdicts(&verdicts)?;
    Ok(EvaluateOutcome { matrix, verdicts, failures })
}

/// Build and write the report bundle for a frozen matrix.
pub fn cmd_report(
    matrix: &CorrectnessMatrix,
    verdicts: Option<&[VerdictEntry]>,
    config: &RobustnessConfig,
    out_dir: &Path,
) -> Result<(ReportBundle, Vec<PathBuf>), PipelineError> {
    let bundle = report::build_report(matrix, verdicts, config)?;
    let written = bundle.write(out_dir)?;
    Ok((bundle, written))
}

// ---------------------------------------------------------------------------
// Backend specs and offline mocks
// ---------------------------------------------------------------------------

/// Build a backend from a CLI spec.
///
/// - `openai:<model>` — api.openai.com, key in `OPENAI_API_KEY`
/// - `openrouter:<model>` — openrouter.ai, key in `OPENROUTER_API_KEY`
/// - `local:<base-url>#<model>` — OpenAI-compatible local server, no key
/// - `mock:oracle` / `mock:empty` / `mock:exact` / `mock:kernel` — offline
///   deterministic backends for dry runs and tests
pub fn build_backend(
    spec: &str,
    records: &[ProblemRecord],
) -> Result<(Arc<dyn Backend>, ModelConfig), PipelineError> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| PipelineError::BadBackendSpec(spec.to_string()))?;
    match kind {
        "openai" => Ok((
            Arc::new(crate::modelio::HttpChatBackend::new(
                format!("openai/{rest}"),
                "https://api.openai.com/v1",
                Some("OPENAI_API_KEY".into()),
            )),
            ModelConfig::new(rest),
        )),
        "openrouter" => Ok((
            Arc::new(crate::modelio::HttpChatBackend::new(
                format!("openrouter/{rest}"),
                "https://openrouter.ai/api/v1",
                Some("OPENROUTER_API_KEY".into()),
            )),
            ModelConfig::new(rest),
        )),
        "local" => {
            let (base, model) = rest
                .split_once('#')
                .ok_or_else(|| PipelineError::BadBackendSpec(spec.to_string()))?;
            Ok((
                Arc::new(crate::modelio::HttpChatBackend::new(
                    format!("local/{model}"),
                    base,
                    None,
                )),
                ModelConfig::new(model),
            ))
        }
        "mock" => {
            let backend: Arc<dyn Backend> = match rest {
                "oracle" => Arc::new(oracle_solver_backend(records)),
                "empty" => Arc::new(empty_solver_backend()),
                "exact" => Arc::new(exact_match_grader_backend()),
                "kernel" => Arc::new(mock_generation_backend()),
                "fail" => Arc::new(RuleBackend::new("mock/fail", |_| {
                    Err(BackendError::Auth("mock:fail always refuses".into()))
                })),
                other => return Err(PipelineError::BadBackendSpec(format!("mock:{other}"))),
            };
            Ok((backend, ModelConfig::new(format!("mock-{rest}"))))
        }
        _ => Err(PipelineError::BadBackendSpec(spec.to_string())),
    }
}

fn section<'a>(text: &'a str, start: &str, end: Option<&str>) -> Option<&'a str> {
    let from = text.find(start)? + start.len();
    match end {
        Some(end) => text[from..].find(end).map(|to| &text[from..from + to]),
        None => Some(&text[from..]),
    }
}

fn json_string(value: &str) -> String {
    serde_json::to_string(value).expect("string serializes")
}

/// Solver mock that answers every known problem statement with its
/// reference solution, verbatim.
pub fn oracle_solver_backend(records: &[ProblemRecord]) -> RuleBackend {
    // first insertion wins: when a surface variant keeps the question text
    // identical to the original, the oracle answers it the way a verbatim
    // solver would answer the original prompt
    let mut answers: HashMap<String, String> = HashMap::new();
    for record in records {
        answers.entry(record.question.clone()).or_insert_with(|| record.solution.clone());
        if let Some(bundle) = &record.variants {
            for family in RenameFamily::ALL {
                if let Some(variant) = bundle.surface(family) {
                    answers
                        .entry(variant.question.clone())
                        .or_insert_with(|| variant.solution.clone());
                }
            }
            if let Some(kernel) = &bundle.kernel_variant {
                answers
                    .entry(kernel.question.clone())
                    .or_insert_with(|| kernel.solution.clone());
            }
        }
    }
    RuleBackend::new("mock/oracle", move |request: &CompletionRequest| {
        let problem = section(
            &request.user,
            "Please solve this mathematical problem:\n\n",
            Some("\n\nProvide a complete solution"),
        )
        .unwrap_or_default();
        let solution = answers.get(problem).cloned().unwrap_or_default();
        Ok(format!(
            "{{\"solution\": {}, \"final_answer\": {}}}",
            json_string(&solution),
            json_string(&solution)
        ))
    })
}

/// Solver mock that answers nothing.
pub fn empty_solver_backend() -> RuleBackend {
    RuleBackend::new("mock/empty", |_request| {
        Ok("{\"solution\": \"\", \"final_answer\": \"\"}".to_string())
    })
}

/// Grader mock: extracts the student and reference sections from the real
/// grader prompt and compares canonical forms.
pub fn exact_match_grader_backend() -> RuleBackend {
    RuleBackend::new("mock/exact", |request: &CompletionRequest| {
        let candidate = section(
            &request.user,
            "STUDENT SOLUTION:\n",
            Some("\n\nCORRECT REFERENCE SOLUTION:"),
        )
        .unwrap_or_default();
        let reference = section(
            &request.user,
            "CORRECT REFERENCE SOLUTION:\n",
            Some("\n\nEvaluate with maximum strictness"),
        )
        .or_else(|| {
            section(
                &request.user,
                "CORRECT REFERENCE SOLUTION:\n",
                Some("\n\nFocus primarily"),
            )
        })
        .unwrap_or_default();
        let correct = !candidate.trim().is_empty()
            && grading::normalize_answer(candidate) == grading::normalize_answer(reference);
        let (grade, feedback, rigor) = if correct {
            ("CORRECT", "matches the reference solution", 10)
        } else {
            ("INCORRECT", "does not follow from the stated premises", 1)
        };
        Ok(format!(
            "{{\"grade\": \"{grade}\", \"detailed_feedback\": \"{feedback}\", \
             \"major_issues\": [], \"final_answer_correct\": {correct}, \
             \"reasoning_rigor_score\": {rigor}, \"overall_assessment\": \"{feedback}\"}}"
        ))
    })
}

fn first_integer(text: &str) -> Option<(usize, &str)> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            // skip decimals; mutable slots are integer-valued in the mock
            if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                continue;
            }
            return Some((start, &text[start..i]));
        }
        i += 1;
    }
    None
}

fn replace_integer_token(text: &str, from: &str, to: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let token = &text[start..i];
            out.push_str(if token == from { to } else { token });
        } else {
            out.push(bytes[i] as char);
            i += 1;
        }
    }
    out
}

/// One offline backend covering every generation-side role: naming
/// proposals, slot discovery, core steps, back-synthesis, question
/// reverse-engineering, judge votes (always accept), and patches (echo).
pub fn mock_generation_backend() -> RuleBackend {
    RuleBackend::new("mock/kernel", |request: &CompletionRequest| {
        let user = request.user.as_str();
        if user.contains("Token to rename:") {
            let identifier = section(user, "Token to rename: ", Some("\n")).unwrap_or("x");
            let style = section(user, "Naming style: ", Some("\n")).unwrap_or_default();
            let sanitized: String =
                identifier.chars().filter(char::is_ascii_alphanumeric).collect();
            let name = if style.contains("misleading") {
                format!("primeorder{sanitized}")
            } else if style.contains("unrelated nouns") {
                format!("walnutterrace{sanitized}")
            } else {
                format!("renamedtoken{sanitized}")
            };
            return Ok(format!("{{\"replacement\": {}}}", json_string(&name)));
        }
        if user.contains("\"mutable_slots\"") {
            let question = section(user, "PROBLEM:\n", Some("\n\nREFERENCE SOLUTION:"))
                .unwrap_or_default();
            return Ok(match first_integer(question) {
                Some((_, digits)) => {
                    let n: i64 = digits.parse().unwrap_or(1);
                    format!(
                        "{{\"mutable_slots\": {{\"slot1\": {{\
                         \"description\": \"first numeric constant in the statement\", \
                         \"original\": {n}, \
                         \"guard\": {{\"min\": 1, \"max\": {}, \"integer\": true}}}}}}}}",
                        n + 3
                    )
                }
                None => "{\"mutable_slots\": {}}".to_string(),
            });
        }
        if user.contains("\"core_steps\"") {
            let solution = section(user, "REFERENCE SOLUTION:\n", Some("\n\nReturn your response"))
                .unwrap_or_default();
            let steps: Vec<String> = solution
                .split(". ")
                .filter(|s| !s.trim().is_empty())
                .take(3)
                .map(json_string)
                .collect();
            let steps = if steps.is_empty() { vec![json_string("restate the problem")] } else { steps };
            return Ok(format!("{{\"core_steps\": [{}]}}", steps.join(", ")));
        }
        if user.contains("\"statement_draft\"") {
            let question = section(user, "ORIGINAL PROBLEM:\n", Some("\n\nORIGINAL SOLUTION:"))
                .unwrap_or_default();
            let solution = section(user, "ORIGINAL SOLUTION:\n", Some("\n\nCORE STEPS"))
                .unwrap_or_default();
            let slots = section(user, "MUTABLE SLOTS (original and resampled values):\n", Some("\n\nReturn"))
                .unwrap_or_default();
            let parsed: serde_json::Value = serde_json::from_str(slots).unwrap_or_default();
            let (from, to) = parsed
                .get("slot1")
                .map(|slot| {
                    (
                        slot.get("original").map(|v| v.to_string()).unwrap_or_default(),
                        slot.get("resampled").map(|v| v.to_string()).unwrap_or_default(),
                    )
                })
                .unwrap_or_default();
            let (new_solution, new_statement) = if to.is_empty() {
                (solution.to_string(), question.to_string())
            } else {
                (
                    replace_integer_token(solution, &from, &to),
                    replace_integer_token(question, &from, &to),
                )
            };
            return Ok(format!(
                "{{\"solution\": {}, \"statement_draft\": {}}}",
                json_string(&new_solution),
                json_string(&new_statement)
            ));
        }
        if user.contains("RESAMPLED SLOT VALUES") {
            let draft = section(user, "WORKED SOLUTION:\n", Some("\n\nRESAMPLED SLOT VALUES"))
                .unwrap_or_default();
            // keep the full draft in the statement so distinct records map
            // to distinct questions
            let question =
                format!("Restate as a problem and solve: {draft} Determine the final quantity.");
            return Ok(format!("{{\"question\": {}}}", json_string(&question)));
        }
        if user.contains("VERIFIER FEEDBACK") {
            let question = section(user, "PROBLEM:\n", Some("\n\nSOLUTION:")).unwrap_or_default();
            let solution =
                section(user, "SOLUTION:\n", Some("\n\nVERIFIER FEEDBACK")).unwrap_or_default();
            return Ok(format!(
                "{{\"question\": {}, \"solution\": {}}}",
                json_string(question),
                json_string(solution)
            ));
        }
        if user.contains("\"verdict\"") {
            return Ok("{\"verdict\": \"accept\", \"feedback\": \"\"}".to_string());
        }
        Err(BackendError::InvalidRequest("unrecognized mock generation prompt".into()))
    })
}
