//! Grading of solver outputs: answer normalization, the strict string path,
//! the latent model grader, dual-path adjudication for calculation items,
//! the strict proof rubric, and the error taxonomy.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::modelio::{self, prompts, Client, ExchangeKey, ModelError, SchemaId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grade {
    #[serde(rename = "CORRECT")]
    Correct,
    #[serde(rename = "INCORRECT")]
    Incorrect,
}

impl Grade {
    pub fn is_correct(self) -> bool {
        self == Grade::Correct
    }
}

/// The four error categories; LogicHallucination is the fallback.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorTaxonomy {
    SymbolConfusion,
    StepOmission,
    Arithmetic,
    LogicHallucination,
}

impl ErrorTaxonomy {
    pub const ALL: [ErrorTaxonomy; 4] = [
        ErrorTaxonomy::SymbolConfusion,
        ErrorTaxonomy::StepOmission,
        ErrorTaxonomy::Arithmetic,
        ErrorTaxonomy::LogicHallucination,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorTaxonomy::SymbolConfusion => "SymbolConfusion",
            ErrorTaxonomy::StepOmission => "StepOmission",
            ErrorTaxonomy::Arithmetic => "Arithmetic",
            ErrorTaxonomy::LogicHallucination => "LogicHallucination",
        }
    }
}

/// Structured grader verdict in the grader-response shape, plus the
/// adjudication fields attached by the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradeVerdict {
    pub grade: Grade,
    pub detailed_feedback: String,
    #[serde(deserialize_with = "deserialize_issue_list")]
    pub major_issues: Vec<String>,
    pub final_answer_correct: bool,
    pub reasoning_rigor_score: u8,
    pub overall_assessment: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub audit_flag: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<ErrorTaxonomy>,
}

/// Graders sometimes return `major_issues` as a single string; accept both.
fn deserialize_issue_list<'de, D>(deserializer: D) -> Result<Vec<String>, D::Error>
where
    D: serde::Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Many(Vec<String>),
        One(String),
    }
    Ok(match Raw::deserialize(deserializer)? {
        Raw::Many(v) => v,
        Raw::One(s) if s.trim().is_empty() => Vec::new(),
        Raw::One(s) => vec![s],
    })
}

#[derive(Debug, Error)]
pub enum GradeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("grader response violates the verdict schema: {0}")]
    SchemaViolation(String),
}

// ---------------------------------------------------------------------------
// Answer normalization
// ---------------------------------------------------------------------------

/// Fixed macro-expansion table. Versioned with the crate; unknown macros
/// pass through untouched.
const MACRO_ALIASES: &[(&str, &str)] = &[
    ("\\dfrac", "\\frac"),
    ("\\tfrac", "\\frac"),
    ("\\Frac", "\\frac"),
    ("\\Sqrt", "\\sqrt"),
    ("\\cdot", "*"),
    ("\\times", "*"),
    ("\\left", ""),
    ("\\right", ""),
    ("\\!", " "),
    ("\\,", " "),
    ("\\;", " "),
    ("\\quad", " "),
    ("\\qquad", " "),
];

/// Unit tokens stripped during normalization. Single-letter units are
/// deliberately absent (they collide with identifiers).
const UNIT_TOKENS: &[&str] = &[
    "cm", "mm", "km", "kg", "degree", "degrees", "gram", "grams", "meter", "meters",
    "metre", "metres", "radian", "radians", "second", "seconds", "unit", "units",
];

fn read_braced_group(text: &str, open: usize) -> Option<(String, usize)> {
    let bytes = text.as_bytes();
    if bytes.get(open) != Some(&b'{') {
        return None;
    }
    let mut depth = 0usize;
    for (offset, b) in bytes[open..].iter().enumerate() {
        match b {
            b'{' => depth += 1,
            b'}' => {
                depth -= 1;
                if depth == 0 {
                    return Some((text[open + 1..open + offset].to_string(), open + offset + 1));
                }
            }
            _ => {}
        }
    }
    None
}

fn needs_parens(fragment: &str) -> bool {
    fragment.len() > 1 && fragment.chars().any(|c| "+-*/ ".contains(c))
}

fn wrap(fragment: &str) -> String {
    if needs_parens(fragment) {
        format!("({fragment})")
    } else {
        fragment.to_string()
    }
}

/// One expansion pass; normalization iterates this to a fixpoint so nested
/// fractions and roots also collapse.
fn expand_macros_once(text: &str) -> String {
    let mut out = text.to_string();
    for (from, to) in MACRO_ALIASES {
        out = out.replace(from, to);
    }
    let mut result = String::with_capacity(out.len());
    let mut rest = out.as_str();
    loop {
        let Some(pos) = rest.find('\\') else {
            result.push_str(rest);
            break;
        };
        result.push_str(&rest[..pos]);
        let after = &rest[pos..];
        if let Some(tail) = after.strip_prefix("\\frac") {
            if let Some((numer, next)) = read_braced_group(tail, 0) {
                if let Some((denom, next2)) = read_braced_group(tail, next) {
                    result.push_str(&wrap(&numer));
                    result.push('/');
                    result.push_str(&wrap(&denom));
                    rest = &tail[next2..];
                    continue;
                }
            }
        }
        if let Some(tail) = after.strip_prefix("\\sqrt") {
            // optional root index \sqrt[n]{x}
            let (index, body_start) = if tail.starts_with('[') {
                match tail.find(']') {
                    Some(close) => (Some(tail[1..close].to_string()), close + 1),
                    None => (None, 0),
                }
            } else {
                (None, 0)
            };
            if let Some((body, next)) = read_braced_group(tail, body_start) {
                match index {
                    Some(n) => {
                        result.push_str("root(");
                        result.push_str(&n);
                        result.push(',');
                        result.push_str(&body);
                        result.push(')');
                    }
                    None => {
                        result.push_str("sqrt(");
                        result.push_str(&body);
                        result.push(')');
                    }
                }
                rest = &tail[next..];
                continue;
            }
        }
        // unknown macro: pass through untouched
        result.push('\\');
        rest = &after[1..];
    }
    result
}

fn strip_math_delimiters(text: &str) -> String {
    text.replace("\\(", " ")
        .replace("\\)", " ")
        .replace("\\[", " ")
        .replace("\\]", " ")
        .replace('$', " ")
}

fn strip_unit_tokens(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            let word = &text[start..i];
            if !UNIT_TOKENS.contains(&word.to_ascii_lowercase().as_str()) {
                out.push_str(word);
            }
        } else {
            out.push(bytes[i] as char);
            i += 1;
        }
    }
    out
}

/// Canonical answer form: math delimiters stripped, the macro table applied
/// to a fixpoint, unit tokens removed, and all whitespace deleted.
/// Idempotent. No numeric evaluation happens here.
pub fn normalize_answer(text: &str) -> String {
    let mut current = strip_math_delimiters(text);
    for _ in 0..8 {
        let expanded = expand_macros_once(&current);
        if expanded == current {
            break;
        }
        current = expanded;
    }
    let without_units = strip_unit_tokens(&current);
    without_units.split_whitespace().collect()
}

/// Strict path: exact equality of canonical forms; formatting-only
/// differences vanish, numerically equal but textually different answers do
/// not.
pub fn strict_match(candidate: &str, reference: &str) -> bool {
    normalize_answer(candidate) == normalize_answer(reference)
}

// ---------------------------------------------------------------------------
// Model-graded paths
// ---------------------------------------------------------------------------

fn verdict_from_map(map: serde_json::Map<String, Value>) -> Result<GradeVerdict, GradeError> {
    serde_json::from_value(Value::Object(map))
        .map_err(|e| GradeError::SchemaViolation(e.to_string()))
}

/// Latent grader for calculation items under the lenient rubric, returning
/// the full structured verdict.
pub fn latent_verdict(
    key: &ExchangeKey,
    problem: &str,
    candidate: &str,
    reference: &str,
    client: &Client,
) -> Result<GradeVerdict, GradeError> {
    let user = modelio::render_text(
        prompts::CALCULATION_GRADER_USER_TEMPLATE,
        &[
            ("problem_statement", problem),
            ("solution", candidate),
            ("reference_solution", reference),
        ],
    )?;
    let map = client.structured(
        key,
        prompts::CALCULATION_GRADER_SYSTEM_PROMPT,
        &user,
        SchemaId::GraderVerdict,
    )?;
    verdict_from_map(map)
}

/// Latent grader for calculation items: just the binary grade.
pub fn latent_grade(
    key: &ExchangeKey,
    problem: &str,
    candidate: &str,
    reference: &str,
    client: &Client,
) -> Result<Grade, GradeError> {
    latent_verdict(key, problem, candidate, reference, client).map(|v| v.grade)
}

/// Dual-path adjudication: agreement keeps the shared grade; disagreement
/// adopts the latent grade and flags the item for manual audit.
pub fn adjudicate_computation(strict: bool, latent: Grade) -> (Grade, bool) {
    let agreement = strict == latent.is_correct();
    (latent, !agreement)
}

/// Full strict-rubric grading of a proof item.
pub fn proof_grade(
    key: &ExchangeKey,
    problem: &str,
    candidate: &str,
    reference: &str,
    client: &Client,
) -> Result<GradeVerdict, GradeError> {
    let user = modelio::render_text(
        prompts::PROOF_GRADER_USER_TEMPLATE,
        &[
            ("problem_statement", problem),
            ("solution", candidate),
            ("reference_solution", reference),
        ],
    )?;
    let map = client.structured(
        key,
        prompts::PROOF_GRADER_SYSTEM_PROMPT,
        &user,
        SchemaId::GraderVerdict,
    )?;
    verdict_from_map(map)
}

/// Keyword rules for the taxonomy, matched in priority order against the
/// lowercased feedback; the first hit wins.
const TAXONOMY_RULES: &[(ErrorTaxonomy, &[&str])] = &[
    (
        ErrorTaxonomy::SymbolConfusion,
        &[
            "confus", "misread the variable", "wrong variable", "renam", "symbol",
            "identifier", "conflat", "mixed up",
        ],
    ),
    (
        ErrorTaxonomy::StepOmission,
        &[
            "skip", "omit", "missing step", "missing a step", "left out", "leaves out",
            "without justification", "missing citation", "unproven", "no proof of",
        ],
    ),
    (
        ErrorTaxonomy::Arithmetic,
        &[
            "arithmetic", "calculation error", "miscalculat", "computational error",
            "computation error", "sign error", "off by", "numerical slip", "algebra error",
            "algebraic error",
        ],
    ),
];

/// Map grader feedback onto one of the four error categories.
/// Total: feedback with no matched keyword falls back to LogicHallucination.
pub fn classify_error(feedback: &str) -> ErrorTaxonomy {
    let lower = feedback.to_ascii_lowercase();
    for (taxonomy, keywords) in TAXONOMY_RULES {
        if keywords.iter().any(|kw| lower.contains(kw)) {
            return *taxonomy;
        }
    }
    ErrorTaxonomy::LogicHallucination
}
