//! Surface-renaming variant families (DL, DLC, DLM, GS).
//!
//! The pipeline is proposal -> collision check -> family tagging ->
//! token-aware substitution. An identifier occurrence is a maximal run of
//! `[A-Za-z0-9_]` not preceded by a backslash, so `r_0` and `r` are distinct
//! whole tokens and LaTeX command names are never touched. Substitution is
//! exact-token only, which keeps `apply_rename`/`invert_rename` a byte-exact
//! round-trip; the looser occurrence test used for schema validation also
//! recognizes the braced subscript spelling (`r_{0}` counts as a use of
//! `r_0`).

use std::collections::HashSet;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ProblemRecord, SurfaceVariant};
use crate::modelio::{self, prompts, Client, ExchangeKey, ModelError, SchemaId};

/// The four surface families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RenameFamily {
    #[serde(rename = "descriptive_long")]
    DescriptiveLong,
    #[serde(rename = "descriptive_long_confusing")]
    DescriptiveLongConfusing,
    #[serde(rename = "descriptive_long_misleading")]
    DescriptiveLongMisleading,
    #[serde(rename = "garbled_string")]
    GarbledString,
}

impl RenameFamily {
    pub const ALL: [RenameFamily; 4] = [
        RenameFamily::DescriptiveLong,
        RenameFamily::DescriptiveLongConfusing,
        RenameFamily::DescriptiveLongMisleading,
        RenameFamily::GarbledString,
    ];

    /// Field name in the variant bundle.
    pub fn key(self) -> &'static str {
        match self {
            RenameFamily::DescriptiveLong => "descriptive_long",
            RenameFamily::DescriptiveLongConfusing => "descriptive_long_confusing",
            RenameFamily::DescriptiveLongMisleading => "descriptive_long_misleading",
            RenameFamily::GarbledString => "garbled_string",
        }
    }

    /// Short table label.
    pub fn label(self) -> &'static str {
        match self {
            RenameFamily::DescriptiveLong => "DL",
            RenameFamily::DescriptiveLongConfusing => "DLC",
            RenameFamily::DescriptiveLongMisleading => "DLM",
            RenameFamily::GarbledString => "GS",
        }
    }

    /// Style instruction handed to the proposal model.
    pub fn style_instruction(self) -> &'static str {
        match self {
            RenameFamily::DescriptiveLong => {
                "a single descriptive phrase naming what the token stands for, \
                 written as one alphanumeric token (e.g. populationDensity)"
            }
            RenameFamily::DescriptiveLongConfusing => {
                "a concatenation of 2-5 random unrelated nouns with no connection \
                 to the mathematics, written as one alphanumeric token \
                 (e.g. walnutVioletTerrace)"
            }
            RenameFamily::DescriptiveLongMisleading => {
                "a mathematically suggestive but misleading term that names a \
                 different concept than the token actually denotes, written as one \
                 alphanumeric token (e.g. primeFieldOrder for a plain real variable)"
            }
            RenameFamily::GarbledString => "a 4-16 character alphanumeric hash",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameSource {
    ModelProposed,
    LocallyGenerated,
}

/// A family-tagged rename map with per-entry provenance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RenameMap {
    pub family: RenameFamily,
    pub entries: IndexMap<String, String>,
    pub provenance: IndexMap<String, NameSource>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum RenameViolation {
    #[error("target {value:?} collides with an existing identifier")]
    CollidesWithIdentifier { value: String },
    #[error("target {value:?} already appears in the problem text as a whole token")]
    AppearsInText { value: String },
    #[error("duplicate target {value:?}")]
    DuplicateTarget { value: String },
    #[error("target {value:?} is not a substitutable token")]
    NotSubstitutable { value: String },
}

#[derive(Debug, Error)]
pub enum RenameError {
    #[error("family {0:?} is generated locally, not proposed by a model")]
    LocalFamily(RenameFamily),
    #[error("rename map is not injective: value {value:?} has multiple sources")]
    NonInjective { value: String },
    #[error("could not draw a fresh garbled name after {attempts} attempts")]
    Exhausted { attempts: u32 },
    #[error(
        "no acceptable {family} proposal for {identifier:?} after {attempts} attempts; \
         flagged for the manual queue"
    )]
    ProposalRejected { identifier: String, family: &'static str, attempts: u32 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[inline]
fn is_token_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn utf8_char_len(lead: u8) -> usize {
    match lead {
        b if b < 0x80 => 1,
        b if b >> 5 == 0b110 => 2,
        b if b >> 4 == 0b1110 => 3,
        _ => 4,
    }
}

/// Visit each maximal `[A-Za-z0-9_]` run as `(start, token, protected)`;
/// `protected` marks runs preceded by a backslash (LaTeX command names).
fn for_each_token<'a>(text: &'a str, mut visit: impl FnMut(usize, &'a str, bool) -> bool) {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if is_token_byte(bytes[i]) {
            let start = i;
            while i < bytes.len() && is_token_byte(bytes[i]) {
                i += 1;
            }
            let protected = start > 0 && bytes[start - 1] == b'\\';
            if !visit(start, &text[start..i], protected) {
                return;
            }
        } else {
            i += utf8_char_len(bytes[i]);
        }
    }
}

/// Whole-token occurrence under the substitution rule.
pub fn contains_token(text: &str, token: &str) -> bool {
    let mut found = false;
    for_each_token(text, |_, t, protected| {
        if !protected && t == token {
            found = true;
            return false;
        }
        true
    });
    found
}

/// Every unprotected whole token in the text.
pub fn text_tokens(text: &str) -> HashSet<String> {
    let mut out = HashSet::new();
    for_each_token(text, |_, t, protected| {
        if !protected {
            out.insert(t.to_string());
        }
        true
    });
    out
}

fn contains_braced_form(text: &str, base: &str, sub: &str) -> bool {
    let needle = format!("{base}_{{{sub}}}");
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(rel) = text[from..].find(&needle) {
        let pos = from + rel;
        let clean_before =
            pos == 0 || (!is_token_byte(bytes[pos - 1]) && bytes[pos - 1] != b'\\');
        if clean_before {
            return true;
        }
        from = pos + 1;
    }
    false
}

/// Occurrence test for schema validation: exact whole token, or the braced
/// LaTeX subscript spelling of an underscored identifier.
pub fn contains_identifier(text: &str, identifier: &str) -> bool {
    if contains_token(text, identifier) {
        return true;
    }
    if let Some(split) = identifier.find('_') {
        let (base, sub) = (&identifier[..split], &identifier[split + 1..]);
        if !base.is_empty() && !sub.is_empty() {
            return contains_braced_form(text, base, sub);
        }
    }
    false
}

/// Replace every unprotected whole-token occurrence of each map key.
/// sci_consts never appear as keys, so they stay byte-identical.
pub fn apply_rename(text: &str, map: &IndexMap<String, String>) -> String {
    let mut out = String::with_capacity(text.len());
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if is_token_byte(bytes[i]) {
            let start = i;
            while i < bytes.len() && is_token_byte(bytes[i]) {
                i += 1;
            }
            let token = &text[start..i];
            let protected = start > 0 && bytes[start - 1] == b'\\';
            match if protected { None } else { map.get(token) } {
                Some(replacement) => out.push_str(replacement),
                None => out.push_str(token),
            }
        } else {
            let len = utf8_char_len(bytes[i]);
            out.push_str(&text[i..i + len]);
            i += len;
        }
    }
    out
}

/// Invert an injective rename: `apply_rename(apply_rename(x, m), inverse(m)) = x`.
pub fn invert_rename(text: &str, map: &IndexMap<String, String>) -> Result<String, RenameError> {
    let mut inverse: IndexMap<String, String> = IndexMap::with_capacity(map.len());
    for (key, value) in map {
        if inverse.insert(value.clone(), key.clone()).is_some() {
            return Err(RenameError::NonInjective { value: value.clone() });
        }
    }
    Ok(apply_rename(text, &inverse))
}

/// Collision check: a map is clean iff no target equals an existing
/// identifier, occurs in the question/solution as a whole token, or is
/// duplicated; targets must themselves be substitutable tokens.
pub fn check_collisions(map: &RenameMap, record: &ProblemRecord) -> Vec<RenameViolation> {
    let mut out = Vec::new();
    let identifiers = record.identifier_set();
    let mut seen = HashSet::new();
    for value in map.entries.values() {
        if !is_substitutable_token(value) {
            out.push(RenameViolation::NotSubstitutable { value: value.clone() });
        }
        if !seen.insert(value.as_str()) {
            out.push(RenameViolation::DuplicateTarget { value: value.clone() });
        }
        if identifiers.contains(value.as_str()) {
            out.push(RenameViolation::CollidesWithIdentifier { value: value.clone() });
        }
        if contains_token(&record.question, value) || contains_token(&record.solution, value) {
            out.push(RenameViolation::AppearsInText { value: value.clone() });
        }
    }
    out
}

fn is_substitutable_token(value: &str) -> bool {
    let mut bytes = value.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_alphabetic())
        && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

/// GS names are 4-16 alphanumeric characters starting with a letter.
pub fn matches_garbled_pattern(value: &str) -> bool {
    let bytes = value.as_bytes();
    (4..=16).contains(&bytes.len())
        && bytes[0].is_ascii_alphabetic()
        && bytes.iter().all(u8::is_ascii_alphanumeric)
}

const GARBLED_ATTEMPTS: u32 = 10_000;
const ALPHA: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";
const ALNUM: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

/// Draw a fresh garbled identifier: length uniform in [4,16], letter first,
/// alphanumeric throughout, distinct from everything in `existing`.
pub fn garbled_name<R: Rng + ?Sized>(
    rng: &mut R,
    existing: &HashSet<String>,
) -> Result<String, RenameError> {
    for _ in 0..GARBLED_ATTEMPTS {
        let len = rng.gen_range(4..=16usize);
        let mut name = String::with_capacity(len);
        name.push(ALPHA[rng.gen_range(0..ALPHA.len())] as char);
        for _ in 1..len {
            name.push(ALNUM[rng.gen_range(0..ALNUM.len())] as char);
        }
        if !existing.contains(&name) {
            return Ok(name);
        }
    }
    Err(RenameError::Exhausted { attempts: GARBLED_ATTEMPTS })
}

/// Word units of a proposed name: split on underscores and lower-to-upper
/// camel boundaries.
fn word_units(value: &str) -> usize {
    let mut units = 0;
    let mut prev_lower = false;
    let mut in_word = false;
    for c in value.chars() {
        if c == '_' {
            in_word = false;
            prev_lower = false;
            continue;
        }
        if !in_word || (c.is_ascii_uppercase() && prev_lower) {
            units += 1;
        }
        in_word = true;
        prev_lower = c.is_ascii_lowercase();
    }
    units
}

/// Terms that make a name "mathematically suggestive" for the DLM family.
pub const MATH_JARGON: &[&str] = &[
    "angle", "area", "basis", "core", "degree", "depth", "derivative", "determinant",
    "eigen", "field", "graph", "group", "ideal", "integral", "kernel", "lattice",
    "limit", "matrix", "maximum", "measure", "median", "metric", "minimum", "modulus",
    "modulo", "norm", "order", "perimeter", "polynomial", "prime", "radius", "rank",
    "residue", "ring", "scalar", "surface", "tensor", "trace", "vector", "volume",
];

/// Heuristic family-style validation of a proposed name.
///
/// Word counts are estimated from camel-case/underscore boundaries; a fused
/// all-lowercase compound (`daybreak`) cannot be split, so DLC accepts a
/// single detected unit when the token is long enough to plausibly be one.
pub fn validate_family_style(family: RenameFamily, value: &str) -> Result<(), String> {
    if !is_substitutable_token(value) {
        return Err(format!("{value:?} is not a single alphanumeric token"));
    }
    match family {
        RenameFamily::GarbledString => {
            if !matches_garbled_pattern(value) {
                return Err(format!("{value:?} does not match the 4-16 char pattern"));
            }
        }
        RenameFamily::DescriptiveLong => {
            let units = word_units(value);
            if value.len() < 3 || units > 4 {
                return Err(format!("{value:?} is not a single descriptive phrase"));
            }
        }
        RenameFamily::DescriptiveLongConfusing => {
            let units = word_units(value);
            let plausible_fused = units == 1 && value.len() >= 6;
            if !(2..=5).contains(&units) && !plausible_fused {
                return Err(format!("{value:?} does not read as 2-5 unrelated nouns"));
            }
        }
        RenameFamily::DescriptiveLongMisleading => {
            let lower = value.to_ascii_lowercase();
            if !MATH_JARGON.iter().any(|term| lower.contains(term)) {
                return Err(format!("{value:?} contains no mathematical jargon term"));
            }
        }
    }
    Ok(())
}

const PROPOSAL_REASKS: u32 = 3;
const CONTEXT_WINDOW: usize = 120;

fn occurrence_context(record: &ProblemRecord, identifier: &str) -> String {
    for text in [&record.question, &record.solution] {
        let mut found = None;
        for_each_token(text, |start, token, protected| {
            if !protected && token == identifier {
                found = Some(start);
                return false;
            }
            true
        });
        if let Some(pos) = found {
            let start = text[..pos]
                .char_indices()
                .rev()
                .take(CONTEXT_WINDOW)
                .last()
                .map(|(i, _)| i)
                .unwrap_or(pos);
            let end = text[pos..]
                .char_indices()
                .take(CONTEXT_WINDOW)
                .last()
                .map(|(i, c)| pos + i + c.len_utf8())
                .unwrap_or(text.len());
            return text[start..end].to_string();
        }
    }
    // fall back to the question head
    record.question.chars().take(2 * CONTEXT_WINDOW).collect()
}

/// Ask the proposal model for one replacement per identifier. Each proposal
/// is validated against the family style and the collision rules; up to
/// three re-asks per identifier before the record is flagged for the manual
/// queue.
pub fn propose_names(
    record: &ProblemRecord,
    family: RenameFamily,
    client: &Client,
) -> Result<RenameMap, RenameError> {
    if family == RenameFamily::GarbledString {
        return Err(RenameError::LocalFamily(family));
    }
    let mut map = RenameMap {
        family,
        entries: IndexMap::new(),
        provenance: IndexMap::new(),
    };
    let roles = record
        .vars
        .iter()
        .map(|v| (v.as_str(), "free variable"))
        .chain(record.params.iter().map(|p| (p.as_str(), "fixed parameter")));
    for (identifier, role) in roles {
        let base_context = occurrence_context(record, identifier);
        let mut rejection: Option<String> = None;
        let mut accepted = false;
        for attempt in 0..=PROPOSAL_REASKS {
            let mut context = base_context.clone();
            if let Some(reason) = &rejection {
                context.push_str("\n\nPrevious proposal was rejected: ");
                context.push_str(reason);
            }
            let user = modelio::render_text(
                prompts::NAME_PROPOSAL_USER_TEMPLATE,
                &[
                    ("identifier", identifier),
                    ("role", role),
                    ("family_style", family.style_instruction()),
                    ("context", &context),
                ],
            )?;
            let key = ExchangeKey::new(
                record.index.clone(),
                family.key(),
                format!("propose-{identifier}-try{attempt}"),
            );
            let response = client.structured(
                &key,
                prompts::NAME_PROPOSAL_SYSTEM_PROMPT,
                &user,
                SchemaId::NameProposal,
            )?;
            let value = response
                .get("replacement")
                .and_then(serde_json::Value::as_str)
                .expect("schema guarantees replacement")
                .trim()
                .to_string();
            let style = validate_family_style(family, &value);
            let mut probe = map.clone();
            probe.entries.insert(identifier.to_string(), value.clone());
            let collisions = check_collisions(&probe, record);
            match (style, collisions.is_empty()) {
                (Ok(()), true) => {
                    map.entries.insert(identifier.to_string(), value);
                    map.provenance
                        .insert(identifier.to_string(), NameSource::ModelProposed);
                    accepted = true;
                    break;
                }
                (Err(reason), _) => rejection = Some(reason),
                (_, false) => {
                    rejection = Some(
                        collisions.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
                    )
                }
            }
        }
        if !accepted {
            return Err(RenameError::ProposalRejected {
                identifier: identifier.to_string(),
                family: family.label(),
                attempts: PROPOSAL_REASKS + 1,
            });
        }
    }
    Ok(map)
}

/// Build a GS map locally from a seeded generator; no model involved.
pub fn generate_garbled_map<R: Rng + ?Sized>(
    record: &ProblemRecord,
    rng: &mut R,
) -> Result<RenameMap, RenameError> {
    let mut existing: HashSet<String> =
        record.identifier_set().into_iter().map(str::to_string).collect();
    existing.extend(text_tokens(&record.question));
    existing.extend(text_tokens(&record.solution));
    let mut map = RenameMap {
        family: RenameFamily::GarbledString,
        entries: IndexMap::new(),
        provenance: IndexMap::new(),
    };
    for identifier in record.renameable_identifiers() {
        let name = garbled_name(rng, &existing)?;
        existing.insert(name.clone());
        map.entries.insert(identifier.to_string(), name);
        map.provenance
            .insert(identifier.to_string(), NameSource::LocallyGenerated);
    }
    Ok(map)
}

/// Materialize the variant texts for a checked map.
pub fn generate_surface_variant(record: &ProblemRecord, map: &RenameMap) -> SurfaceVariant {
    SurfaceVariant {
        map: map.entries.clone(),
        question: apply_rename(&record.question, &map.entries),
        solution: apply_rename(&record.solution, &map.entries),
    }
}
