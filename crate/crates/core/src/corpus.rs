//! Problem corpus: record schema, loading, validation, and slicing.
//!
//! A corpus is a UTF-8 file with one JSON record per line (a single-document
//! JSON array is also accepted). Field names follow the canonical record
//! layout: `index`, `type`, `tag`, `difficulty`, `question`, `solution`,
//! `vars`, `params`, `sci_consts`, `variants`, `checked`, `problem_type`.
//! Unknown fields are preserved verbatim on round-trip.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::surfacegen;

/// Topic categories used for the unique `type` field and the `tag` list.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "ALG")]
    Alg,
    #[serde(rename = "NT")]
    Nt,
    #[serde(rename = "COMB")]
    Comb,
    #[serde(rename = "GEO")]
    Geo,
    #[serde(rename = "ANA")]
    Ana,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Alg => "ALG",
            Category::Nt => "NT",
            Category::Comb => "COMB",
            Category::Geo => "GEO",
            Category::Ana => "ANA",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemType {
    Proof,
    Calculation,
}

impl ProblemType {
    pub fn name(self) -> &'static str {
        match self {
            ProblemType::Proof => "proof",
            ProblemType::Calculation => "calculation",
        }
    }
}

/// Competition part within a year.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    A,
    B,
}

/// Difficulty stratum derived from the position within a part:
/// 1-2 Easy, 3-4 Medium, 5-6 Hard, 7+ the extra-hard tail.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stratum {
    Easy,
    Medium,
    Hard,
    ExtraHard,
}

impl Stratum {
    pub fn name(self) -> &'static str {
        match self {
            Stratum::Easy => "Easy",
            Stratum::Medium => "Medium",
            Stratum::Hard => "Hard",
            Stratum::ExtraHard => "ExtraHard",
        }
    }
}

/// Parsed canonical identifier `<year>-<part>-<position>`, e.g. `1938-A-2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProblemIndex {
    pub year: u16,
    pub part: Part,
    pub position: u32,
}

pub const YEAR_MIN: u16 = 1938;
pub const YEAR_MAX: u16 = 2024;

impl FromStr for ProblemIndex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split('-');
        let (year, part, pos) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(y), Some(p), Some(i), None) => (y, p, i),
            _ => return Err(format!("expected <year>-<part>-<position>, got {s:?}")),
        };
        let year: u16 = year.parse().map_err(|_| format!("bad year in {s:?}"))?;
        if !(YEAR_MIN..=YEAR_MAX).contains(&year) {
            return Err(format!("year {year} outside [{YEAR_MIN},{YEAR_MAX}]"));
        }
        let part = match part {
            "A" => Part::A,
            "B" => Part::B,
            other => return Err(format!("part must be A or B, got {other:?}")),
        };
        let position: u32 = pos.parse().map_err(|_| format!("bad position in {s:?}"))?;
        if position == 0 {
            return Err("position must be >= 1".into());
        }
        Ok(ProblemIndex { year, part, position })
    }
}

impl fmt::Display for ProblemIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = match self.part {
            Part::A => "A",
            Part::B => "B",
        };
        write!(f, "{}-{}-{}", self.year, part, self.position)
    }
}

impl ProblemIndex {
    pub fn stratum(&self) -> Stratum {
        match self.position {
            1 | 2 => Stratum::Easy,
            3 | 4 => Stratum::Medium,
            5 | 6 => Stratum::Hard,
            _ => Stratum::ExtraHard,
        }
    }
}

/// Map the position encoded in a record index onto its difficulty stratum.
pub fn difficulty_stratum(index: &str) -> Result<Stratum, CorpusError> {
    let parsed: ProblemIndex = index
        .parse()
        .map_err(|reason| CorpusError::BadIndex { index: index.to_string(), reason })?;
    Ok(parsed.stratum())
}

/// One surface-renaming variant: the rename map plus rewritten texts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceVariant {
    pub map: IndexMap<String, String>,
    pub question: String,
    pub solution: String,
}

/// Admissible range for a mutable slot. Ranges resample numerically,
/// option lists resample categorically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Guard {
    Range {
        min: f64,
        max: f64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        integer: bool,
    },
    Options(Vec<Value>),
}

/// One mutable slot: a constant whose value the problem does not logically fix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub description: String,
    pub original: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resampled: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<Guard>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct KernelMeta {
    #[serde(default)]
    pub core_steps: Vec<String>,
    #[serde(default)]
    pub mutable_slots: IndexMap<String, Slot>,
}

/// A kernel variant: resampled constants, regenerated proof, preserved steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelVariant {
    pub question: String,
    pub solution: String,
    #[serde(rename = "_meta", default)]
    pub meta: KernelMeta,
}

/// The variant bundle attached to a record once generation has run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VariantBundle {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptive_long: Option<SurfaceVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptive_long_confusing: Option<SurfaceVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptive_long_misleading: Option<SurfaceVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub garbled_string: Option<SurfaceVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_variant: Option<KernelVariant>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, Value>,
}

impl VariantBundle {
    pub fn surface(&self, family: surfacegen::RenameFamily) -> Option<&SurfaceVariant> {
        match family {
            surfacegen::RenameFamily::DescriptiveLong => self.descriptive_long.as_ref(),
            surfacegen::RenameFamily::DescriptiveLongConfusing => {
                self.descriptive_long_confusing.as_ref()
            }
            surfacegen::RenameFamily::DescriptiveLongMisleading => {
                self.descriptive_long_misleading.as_ref()
            }
            surfacegen::RenameFamily::GarbledString => self.garbled_string.as_ref(),
        }
    }

    pub fn surface_mut(
        &mut self,
        family: surfacegen::RenameFamily,
    ) -> &mut Option<SurfaceVariant> {
        match family {
            surfacegen::RenameFamily::DescriptiveLong => &mut self.descriptive_long,
            surfacegen::RenameFamily::DescriptiveLongConfusing => {
                &mut self.descriptive_long_confusing
            }
            surfacegen::RenameFamily::DescriptiveLongMisleading => {
                &mut self.descriptive_long_misleading
            }
            surfacegen::RenameFamily::GarbledString => &mut self.garbled_string,
        }
    }
}

fn deserialize_difficulty<'de, D>(deserializer: D) -> Result<String, D::Error>
where
    D: Deserializer<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Number(u64),
    }
    Ok(match Raw::deserialize(deserializer)? {
        Raw::Text(s) => s,
        Raw::Number(n) => n.to_string(),
    })
}

fn serialize_difficulty<S>(value: &str, serializer: S) -> Result<S::Ok, S::Error>
where
    S: Serializer,
{
    serializer.serialize_str(value)
}

/// One canonical problem with its symbol inventory and variant bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemRecord {
    pub index: String,
    #[serde(rename = "type")]
    pub record_type: Category,
    #[serde(rename = "tag", default)]
    pub tags: Vec<Category>,
    /// Position proxy; stored in its source spelling, validated as a
    /// positive integer.
    #[serde(
        deserialize_with = "deserialize_difficulty",
        serialize_with = "serialize_difficulty"
    )]
    pub difficulty: String,
    pub question: String,
    pub solution: String,
    #[serde(default)]
    pub vars: Vec<String>,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub sci_consts: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variants: Option<VariantBundle>,
    #[serde(default)]
    pub checked: bool,
    pub problem_type: ProblemType,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, Value>,
}

impl ProblemRecord {
    pub fn parsed_index(&self) -> Result<ProblemIndex, String> {
        self.index.parse()
    }

    /// All renameable identifiers, vars first then params, source order.
    pub fn renameable_identifiers(&self) -> Vec<&str> {
        self.vars.iter().chain(self.params.iter()).map(String::as_str).collect()
    }

    /// vars, params and sci_consts as one set.
    pub fn identifier_set(&self) -> BTreeSet<&str> {
        self.vars
            .iter()
            .chain(self.params.iter())
            .chain(self.sci_consts.iter())
            .map(String::as_str)
            .collect()
    }
}

/// A schema violation found by [`validate_record`]. Violations are data,
/// not errors: callers decide whether to reject.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("overlapping symbol inventories: {symbol:?} appears in more than one of vars/params/sci_consts")]
    OverlappingInventories { symbol: String },
    #[error("identifier {identifier:?} never occurs in question or solution")]
    UnusedIdentifier { identifier: String },
    #[error("unparsable index {index:?}: {reason}")]
    BadIndex { index: String, reason: String },
    #[error("difficulty {value:?} is not a positive integer")]
    BadDifficulty { value: String },
    #[error("incomplete rename map for {family}: missing {missing:?}")]
    IncompleteRenameMap { family: String, missing: Vec<String> },
    #[error("renamed immutable constant {key:?} in {family} map")]
    RenamedImmutableConstant { family: String, key: String },
    #[error("unknown rename key {key:?} in {family} map")]
    UnknownRenameKey { family: String, key: String },
    #[error("duplicate rename target {value:?} in {family} map")]
    DuplicateRenameTarget { family: String, value: String },
    #[error("rename target {value:?} in {family} map collides with an existing identifier")]
    RenameTargetCollidesWithIdentifier { family: String, value: String },
    #[error("mutable slot {slot:?} has an empty description")]
    EmptySlotDescription { slot: String },
    #[error("mutable slot {slot:?} resampled value lies outside its guard")]
    ResampledOutsideGuard { slot: String },
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed record at line {line}: {source}")]
    Malformed {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("unparsable index {index:?}: {reason}")]
    BadIndex { index: String, reason: String },
}

/// A loaded record together with the violations found during validation.
/// Records failing validation are returned, not dropped.
#[derive(Clone, Debug)]
pub struct LoadedRecord {
    pub record: ProblemRecord,
    pub violations: Vec<Violation>,
}

/// Load a corpus file: one JSON record per line, or a single JSON array.
pub fn load_corpus(path: &Path) -> Result<Vec<LoadedRecord>, CorpusError> {
    let content = std::fs::read_to_string(path)
        .map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })?;
    parse_corpus(&content)
}

/// Parse corpus text; see [`load_corpus`].
pub fn parse_corpus(content: &str) -> Result<Vec<LoadedRecord>, CorpusError> {
    let trimmed = content.trim_start();
    let mut records = Vec::new();
    if trimmed.starts_with('[') {
        let parsed: Vec<ProblemRecord> = serde_json::from_str(trimmed)
            .map_err(|source| CorpusError::Malformed { line: source.line(), source })?;
        records.extend(parsed);
    } else {
        for (lineno, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: ProblemRecord = serde_json::from_str(line)
                .map_err(|source| CorpusError::Malformed { line: lineno + 1, source })?;
            records.push(record);
        }
    }
    Ok(records
        .into_iter()
        .map(|record| {
            let violations = validate_record(&record);
            LoadedRecord { record, violations }
        })
        .collect())
}

/// Serialize one record in the canonical compact form.
pub fn serialize_record(record: &ProblemRecord) -> String {
    serde_json::to_string(record).expect("record serialization cannot fail")
}

/// Write records in the canonical line-delimited form.
pub fn write_corpus(path: &Path, records: &[ProblemRecord]) -> Result<(), CorpusError> {
    let mut out = String::new();
    for record in records {
        out.push_str(&serialize_record(record));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| CorpusError::Io { path: path.to_path_buf(), source })
}

fn check_disjoint(a: &[String], b: &[String], out: &mut Vec<Violation>) {
    for symbol in a {
        if b.contains(symbol) {
            out.push(Violation::OverlappingInventories { symbol: symbol.clone() });
        }
    }
}

fn validate_rename_map(
    family: &str,
    map: &IndexMap<String, String>,
    record: &ProblemRecord,
    out: &mut Vec<Violation>,
) {
    let expected: BTreeSet<&str> =
        record.vars.iter().chain(record.params.iter()).map(String::as_str).collect();
    let missing: Vec<String> = expected
        .iter()
        .filter(|id| !map.contains_key(**id))
        .map(|id| id.to_string())
        .collect();
    if !missing.is_empty() {
        out.push(Violation::IncompleteRenameMap { family: family.to_string(), missing });
    }
    for key in map.keys() {
        if expected.contains(key.as_str()) {
            continue;
        }
        if record.sci_consts.iter().any(|c| c == key) {
            out.push(Violation::RenamedImmutableConstant {
                family: family.to_string(),
                key: key.clone(),
            });
        } else {
            out.push(Violation::UnknownRenameKey { family: family.to_string(), key: key.clone() });
        }
    }
    let mut seen = BTreeSet::new();
    let identifiers = record.identifier_set();
    for value in map.values() {
        if !seen.insert(value.as_str()) {
            out.push(Violation::DuplicateRenameTarget {
                family: family.to_string(),
                value: value.clone(),
            });
        }
        if identifiers.contains(value.as_str()) {
            out.push(Violation::RenameTargetCollidesWithIdentifier {
                family: family.to_string(),
                value: value.clone(),
            });
        }
    }
}

/// Check every record and bundle invariant; empty result means the record
/// is schema-clean.
pub fn validate_record(record: &ProblemRecord) -> Vec<Violation> {
    let mut out = Vec::new();

    check_disjoint(&record.vars, &record.params, &mut out);
    check_disjoint(&record.vars, &record.sci_consts, &mut out);
    check_disjoint(&record.params, &record.sci_consts, &mut out);

    if let Err(reason) = record.parsed_index() {
        out.push(Violation::BadIndex { index: record.index.clone(), reason });
    }
    match record.difficulty.parse::<u64>() {
        Ok(n) if n >= 1 => {}
        _ => out.push(Violation::BadDifficulty { value: record.difficulty.clone() }),
    }

    for identifier in record.vars.iter().chain(record.params.iter()) {
        let used = surfacegen::contains_identifier(&record.question, identifier)
            || surfacegen::contains_identifier(&record.solution, identifier);
        if !used {
            out.push(Violation::UnusedIdentifier { identifier: identifier.clone() });
        }
    }

    if let Some(bundle) = &record.variants {
        for family in surfacegen::RenameFamily::ALL {
            if let Some(variant) = bundle.surface(family) {
                validate_rename_map(family.key(), &variant.map, record, &mut out);
            }
        }
        if let Some(kernel) = &bundle.kernel_variant {
            for (slot_id, slot) in &kernel.meta.mutable_slots {
                if slot.description.trim().is_empty() {
                    out.push(Violation::EmptySlotDescription { slot: slot_id.clone() });
                }
                if let (Some(resampled), Some(guard)) = (&slot.resampled, &slot.guard) {
                    if !crate::kernelgen::guard_admits(guard, resampled) {
                        out.push(Violation::ResampledOutsideGuard { slot: slot_id.clone() });
                    }
                }
            }
        }
    }

    out
}

/// Slicing key for [`slice`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceBy {
    /// The unique `type` category.
    Topic,
    /// Difficulty stratum from the index position.
    Stratum,
    ProblemType,
}

/// Partition records into named groups. Groups are disjoint and exhaustive.
pub fn slice(
    records: &[ProblemRecord],
    by: SliceBy,
) -> IndexMap<String, Vec<&ProblemRecord>> {
    let mut groups: IndexMap<String, Vec<&ProblemRecord>> = IndexMap::new();
    for record in records {
        let key = match by {
            SliceBy::Topic => record.record_type.name().to_string(),
            SliceBy::Stratum => match difficulty_stratum(&record.index) {
                Ok(stratum) => stratum.name().to_string(),
                Err(_) => "invalid-index".to_string(),
            },
            SliceBy::ProblemType => record.problem_type.name().to_string(),
        };
        groups.entry(key).or_default().push(record);
    }
    groups
}
