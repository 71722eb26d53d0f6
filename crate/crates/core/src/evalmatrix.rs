//! The aligned N x (K+1) correctness matrix and its derived vectors.
//!
//! Columns are fixed as [original, DL, DLC, DLM, GS, KV]; cells are binary
//! with a per-cell missing marker. Missing cells exclude the whole row from
//! metric computation rather than imputing 0. The matrix persists as a
//! header line plus `item_id,bit,...` rows with `?` for missing, so metric
//! runs replay without re-querying models.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::surfacegen::RenameFamily;

/// Matrix columns in their fixed order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Column {
    #[serde(rename = "original")]
    Original,
    #[serde(rename = "DL")]
    Dl,
    #[serde(rename = "DLC")]
    Dlc,
    #[serde(rename = "DLM")]
    Dlm,
    #[serde(rename = "GS")]
    Gs,
    #[serde(rename = "KV")]
    Kv,
}

impl Column {
    pub const ALL: [Column; 6] =
        [Column::Original, Column::Dl, Column::Dlc, Column::Dlm, Column::Gs, Column::Kv];
    pub const SURFACE: [Column; 4] = [Column::Dl, Column::Dlc, Column::Dlm, Column::Gs];

    pub fn name(self) -> &'static str {
        match self {
            Column::Original => "original",
            Column::Dl => "DL",
            Column::Dlc => "DLC",
            Column::Dlm => "DLM",
            Column::Gs => "GS",
            Column::Kv => "KV",
        }
    }

    pub fn parse(name: &str) -> Option<Column> {
        Column::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn surface_family(self) -> Option<RenameFamily> {
        match self {
            Column::Dl => Some(RenameFamily::DescriptiveLong),
            Column::Dlc => Some(RenameFamily::DescriptiveLongConfusing),
            Column::Dlm => Some(RenameFamily::DescriptiveLongMisleading),
            Column::Gs => Some(RenameFamily::GarbledString),
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("duplicate verdict for ({item}, {column})")]
    DuplicateCell { item: String, column: &'static str },
    #[error("cannot access matrix file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed matrix at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

/// Binary correctness cells over (item, column), with missing markers.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrectnessMatrix {
    item_ids: Vec<String>,
    columns: Vec<Column>,
    cells: Vec<Vec<Option<bool>>>,
}

impl CorrectnessMatrix {
    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_items(&self) -> usize {
        self.item_ids.len()
    }

    pub fn get(&self, row: usize, column: Column) -> Option<bool> {
        let col = self.columns.iter().position(|c| *c == column)?;
        self.cells[row][col]
    }

    /// Re-derive the verdict list; lossless for non-missing cells.
    pub fn to_verdicts(&self) -> Vec<(String, Column, bool)> {
        let mut out = Vec::new();
        for (row, item) in self.item_ids.iter().enumerate() {
            for (col, column) in self.columns.iter().enumerate() {
                if let Some(grade) = self.cells[row][col] {
                    out.push((item.clone(), *column, grade));
                }
            }
        }
        out
    }

    /// Mean of the non-missing cells of one column, with the count used.
    pub fn column_mean(&self, column: Column) -> Option<(f64, usize)> {
        let col = self.columns.iter().position(|c| *c == column)?;
        let mut sum = 0u64;
        let mut count = 0usize;
        for row in &self.cells {
            if let Some(bit) = row[col] {
                sum += u64::from(bit);
                count += 1;
            }
        }
        if count == 0 {
            None
        } else {
            Some((sum as f64 / count as f64, count))
        }
    }
}

/// Build the matrix from graded verdicts. Unreported (item, column) pairs
/// stay missing; duplicates are an error.
pub fn build_matrix(
    verdicts: &[(String, Column, bool)],
) -> Result<CorrectnessMatrix, MatrixError> {
    build_matrix_with_columns(verdicts, &Column::ALL)
}

/// Build with an explicit column layout (the shipped layout is fixed, but
/// the column set is configurable).
pub fn build_matrix_with_columns(
    verdicts: &[(String, Column, bool)],
    columns: &[Column],
) -> Result<CorrectnessMatrix, MatrixError> {
    let mut item_ids: Vec<String> = Vec::new();
    let mut row_of: HashMap<String, usize> = HashMap::new();
    let col_of: HashMap<Column, usize> =
        columns.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let mut cells: Vec<Vec<Option<bool>>> = Vec::new();
    for (item, column, grade) in verdicts {
        let row = *row_of.entry(item.clone()).or_insert_with(|| {
            item_ids.push(item.clone());
            cells.push(vec![None; columns.len()]);
            item_ids.len() - 1
        });
        let Some(&col) = col_of.get(column) else {
            continue;
        };
        if cells[row][col].is_some() {
            return Err(MatrixError::DuplicateCell { item: item.clone(), column: column.name() });
        }
        cells[row][col] = Some(*grade);
    }
    Ok(CorrectnessMatrix { item_ids, columns: columns.to_vec(), cells })
}

/// A derived vector plus the rows excluded for missing cells.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorExtraction {
    pub item_ids: Vec<String>,
    pub values: Vec<u8>,
    pub excluded: Vec<String>,
}

/// The easy vector: the original column. Rows with a missing original cell
/// are excluded and reported.
pub fn easy_vector(matrix: &CorrectnessMatrix) -> VectorExtraction {
    extract(matrix, |m, row| m.get(row, Column::Original).map(u8::from))
}

/// Per-item majority over the four surface cells: 1 iff at least 3 of 4
/// are correct. A 2-2 tie counts as incorrect.
pub fn surface_majority(matrix: &CorrectnessMatrix) -> VectorExtraction {
    extract(matrix, |m, row| {
        let mut ones = 0u8;
        for column in Column::SURFACE {
            ones += u8::from(m.get(row, column)?);
        }
        Some(u8::from(ones >= 3))
    })
}

/// The parametric vector: a direct projection of the KV column.
pub fn para_vector(matrix: &CorrectnessMatrix) -> VectorExtraction {
    extract(matrix, |m, row| m.get(row, Column::Kv).map(u8::from))
}

fn extract(
    matrix: &CorrectnessMatrix,
    cell: impl Fn(&CorrectnessMatrix, usize) -> Option<u8>,
) -> VectorExtraction {
    let mut out = VectorExtraction { item_ids: Vec::new(), values: Vec::new(), excluded: Vec::new() };
    for (row, item) in matrix.item_ids.iter().enumerate() {
        match cell(matrix, row) {
            Some(v) => {
                out.item_ids.push(item.clone());
                out.values.push(v);
            }
            None => out.excluded.push(item.clone()),
        }
    }
    out
}

/// The three aligned vectors restricted to rows with no missing cell at all.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedVectors {
    pub item_ids: Vec<String>,
    pub easy: Vec<u8>,
    pub surface: Vec<u8>,
    pub para: Vec<u8>,
    pub n_complete: usize,
}

pub fn aligned_vectors(matrix: &CorrectnessMatrix) -> AlignedVectors {
    let mut out = AlignedVectors {
        item_ids: Vec::new(),
        easy: Vec::new(),
        surface: Vec::new(),
        para: Vec::new(),
        n_complete: 0,
    };
    for (row, item) in matrix.item_ids.iter().enumerate() {
        let complete = matrix.columns.iter().all(|c| matrix.get(row, *c).is_some());
        if !complete {
            continue;
        }
        let mut ones = 0u8;
        for column in Column::SURFACE {
            ones += u8::from(matrix.get(row, column).unwrap());
        }
        out.item_ids.push(item.clone());
        out.easy.push(u8::from(matrix.get(row, Column::Original).unwrap()));
        out.surface.push(u8::from(ones >= 3));
        out.para.push(u8::from(matrix.get(row, Column::Kv).unwrap()));
        out.n_complete += 1;
    }
    out
}

/// An aligned (easy, hard) pair for one comparison target.
#[derive(Clone, Debug, PartialEq)]
pub struct AlignedPair {
    pub item_ids: Vec<String>,
    pub easy: Vec<u8>,
    pub hard: Vec<u8>,
    pub excluded: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairTarget {
    /// Majority over the four surface columns.
    SurfaceMajority,
    /// The KV column.
    Parametric,
    /// One explicit variant column.
    Column(Column),
}

/// Extract the aligned pair for a target, excluding rows missing any needed
/// cell.
pub fn aligned_pair(matrix: &CorrectnessMatrix, target: PairTarget) -> AlignedPair {
    let mut out = AlignedPair {
        item_ids: Vec::new(),
        easy: Vec::new(),
        hard: Vec::new(),
        excluded: Vec::new(),
    };
    for (row, item) in matrix.item_ids.iter().enumerate() {
        let easy = matrix.get(row, Column::Original);
        let hard = match target {
            PairTarget::SurfaceMajority => {
                let mut ones = 0u8;
                let mut all = true;
                for column in Column::SURFACE {
                    match matrix.get(row, column) {
                        Some(bit) => ones += u8::from(bit),
                        None => all = false,
                    }
                }
                all.then_some(ones >= 3)
            }
            PairTarget::Parametric => matrix.get(row, Column::Kv),
            PairTarget::Column(column) => matrix.get(row, column),
        };
        match (easy, hard) {
            (Some(e), Some(h)) => {
                out.item_ids.push(item.clone());
                out.easy.push(u8::from(e));
                out.hard.push(u8::from(h));
            }
            _ => out.excluded.push(item.clone()),
        }
    }
    out
}

const MISSING: &str = "?";

/// Serialize the matrix: a header naming the columns, then one
/// `item_id,bit,...` row per item with `?` for missing.
pub fn matrix_to_string(matrix: &CorrectnessMatrix) -> String {
    let mut out = String::from("item");
    for column in &matrix.columns {
        out.push(',');
        out.push_str(column.name());
    }
    out.push('\n');
    for (row, item) in matrix.item_ids.iter().enumerate() {
        out.push_str(item);
        for cell in &matrix.cells[row] {
            out.push(',');
            match cell {
                Some(true) => out.push('1'),
                Some(false) => out.push('0'),
                None => out.push_str(MISSING),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_matrix(path: &Path, matrix: &CorrectnessMatrix) -> Result<(), MatrixError> {
    std::fs::write(path, matrix_to_string(matrix))
        .map_err(|source| MatrixError::Io { path: path.to_path_buf(), source })
}

pub fn read_matrix(path: &Path) -> Result<CorrectnessMatrix, MatrixError> {
    let content = std::fs::read_to_string(path)
        .map_err(|source| MatrixError::Io { path: path.to_path_buf(), source })?;
    parse_matrix(&content)
}

pub fn parse_matrix(content: &str) -> Result<CorrectnessMatrix, MatrixError> {
    let mut lines = content.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or(MatrixError::Malformed { line: 1, reason: "empty file".into() })?;
    let mut fields = header.split(',');
    let first = fields.next().unwrap_or_default();
    if first != "item" {
        return Err(MatrixError::Malformed {
            line: 1,
            reason: format!("header must start with 'item', got {first:?}"),
        });
    }
    let columns: Vec<Column> = fields
        .map(|name| {
            Column::parse(name).ok_or(MatrixError::Malformed {
                line: 1,
                reason: format!("unknown column {name:?}"),
            })
        })
        .collect::<Result<_, _>>()?;
    let mut item_ids = Vec::new();
    let mut cells = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let item = fields.next().unwrap_or_default().to_string();
        let row: Vec<Option<bool>> = fields
            .map(|bit| match bit {
                "1" => Ok(Some(true)),
                "0" => Ok(Some(false)),
                MISSING => Ok(None),
                other => Err(MatrixError::Malformed {
                    line: idx + 1,
                    reason: format!("bad cell {other:?}"),
                }),
            })
            .collect::<Result<_, _>>()?;
        if row.len() != columns.len() {
            return Err(MatrixError::Malformed {
                line: idx + 1,
                reason: format!("expected {} cells, got {}", columns.len(), row.len()),
            });
        }
        item_ids.push(item);
        cells.push(row);
    }
    Ok(CorrectnessMatrix { item_ids, columns, cells })
}

/// One graded outcome as appended by concurrent grading workers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerdictEntry {
    pub item: String,
    pub column: Column,
    pub grade: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub taxonomy: Option<crate::grading::ErrorTaxonomy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rigor: Option<u8>,
    #[serde(default)]
    pub audit_flag: bool,
}

/// Append-only verdict journal (one JSON entry per line).
pub fn append_verdicts(path: &Path, entries: &[VerdictEntry]) -> Result<(), MatrixError> {
    use std::io::Write;
    let mut file = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|source| MatrixError::Io { path: path.to_path_buf(), source })?;
    for entry in entries {
        let line = serde_json::to_string(entry).expect("verdict serializes");
        writeln!(file, "{line}")
            .map_err(|source| MatrixError::Io { path: path.to_path_buf(), source })?;
    }
    Ok(())
}

pub fn load_verdicts(path: &Path) -> Result<Vec<VerdictEntry>, MatrixError> {
    let content = std::fs::read_to_string(path)
        .map_err(|source| MatrixError::Io { path: path.to_path_buf(), source })?;
    content
        .lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(idx, line)| {
            serde_json::from_str(line).map_err(|e| MatrixError::Malformed {
                line: idx + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Matrix from journaled verdicts (freeze step after concurrent grading).
pub fn matrix_from_verdicts(entries: &[VerdictEntry]) -> Result<CorrectnessMatrix, MatrixError> {
    let verdicts: Vec<(String, Column, bool)> =
        entries.iter().map(|e| (e.item.clone(), e.column, e.grade)).collect();
    build_matrix(&verdicts)
}
