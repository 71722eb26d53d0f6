//! Report bundle: accuracy table with paired significance, robustness table,
//! error composition, strata breakdown, and drop histograms. Rendering is
//! deterministic: same matrix and verdicts give byte-identical files.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::corpus;
use crate::evalmatrix::{
    aligned_pair, CorrectnessMatrix, Column, PairTarget, VerdictEntry,
};
use crate::grading::{classify_error, ErrorTaxonomy};
use crate::metrics::{self, RobustnessConfig};
use crate::pairstats::{self, DiscordantCounts};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("metric failure: {0}")]
    Metrics(#[from] metrics::MetricsError),
    #[error("statistics failure: {0}")]
    Stats(#[from] pairstats::StatsError),
    #[error("cannot write report file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One row of the accuracy table.
#[derive(Clone, Debug)]
pub struct AccuracyRow {
    pub column: Column,
    pub n: usize,
    pub accuracy_pct: f64,
    /// Percentage-point delta against the original column; None for the
    /// original row itself.
    pub delta_pp: Option<f64>,
    pub discordant: Option<DiscordantCounts>,
    pub p_exact: Option<f64>,
    pub p_z: Option<f64>,
    pub stars: &'static str,
    /// Which test produced the printed star.
    pub star_source: &'static str,
}

/// One row of the robustness table.
#[derive(Clone, Debug)]
pub struct RobustnessRow {
    pub comparison: &'static str,
    pub n: usize,
    pub r_value: f64,
    pub hoeffding_half_width: Option<f64>,
    pub bootstrap: Option<(f64, f64)>,
    pub headroom_bound: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct StrataRow {
    pub stratum: &'static str,
    pub column: Column,
    pub n: usize,
    pub accuracy_pct: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ReportBundle {
    pub accuracy: Vec<AccuracyRow>,
    pub robustness: Vec<RobustnessRow>,
    /// (column label, taxonomy, count) over incorrect verdicts.
    pub taxonomy: Vec<(String, ErrorTaxonomy, usize)>,
    pub strata: Vec<StrataRow>,
    /// (comparison, bin lower edge, count) histograms of SD-normalized drops.
    pub histograms: Vec<(&'static str, f64, usize)>,
    pub summary: String,
}

const HISTOGRAM_BIN_WIDTH: f64 = 0.5;

fn histogram(comparison: &'static str, drops: &[f64]) -> Vec<(&'static str, f64, usize)> {
    if drops.is_empty() {
        return Vec::new();
    }
    let lo = (drops.iter().cloned().fold(f64::INFINITY, f64::min) / HISTOGRAM_BIN_WIDTH).floor();
    let hi = (drops.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / HISTOGRAM_BIN_WIDTH).floor();
    let bins = (hi - lo) as usize + 1;
    let mut counts = vec![0usize; bins];
    for &d in drops {
        let idx = ((d / HISTOGRAM_BIN_WIDTH).floor() - lo) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .filter(|(_, count)| *count > 0)
        .map(|(i, count)| (comparison, (lo + i as f64) * HISTOGRAM_BIN_WIDTH, count))
        .collect()
}

fn to_f64(bits: &[u8]) -> Vec<f64> {
    bits.iter().map(|&b| f64::from(b)).collect()
}

/// Assemble the full report from a frozen matrix plus (optionally) the
/// verdict journal for the error-composition table.
pub fn build_report(
    matrix: &CorrectnessMatrix,
    verdicts: Option<&[VerdictEntry]>,
    config: &RobustnessConfig,
) -> Result<ReportBundle, ReportError> {
    let mut bundle = ReportBundle::default();

    // --- accuracy table -----------------------------------------------------
    let original_mean = matrix.column_mean(Column::Original);
    for column in matrix.columns() {
        let Some((mean, n)) = matrix.column_mean(*column) else {
            continue;
        };
        let mut row = AccuracyRow {
            column: *column,
            n,
            accuracy_pct: 100.0 * mean,
            delta_pp: None,
            discordant: None,
            p_exact: None,
            p_z: None,
            stars: "",
            star_source: "",
        };
        if *column != Column::Original {
            if let Some((orig_mean, orig_n)) = original_mean {
                row.delta_pp = Some(100.0 * (mean - orig_mean));
                let pair = aligned_pair(matrix, PairTarget::Column(*column));
                let counts = DiscordantCounts::from_pairs(&pair.easy, &pair.hard);
                let p_exact = pairstats::mcnemar_exact(counts);
                let successes_orig = (orig_mean * orig_n as f64).round() as u64;
                let successes_col = (mean * n as f64).round() as u64;
                let (_, p_z) =
                    pairstats::two_prop_z(successes_orig, orig_n as u64, successes_col, n as u64)?;
                row.discordant = Some(counts);
                row.p_exact = Some(p_exact);
                row.p_z = Some(p_z);
                // exact test is the default star source; the z-test is
                // emitted alongside for comparability
                row.stars = pairstats::star_label(p_exact)?;
                row.star_source = "mcnemar_exact";
            }
        }
        bundle.accuracy.push(row);
    }

    // --- robustness table ---------------------------------------------------
    let surface = aligned_pair(matrix, PairTarget::SurfaceMajority);
    let para = aligned_pair(matrix, PairTarget::Parametric);
    let mut r_surface = None;
    let mut r_para = None;
    for (comparison, pair) in [("surface", &surface), ("parametric", &para)] {
        if pair.easy.is_empty() {
            continue;
        }
        let result =
            metrics::penalty_robustness(&to_f64(&pair.easy), &to_f64(&pair.hard), config)?;
        let headroom = metrics::headroom_bound(
            result.p_easy,
            result.p_hard,
            result.slope,
            result.sigma,
        );
        bundle.robustness.push(RobustnessRow {
            comparison,
            n: pair.easy.len(),
            r_value: result.r_hat,
            hoeffding_half_width: Some(result.hoeffding_half_width),
            bootstrap: result.bootstrap,
            headroom_bound: Some(headroom),
        });
        bundle.histograms.extend(histogram(comparison, &result.drops));
        match comparison {
            "surface" => r_surface = Some(result.r_hat),
            _ => r_para = Some(result.r_hat),
        }
    }
    if let (Some(rs), Some(rp)) = (r_surface, r_para) {
        bundle.robustness.push(RobustnessRow {
            comparison: "global",
            n: 0,
            r_value: metrics::global_robustness(rs, rp)?,
            hoeffding_half_width: None,
            bootstrap: None,
            headroom_bound: None,
        });
    }

    // --- error composition ----------------------------------------------------
    if let Some(entries) = verdicts {
        let mut counts: Vec<(String, ErrorTaxonomy, usize)> = Vec::new();
        for entry in entries.iter().filter(|e| !e.grade) {
            let taxonomy = entry
                .taxonomy
                .or_else(|| entry.feedback.as_deref().map(classify_error))
                .unwrap_or(ErrorTaxonomy::LogicHallucination);
            let label = entry.column.name().to_string();
            match counts.iter_mut().find(|(l, t, _)| *l == label && *t == taxonomy) {
                Some((_, _, c)) => *c += 1,
                None => counts.push((label, taxonomy, 1)),
            }
        }
        counts.sort_by(|a, b| (a.0.as_str(), a.1.name()).cmp(&(b.0.as_str(), b.1.name())));
        bundle.taxonomy = counts;
    }

    // --- strata breakdown -----------------------------------------------------
    for stratum in
        [corpus::Stratum::Easy, corpus::Stratum::Medium, corpus::Stratum::Hard, corpus::Stratum::ExtraHard]
    {
        for column in matrix.columns() {
            let mut sum = 0u64;
            let mut n = 0usize;
            for (row, item) in matrix.item_ids().iter().enumerate() {
                if corpus::difficulty_stratum(item).ok() != Some(stratum) {
                    continue;
                }
                if let Some(bit) = matrix.get(row, *column) {
                    sum += u64::from(bit);
                    n += 1;
                }
            }
            if n > 0 {
                bundle.strata.push(StrataRow {
                    stratum: stratum.name(),
                    column: *column,
                    n,
                    accuracy_pct: 100.0 * sum as f64 / n as f64,
                });
            }
        }
    }

    bundle.summary = render_summary(&bundle, config);
    Ok(bundle)
}

fn fmt_opt(value: Option<f64>, decimals: usize) -> String {
    value.map(|v| format!("{v:.decimals$}")).unwrap_or_default()
}

fn render_summary(bundle: &ReportBundle, config: &RobustnessConfig) -> String {
    let mut out = String::new();
    out.push_str("accuracy by column (percent):\n");
    for row in &bundle.accuracy {
        let delta = row
            .delta_pp
            .map(|d| format!(" ({d:+.1} pp, p_exact {}{})", fmt_opt(row.p_exact, 3), row.stars))
            .unwrap_or_default();
        out.push_str(&format!(
            "  {:<8} {:>5.1}%{delta}\n",
            row.column.name(),
            row.accuracy_pct
        ));
    }
    out.push_str(&format!("\nrobustness (mode {}):\n", config.mode.name()));
    for row in &bundle.robustness {
        out.push_str(&format!("  {:<10} {:.6}", row.comparison, row.r_value));
        if let Some((lo, hi)) = row.bootstrap {
            out.push_str(&format!("  bootstrap [{lo:.6}, {hi:.6}]"));
        }
        if let Some(h) = row.headroom_bound {
            out.push_str(&format!("  headroom {h:.6}"));
        }
        out.push('\n');
    }
    out
}

/// File names inside a report bundle directory.
pub const ACCURACY_FILE: &str = "accuracy.csv";
pub const ROBUSTNESS_FILE: &str = "robustness.csv";
pub const TAXONOMY_FILE: &str = "error_composition.csv";
pub const STRATA_FILE: &str = "strata.csv";
pub const HISTOGRAM_FILE: &str = "drop_histogram.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

impl ReportBundle {
    /// Render every table as CSV text, keyed by file name.
    pub fn render_files(&self) -> Vec<(&'static str, String)> {
        let mut accuracy =
            String::from("column,n,accuracy_pct,delta_pp,n10,n01,p_exact,p_z,stars,star_source\n");
        for row in &self.accuracy {
            accuracy.push_str(&format!(
                "{},{},{:.1},{},{},{},{},{},{},{}\n",
                row.column.name(),
                row.n,
                row.accuracy_pct,
                fmt_opt(row.delta_pp, 1),
                row.discordant.map(|c| c.n10.to_string()).unwrap_or_default(),
                row.discordant.map(|c| c.n01.to_string()).unwrap_or_default(),
                fmt_opt(row.p_exact, 3),
                fmt_opt(row.p_z, 3),
                row.stars,
                row.star_source,
            ));
        }

        let mut robustness = String::from(
            "comparison,n,R,hoeffding_half_width,bootstrap_lo,bootstrap_hi,headroom_bound\n",
        );
        for row in &self.robustness {
            robustness.push_str(&format!(
                "{},{},{:.6},{},{},{},{}\n",
                row.comparison,
                if row.n > 0 { row.n.to_string() } else { String::new() },
                row.r_value,
                fmt_opt(row.hoeffding_half_width, 6),
                fmt_opt(row.bootstrap.map(|b| b.0), 6),
                fmt_opt(row.bootstrap.map(|b| b.1), 6),
                fmt_opt(row.headroom_bound, 6),
            ));
        }

        let mut taxonomy = String::from("column,taxonomy,count\n");
        for (column, label, count) in &self.taxonomy {
            taxonomy.push_str(&format!("{column},{},{count}\n", label.name()));
        }

        let mut strata = String::from("stratum,column,n,accuracy_pct\n");
        for row in &self.strata {
            strata.push_str(&format!(
                "{},{},{},{:.1}\n",
                row.stratum,
                row.column.name(),
                row.n,
                row.accuracy_pct
            ));
        }

        let mut histogram = String::from("comparison,bin_lo,count\n");
        for (comparison, bin, count) in &self.histograms {
            histogram.push_str(&format!("{comparison},{bin:.1},{count}\n"));
        }

        vec![
            (ACCURACY_FILE, accuracy),
            (ROBUSTNESS_FILE, robustness),
            (TAXONOMY_FILE, taxonomy),
            (STRATA_FILE, strata),
            (HISTOGRAM_FILE, histogram),
            (SUMMARY_FILE, self.summary.clone()),
        ]
    }

    /// Write the bundle into a directory; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, ReportError> {
        std::fs::create_dir_all(dir)
            .map_err(|source| ReportError::Io { path: dir.to_path_buf(), source })?;
        let mut written = Vec::new();
        for (name, content) in self.render_files() {
            let path = dir.join(name);
            std::fs::write(&path, content)
                .map_err(|source| ReportError::Io { path: path.clone(), source })?;
            written.push(path);
        }
        Ok(written)
    }
}
