//! `gapeval` — batch driver for variant generation, evaluation, and
//! reporting over a problem corpus.
//!
//! Exit codes: 0 success, 2 partial (some cells or records failed),
//! 1 fatal.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use gapeval::corpus;
use gapeval::evalmatrix::{self, Column};
use gapeval::kernelgen::{soundness_bound, LoopParams};
use gapeval::metrics::{RobustnessConfig, SaturationMode};
use gapeval::modelio::{Client, InFlightLimiter, Journal};
use gapeval::pipeline::{
    self, build_backend, RunManifest, VariantSelector,
};

#[derive(Parser)]
#[command(name = "gapeval", version, about = "Stress-test math solvers with equivalent problem variants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MetricArgs {
    /// Saturation mode for the penalty pipeline.
    #[arg(long, default_value = "clamped_centered", value_parser = parse_mode)]
    mode: SaturationMode,
    /// Softplus temperature.
    #[arg(long, default_value_t = 0.5)]
    k: f64,
    /// Fallback floor for the typical drop.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Confidence level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap resamples (0 disables the bootstrap interval).
    #[arg(long, default_value_t = 2000)]
    bootstrap: usize,
}

fn parse_mode(s: &str) -> Result<SaturationMode, String> {
    s.parse()
}

impl MetricArgs {
    fn config(&self, seed: u64) -> RobustnessConfig {
        RobustnessConfig {
            k: self.k,
            eps: self.eps,
            mode: self.mode,
            alpha: self.alpha,
            bootstrap_samples: self.bootstrap,
            seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate variant families for every record in a corpus.
    Generate {
        #[arg(long)]
        corpus: PathBuf,
        /// Comma-separated families: DL,DLC,DLM,GS,KV or "all".
        #[arg(long, default_value = "all")]
        variant: String,
        /// Generation/judge backend spec (e.g. openai:o3 or mock:kernel).
        #[arg(long)]
        judge: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (augmented corpus, traces, audit sample).
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a solver on every (item, column) pair and grade the answers.
    Evaluate {
        #[arg(long)]
        corpus: PathBuf,
        /// Solver backend spec (e.g. openai:o3, mock:oracle, mock:empty).
        #[arg(long)]
        solver: String,
        /// Grader backend spec (e.g. openai:o3, mock:exact).
        #[arg(long)]
        grader: String,
        /// Judge backend spec recorded in the manifest (generation-side).
        #[arg(long, default_value = "mock:kernel")]
        judge: String,
        /// Columns to evaluate: comma-separated among original,DL,DLC,DLM,GS,KV
        /// or "all".
        #[arg(long, default_value = "all")]
        variant: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Bound on concurrent in-flight requests.
        #[arg(long, default_value_t = 8)]
        max_in_flight: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Rebuild the report bundle from a persisted matrix (and verdicts).
    Report {
        #[arg(long)]
        matrix: PathBuf,
        /// Verdict journal for the error-composition table.
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Metrics only: robustness numbers for an existing matrix file.
    Metrics {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        metric: MetricArgs,
    },
    /// Soundness bound of the repair-and-verify screening loop.
    Bound {
        /// Maximum rounds T.
        t: usize,
        /// Required streak K.
        k: usize,
        /// Judges per round J.
        j: usize,
        /// Per-judge mis-accept probability.
        eps: f64,
    },
}

fn load_records(path: &std::path::Path) -> Result<Vec<corpus::ProblemRecord>> {
    let loaded = corpus::load_corpus(path)?;
    let mut records = Vec::with_capacity(loaded.len());
    for entry in loaded {
        for violation in &entry.violations {
            eprintln!("warning: {}: {violation}", entry.record.index);
        }
        records.push(entry.record);
    }
    Ok(records)
}

fn columns_from(spec: &str) -> Result<Vec<Column>> {
    if spec == "all" {
        return Ok(Column::ALL.to_vec());
    }
    spec.split(',')
        .map(|name| {
            Column::parse(name.trim())
                .with_context(|| format!("unknown column {name:?}"))
        })
        .collect()
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Generate { corpus: corpus_path, variant, judge, seed, out } => {
            let records = load_records(&corpus_path)?;
            let families = VariantSelector::parse_list(&variant)?;
            std::fs::create_dir_all(&out)?;
            let journal = Arc::new(Journal::open(&out.join("generation_journal.jsonl"))?);
            let (backend, config) = build_backend(&judge, &records)?;
            let client = Client::new(backend, config).with_journal(journal);
            let outcome = pipeline::cmd_generate(
                &records,
                &families,
                &client,
                &client,
                &LoopParams::default(),
                seed,
            );
            corpus::write_corpus(&out.join("corpus_augmented.jsonl"), &outcome.records)?;
            let traces = outcome
                .traces
                .iter()
                .map(|(index, trace)| {
                    format!(
                        "{{\"index\":{},\"trace\":{}}}",
                        serde_json::to_string(index).unwrap(),
                        serde_json::to_string(trace).unwrap()
                    )
                })
                .collect::<Vec<_>>()
                .join("\n");
            std::fs::write(out.join("kernel_traces.jsonl"), traces + "\n")?;
            std::fs::write(out.join("audit_sample.txt"), outcome.audit_sample.join("\n") + "\n")?;
            for index in &outcome.no_kernel {
                eprintln!("note: {index}: no kernel variant (no mutable slots)");
            }
            for (index, what) in &outcome.failures {
                eprintln!("error: {index}: {what}");
            }
            println!(
                "generated {} families over {} records ({} failures, {} without kernel slots)",
                families.len(),
                outcome.records.len(),
                outcome.failures.len(),
                outcome.no_kernel.len()
            );
            Ok(if outcome.failures.is_empty() { 0 } else { 2 })
        }
        Command::Evaluate {
            corpus: corpus_path,
            solver,
            grader,
            judge,
            variant,
            seed,
            max_in_flight,
            out,
            metric,
        } => {
            let records = load_records(&corpus_path)?;
            let columns = columns_from(&variant)?;
            std::fs::create_dir_all(&out)?;
            let journal = Arc::new(Journal::open(&out.join("exchange_journal.jsonl"))?);
            let limiter = Arc::new(InFlightLimiter::new(max_in_flight));
            let (solver_backend, solver_config) = build_backend(&solver, &records)?;
            let (grader_backend, grader_config) = build_backend(&grader, &records)?;
            let solver_client = Client::new(solver_backend, solver_config)
                .with_journal(journal.clone())
                .with_limiter(limiter.clone());
            let grader_client = Client::new(grader_backend, grader_config)
                .with_journal(journal)
                .with_limiter(limiter);
            let manifest = RunManifest {
                corpus: corpus_path.clone(),
                solver,
                grader,
                judge,
                columns: columns.clone(),
                robustness: metric.config(seed),
                seed,
                out_dir: out.clone(),
            };
            manifest.save(&out.join("manifest.json"))?;
            let outcome =
                pipeline::cmd_evaluate(&records, &columns, &solver_client, &grader_client)?;
            evalmatrix::write_matrix(&out.join("matrix.csv"), &outcome.matrix)?;
            evalmatrix::append_verdicts(&out.join("verdicts.jsonl"), &outcome.verdicts)?;
            let (_, written) = pipeline::cmd_report(
                &outcome.matrix,
                Some(&outcome.verdicts),
                &manifest.robustness,
                &out,
            )?;
            println!(
                "evaluated {} cells over {} records; matrix and {} report files under {}",
                outcome.verdicts.len(),
                records.len(),
                written.len(),
                out.display()
            );
            for (item, column, error) in &outcome.failures {
                eprintln!("error: {item}/{column}: {error}");
            }
            Ok(if outcome.failures.is_empty() { 0 } else { 2 })
        }
        Command::Report { matrix, verdicts, seed, out, metric } => {
            let matrix = evalmatrix::read_matrix(&matrix)?;
            let entries = match verdicts {
                Some(path) => Some(evalmatrix::load_verdicts(&path)?),
                None => None,
            };
            let (_, written) =
                pipeline::cmd_report(&matrix, entries.as_deref(), &metric.config(seed), &out)?;
            println!("wrote {} report files under {}", written.len(), out.display());
            Ok(0)
        }
        Command::Metrics { matrix, seed, metric } => {
            let matrix = evalmatrix::read_matrix(&matrix)?;
            let bundle =
                gapeval::report::build_report(&matrix, None, &metric.config(seed))?;
            print!("{}", bundle.summary);
            Ok(0)
        }
        Command::Bound { t, k, j, eps } => {
            let delta = soundness_bound(t, k, j, eps)?;
            println!("delta <= {delta:e}  (T={t}, K={k}, J={j}, eps={eps})");
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("fatal: {err:#}");
            ExitCode::from(1)
        }
    }
}
