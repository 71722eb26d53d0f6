//! Robustness evaluation toolkit for math-reasoning solvers.
//!
//! The library stress-tests a solver by pairing every problem in a corpus
//! with mathematically equivalent variants and measuring how much accuracy
//! survives the rewrite. It covers the full loop:
//!
//! - [`corpus`] — problem records, schema validation, difficulty strata;
//! - [`surfacegen`] — the four surface-renaming variant families
//!   (DL / DLC / DLM / GS) and token-aware substitution;
//! - [`kernelgen`] — kernel (parametric) variants: slot discovery,
//!   back-synthesis, question reverse-engineering and the repair-and-verify
//!   screening loop with its soundness bound;
//! - [`modelio`] — uniform client layer over solver/grader/judge backends
//!   with retries, structured-output parsing and an exchange journal;
//! - [`grading`] — strict/lenient rubrics, dual-path adjudication and the
//!   error taxonomy;
//! - [`evalmatrix`] — the aligned correctness matrix and derived vectors;
//! - [`metrics`] — the penalty-robustness index, its gradients and
//!   concentration intervals;
//! - [`pairstats`] — McNemar exact/chi-square tests, odds ratios and
//!   two-proportion z-tests;
//! - [`pipeline`] / [`report`] — batch orchestration and table rendering
//!   behind the `gapeval` CLI.

pub mod corpus;
pub mod evalmatrix;
pub mod grading;
pub mod kernelgen;
pub mod metrics;
pub mod modelio;
pub mod pairstats;
pub mod pipeline;
pub mod report;
pub mod surfacegen;
