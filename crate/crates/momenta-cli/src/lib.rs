//! Experiment harness for the moment-based adaptation crates.
//!
//! This crate supplies everything around the four algorithm libraries that a
//! reproducible desk-scale study needs: seeded synthetic data generators, CSV
//! and JSON input/output, model serialization, experiment drivers with
//! embedded pass/fail assertions, and a versioned report format. The
//! `momenta` binary exposes all of it as subcommands.
//!
//! # Public invariants (must never change)
//!
//! - Full determinism: a fixed seed produces byte-identical reports and
//!   datasets across runs. All randomness flows through explicitly seeded,
//!   stream-separated counter-based generators; reports contain no
//!   timestamps, paths, or other environment-dependent values.
//! - Every generator's documented population means are matched by sample
//!   means within `4/√n` absolute.
//! - Every numeric cell of a report is finite; the report schema is
//!   versioned and its top level is exactly
//!   `{schema_version, experiment, seed, assertions, tables}`.
//! - Experiment drivers return their report regardless of assertion
//!   outcomes; the binary exits nonzero iff an embedded assertion failed,
//!   after printing a machine-readable failure list.
//! - Model files round-trip: `write` followed by `read` reconstructs a model
//!   whose predictions are bit-identical.
//!
//! Experiments run sequentially and share no mutable state; independent
//! experiments may run as separate processes.

pub mod experiments;
pub mod generate;
pub mod io;
pub mod model_io;
pub mod report;
pub mod sampling;

/// Errors reported by the harness: either a wrapped failure from one of the
/// algorithm crates or an I/O, parsing, or configuration problem of the
/// harness itself.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("metrics: {0}")]
    Metrics(#[from] momenta_metrics::MetricsError),
    #[error("maxent: {0}")]
    MaxEnt(#[from] momenta_maxent::MaxEntError),
    #[error("mann: {0}")]
    Mann(#[from] momenta_mann::MannError),
    #[error("dipals: {0}")]
    Dipls(#[from] momenta_dipals::DiplsError),
    #[error("scitsm: {0}")]
    Scitsm(#[from] momenta_scitsm::ScitsmError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

/// Shorthand for a harness-level validation error.
pub(crate) fn invalid(message: impl Into<String>) -> HarnessError {
    HarnessError::Invalid(message.into())
}
