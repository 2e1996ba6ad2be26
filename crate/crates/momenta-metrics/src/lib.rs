//! Sample-based distances between empirical distributions.
//!
//! The crate provides the distance family used throughout the toolkit for
//! measuring how far two samples are from each other in distribution:
//!
//! - [`cmd`]: central moment discrepancy — a weighted sum of Euclidean
//!   distances between mean vectors and higher-order marginal central-moment
//!   vectors, together with its default weighting and per-order bounds;
//! - [`mmd_squared`]: the biased V-statistic estimate of the squared maximum
//!   mean discrepancy for linear, polynomial and Gaussian kernels;
//! - [`coral`]: Frobenius norm of the difference of sample covariances;
//! - [`l1_moment_distance`]: ℓ1 distance between stacked raw marginal moments.
//!
//! ## Contract
//!
//! - No silent shape coercion: feature-dimension mismatches are errors.
//! - All estimators are plug-in statistics of the given samples; nothing is
//!   resampled or normalized behind the caller's back.
//! - Every operation is a pure function; inputs are immutable.

mod distances;
mod moments;
mod sample;

pub use distances::{
    coral, l1_moment_distance, l1_moment_terms, mmd_squared, mmd_squared_naive, KernelSpec,
};
pub use moments::{
    central_moments, cmd, cmd_term_bound, cmd_terms, cmd_with_options, cross_covariances,
    default_weights, CmdOptions, CmdWeights, MomentSummary,
};
pub use sample::Sample;

/// Errors reported by the distance estimators.
#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    /// Two samples (or a sample and a parameter vector) disagree on the
    /// feature dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    /// A scalar or vector argument is outside its documented domain.
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },
    /// An input matrix contains NaN or infinite entries.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
    /// CSV ingestion failed (I/O, ragged rows, or unparseable fields).
    #[error("csv error: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;
