//! Cross-domain alignment for panels of equal-length time series.
//!
//! Several domains each contribute a stack of series measured on a shared
//! integer time grid, together with a numeric descriptor vector for the
//! domain.  The toolkit aligns the domains in three stages:
//!
//! 1. [`fit_mean_curves`] condenses every domain into one smoothed mean curve
//!    per feature (cubic smoothing via a second-difference roughness penalty).
//! 2. [`fit_corrections`] fits, at a small set of equidistant anchor steps,
//!    linear correction functions that map a domain descriptor to the mean
//!    curve value at that anchor.  Neighbouring anchors are coupled by a
//!    quadratic similarity penalty and the linear coefficients carry an
//!    elementwise L1 penalty; the fit runs proximal gradient descent.
//! 3. [`transform`] removes the domain-specific component from a new series by
//!    subtracting, at every time step, a normalised geometrically-weighted
//!    blend of linear interpolations between nested anchor pairs.
//!
//! # Public invariants (must never change)
//!
//! - With a zero roughness penalty, [`fit_mean_curves`] returns the pointwise
//!   per-domain means exactly; constant and affine-in-time inputs are fixed
//!   points of the smoother for every penalty weight.
//! - The anchor grid is strictly increasing, starts at the first time step,
//!   ends at the last one, and is equidistant up to integer rounding.
//! - The proximal-gradient objective is non-increasing over accepted
//!   iterations, and the reported model is the best iterate observed.
//! - For every time step the normalised blend weights used by [`transform`]
//!   sum to one within 1e-12; with the all-zero correction model the
//!   transform returns the input channel bit-for-bit.
//! - Increasing the L1 weight far enough drives every linear coefficient to
//!   exactly zero while the anchor biases remain free.
//!
//! Time steps are indexed from zero throughout the public interface; anchor
//! positions are plain indices into the time axis.

mod model;
mod spline;

pub use model::{
    fit_corrections, fit_mean_curves, transform, CorrectionConfig, CorrectionModel, DomainSeries,
    MeanCurves, SmoothingConfig, TransformResult,
};
pub use spline::whittaker_smooth;

/// Errors reported by the alignment pipeline.
#[derive(Debug, thiserror::Error)]
pub enum ScitsmError {
    /// Two inputs that must agree in shape do not.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    /// A scalar or structural argument is outside its admissible range.
    #[error("invalid parameter {name}: {message}")]
    InvalidParameter {
        name: &'static str,
        message: String,
    },
    /// An input or an intermediate quantity is NaN or infinite.
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
}

pub type Result<T> = std::result::Result<T, ScitsmError>;
