//! Domain-invariant iterative partial least squares.
//!
//! Classical one-response partial least squares (NIPALS) extracts latent
//! directions of maximal input–output covariance. This crate extends each
//! direction solve with a variance-alignment penalty: the matrix `Λ` built
//! from the absolute eigenvalues of the source/target covariance difference
//! upper-bounds, along every direction `w`, the absolute difference of the
//! two domains' variances. Penalizing `wᵀΛw` therefore biases the latent
//! space toward directions along which source and target spread equally —
//! a regression model fitted there transfers better to the target domain.
//!
//! Each component solves a closed-form regularized least-squares problem,
//! regresses the response on the source scores, and deflates both domain
//! matrices and the response before the next component. A per-component
//! heuristic choice of the penalty weight (equating the magnitudes of the
//! fitting and penalty terms) is available besides fixed and zero weights.
//!
//! # Public invariants (must never change)
//!
//! - `lambda_matrix` returns a symmetric positive-semidefinite matrix, and
//!   `|wᵀ(Cov(Sp) − Cov(Sq))w| ≤ wᵀΛw` for every direction `w`.
//! - With a zero penalty weight, `direction` is the normalized covariance
//!   direction `Sᵀy/‖Sᵀy‖`, and `fit` reproduces the classical NIPALS
//!   regression vector; identical source and target domains reduce to
//!   NIPALS for every weight because `Λ` vanishes.
//! - `direction` returns exactly the stated closed form: the minimizer of
//!   `‖S − ywᵀ‖²_F + γ·wᵀΛw` over all of `R^d`, scaled to unit length.
//! - Fitted weight-matrix columns have unit Euclidean norm; source score
//!   vectors of distinct components are mutually orthogonal to 1e−8
//!   relative accuracy; deflation never increases the Frobenius norm of
//!   the source matrix.
//! - `predict` maps the source training mean row to the training response
//!   mean.
//!
//! Fitting is sequential; a fitted model is immutable and safe to share
//! across threads.

mod eig;
mod model;

pub use eig::{solve_general, solve_spd, symmetric_eigen};
pub use model::{
    direction, fit, gamma_heuristic, lambda_matrix, predict, DiplsConfig, DiplsModel,
    GammaEstimate, GammaMode,
};

pub use momenta_metrics::Sample;

/// Errors reported by the fitting pipeline.
#[derive(Debug, thiserror::Error)]
pub enum DiplsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("direction solve is ill-conditioned (condition number {condition:.3e})")]
    IllConditioned { condition: f64 },
    #[error("degenerate component at iteration {iteration}: source score norm below 1e-14")]
    DegenerateComponent { iteration: usize },
    #[error("rank-deficient {context}: the loading/weight system is singular")]
    RankDeficient { context: &'static str },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
}

pub type Result<T> = std::result::Result<T, DiplsError>;
