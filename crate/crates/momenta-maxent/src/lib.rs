//! Maximum-entropy densities on `[0, 1]` constrained at Legendre moments.
//!
//! Among all densities on `[0, 1]` whose first `m` moments against an
//! orthonormal Legendre basis take prescribed values, the entropy maximizer
//! belongs to the polynomial exponential family
//! `q(x) = c(λ) · exp(−⟨λ, φ(x)⟩)` with `φ = (η_1, …, η_m)`. This crate fits
//! such densities by minimizing the smooth convex dual
//! `Γ(λ) = ⟨λ, μ⟩ + log Z(λ)` with a damped Newton iteration, and provides
//! entropy, Kullback–Leibler and L1 utilities evaluated on a fixed
//! Gauss–Legendre grid.
//!
//! # Public invariants (must never change)
//! - The basis is orthonormal: the Gram matrix of `η_1..η_5` under the
//!   module's quadrature is the identity to 1e−10, and every `η_j` integrates
//!   to zero.
//! - A fitted model's density integrates to 1 under quadrature (to 1e−8) and
//!   is strictly positive on `[0, 1]`.
//! - The sign convention is `exp(−⟨λ, φ⟩)`; `log_norm` stores `log Z(λ)`,
//!   i.e. the log of `1/c(λ)`.
//! - `μ = 0` fits to `λ = 0`, the uniform density, which has entropy 0.

mod basis;
mod model;
mod quadrature;

pub use basis::{empirical_legendre_moments, legendre_eval, LegendreBasis};
pub use model::{
    density_eval, entropy, fit_maxent, fit_maxent_detailed, kl, l1, FitReport, MaxEntModel,
};
pub use quadrature::QuadratureGrid;

/// Moment orders supported by the closed-form basis tables.
pub const MAX_ORDER: usize = 5;

/// Default stopping tolerance on the ℓ∞ norm of the dual gradient.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default Newton iteration cap.
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, thiserror::Error)]
pub enum MaxEntError {
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("fit did not converge in {iterations} iterations (gradient norm {grad_norm:.3e})")]
    ConvergenceFailure { iterations: usize, grad_norm: f64 },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
}

pub type Result<T> = std::result::Result<T, MaxEntError>;
