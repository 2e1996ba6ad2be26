//! Moment-alignment neural network: a single-hidden-layer softmax classifier
//! whose hidden activations are pulled toward the target domain by a central
//! moment discrepancy penalty.
//!
//! Training minimizes `CE(source) + λ · cmd(h(source), h(target))` by
//! minibatch stochastic gradient descent, where `h` is the sigmoid hidden
//! layer and the discrepancy is taken between the two domains' hidden
//! activation batches. With `λ = 0` the trainer reduces exactly — bit for
//! bit — to plain supervised SGD.
//!
//! # Public invariants (must never change)
//! - `forward` produces row-stochastic probabilities: every row sums to 1
//!   within 1e−12.
//! - Analytic gradients (`ce_grad`, `cmd_grad`) agree with central finite
//!   differences within 1e−5 relative error on small instances.
//! - `cmd_grad` has identically zero output-layer blocks, and any
//!   discrepancy term with norm below 1e−12 contributes the zero
//!   subgradient.
//! - Given a fixed `rng_seed`, training is deterministic; with `λ = 0` the
//!   resulting parameters are bit-identical regardless of the target sample.
//! - Predicted class is the argmax of the probability row, lowest index
//!   winning ties, and is invariant under adding a constant to every logit.

mod grad;
mod net;
mod optim;
mod train;

pub use grad::{ce_grad, cmd_grad, NetGrad};
pub use net::{accuracy, forward, predict_classes, LabeledBatch, NetParams};
pub use optim::{optimizer_step, OptimizerKind, OptimizerState};
pub use train::{full_objective, reverse_validation, train, train_from, TrainConfig};

pub use momenta_metrics::{default_weights, CmdWeights, Sample};

#[derive(Debug, thiserror::Error)]
pub enum MannError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },
    #[error("training diverged at iteration {iteration}: loss is not finite")]
    Divergence { iteration: usize },
    #[error(transparent)]
    Metrics(#[from] momenta_metrics::MetricsError),
}

pub type Result<T> = std::result::Result<T, MannError>;
