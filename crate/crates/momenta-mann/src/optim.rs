//! Parameter update rules: plain SGD, Adagrad, and Adadelta.

use crate::grad::NetGrad;
use crate::net::NetParams;
use crate::train::TrainConfig;

/// Update-rule selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    /// `θ ← θ − α·g`.
    Sgd,
    /// Per-coordinate scaling by accumulated squared gradients:
    /// `z ← z + g²` (z starts at 1), then `θ ← θ − α·g/√z`. The accumulator
    /// is updated with the current gradient *before* the scaling is applied.
    Adagrad,
    /// Decayed accumulators of squared gradients (`z`) and squared updates
    /// (`v`): `z ← ωz + (1−ω)g²`, `Δ = √(v+ε)/√(z+ε) ⊙ g`,
    /// `θ ← θ − α·Δ`, `v ← ωv + (1−ω)Δ²`. Both accumulators start at 0, so
    /// the numerator ε is what bootstraps the very first update.
    Adadelta,
}

impl std::str::FromStr for OptimizerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sgd" => Ok(Self::Sgd),
            "adagrad" => Ok(Self::Adagrad),
            "adadelta" => Ok(Self::Adadelta),
            other => Err(format!(
                "unknown optimizer `{other}` (expected sgd, adagrad or adadelta)"
            )),
        }
    }
}

/// Mutable per-parameter accumulators of the selected rule.
///
/// Invariant: all accumulator entries stay nonnegative — they are sums or
/// decayed averages of squares.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    kind: OptimizerKind,
    /// Squared-gradient accumulator (unused by plain SGD).
    z: NetGrad,
    /// Squared-update accumulator (Adadelta only).
    v: Option<NetGrad>,
    iterations: usize,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, params: &NetParams) -> Self {
        let mut z = NetGrad::zeros_like(params);
        if kind == OptimizerKind::Adagrad {
            // The accumulator starts at one so the first scaling factor is
            // 1/√(1 + g²).
            z.w0.fill(1.0);
            z.b0.fill(1.0);
            z.w1.fill(1.0);
            z.b1.fill(1.0);
        }
        let v = (kind == OptimizerKind::Adadelta).then(|| NetGrad::zeros_like(params));
        Self {
            kind,
            z,
            v,
            iterations: 0,
        }
    }

    pub fn kind(&self) -> OptimizerKind {
        self.kind
    }

    /// Update steps performed so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Apply one update of the selected rule to `params` in place.
pub fn optimizer_step(
    state: &mut OptimizerState,
    params: &mut NetParams,
    grad: &NetGrad,
    config: &TrainConfig,
) {
    let alpha = config.learning_rate;
    let grad_blocks = grad.blocks();
    match state.kind {
        OptimizerKind::Sgd => {
            for (theta, g) in params.blocks_mut().into_iter().zip(grad_blocks) {
                for (t, &gi) in theta.iter_mut().zip(g) {
                    *t -= alpha * gi;
                }
            }
        }
        OptimizerKind::Adagrad => {
            let z_blocks = [
                state.z.w0.as_slice_mut().expect("standard layout"),
                state.z.b0.as_slice_mut().expect("standard layout"),
                state.z.w1.as_slice_mut().expect("standard layout"),
                state.z.b1.as_slice_mut().expect("standard layout"),
            ];
            for ((theta, g), z) in params.blocks_mut().into_iter().zip(grad_blocks).zip(z_blocks)
            {
                for ((t, &gi), zi) in theta.iter_mut().zip(g).zip(z.iter_mut()) {
                    *zi += gi * gi;
                    *t -= alpha * gi / zi.sqrt();
                }
            }
        }
        OptimizerKind::Adadelta => {
            let omega = config.decay;
            let eps = config.epsilon;
            let v = state.v.as_mut().expect("adadelta state carries v");
            let z_blocks = [
                state.z.w0.as_slice_mut().expect("standard layout"),
                state.z.b0.as_slice_mut().expect("standard layout"),
                state.z.w1.as_slice_mut().expect("standard layout"),
                state.z.b1.as_slice_mut().expect("standard layout"),
            ];
            let v_blocks = [
                v.w0.as_slice_mut().expect("standard layout"),
                v.b0.as_slice_mut().expect("standard layout"),
                v.w1.as_slice_mut().expect("standard layout"),
                v.b1.as_slice_mut().expect("standard layout"),
            ];
            for (((theta, g), z), vv) in params
                .blocks_mut()
                .into_iter()
                .zip(grad_blocks)
                .zip(z_blocks)
                .zip(v_blocks)
            {
                for (((t, &gi), zi), vi) in
                    theta.iter_mut().zip(g).zip(z.iter_mut()).zip(vv.iter_mut())
                {
                    *zi = omega * *zi + (1.0 - omega) * gi * gi;
                    let delta = (*vi + eps).sqrt() / (*zi + eps).sqrt() * gi;
                    *t -= alpha * delta;
                    *vi = omega * *vi + (1.0 - omega) * delta * delta;
                }
            }
        }
    }
    state.iterations += 1;
}
