//! Analytic gradients of the cross-entropy loss and the hidden-activation
//! central moment discrepancy.

use ndarray::{Array1, Array2, Axis};

use momenta_metrics::CmdWeights;

use crate::net::{forward, LabeledBatch, NetParams};
use crate::{MannError, Result, Sample};

/// Gradient (or accumulator) with the same block structure as [`NetParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrad {
    pub w0: Array2<f64>,
    pub b0: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
}

impl NetGrad {
    /// All-zero gradient matching the shape of `params`.
    pub fn zeros_like(params: &NetParams) -> Self {
        Self {
            w0: Array2::zeros(params.w0().dim()),
            b0: Array1::zeros(params.b0().len()),
            w1: Array2::zeros(params.w1().dim()),
            b1: Array1::zeros(params.b1().len()),
        }
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &NetGrad, scale: f64) {
        self.w0.scaled_add(scale, &other.w0);
        self.b0.scaled_add(scale, &other.b0);
        self.w1.scaled_add(scale, &other.w1);
        self.b1.scaled_add(scale, &other.b1);
    }

    pub fn is_finite(&self) -> bool {
        self.w0.iter().all(|v| v.is_finite())
            && self.b0.iter().all(|v| v.is_finite())
            && self.w1.iter().all(|v| v.is_finite())
            && self.b1.iter().all(|v| v.is_finite())
    }

    /// Flat views of the four blocks in the fixed order `(W0, b0, W1, b1)`.
    pub(crate) fn blocks(&self) -> [&[f64]; 4] {
        [
            self.w0.as_slice().expect("standard layout"),
            self.b0.as_slice().expect("standard layout"),
            self.w1.as_slice().expect("standard layout"),
            self.b1.as_slice().expect("standard layout"),
        ]
    }
}

/// Gradient of the mean cross-entropy `−(1/n) Σ_i Σ_k y_ik log f_k(x_i)`
/// over a labeled batch, together with the loss value.
///
/// The four blocks follow from the chain rule through the softmax and the
/// sigmoid: with `e = f(x) − y` per row,
/// `∇b1 = E[e]`, `∇W1 = E[e hᵀ]`, and the hidden backpropagation
/// `δ = (W1ᵀ e) ⊙ h ⊙ (1 − h)` gives `∇b0 = E[δ]`, `∇W0 = E[δ xᵀ]`.
pub fn ce_grad(params: &NetParams, batch: &LabeledBatch) -> Result<(NetGrad, f64)> {
    if batch.labels().ncols() != params.class_count() {
        return Err(MannError::DimensionMismatch {
            expected: params.class_count(),
            found: batch.labels().ncols(),
        });
    }
    let (hidden, probs) = forward(params, batch.inputs())?;
    let n = batch.len() as f64;
    let loss = -batch
        .labels()
        .iter()
        .zip(probs.iter())
        .map(|(&y, &f)| if y > 0.0 { y * f.ln() } else { 0.0 })
        .sum::<f64>()
        / n;
    let diff = &probs - batch.labels();
    let grad_b1 = diff.sum_axis(Axis(0)) / n;
    let grad_w1 = diff.t().dot(&hidden) / n;
    let mut delta = diff.dot(params.w1());
    delta *= &hidden;
    delta *= &(1.0 - &hidden);
    let grad_b0 = delta.sum_axis(Axis(0)) / n;
    let grad_w0 = delta.t().dot(&batch.inputs().view()) / n;
    Ok((
        NetGrad {
            w0: grad_w0,
            b0: grad_b0,
            w1: grad_w1,
            b1: grad_b1,
        },
        loss,
    ))
}

/// Per-domain statistics of the hidden activations needed by the
/// discrepancy gradient.
struct HiddenStats {
    /// Centered activations `h − h̄` (n×w).
    centered: Array2<f64>,
    /// Sigmoid derivative `q = h ⊙ (1 − h)` (n×w).
    q: Array2<f64>,
    /// Column means of `h` (w).
    mean: Array1<f64>,
    /// Column means of `q` (w).
    q_mean: Array1<f64>,
    /// `E[q_l · x_i]` (w×d).
    qx_mean: Array2<f64>,
    n: f64,
}

impl HiddenStats {
    fn compute(params: &NetParams, x: &Sample) -> Result<Self> {
        let (hidden, _) = forward(params, x)?;
        let n = hidden.nrows() as f64;
        let mean = hidden.sum_axis(Axis(0)) / n;
        let q = &hidden * &(1.0 - &hidden);
        let q_mean = q.sum_axis(Axis(0)) / n;
        let qx_mean = q.t().dot(&x.view()) / n;
        let centered = hidden - &mean;
        Ok(Self {
            centered,
            q,
            mean,
            q_mean,
            qx_mean,
            n,
        })
    }
}

/// Gradient of `cmd(h(x_s), h(x_t), m, weights)` with respect to the hidden
/// layer's parameters, plus the discrepancy value itself.
///
/// Only `(W0, b0)` receive nonzero entries — the hidden activations do not
/// depend on the output layer. Each order-`j` term differentiates as a
/// normalized inner product against the per-order moment difference; a term
/// whose norm falls below 1e−12 is nondifferentiable at zero and contributes
/// the zero subgradient.
pub fn cmd_grad(
    params: &NetParams,
    xs: &Sample,
    xt: &Sample,
    m: usize,
    weights: &CmdWeights,
) -> Result<(NetGrad, f64)> {
    if xs.ncols() != xt.ncols() {
        return Err(MannError::DimensionMismatch {
            expected: xs.ncols(),
            found: xt.ncols(),
        });
    }
    if weights.len() != m {
        return Err(MannError::InvalidParameter {
            name: "weights",
            message: format!("expected {} weights, found {}", m, weights.len()),
        });
    }
    const NORM_FLOOR: f64 = 1e-12;
    let s = HiddenStats::compute(params, xs)?;
    let t = HiddenStats::compute(params, xt)?;
    let w = params.hidden_width();
    let mut grad = NetGrad::zeros_like(params);
    let mut value = 0.0;
    let a = weights.as_slice();

    // Order 1: the mean term ‖h̄_s − h̄_t‖.
    let delta = &s.mean - &t.mean;
    let norm1 = delta.iter().map(|v| v * v).sum::<f64>().sqrt();
    value += a[0] * norm1;
    if norm1 >= NORM_FLOOR {
        for l in 0..w {
            let factor = a[0] * delta[l] / norm1;
            grad.b0[l] += factor * (s.q_mean[l] - t.q_mean[l]);
            for i in 0..params.input_dim() {
                grad.w0[(l, i)] += factor * (s.qx_mean[(l, i)] - t.qx_mean[(l, i)]);
            }
        }
    }

    // Orders j ≥ 2: central moment terms. `power` tracks (h − h̄)^{j−1}.
    let mut pow_s = s.centered.clone();
    let mut pow_t = t.centered.clone();
    for j in 2..=m {
        // Moment vectors c_j = E[(h − h̄)^j].
        let cj_s = (&pow_s * &s.centered).sum_axis(Axis(0)) / s.n;
        let cj_t = (&pow_t * &t.centered).sum_axis(Axis(0)) / t.n;
        let delta_c = &cj_s - &cj_t;
        let norm_j = delta_c.iter().map(|v| v * v).sum::<f64>().sqrt();
        value += a[j - 1] * norm_j;
        if norm_j >= NORM_FLOOR {
            let jf = j as f64;
            // d c_{j,l}/d b0_l = j · E[(h−h̄)^{j−1} (q − q̄)_l]; for W0 the
            // per-sample derivative q is replaced by q · x_i.
            let db_s = derivative_b(&pow_s, &s);
            let db_t = derivative_b(&pow_t, &t);
            let dw_s = derivative_w(&pow_s, &s, xs);
            let dw_t = derivative_w(&pow_t, &t, xt);
            for l in 0..w {
                let factor = a[j - 1] * delta_c[l] / norm_j * jf;
                grad.b0[l] += factor * (db_s[l] - db_t[l]);
                for i in 0..params.input_dim() {
                    grad.w0[(l, i)] += factor * (dw_s[(l, i)] - dw_t[(l, i)]);
                }
            }
        }
        if j < m {
            pow_s *= &s.centered;
            pow_t *= &t.centered;
        }
    }
    Ok((grad, value))
}

/// `E[(h−h̄)^{j−1} ⊙ q] − q̄ ⊙ E[(h−h̄)^{j−1}]`, per hidden node.
fn derivative_b(power: &Array2<f64>, stats: &HiddenStats) -> Array1<f64> {
    let pq_mean = (power * &stats.q).sum_axis(Axis(0)) / stats.n;
    let p_mean = power.sum_axis(Axis(0)) / stats.n;
    pq_mean - &(&stats.q_mean * &p_mean)
}

/// `E[(h−h̄)^{j−1} ⊙ q ⊙ x_i] − E[(h−h̄)^{j−1}] ⊙ E[q ⊙ x_i]`, w×d.
fn derivative_w(power: &Array2<f64>, stats: &HiddenStats, x: &Sample) -> Array2<f64> {
    let pq = power * &stats.q;
    let pqx_mean = pq.t().dot(&x.view()) / stats.n;
    let p_mean = power.sum_axis(Axis(0)) / stats.n;
    let mut out = pqx_mean;
    for l in 0..out.nrows() {
        for i in 0..out.ncols() {
            out[(l, i)] -= p_mean[l] * stats.qx_mean[(l, i)];
        }
    }
    out
}
