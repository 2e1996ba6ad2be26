//! Network parameters, forward pass, and prediction helpers.

use ndarray::{Array1, Array2, Axis};
use rand::Rng;

use crate::{MannError, Result, Sample};

/// Parameters of the single-hidden-layer softmax network
/// `f(x) = softmax(W1 · sigmoid(W0 x + b0) + b1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetParams {
    w0: Array2<f64>,
    b0: Array1<f64>,
    w1: Array2<f64>,
    b1: Array1<f64>,
}

impl NetParams {
    /// Wrap explicit parameter blocks, validating shape consistency and
    /// finiteness. `w0` is `w×d`, `b0` length `w`, `w1` is `c×w`, `b1`
    /// length `c`.
    pub fn new(
        w0: Array2<f64>,
        b0: Array1<f64>,
        w1: Array2<f64>,
        b1: Array1<f64>,
    ) -> Result<Self> {
        let w = w0.nrows();
        if b0.len() != w {
            return Err(MannError::DimensionMismatch {
                expected: w,
                found: b0.len(),
            });
        }
        if w1.ncols() != w {
            return Err(MannError::DimensionMismatch {
                expected: w,
                found: w1.ncols(),
            });
        }
        if b1.len() != w1.nrows() {
            return Err(MannError::DimensionMismatch {
                expected: w1.nrows(),
                found: b1.len(),
            });
        }
        let finite = w0.iter().all(|v| v.is_finite())
            && b0.iter().all(|v| v.is_finite())
            && w1.iter().all(|v| v.is_finite())
            && b1.iter().all(|v| v.is_finite());
        if !finite {
            return Err(MannError::InvalidParameter {
                name: "params",
                message: "all parameter entries must be finite".into(),
            });
        }
        Ok(Self { w0, b0, w1, b1 })
    }

    /// Random initialization: weights uniform in `[−r, r]` with
    /// `r = √(6/(fan_in + fan_out))` per layer, biases zero. The scaling
    /// keeps the sigmoid layer away from saturation at the start.
    pub fn init_random(d: usize, w: usize, c: usize, rng: &mut impl Rng) -> Self {
        let r0 = (6.0 / (d + w) as f64).sqrt();
        let r1 = (6.0 / (w + c) as f64).sqrt();
        let w0 = Array2::from_shape_fn((w, d), |_| rng.random_range(-r0..r0));
        let w1 = Array2::from_shape_fn((c, w), |_| rng.random_range(-r1..r1));
        Self {
            w0,
            b0: Array1::zeros(w),
            w1,
            b1: Array1::zeros(c),
        }
    }

    /// Input dimension `d`.
    pub fn input_dim(&self) -> usize {
        self.w0.ncols()
    }

    /// Hidden width `w`.
    pub fn hidden_width(&self) -> usize {
        self.w0.nrows()
    }

    /// Class count `c`.
    pub fn class_count(&self) -> usize {
        self.w1.nrows()
    }

    pub fn w0(&self) -> &Array2<f64> {
        &self.w0
    }

    pub fn b0(&self) -> &Array1<f64> {
        &self.b0
    }

    pub fn w1(&self) -> &Array2<f64> {
        &self.w1
    }

    pub fn b1(&self) -> &Array1<f64> {
        &self.b1
    }

    /// Mutable flat views of the four blocks, in the fixed order
    /// `(W0, b0, W1, b1)`; used by the optimizers.
    pub(crate) fn blocks_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w0.as_slice_mut().expect("standard layout"),
            self.b0.as_slice_mut().expect("standard layout"),
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
        ]
    }
}

/// A sample with row-aligned class labels.
///
/// Labels are stored as an `n×c` row-stochastic matrix: one-hot rows for hard
/// labels, arbitrary distributions for soft ones.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledBatch {
    inputs: Sample,
    labels: Array2<f64>,
}

impl LabeledBatch {
    pub fn new(inputs: Sample, labels: Array2<f64>) -> Result<Self> {
        if labels.nrows() != inputs.nrows() {
            return Err(MannError::DimensionMismatch {
                expected: inputs.nrows(),
                found: labels.nrows(),
            });
        }
        if labels.ncols() == 0 {
            return Err(MannError::InvalidParameter {
                name: "labels",
                message: "at least one class is required".into(),
            });
        }
        for row in labels.rows() {
            let mut sum = 0.0;
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(MannError::InvalidParameter {
                        name: "labels",
                        message: format!("label entries must lie in [0, 1], found {v}"),
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > 1e-9 {
                return Err(MannError::InvalidParameter {
                    name: "labels",
                    message: format!("label rows must sum to 1, found {sum}"),
                });
            }
        }
        Ok(Self { inputs, labels })
    }

    /// Build one-hot labels from class indices.
    pub fn from_class_indices(inputs: Sample, classes: &[usize], class_count: usize) -> Result<Self> {
        if classes.len() != inputs.nrows() {
            return Err(MannError::DimensionMismatch {
                expected: inputs.nrows(),
                found: classes.len(),
            });
        }
        let mut labels = Array2::zeros((classes.len(), class_count));
        for (i, &class) in classes.iter().enumerate() {
            if class >= class_count {
                return Err(MannError::InvalidParameter {
                    name: "classes",
                    message: format!("class index {class} out of range for {class_count} classes"),
                });
            }
            labels[(i, class)] = 1.0;
        }
        Self::new(inputs, labels)
    }

    pub fn inputs(&self) -> &Sample {
        &self.inputs
    }

    pub fn labels(&self) -> &Array2<f64> {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.inputs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // Sample guarantees at least one row.
    }

    /// Gather the rows at `indices` into a new batch.
    pub(crate) fn select(&self, indices: &[usize]) -> Self {
        Self {
            inputs: Sample::new(self.inputs.view().select(Axis(0), indices))
                .expect("selected rows stay valid"),
            labels: self.labels.select(Axis(0), indices),
        }
    }
}

/// Forward pass: returns the hidden activations (`n×w`) and the class
/// probabilities (`n×c`, each row summing to 1).
pub fn forward(params: &NetParams, x: &Sample) -> Result<(Array2<f64>, Array2<f64>)> {
    if x.ncols() != params.input_dim() {
        return Err(MannError::DimensionMismatch {
            expected: params.input_dim(),
            found: x.ncols(),
        });
    }
    let mut hidden = x.view().dot(&params.w0.t());
    hidden += &params.b0;
    hidden.mapv_inplace(sigmoid);
    let mut logits = hidden.dot(&params.w1.t());
    logits += &params.b1;
    softmax_rows_inplace(&mut logits);
    Ok((hidden, logits))
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Row-wise softmax with per-row max shift for overflow safety.
fn softmax_rows_inplace(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

/// Predicted class per row: argmax of the probabilities, lowest index
/// winning ties.
pub fn predict_classes(params: &NetParams, x: &Sample) -> Result<Vec<usize>> {
    let (_, probs) = forward(params, x)?;
    Ok(probs
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_value = row[0];
            for (i, &v) in row.iter().enumerate().skip(1) {
                if v > best_value {
                    best = i;
                    best_value = v;
                }
            }
            best
        })
        .collect())
}

/// Fraction of rows whose predicted class equals the label argmax.
pub fn accuracy(params: &NetParams, batch: &LabeledBatch) -> Result<f64> {
    let predicted = predict_classes(params, batch.inputs())?;
    let mut hits = 0usize;
    for (row, &pred) in batch.labels().rows().into_iter().zip(predicted.iter()) {
        let mut truth = 0;
        let mut best = row[0];
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > best {
                truth = i;
                best = v;
            }
        }
        if truth == pred {
            hits += 1;
        }
    }
    Ok(hits as f64 / batch.len() as f64)
}
