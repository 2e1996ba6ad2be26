//! Minibatch training loop and reverse validation.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use momenta_metrics::default_weights;
use ndarray::Axis;

use crate::grad::{ce_grad, cmd_grad};
use crate::net::{accuracy, predict_classes, LabeledBatch, NetParams};
use crate::optim::{optimizer_step, OptimizerKind, OptimizerState};
use crate::{MannError, Result, Sample};

/// Hyper-parameters of a training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Hidden layer width `w`.
    pub hidden_width: usize,
    /// Class count `c`.
    pub class_count: usize,
    /// Highest discrepancy order `m`.
    pub cmd_order: usize,
    /// Regularization weight `λ ≥ 0`; zero disables the alignment term and
    /// makes training ignore the target sample entirely.
    pub reg_weight: f64,
    /// Rows drawn per domain per iteration (clamped to the domain size).
    pub batch_size: usize,
    /// Fixed number of minibatch steps.
    pub max_iters: usize,
    pub optimizer: OptimizerKind,
    /// Step size `α`.
    pub learning_rate: f64,
    /// Adadelta decay `ω ∈ (0, 1)`.
    pub decay: f64,
    /// Adadelta accumulator constant `ε`.
    pub epsilon: f64,
    /// Seed for initialization and both domain shuffles.
    pub rng_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden_width: 15,
            class_count: 2,
            cmd_order: 5,
            reg_weight: 1.0,
            batch_size: 32,
            max_iters: 10_000,
            optimizer: OptimizerKind::Adadelta,
            learning_rate: 1.0,
            decay: 0.95,
            epsilon: 1e-6,
            rng_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden_width == 0 {
            return Err(invalid("hidden_width", "must be at least 1"));
        }
        if self.class_count < 2 {
            return Err(invalid("class_count", "need at least two classes"));
        }
        if self.cmd_order == 0 {
            return Err(invalid("cmd_order", "must be at least 1"));
        }
        if !(self.reg_weight >= 0.0 && self.reg_weight.is_finite()) {
            return Err(invalid("reg_weight", "must be finite and nonnegative"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch_size", "must be at least 1"));
        }
        if self.reg_weight > 0.0 && self.batch_size < 2 {
            return Err(invalid(
                "batch_size",
                "central moments need at least 2 rows per batch when the regularizer is active",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning_rate", "must be finite and positive"));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(invalid("decay", "must lie strictly inside (0, 1)"));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be finite and positive"));
        }
        Ok(())
    }
}

fn invalid(name: &'static str, message: &str) -> MannError {
    MannError::InvalidParameter {
        name,
        message: message.into(),
    }
}

/// Without-replacement minibatch stream: shuffled epochs over `0..n`; when
/// fewer than a full batch remains, the remainder is discarded and a fresh
/// shuffled epoch begins.
struct EpochSampler {
    indices: Vec<usize>,
    cursor: usize,
    rng: ChaCha8Rng,
}

impl EpochSampler {
    fn new(n: usize, mut rng: ChaCha8Rng) -> Self {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        Self {
            indices,
            cursor: 0,
            rng,
        }
    }

    fn next_batch(&mut self, batch: usize) -> &[usize] {
        if self.cursor + batch > self.indices.len() {
            self.indices.shuffle(&mut self.rng);
            self.cursor = 0;
        }
        let slice = &self.indices[self.cursor..self.cursor + batch];
        self.cursor += batch;
        slice
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Train from a fresh random initialization.
///
/// Runs exactly `max_iters` minibatch steps on `∇[CE + λ·cmd]`. With
/// `λ = 0` the loop neither draws target batches nor touches the target
/// sample, so the result is bit-identical to plain supervised SGD under the
/// same seed. Deterministic given `rng_seed`: initialization and the two
/// domain shuffles consume three independent streams of one counter-based
/// generator.
pub fn train(config: &TrainConfig, source: &LabeledBatch, target: &Sample) -> Result<NetParams> {
    config.validate()?;
    let mut init_rng = stream_rng(config.rng_seed, 0);
    let params = NetParams::init_random(
        source.inputs().ncols(),
        config.hidden_width,
        config.class_count,
        &mut init_rng,
    );
    train_from(params, config, source, target)
}

/// Continue training from explicit initial parameters (used for warm starts
/// and two-phase protocols). Shuffle streams restart from the configured
/// seed; the initialization stream is not consumed.
pub fn train_from(
    initial: NetParams,
    config: &TrainConfig,
    source: &LabeledBatch,
    target: &Sample,
) -> Result<NetParams> {
    config.validate()?;
    if source.inputs().ncols() != target.ncols() {
        return Err(MannError::DimensionMismatch {
            expected: source.inputs().ncols(),
            found: target.ncols(),
        });
    }
    if initial.input_dim() != source.inputs().ncols() {
        return Err(MannError::DimensionMismatch {
            expected: source.inputs().ncols(),
            found: initial.input_dim(),
        });
    }
    if source.labels().ncols() != config.class_count {
        return Err(MannError::DimensionMismatch {
            expected: config.class_count,
            found: source.labels().ncols(),
        });
    }
    let regularized = config.reg_weight > 0.0;
    if regularized && (source.len() < 2 || target.nrows() < 2) {
        return Err(invalid(
            "domains",
            "alignment needs at least 2 rows in each domain",
        ));
    }
    // Equal batch sizes in both domains, clamped so an epoch always holds at
    // least one full batch.
    let batch = config
        .batch_size
        .min(source.len())
        .min(if regularized { target.nrows() } else { usize::MAX });
    let weights = default_weights(0.0, 1.0, config.cmd_order)?;

    let mut params = initial;
    let mut state = OptimizerState::new(config.optimizer, &params);
    let mut source_sampler = EpochSampler::new(source.len(), stream_rng(config.rng_seed, 1));
    let mut target_sampler =
        regularized.then(|| EpochSampler::new(target.nrows(), stream_rng(config.rng_seed, 2)));

    for iteration in 0..config.max_iters {
        let source_batch = source.select(source_sampler.next_batch(batch));
        let (mut grad, mut loss) = ce_grad(&params, &source_batch)?;
        if let Some(sampler) = target_sampler.as_mut() {
            let target_batch = Sample::new(
                target.view().select(Axis(0), sampler.next_batch(batch)),
            )?;
            let (reg_grad, reg_value) = cmd_grad(
                &params,
                source_batch.inputs(),
                &target_batch,
                config.cmd_order,
                &weights,
            )?;
            grad.add_scaled(&reg_grad, config.reg_weight);
            loss += config.reg_weight * reg_value;
        }
        if !loss.is_finite() || !grad.is_finite() {
            return Err(MannError::Divergence { iteration });
        }
        optimizer_step(&mut state, &mut params, &grad, config);
    }
    Ok(params)
}

/// Unsupervised model scoring by reverse validation.
///
/// The source is split `split`/(1−`split`) into a training part and a
/// held-out validation part. A forward model is trained on (source-train,
/// target), pseudo-labels the target, and a reverse model is then trained
/// with the pseudo-labeled target as its source and the source-train inputs
/// as its unlabeled target. The returned value is the reverse model's
/// classification error on the held-out source rows — a proxy for target
/// risk that uses no target labels.
pub fn reverse_validation(
    config: &TrainConfig,
    source: &LabeledBatch,
    target: &Sample,
    split: f64,
) -> Result<f64> {
    config.validate()?;
    if !(split > 0.0 && split < 1.0) {
        return Err(invalid("split", "must lie strictly inside (0, 1)"));
    }
    let n = source.len();
    let n_train = (split * n as f64).floor() as usize;
    let n_val = n - n_train;
    if n_train < 2 || n_val < 1 {
        return Err(invalid(
            "split",
            "both split parts need rows (≥2 train, ≥1 validation)",
        ));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut stream_rng(config.rng_seed, 3));
    let train_part = source.select(&indices[..n_train]);
    let val_part = source.select(&indices[n_train..]);

    let forward_model = train(config, &train_part, target)?;
    let pseudo = predict_classes(&forward_model, target)?;
    let pseudo_batch =
        LabeledBatch::from_class_indices(target.clone(), &pseudo, config.class_count)?;

    // The reverse run gets its own seed so its initialization is independent
    // of the forward model's.
    let reverse_config = TrainConfig {
        rng_seed: config.rng_seed.wrapping_add(1),
        ..config.clone()
    };
    let reverse_model = train_from(
        {
            let mut rng = stream_rng(reverse_config.rng_seed, 0);
            NetParams::init_random(
                target.ncols(),
                reverse_config.hidden_width,
                reverse_config.class_count,
                &mut rng,
            )
        },
        &reverse_config,
        &pseudo_batch,
        train_part.inputs(),
    )?;
    Ok(1.0 - accuracy(&reverse_model, &val_part)?)
}

/// Mean cross-entropy plus weighted discrepancy of a full dataset — exposed
/// for diagnostics and tests.
pub fn full_objective(
    params: &NetParams,
    config: &TrainConfig,
    source: &LabeledBatch,
    target: &Sample,
) -> Result<f64> {
    let (_, ce) = ce_grad(params, source)?;
    if config.reg_weight == 0.0 {
        return Ok(ce);
    }
    let weights = default_weights(0.0, 1.0, config.cmd_order)?;
    let (_, value) = cmd_grad(
        params,
        source.inputs(),
        target,
        config.cmd_order,
        &weights,
    )?;
    Ok(ce + config.reg_weight * value)
}
