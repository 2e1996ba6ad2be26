//! Experiment drivers with embedded pass/fail assertions.
//!
//! Each driver is a pure function from `(seed, knobs)` to a [`Report`]; it
//! never exits the process and returns its report whether or not the
//! embedded assertions passed, so callers can persist artifacts before
//! deciding the exit code. Knob maps are validated against a per-experiment
//! allowlist — a misspelled knob is an error, not a silently applied
//! default.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use momenta_dipals::{DiplsConfig, GammaMode};
use momenta_mann::{accuracy, train, LabeledBatch, NetParams, OptimizerKind, TrainConfig};
use momenta_maxent::{
    density_eval, fit_maxent, l1, LegendreBasis, QuadratureGrid, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use momenta_metrics::{cmd, cmd_terms, mmd_squared, CmdOptions, CmdWeights, KernelSpec, Sample};
use momenta_scitsm::{
    fit_corrections, fit_mean_curves, transform, CorrectionConfig, CorrectionModel,
    SmoothingConfig,
};
use ndarray::{Array1, Array2};

use crate::generate::{
    default_descriptors, gen_multidomain_ts, gen_overpenalization, gen_toy_with, offset_of,
    ToyKnobs, TsKnobs,
};
use crate::report::{write_plot, Report};
use crate::sampling::{stream_rng, MinMaxScaler};
use crate::{invalid, io, Result};
use rand::Rng;
use rand_distr::StandardNormal;

/// The experiments the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    ToyMann,
    Overpenalization,
    BoundsDemo,
    DipalsSynth,
    ScitsmSynth,
    Sweep,
}

impl Experiment {
    /// The report/CLI name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::ToyMann => "toy-mann",
            Self::Overpenalization => "overpenalization",
            Self::BoundsDemo => "bounds-demo",
            Self::DipalsSynth => "dipals-synth",
            Self::ScitsmSynth => "scitsm-synth",
            Self::Sweep => "sweep",
        }
    }

    /// Knob names the experiment accepts.
    fn allowed_knobs(&self) -> &'static [&'static str] {
        match self {
            Self::ToyMann => &["n_per_class", "iters", "hidden", "batch", "lambda", "m"],
            Self::Overpenalization => &["n"],
            Self::BoundsDemo => &["m", "grid"],
            Self::DipalsSynth => &["n", "components"],
            Self::ScitsmSynth => &[
                "domains", "series", "steps", "features", "sigma", "smooth", "anchors", "beta",
            ],
            Self::Sweep => &["n_per_class", "iters", "hidden", "batch"],
        }
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "toy-mann" => Ok(Self::ToyMann),
            "overpenalization" => Ok(Self::Overpenalization),
            "bounds-demo" => Ok(Self::BoundsDemo),
            "dipals-synth" => Ok(Self::DipalsSynth),
            "scitsm-synth" => Ok(Self::ScitsmSynth),
            "sweep" => Ok(Self::Sweep),
            other => Err(format!(
                "unknown experiment `{other}` (expected toy-mann, overpenalization, bounds-demo, \
                 dipals-synth, scitsm-synth, or sweep)"
            )),
        }
    }
}

/// A fully specified experiment run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Numeric knobs; missing entries fall back to documented defaults.
    pub knobs: BTreeMap<String, f64>,
    /// Sweep only: which parameter to vary (`m` or `lambda`).
    pub sweep_param: Option<String>,
    /// Sweep only: the values to visit.
    pub sweep_values: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// A config with default knobs.
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        Self {
            experiment,
            seed,
            knobs: BTreeMap::new(),
            sweep_param: None,
            sweep_values: None,
        }
    }
}

fn validate_knobs(config: &ExperimentConfig) -> Result<()> {
    let allowed = config.experiment.allowed_knobs();
    for (key, value) in &config.knobs {
        if !allowed.contains(&key.as_str()) {
            return Err(invalid(format!(
                "experiment `{}` accepts no knob `{key}` (allowed: {})",
                config.experiment.name(),
                allowed.join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(invalid(format!("knob `{key}` must be finite")));
        }
    }
    Ok(())
}

fn knob(config: &ExperimentConfig, key: &str, default: f64) -> f64 {
    config.knobs.get(key).copied().unwrap_or(default)
}

fn knob_usize(config: &ExperimentConfig, key: &str, default: usize) -> Result<usize> {
    let raw = knob(config, key, default as f64);
    let rounded = raw.round();
    if (raw - rounded).abs() > 1e-9 || rounded < 0.0 {
        return Err(invalid(format!(
            "knob `{key}` must be a nonnegative integer, got {raw}"
        )));
    }
    Ok(rounded as usize)
}

/// Run one experiment end-to-end and return its report.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    validate_knobs(config)?;
    match config.experiment {
        Experiment::ToyMann => toy_mann(config),
        Experiment::Overpenalization => overpenalization(config),
        Experiment::BoundsDemo => bounds_demo(config),
        Experiment::DipalsSynth => dipals_synth(config),
        Experiment::ScitsmSynth => scitsm_synth(config),
        Experiment::Sweep => sweep(config),
    }
}

/// Run an experiment and persist `report.json`, table CSVs, and the
/// experiment's plot files into `out_dir`.
pub fn run_and_write(config: &ExperimentConfig, out_dir: impl AsRef<Path>) -> Result<Report> {
    let report = run(config)?;
    let dir = out_dir.as_ref();
    report.write(dir)?;
    write_plots(&report, dir)?;
    Ok(report)
}

/// Two-column plot projections per experiment: `(file, table, x, y)`.
fn plot_specs(experiment: &str) -> &'static [(&'static str, &'static str, &'static str, &'static str)] {
    match experiment {
        "toy-mann" => &[("target_accuracy_vs_lambda", "accuracy", "lambda", "target_accuracy")],
        "overpenalization" => &[
            ("term_left_vs_order", "cmd_terms", "order", "term_p_qleft"),
            ("term_right_vs_order", "cmd_terms", "order", "term_p_qright"),
        ],
        "bounds-demo" => &[("l1_vs_moment_gap", "bounds", "moment_l1", "l1_distance")],
        "dipals-synth" => &[("gamma_vs_component", "per_component", "component", "gamma")],
        "scitsm-synth" => &[("gap_vs_step", "alignment", "step", "max_gap")],
        "sweep" => &[("accuracy_vs_param", "sweep", "param_value", "target_accuracy")],
        _ => &[],
    }
}

fn write_plots(report: &Report, dir: &Path) -> Result<()> {
    for (file, table_name, x, y) in plot_specs(&report.experiment) {
        let table = report
            .tables
            .get(*table_name)
            .ok_or_else(|| invalid(format!("plot source table `{table_name}` missing")))?;
        let xi = table
            .columns
            .iter()
            .position(|c| c == x)
            .ok_or_else(|| invalid(format!("plot column `{x}` missing in `{table_name}`")))?;
        let yi = table
            .columns
            .iter()
            .position(|c| c == y)
            .ok_or_else(|| invalid(format!("plot column `{y}` missing in `{table_name}`")))?;
        let points: Vec<(f64, f64)> = table.rows.iter().map(|r| (r[xi], r[yi])).collect();
        write_plot(dir, file, x, y, &points)?;
    }
    Ok(())
}

/// Shared trainer for the toy problems: scale inputs on the union of both
/// domains, train with the given regularization weight, and report
/// accuracies on both domains.
struct ToyRun {
    source_accuracy: f64,
    target_accuracy: f64,
}

struct ToyProblem {
    source: LabeledBatch,
    target: Sample,
    target_eval: LabeledBatch,
    scaler: MinMaxScaler,
}

fn toy_problem(seed: u64, n_per_class: usize) -> Result<ToyProblem> {
    let data = gen_toy_with(
        seed,
        ToyKnobs {
            n_per_class,
            ..ToyKnobs::default()
        },
    )?;
    let scaler = MinMaxScaler::fit(&[data.source.view(), data.target.view()])?;
    let source = scaler.transform(&data.source.view())?;
    let target = scaler.transform(&data.target.view())?;
    let source_one_hot = io::labels_to_one_hot(&data.source_labels, 3)?;
    let target_one_hot = io::labels_to_one_hot(&data.target_labels, 3)?;
    Ok(ToyProblem {
        source: LabeledBatch::new(Sample::new(source)?, source_one_hot)?,
        target: Sample::new(target.clone())?,
        target_eval: LabeledBatch::new(Sample::new(target)?, target_one_hot)?,
        scaler,
    })
}

fn toy_train(
    problem: &ToyProblem,
    config: &ExperimentConfig,
    reg_weight: f64,
    cmd_order: usize,
) -> Result<(NetParams, ToyRun)> {
    let train_config = TrainConfig {
        hidden_width: knob_usize(config, "hidden", 15)?,
        class_count: 3,
        cmd_order,
        reg_weight,
        batch_size: knob_usize(config, "batch", 32)?,
        max_iters: knob_usize(config, "iters", 4000)?,
        optimizer: OptimizerKind::Adadelta,
        learning_rate: 1.0,
        decay: 0.95,
        epsilon: 1e-6,
        rng_seed: config.seed,
    };
    let params = train(&train_config, &problem.source, &problem.target)?;
    let run = ToyRun {
        source_accuracy: accuracy(&params, &problem.source)?,
        target_accuracy: accuracy(&params, &problem.target_eval)?,
    };
    Ok((params, run))
}

/// Toy adaptation study: identical training twice, once unregularized and
/// once with the moment-alignment term, on the rotated-and-shifted blobs.
fn toy_mann(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config.experiment.name(), config.seed);
    let n_per_class = knob_usize(config, "n_per_class", 100)?;
    let lambda = knob(config, "lambda", 1.0);
    let m = knob_usize(config, "m", 5)?;
    let problem = toy_problem(config.seed, n_per_class)?;

    let (_, baseline) = toy_train(&problem, config, 0.0, m)?;
    let (_, adapted) = toy_train(&problem, config, lambda, m)?;

    report.push_assertion(
        "baseline_source_accuracy",
        baseline.source_accuracy >= 0.95,
        format!(
            "unregularized source accuracy {:.4} (required ≥ 0.95)",
            baseline.source_accuracy
        ),
    );
    report.push_assertion(
        "adaptation_gain",
        adapted.target_accuracy >= baseline.target_accuracy + 0.05,
        format!(
            "target accuracy {:.4} (regularized) vs {:.4} (baseline); required gain ≥ 0.05",
            adapted.target_accuracy, baseline.target_accuracy
        ),
    );

    report.insert_table(
        "accuracy",
        vec![
            "lambda".to_string(),
            "source_accuracy".to_string(),
            "target_accuracy".to_string(),
        ],
        vec![
            vec![0.0, baseline.source_accuracy, baseline.target_accuracy],
            vec![lambda, adapted.source_accuracy, adapted.target_accuracy],
        ],
    )?;
    let scaler_rows: Vec<Vec<f64>> = problem
        .scaler
        .mins()
        .iter()
        .zip(problem.scaler.maxs().iter())
        .enumerate()
        .map(|(j, (lo, hi))| vec![j as f64, *lo, *hi])
        .collect();
    report.insert_table(
        "scaler",
        vec!["feature".to_string(), "min".to_string(), "max".to_string()],
        scaler_rows,
    )?;
    Ok(report)
}

/// Mean-over-penalization study: the printed Beta/Normal triple where the
/// order-wise discrepancy ranks the Normal as farther while the quadratic
/// kernel distance ranks it as closer.
fn overpenalization(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config.experiment.name(), config.seed);
    let n = knob_usize(config, "n", 1_000_000)?;
    let (p, q_left, q_right) = gen_overpenalization(config.seed, n)?;
    let p = Sample::new(p)?;
    let q_left = Sample::new(q_left)?;
    let q_right = Sample::new(q_right)?;

    let weights = CmdWeights::new(vec![1.0; 4])?;
    let cmd_left = cmd(&p, &q_left, 4, &weights)?;
    let cmd_right = cmd(&p, &q_right, 4, &weights)?;
    let kernel = KernelSpec::Polynomial { degree: 2, bias: 1.0 };
    let mmd_left = mmd_squared(&p, &q_left, kernel)?;
    let mmd_right = mmd_squared(&p, &q_right, kernel)?;

    report.push_assertion(
        "cmd_ranks_normal_farther",
        cmd_left > cmd_right,
        format!("cmd₄(p, q_left) = {cmd_left:.6} vs cmd₄(p, q_right) = {cmd_right:.6}"),
    );
    report.push_assertion(
        "mmd_ranks_normal_closer",
        mmd_left < mmd_right,
        format!("mmd²(p, q_left) = {mmd_left:.6} vs mmd²(p, q_right) = {mmd_right:.6}"),
    );
    report.assert_in_range("cmd_left_population_band", cmd_left, 0.015, 0.03);
    report.assert_in_range("mmd_right_population_band", mmd_right, 0.0008, 0.0016);

    let budget = 4.0 / (n as f64).sqrt();
    let mean = |s: &Sample| s.view().column(0).sum() / n as f64;
    let (mean_p, mean_left, mean_right) = (mean(&p), mean(&q_left), mean(&q_right));
    report.assert_in_range("mean_p", mean_p, 0.5 - budget, 0.5 + budget);
    report.assert_in_range("mean_q_left", mean_left, 0.5 - budget, 0.5 + budget);
    report.assert_in_range("mean_q_right", mean_right, 0.52 - budget, 0.52 + budget);

    report.insert_table(
        "distances",
        vec![
            "cmd_p_qleft".to_string(),
            "cmd_p_qright".to_string(),
            "mmd_p_qleft".to_string(),
            "mmd_p_qright".to_string(),
        ],
        vec![vec![cmd_left, cmd_right, mmd_left, mmd_right]],
    )?;
    let terms_left = cmd_terms(&p, &q_left, 4, CmdOptions::default())?;
    let terms_right = cmd_terms(&p, &q_right, 4, CmdOptions::default())?;
    let term_rows: Vec<Vec<f64>> = terms_left
        .iter()
        .zip(terms_right.iter())
        .enumerate()
        .map(|(i, (l, r))| vec![(i + 1) as f64, *l, *r])
        .collect();
    report.insert_table(
        "cmd_terms",
        vec![
            "order".to_string(),
            "term_p_qleft".to_string(),
            "term_p_qright".to_string(),
        ],
        term_rows,
    )?;
    report.insert_table(
        "means",
        vec![
            "mean_p".to_string(),
            "mean_qleft".to_string(),
            "mean_qright".to_string(),
        ],
        vec![vec![mean_p, mean_left, mean_right]],
    )?;
    Ok(report)
}

/// Density-difference bound study over pairs of fitted maximum-entropy
/// densities: sweeps a moment perturbation through the bound's precondition
/// threshold and records both sides of the inequality.
fn bounds_demo(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config.experiment.name(), config.seed);
    let m = knob_usize(config, "m", 2)?;
    if !(2..=5).contains(&m) {
        return Err(invalid(format!("knob `m` must lie in [2, 5], got {m}")));
    }
    let grid_size = knob_usize(config, "grid", 8)?;
    if grid_size < 2 {
        return Err(invalid("knob `grid` must be at least 2"));
    }
    let quad = QuadratureGrid::default_rule();
    let big_c = 2.0 * ((3.0 * m as f64 - 1.0) / 2.0).exp();
    let threshold = 1.0 / (2.0 * big_c * (m as f64 + 1.0));

    // Base moments and an ℓ1-normalized perturbation direction; both fixed,
    // mildly non-uniform, and well inside the feasible moment set.
    let base_mu: Vec<f64> = [0.12, -0.08, 0.05, 0.03, -0.02][..m].to_vec();
    let raw_dir: Vec<f64> = [1.0, -0.7, 0.5, -0.3, 0.2][..m].to_vec();
    let dir_norm: f64 = raw_dir.iter().map(|v| v.abs()).sum();
    let dir: Vec<f64> = raw_dir.iter().map(|v| v / dir_norm).collect();

    let fit = |mu: &[f64]| fit_maxent(mu, LegendreBasis::new(m)?, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let base_model = fit(&base_mu)?;
    let base_moments = base_model.moments(&quad);

    // Scale ladder: zero (identical densities) followed by a geometric
    // sweep crossing the precondition threshold from below.
    let mut scales = vec![0.0];
    for j in 0..grid_size - 1 {
        scales.push(threshold * 2f64.powi(j as i32) / 16.0);
    }

    let mut rows = Vec::with_capacity(scales.len());
    let mut holds_under_precondition = true;
    let mut precondition_rows = 0usize;
    for scale in &scales {
        let mu_q: Vec<f64> = base_mu
            .iter()
            .zip(dir.iter())
            .map(|(b, d)| b + scale * d)
            .collect();
        let q_model = fit(&mu_q)?;
        let q_moments = q_model.moments(&quad);
        let moment_l1: f64 = base_moments
            .iter()
            .zip(q_moments.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        let left = l1(
            |x| density_eval(&base_model, x).expect("quadrature nodes lie in the domain"),
            |x| density_eval(&q_model, x).expect("quadrature nodes lie in the domain"),
            &quad,
        );
        // Both densities are exact members of the order-m family, so the
        // approximation defect ε is zero and its √(8ε) term vanishes.
        let right = (2.0 * big_c).sqrt() * moment_l1;
        let precondition_ok = moment_l1 <= threshold;
        let satisfied = left <= right + 1e-12;
        if precondition_ok {
            precondition_rows += 1;
            if !satisfied {
                holds_under_precondition = false;
            }
        }
        rows.push(vec![
            *scale,
            left,
            moment_l1,
            right,
            threshold,
            if precondition_ok { 1.0 } else { 0.0 },
            if satisfied { 1.0 } else { 0.0 },
        ]);
    }

    let zero_row = &rows[0];
    report.push_assertion(
        "identical_densities_both_sides_zero",
        zero_row[1] <= 1e-12 && zero_row[3] <= 1e-12,
        format!("scale 0 row: left {} right {}", zero_row[1], zero_row[3]),
    );
    report.push_assertion(
        "bound_holds_under_precondition",
        holds_under_precondition,
        format!("checked {precondition_rows} rows with ‖Δμ‖₁ ≤ {threshold:.6}"),
    );
    report.push_assertion(
        "precondition_nonvacuous",
        precondition_rows > 0,
        format!("{precondition_rows} of {} rows meet the precondition", rows.len()),
    );
    report.push_assertion(
        "rows_match_sweep_size",
        rows.len() == grid_size,
        format!("{} rows for sweep size {grid_size}", rows.len()),
    );

    report.insert_table(
        "bounds",
        vec![
            "scale".to_string(),
            "l1_distance".to_string(),
            "moment_l1".to_string(),
            "right_side".to_string(),
            "precondition_threshold".to_string(),
            "precondition_ok".to_string(),
            "satisfied".to_string(),
        ],
        rows,
    )?;
    Ok(report)
}

/// Fixed rank-3 loading matrix of the synthetic regression problem.
const DIPALS_LOADINGS: [[f64; 8]; 3] = [
    [0.9, -0.3, 0.5, 0.1, -0.7, 0.2, 0.4, -0.1],
    [0.2, 0.8, -0.4, 0.6, 0.1, -0.5, 0.3, 0.2],
    [-0.4, 0.1, 0.7, -0.2, 0.3, 0.6, -0.6, 0.5],
];
/// Latent regression coefficients.
const DIPALS_COEFF: [f64; 3] = [1.2, -0.8, 0.5];
/// Per-latent scale of the target domain (covariance shift).
const DIPALS_TARGET_SCALE: [f64; 3] = [1.5, 0.6, 1.0];
/// Per-latent shift of the target domain (mean shift).
const DIPALS_TARGET_SHIFT: [f64; 3] = [0.4, -0.2, 0.1];

/// Draw one latent-factor regression domain: stream draw order per row is
/// `z₀ z₁ z₂`, eight input noises, one response noise.
fn dipals_domain(
    seed: u64,
    stream: u64,
    n: usize,
    scale: &[f64; 3],
    shift: &[f64; 3],
) -> (Array2<f64>, Array1<f64>) {
    let mut rng = stream_rng(seed, stream);
    let mut x = Array2::zeros((n, 8));
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut z = [0.0; 3];
        for (k, slot) in z.iter_mut().enumerate() {
            let draw: f64 = rng.sample(StandardNormal);
            *slot = scale[k] * draw + shift[k];
        }
        for j in 0..8 {
            let noise: f64 = rng.sample(StandardNormal);
            x[[i, j]] = (0..3).map(|k| z[k] * DIPALS_LOADINGS[k][j]).sum::<f64>() + 0.05 * noise;
        }
        let noise: f64 = rng.sample(StandardNormal);
        y[i] = (0..3).map(|k| z[k] * DIPALS_COEFF[k]).sum::<f64>() + 0.05 * noise;
    }
    (x, y)
}

fn rmse(predicted: &Array1<f64>, truth: &Array1<f64>) -> f64 {
    let n = truth.len() as f64;
    (predicted
        .iter()
        .zip(truth.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Synthetic regression-transfer study: rank-3 latent inputs whose target
/// domain rescales the latents, fitted once unpenalized and once with the
/// per-component heuristic weight.
fn dipals_synth(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config.experiment.name(), config.seed);
    let n = knob_usize(config, "n", 150)?;
    let components = knob_usize(config, "components", 3)?;
    let (xs, ys) = dipals_domain(config.seed, 0, n, &[1.0; 3], &[0.0; 3]);
    let (xt, yt) = dipals_domain(config.seed, 1, n, &DIPALS_TARGET_SCALE, &DIPALS_TARGET_SHIFT);
    let xs = Sample::new(xs)?;
    let xt = Sample::new(xt)?;

    let mut model_rows = Vec::new();
    let mut per_component_rows = Vec::new();
    let mut all_finite = true;
    let mut gammas_ok = true;
    let mut counts_ok = true;
    let mut plain_source_rmse = f64::NAN;
    for (penalized, mode) in [(0.0, GammaMode::Zero), (1.0, GammaMode::Heuristic)] {
        let model = momenta_dipals::fit(
            &xs,
            &ys,
            &xt,
            &DiplsConfig {
                n_components: components,
                gamma_mode: mode,
            },
        )?;
        let pred_source = momenta_dipals::predict(&model, &xs)?;
        let pred_target = momenta_dipals::predict(&model, &xt)?;
        all_finite = all_finite
            && pred_source.iter().all(|v| v.is_finite())
            && pred_target.iter().all(|v| v.is_finite());
        gammas_ok = gammas_ok && model.gammas().iter().all(|g| g.is_finite() && *g >= 0.0);
        counts_ok = counts_ok
            && model.gammas().len() == components
            && model.variance_gaps().len() == components;
        let source_rmse = rmse(&pred_source, &ys);
        if mode == GammaMode::Zero {
            plain_source_rmse = source_rmse;
        }
        model_rows.push(vec![
            penalized,
            source_rmse,
            rmse(&pred_target, &yt),
            model.warnings().len() as f64,
        ]);
        if mode == GammaMode::Heuristic {
            for (i, (g, gap)) in model
                .gammas()
                .iter()
                .zip(model.variance_gaps().iter())
                .enumerate()
            {
                per_component_rows.push(vec![(i + 1) as f64, *g, *gap]);
            }
        }
    }

    let y_std = {
        let mean = ys.sum() / ys.len() as f64;
        (ys.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / ys.len() as f64).sqrt()
    };
    report.push_assertion(
        "predictions_finite",
        all_finite,
        "all predictions on both domains are finite",
    );
    report.push_assertion(
        "penalty_weights_nonnegative",
        gammas_ok,
        "every per-component penalty weight is finite and ≥ 0",
    );
    report.push_assertion(
        "per_component_diagnostics_complete",
        counts_ok,
        format!("expected {components} penalty weights and variance gaps per fit"),
    );
    report.push_assertion(
        "unpenalized_fit_informative",
        plain_source_rmse < y_std,
        format!("source RMSE {plain_source_rmse:.4} vs response spread {y_std:.4}"),
    );

    report.insert_table(
        "models",
        vec![
            "penalized".to_string(),
            "rmse_source".to_string(),
            "rmse_target".to_string(),
            "warning_count".to_string(),
        ],
        model_rows,
    )?;
    report.insert_table(
        "per_component",
        vec![
            "component".to_string(),
            "gamma".to_string(),
            "variance_gap".to_string(),
        ],
        per_component_rows,
    )?;
    Ok(report)
}

/// Multi-domain series alignment study on generated data with a known
/// descriptor-to-offset law.
fn scitsm_synth(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config.experiment.name(), config.seed);
    let domains = knob_usize(config, "domains", 5)?;
    let series = knob_usize(config, "series", 40)?;
    let steps = knob_usize(config, "steps", 40)?;
    let features = knob_usize(config, "features", 2)?;
    let sigma = knob(config, "sigma", 0.05);
    let smooth = knob(config, "smooth", 2.0);
    let anchors = knob_usize(config, "anchors", 10)?;
    let beta = knob(config, "beta", 1e-4);

    let rhos = default_descriptors(domains);
    let data = gen_multidomain_ts(
        config.seed,
        &rhos,
        TsKnobs {
            series_per_domain: series,
            features,
            steps,
            noise_sigma: sigma,
            scale_coupling: 0.0,
        },
    )?;
    let curves = fit_mean_curves(&data, smooth)?;
    let correction_config = CorrectionConfig {
        anchor_count: Some(anchors),
        beta,
        ..CorrectionConfig::default()
    };
    let model = fit_corrections(&curves, &rhos, &correction_config)?;
    let smoothing = SmoothingConfig::default();

    // Transform every domain's mean curve and measure cross-domain spread.
    let mut transformed = Vec::with_capacity(domains);
    for (i, rho) in rhos.iter().enumerate() {
        let curve = curves.curves().index_axis(ndarray::Axis(0), i).to_owned();
        transformed.push(transform(&curve, rho, &model, &smoothing)?);
    }
    // Two k-averaged mean curves differ by about σ·√(2/k) per step; three
    // of those is the acceptance budget.
    let bound = 3.0 * sigma * (2.0 / series as f64).sqrt();
    let mut alignment_rows = Vec::with_capacity(steps);
    let mut worst_gap = 0.0f64;
    for step in 0..steps {
        let values: Vec<f64> = transformed.iter().map(|t| t.values()[step]).collect();
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let gap = max - min;
        worst_gap = worst_gap.max(gap);
        alignment_rows.push(vec![step as f64, gap, bound]);
    }
    report.push_assertion(
        "aligned_within_noise",
        worst_gap <= bound,
        format!("worst cross-domain gap {worst_gap:.5} vs budget {bound:.5}"),
    );

    // The fitted anchor maps recover the documented descriptor-to-offset
    // law up to the shared base term, which cancels in domain differences.
    let mut offset_error = 0.0f64;
    for j in 0..model.n_anchors() {
        for a in 0..domains {
            for b in (a + 1)..domains {
                let fitted = model.phi(j, &rhos[a].view())?[0] - model.phi(j, &rhos[b].view())?[0];
                let truth = offset_of(0, &rhos[a]) - offset_of(0, &rhos[b]);
                offset_error = offset_error.max((fitted - truth).abs());
            }
        }
    }
    report.push_assertion(
        "offset_map_recovered",
        offset_error <= bound,
        format!("worst anchor-level offset error {offset_error:.5} vs budget {bound:.5}"),
    );

    // A zero correction model must return the input channel bit-for-bit.
    let zero = CorrectionModel::zero(
        model.anchors().to_vec(),
        model.descriptor_dim(),
        model.n_features(),
    )?;
    let curve0 = curves.curves().index_axis(ndarray::Axis(0), 0).to_owned();
    let identity = transform(&curve0, &rhos[0], &zero, &smoothing)?;
    let channel: Vec<f64> = curve0.row(0).to_vec();
    report.push_assertion(
        "zero_model_identity",
        identity.values().to_vec() == channel,
        "zero-parameter model reproduces the input channel exactly",
    );
    // The norm data term keeps a unit-magnitude gradient all the way into a
    // zero-residual minimizer, so the gradient-map test can be unreachable
    // and a line-search stall at the best iterate is the documented clean
    // exit. What must not happen is exhausting the iteration cap while still
    // making progress.
    let terminated = model.converged() || model.iterations() < correction_config.max_iters;
    report.push_assertion(
        "fit_terminated",
        terminated,
        format!(
            "converged: {}, {} of {} iterations, final objective {:?}",
            model.converged(),
            model.iterations(),
            correction_config.max_iters,
            model.objective()
        ),
    );

    report.insert_table(
        "alignment",
        vec!["step".to_string(), "max_gap".to_string(), "bound".to_string()],
        alignment_rows,
    )?;
    let descriptor_rows: Vec<Vec<f64>> = rhos
        .iter()
        .enumerate()
        .map(|(i, rho)| vec![i as f64, rho[0], rho[1], offset_of(0, rho), offset_of(1, rho)])
        .collect();
    report.insert_table(
        "descriptors",
        vec![
            "domain".to_string(),
            "rho0".to_string(),
            "rho1".to_string(),
            "offset_c0".to_string(),
            "offset_c1".to_string(),
        ],
        descriptor_rows,
    )?;
    Ok(report)
}

/// The λ grid of the sensitivity sweep: seven log-spaced values in [0.3, 3].
pub fn sweep_lambda_grid() -> Vec<f64> {
    (0..7).map(|j| 0.3 * 10f64.powf(j as f64 / 6.0)).collect()
}

/// Sensitivity sweep over the discrepancy order or the regularization
/// weight on the toy problem: one accuracy row per requested value.
fn sweep(config: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(config.experiment.name(), config.seed);
    let param = config
        .sweep_param
        .as_deref()
        .ok_or_else(|| invalid("sweep requires --param (m or lambda)"))?;
    let values = config
        .sweep_values
        .as_ref()
        .ok_or_else(|| invalid("sweep requires --values"))?;
    if values.is_empty() {
        return Err(invalid("sweep requires at least one value"));
    }
    let n_per_class = knob_usize(config, "n_per_class", 100)?;
    let problem = toy_problem(config.seed, n_per_class)?;

    let mut rows = Vec::with_capacity(values.len());
    let mut detail_rows = Vec::new();
    match param {
        "m" => {
            // Per order: average accuracy over the fixed λ grid.
            let lambdas = sweep_lambda_grid();
            for value in values {
                let m = *value as usize;
                if (*value - m as f64).abs() > 1e-9 || !(1..=7).contains(&m) {
                    return Err(invalid(format!(
                        "sweep over m needs integers in [1, 7], got {value}"
                    )));
                }
                let mut target_sum = 0.0;
                let mut source_sum = 0.0;
                for lambda in &lambdas {
                    let (_, run) = toy_train(&problem, config, *lambda, m)?;
                    target_sum += run.target_accuracy;
                    source_sum += run.source_accuracy;
                    detail_rows.push(vec![
                        *value,
                        *lambda,
                        run.source_accuracy,
                        run.target_accuracy,
                    ]);
                }
                let count = lambdas.len() as f64;
                rows.push(vec![*value, source_sum / count, target_sum / count]);
            }
        }
        "lambda" => {
            for value in values {
                if !value.is_finite() || *value < 0.0 {
                    return Err(invalid(format!(
                        "sweep over lambda needs nonnegative values, got {value}"
                    )));
                }
                let (_, run) = toy_train(&problem, config, *value, 5)?;
                detail_rows.push(vec![*value, *value, run.source_accuracy, run.target_accuracy]);
                rows.push(vec![*value, run.source_accuracy, run.target_accuracy]);
            }
        }
        other => {
            return Err(invalid(format!(
                "sweep parameter must be `m` or `lambda`, got `{other}`"
            )));
        }
    }

    report.push_assertion(
        "one_row_per_value",
        rows.len() == values.len(),
        format!("{} rows for {} requested values", rows.len(), values.len()),
    );
    report.insert_table(
        "sweep",
        vec![
            "param_value".to_string(),
            "source_accuracy".to_string(),
            "target_accuracy".to_string(),
        ],
        rows,
    )?;
    report.insert_table(
        "sweep_detail",
        vec![
            "param_value".to_string(),
            "lambda".to_string(),
            "source_accuracy".to_string(),
            "target_accuracy".to_string(),
        ],
        detail_rows,
    )?;
    Ok(report)
}
