//! Single-binary command-line interface.
//!
//! Data flows through CSV files (one observation per row, single optional
//! header), models and reports through JSON. Every subcommand that uses
//! randomness takes `--seed`, and a fixed seed reproduces outputs
//! byte-for-byte. Exit codes: 0 success, 1 operational error, 2 usage
//! error, 3 experiment ran but an embedded assertion failed.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use momenta_cli::experiments::{run_and_write, Experiment, ExperimentConfig};
use momenta_cli::sampling::MinMaxScaler;
use momenta_cli::{experiments, generate, io, model_io, HarnessError};
use momenta_dipals::{DiplsConfig, GammaMode};
use momenta_mann::{accuracy, train, LabeledBatch, OptimizerKind, TrainConfig};
use momenta_maxent::{
    empirical_legendre_moments, entropy, fit_maxent_detailed, LegendreBasis, QuadratureGrid,
    DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use momenta_metrics::{
    cmd_terms, coral, default_weights, l1_moment_terms, mmd_squared, CmdOptions, KernelSpec, Sample,
};
use momenta_scitsm::{
    fit_corrections, fit_mean_curves, transform, CorrectionConfig, SmoothingConfig,
};
use ndarray::Array1;
use serde::Serialize;

/// Exit code when an experiment's embedded assertions fail.
const EXIT_ASSERTION_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "momenta",
    about = "Moment-based domain adaptation toolkit: metrics, density fitting, \
             classifier and regression transfer, series alignment, and seeded experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a distance between two samples.
    Metrics {
        /// First sample CSV.
        #[arg(long)]
        a: PathBuf,
        /// Second sample CSV.
        #[arg(long)]
        b: PathBuf,
        /// One of cmd, mmd, coral, l1.
        #[arg(long)]
        metric: String,
        /// Highest moment order (cmd, l1).
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// Assumed support `a b` for the order-decay weights (cmd). Without
        /// it, inputs are min-max scaled to [0, 1] and the scaler reported.
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        range: Option<Vec<f64>>,
        /// Kernel for mmd: linear[:bias], poly:degree[:bias], gauss:sigma.
        #[arg(long, default_value = "poly:2:1")]
        kernel: String,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a maximum-entropy density to one column of data.
    Maxent {
        /// Single-column CSV; values are min-max scaled to [0, 1].
        #[arg(long)]
        data: PathBuf,
        /// Number of moments (1..=5).
        #[arg(long, default_value_t = 3)]
        m: usize,
        /// Newton gradient tolerance.
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Newton iteration cap.
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the density-difference bound sweep and write its report.
    BoundsDemo {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of moments (2..=5).
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Sweep size.
        #[arg(long, default_value_t = 8)]
        grid: usize,
        /// Output directory for report.json, tables, and plots.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the moment-aligned classifier.
    MannTrain {
        /// Labeled source inputs CSV.
        #[arg(long)]
        source: PathBuf,
        /// Source labels CSV (one class index per row).
        #[arg(long)]
        labels: PathBuf,
        /// Unlabeled target inputs CSV.
        #[arg(long)]
        target: PathBuf,
        /// Alignment weight λ.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        /// Highest discrepancy order.
        #[arg(long, default_value_t = 5)]
        m: usize,
        /// Hidden layer width.
        #[arg(long, default_value_t = 15)]
        hidden: usize,
        /// One of sgd, adagrad, adadelta.
        #[arg(long, default_value = "adadelta")]
        optimizer: String,
        /// Step size.
        #[arg(long, default_value_t = 1.0)]
        learning_rate: f64,
        /// Adadelta decay ω.
        #[arg(long, default_value_t = 0.95)]
        decay: f64,
        /// Adadelta accumulator constant ε.
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Minibatch rows per domain.
        #[arg(long, default_value_t = 32)]
        batch: usize,
        /// Minibatch steps.
        #[arg(long, default_value_t = 4000)]
        iters: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Class count; inferred from the labels when omitted.
        #[arg(long)]
        classes: Option<usize>,
        /// Model JSON output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a trained classifier on labeled data.
    MannEval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Write the result JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the variance-aligned regression model.
    Dipals {
        /// Labeled source inputs CSV.
        #[arg(long)]
        train: PathBuf,
        /// Source response CSV (one value per row).
        #[arg(long)]
        y: PathBuf,
        /// Unlabeled target inputs CSV.
        #[arg(long)]
        target: PathBuf,
        /// Latent component count.
        #[arg(long, default_value_t = 5)]
        components: usize,
        /// Penalty weight: a number, or `heuristic`.
        #[arg(long, default_value = "heuristic")]
        gamma: String,
        /// Optional target response CSV; enables target RMSE in the report.
        #[arg(long)]
        target_y: Option<PathBuf>,
        /// Model JSON output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict with a fitted regression model.
    DipalsPredict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Predictions CSV output path.
        #[arg(long)]
        out: PathBuf,
        /// Optional truth CSV; prints RMSE when given.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Fit the multi-domain series correction model from a bundle directory.
    ScitsmFit {
        /// Directory holding domains.json plus the referenced series CSVs.
        #[arg(long)]
        dir: PathBuf,
        /// Mean-curve smoothing weight.
        #[arg(long, default_value_t = 2.0)]
        smooth: f64,
        /// Anchor count; the library default when omitted.
        #[arg(long)]
        anchors: Option<usize>,
        /// Neighbor-coupling weight α.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// Sparsity weight β.
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        /// Coupling decay δ.
        #[arg(long, default_value_t = 0.9)]
        delta: f64,
        /// Coupling radius u.
        #[arg(long, default_value_t = 2)]
        u: usize,
        /// Use the squared data term.
        #[arg(long)]
        squared: bool,
        #[arg(long, default_value_t = 5000)]
        max_iters: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Model JSON output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Align one series with a fitted correction model.
    ScitsmApply {
        #[arg(long)]
        model: PathBuf,
        /// Series CSV (rows = time steps, columns = features).
        #[arg(long)]
        series: PathBuf,
        /// Descriptor, comma-separated.
        #[arg(long)]
        rho: String,
        /// Feature channel to align.
        #[arg(long, default_value_t = 0)]
        channel: usize,
        /// Blend decay γ ∈ (0, 1].
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        /// Blend radius u.
        #[arg(long, default_value_t = 2)]
        u: usize,
        /// Weight pairs by anchor time instead of nesting rank.
        #[arg(long)]
        pair_element_weights: bool,
        /// Aligned-series CSV output path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic dataset into a directory.
    Gen {
        /// One of toy, overpenalization, multidomain-ts.
        #[arg(long)]
        what: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// toy: draws per class.
        #[arg(long, default_value_t = 100)]
        n_per_class: usize,
        /// overpenalization: sample size.
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        /// multidomain-ts: domain count.
        #[arg(long, default_value_t = 4)]
        domains: usize,
        /// multidomain-ts: series per domain.
        #[arg(long, default_value_t = 30)]
        series: usize,
        /// multidomain-ts: time steps.
        #[arg(long, default_value_t = 40)]
        steps: usize,
        /// multidomain-ts: feature channels.
        #[arg(long, default_value_t = 2)]
        features: usize,
        /// multidomain-ts: noise standard deviation.
        #[arg(long, default_value_t = 0.05)]
        sigma: f64,
    },
    /// Run a named experiment end-to-end and write its report.
    Run {
        /// One of toy-mann, overpenalization, bounds-demo, dipals-synth,
        /// scitsm-synth, sweep.
        #[arg(value_parser = Experiment::from_str)]
        experiment: Experiment,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output directory for report.json, tables, and plots.
        #[arg(long)]
        out: PathBuf,
        /// Numeric knob override, `name=value`; repeatable.
        #[arg(long = "knob", value_parser = parse_knob)]
        knobs: Vec<(String, f64)>,
        /// sweep: parameter to vary (m or lambda).
        #[arg(long)]
        param: Option<String>,
        /// sweep: values, `lo..hi` (integers, inclusive) or comma-separated.
        #[arg(long)]
        values: Option<String>,
    },
}

use std::str::FromStr as _;

fn parse_knob(raw: &str) -> Result<(String, f64), String> {
    let (key, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{raw}`"))?;
    let parsed: f64 = value
        .parse()
        .map_err(|_| format!("knob `{key}` has non-numeric value `{value}`"))?;
    Ok((key.to_string(), parsed))
}

fn parse_values(raw: &str) -> Result<Vec<f64>, HarnessError> {
    if let Some((lo, hi)) = raw.split_once("..") {
        let lo: i64 = lo
            .trim()
            .parse()
            .map_err(|_| invalid_arg(format!("range start `{lo}` is not an integer")))?;
        let hi: i64 = hi
            .trim()
            .parse()
            .map_err(|_| invalid_arg(format!("range end `{hi}` is not an integer")))?;
        if hi < lo {
            return Err(invalid_arg(format!("empty range {lo}..{hi}")));
        }
        return Ok((lo..=hi).map(|v| v as f64).collect());
    }
    raw.split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| invalid_arg(format!("value `{part}` is not numeric")))
        })
        .collect()
}

fn invalid_arg(message: String) -> HarnessError {
    HarnessError::Invalid(message)
}

fn parse_kernel(raw: &str) -> Result<KernelSpec, HarnessError> {
    let parts: Vec<&str> = raw.split(':').collect();
    let parse_f = |s: &str| -> Result<f64, HarnessError> {
        s.parse()
            .map_err(|_| invalid_arg(format!("kernel parameter `{s}` is not numeric")))
    };
    match parts.as_slice() {
        ["linear"] => Ok(KernelSpec::Linear { bias: 0.0 }),
        ["linear", bias] => Ok(KernelSpec::Linear { bias: parse_f(bias)? }),
        ["poly", degree] | ["poly", degree, _] => {
            let degree: u32 = degree
                .parse()
                .map_err(|_| invalid_arg(format!("polynomial degree `{degree}` is invalid")))?;
            let bias = match parts.get(2) {
                Some(b) => parse_f(b)?,
                None => 1.0,
            };
            Ok(KernelSpec::Polynomial { degree, bias })
        }
        ["gauss", sigma] => Ok(KernelSpec::Gaussian { sigma: parse_f(sigma)? }),
        _ => Err(invalid_arg(format!(
            "unknown kernel `{raw}` (expected linear[:bias], poly:degree[:bias], gauss:sigma)"
        ))),
    }
}

/// Print a serializable value to stdout or write it as a JSON file.
fn emit(value: &impl Serialize, out: &Option<PathBuf>) -> Result<(), HarnessError> {
    match out {
        Some(path) => io::write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct MetricsOutput {
    metric: String,
    value: f64,
    per_term: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaler: Option<MinMaxScaler>,
}

fn cmd_metrics(
    a: PathBuf,
    b: PathBuf,
    metric: String,
    m: usize,
    range: Option<Vec<f64>>,
    kernel: String,
    out: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let xa = io::read_sample(&a)?;
    let xb = io::read_sample(&b)?;
    let output = match metric.as_str() {
        "cmd" => {
            // Order-decay weights need a known support: either the caller
            // supplies one, or both samples are min-max scaled onto [0, 1].
            let (xa, xb, lo, hi, scaler) = match &range {
                Some(bounds) => (xa, xb, bounds[0], bounds[1], None),
                None => {
                    let scaler = MinMaxScaler::fit(&[xa.view(), xb.view()])?;
                    let sa = Sample::new(scaler.transform(&xa.view())?)?;
                    let sb = Sample::new(scaler.transform(&xb.view())?)?;
                    (sa, sb, 0.0, 1.0, Some(scaler))
                }
            };
            let weights = default_weights(lo, hi, m)?;
            let terms = cmd_terms(&xa, &xb, m, CmdOptions::default())?;
            let weighted: Vec<f64> = weights
                .as_slice()
                .iter()
                .zip(terms.iter())
                .map(|(w, t)| w * t)
                .collect();
            MetricsOutput {
                metric,
                value: weighted.iter().sum(),
                per_term: weighted,
                scaler,
            }
        }
        "mmd" => MetricsOutput {
            metric,
            value: mmd_squared(&xa, &xb, parse_kernel(&kernel)?)?,
            per_term: Vec::new(),
            scaler: None,
        },
        "coral" => MetricsOutput {
            metric,
            value: coral(&xa, &xb)?,
            per_term: Vec::new(),
            scaler: None,
        },
        "l1" => {
            let terms = l1_moment_terms(&xa, &xb, m)?;
            MetricsOutput {
                metric,
                value: terms.iter().sum(),
                per_term: terms,
                scaler: None,
            }
        }
        other => {
            return Err(invalid_arg(format!(
                "unknown metric `{other}` (expected cmd, mmd, coral, l1)"
            )))
        }
    };
    emit(&output, &out)
}

#[derive(Serialize)]
struct MaxentOutput {
    lambda: Vec<f64>,
    log_norm: f64,
    entropy: f64,
    fitted_moments: Vec<f64>,
    target_moments: Vec<f64>,
    iterations: usize,
    converged: bool,
    scaler: MinMaxScaler,
}

fn cmd_maxent(
    data: PathBuf,
    m: usize,
    tol: f64,
    max_iter: usize,
    out: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let raw = io::read_sample(&data)?;
    if raw.ncols() != 1 {
        return Err(invalid_arg(format!(
            "maxent expects a single-column CSV, found {} columns",
            raw.ncols()
        )));
    }
    let scaler = MinMaxScaler::fit(&[raw.view()])?;
    let scaled = scaler.transform(&raw.view())?;
    let values: Vec<f64> = scaled.column(0).to_vec();
    let basis = LegendreBasis::new(m)?;
    let mu = empirical_legendre_moments(&values, &basis)?;
    let (model, fit_report) = fit_maxent_detailed(&mu, basis, tol, max_iter)?;
    let grid = QuadratureGrid::default_rule();
    let output = MaxentOutput {
        lambda: model.lambda().to_vec(),
        log_norm: model.log_norm(),
        entropy: entropy(&model),
        fitted_moments: model.moments(&grid),
        target_moments: mu,
        iterations: fit_report.iterations,
        converged: fit_report.grad_norm <= tol,
        scaler,
    };
    emit(&output, &out)
}

#[derive(Serialize)]
struct TrainOutput {
    source_accuracy: f64,
    classes: usize,
    iterations: usize,
}

#[allow(clippy::too_many_arguments)]
fn cmd_mann_train(
    source: PathBuf,
    labels: PathBuf,
    target: PathBuf,
    lambda: f64,
    m: usize,
    hidden: usize,
    optimizer: String,
    learning_rate: f64,
    decay: f64,
    epsilon: f64,
    batch: usize,
    iters: usize,
    seed: u64,
    classes: Option<usize>,
    out: PathBuf,
) -> Result<(), HarnessError> {
    let xs = io::read_sample(&source)?;
    let ys = io::read_labels(&labels)?;
    let xt = io::read_sample(&target)?;
    let class_count = match classes {
        Some(c) => c,
        None => ys.iter().max().map_or(0, |max| max + 1),
    };
    if class_count < 2 {
        return Err(invalid_arg(format!(
            "need at least two classes, inferred {class_count}"
        )));
    }
    let scaler = MinMaxScaler::fit(&[xs.view(), xt.view()])?;
    let xs_scaled = Sample::new(scaler.transform(&xs.view())?)?;
    let xt_scaled = Sample::new(scaler.transform(&xt.view())?)?;
    let one_hot = io::labels_to_one_hot(&ys, class_count)?;
    let source_batch = LabeledBatch::new(xs_scaled, one_hot)?;
    let optimizer = OptimizerKind::from_str(&optimizer).map_err(HarnessError::Invalid)?;
    let config = TrainConfig {
        hidden_width: hidden,
        class_count,
        cmd_order: m,
        reg_weight: lambda,
        batch_size: batch,
        max_iters: iters,
        optimizer,
        learning_rate,
        decay,
        epsilon,
        rng_seed: seed,
    };
    let params = train(&config, &source_batch, &xt_scaled)?;
    model_io::write_mann_model(&out, &params, Some(&scaler))?;
    let output = TrainOutput {
        source_accuracy: accuracy(&params, &source_batch)?,
        classes: class_count,
        iterations: iters,
    };
    emit(&output, &None)
}

#[derive(Serialize)]
struct EvalOutput {
    accuracy: f64,
    n: usize,
}

fn cmd_mann_eval(
    model: PathBuf,
    data: PathBuf,
    labels: PathBuf,
    out: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let (params, scaler) = model_io::read_mann_model(&model)?;
    let x = io::read_sample(&data)?;
    let y = io::read_labels(&labels)?;
    let x = match &scaler {
        Some(s) => Sample::new(s.transform(&x.view())?)?,
        None => x,
    };
    let one_hot = io::labels_to_one_hot(&y, params.class_count())?;
    let batch = LabeledBatch::new(x, one_hot)?;
    let output = EvalOutput {
        accuracy: accuracy(&params, &batch)?,
        n: y.len(),
    };
    emit(&output, &out)
}

#[derive(Serialize)]
struct DiplsOutput {
    gammas: Vec<f64>,
    variance_gaps: Vec<f64>,
    rmse_train: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    rmse_target: Option<f64>,
    warnings: Vec<String>,
}

fn cmd_dipals(
    train_path: PathBuf,
    y: PathBuf,
    target: PathBuf,
    components: usize,
    gamma: String,
    target_y: Option<PathBuf>,
    out: PathBuf,
) -> Result<(), HarnessError> {
    let xs = io::read_sample(&train_path)?;
    let ys = Array1::from_vec(io::read_vector(&y)?);
    let xt = io::read_sample(&target)?;
    let gamma_mode = match gamma.as_str() {
        "heuristic" => GammaMode::Heuristic,
        fixed => {
            let value: f64 = fixed
                .parse()
                .map_err(|_| invalid_arg(format!("gamma must be a number or `heuristic`, got `{fixed}`")))?;
            if value == 0.0 {
                GammaMode::Zero
            } else {
                GammaMode::Fixed(value)
            }
        }
    };
    let model = momenta_dipals::fit(
        &xs,
        &ys,
        &xt,
        &DiplsConfig {
            n_components: components,
            gamma_mode,
        },
    )?;
    model_io::write_dipls_model(&out, &model)?;
    let pred_train = momenta_dipals::predict(&model, &xs)?;
    let rmse = |pred: &Array1<f64>, truth: &Array1<f64>| -> f64 {
        (pred
            .iter()
            .zip(truth.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / truth.len() as f64)
            .sqrt()
    };
    let rmse_target = match &target_y {
        Some(path) => {
            let truth = Array1::from_vec(io::read_vector(path)?);
            let pred = momenta_dipals::predict(&model, &xt)?;
            if truth.len() != pred.len() {
                return Err(invalid_arg(format!(
                    "target truth has {} rows, target data {}",
                    truth.len(),
                    pred.len()
                )));
            }
            Some(rmse(&pred, &truth))
        }
        None => None,
    };
    let output = DiplsOutput {
        gammas: model.gammas().to_vec(),
        variance_gaps: model.variance_gaps().to_vec(),
        rmse_train: rmse(&pred_train, &ys),
        rmse_target,
        warnings: model.warnings().to_vec(),
    };
    emit(&output, &None)
}

fn cmd_dipals_predict(
    model: PathBuf,
    data: PathBuf,
    out: PathBuf,
    truth: Option<PathBuf>,
) -> Result<(), HarnessError> {
    let model = model_io::read_dipls_model(&model)?;
    let x = io::read_sample(&data)?;
    let pred = momenta_dipals::predict(&model, &x)?;
    let rows: Vec<Vec<f64>> = pred.iter().map(|v| vec![*v]).collect();
    io::write_matrix_csv(&out, &["prediction".to_string()], &rows)?;
    if let Some(path) = truth {
        let truth = io::read_vector(&path)?;
        if truth.len() != pred.len() {
            return Err(invalid_arg(format!(
                "truth has {} rows, predictions {}",
                truth.len(),
                pred.len()
            )));
        }
        let rmse = (pred
            .iter()
            .zip(truth.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / truth.len() as f64)
            .sqrt();
        println!("{}", serde_json::json!({ "rmse": rmse }));
    }
    Ok(())
}

#[derive(Serialize)]
struct ScitsmFitOutput {
    converged: bool,
    iterations: usize,
    objective: Option<f64>,
    anchors: Vec<usize>,
    warnings: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_scitsm_fit(
    dir: PathBuf,
    smooth: f64,
    anchors: Option<usize>,
    alpha: f64,
    beta: f64,
    delta: f64,
    u: usize,
    squared: bool,
    max_iters: usize,
    tol: f64,
    out: PathBuf,
) -> Result<(), HarnessError> {
    let named_domains = io::read_domain_bundle(&dir)?;
    let domains: Vec<_> = named_domains.iter().map(|(_, d)| d.clone()).collect();
    let rhos: Vec<Array1<f64>> = domains.iter().map(|d| d.rho().clone()).collect();
    let curves = fit_mean_curves(&domains, smooth)?;
    let config = CorrectionConfig {
        anchor_count: anchors,
        alpha,
        beta,
        delta,
        u,
        squared_data_term: squared,
        max_iters,
        tol,
    };
    let model = fit_corrections(&curves, &rhos, &config)?;
    model_io::write_scitsm_model(&out, &model)?;
    let mut warnings: Vec<String> = curves.warnings().to_vec();
    warnings.extend(model.warnings().iter().cloned());
    let output = ScitsmFitOutput {
        converged: model.converged(),
        iterations: model.iterations(),
        objective: model.objective(),
        anchors: model.anchors().to_vec(),
        warnings,
    };
    emit(&output, &None)
}

#[allow(clippy::too_many_arguments)]
fn cmd_scitsm_apply(
    model: PathBuf,
    series: PathBuf,
    rho: String,
    channel: usize,
    gamma: f64,
    u: usize,
    pair_element_weights: bool,
    out: PathBuf,
) -> Result<(), HarnessError> {
    let model = model_io::read_scitsm_model(&model)?;
    let x = io::read_series(&series)?;
    let rho_values: Vec<f64> = rho
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| invalid_arg(format!("descriptor entry `{part}` is not numeric")))
        })
        .collect::<Result<_, _>>()?;
    let config = SmoothingConfig {
        gamma,
        u,
        feature_channel: channel,
        pair_element_weights,
    };
    let result = transform(&x, &Array1::from_vec(rho_values), &model, &config)?;
    for warning in result.warnings() {
        eprintln!("warning: {warning}");
    }
    let rows: Vec<Vec<f64>> = result.values().iter().map(|v| vec![*v]).collect();
    io::write_matrix_csv(&out, &["aligned".to_string()], &rows)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_gen(
    what: String,
    seed: u64,
    out: PathBuf,
    n_per_class: usize,
    n: usize,
    domains: usize,
    series: usize,
    steps: usize,
    features: usize,
    sigma: f64,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(&out)?;
    match what.as_str() {
        "toy" => {
            let data = generate::gen_toy(seed, n_per_class)?;
            io::write_sample_csv(out.join("source.csv"), &data.source.view())?;
            io::write_labels_csv(out.join("source_labels.csv"), &data.source_labels)?;
            io::write_sample_csv(out.join("target.csv"), &data.target.view())?;
            // Held aside: written for post-hoc evaluation, never for training.
            io::write_labels_csv(out.join("target_labels.csv"), &data.target_labels)?;
        }
        "overpenalization" => {
            let (p, q_left, q_right) = generate::gen_overpenalization(seed, n)?;
            io::write_sample_csv(out.join("p.csv"), &p.view())?;
            io::write_sample_csv(out.join("q_left.csv"), &q_left.view())?;
            io::write_sample_csv(out.join("q_right.csv"), &q_right.view())?;
        }
        "multidomain-ts" => {
            let rhos = generate::default_descriptors(domains);
            let generated = generate::gen_multidomain_ts(
                seed,
                &rhos,
                generate::TsKnobs {
                    series_per_domain: series,
                    features,
                    steps,
                    noise_sigma: sigma,
                    scale_coupling: 0.0,
                },
            )?;
            let named: Vec<(String, momenta_scitsm::DomainSeries)> = generated
                .into_iter()
                .enumerate()
                .map(|(i, d)| (format!("domain{i}"), d))
                .collect();
            io::write_domain_bundle(&out, &named)?;
        }
        other => {
            return Err(invalid_arg(format!(
                "unknown dataset `{other}` (expected toy, overpenalization, multidomain-ts)"
            )))
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct RunSummary {
    experiment: String,
    seed: u64,
    passed: bool,
    assertions: usize,
    failures: Vec<RunFailure>,
}

#[derive(Serialize)]
struct RunFailure {
    name: String,
    detail: String,
}

fn cmd_run(
    experiment: Experiment,
    seed: u64,
    out: PathBuf,
    knobs: Vec<(String, f64)>,
    param: Option<String>,
    values: Option<String>,
) -> Result<u8, HarnessError> {
    let config = ExperimentConfig {
        experiment,
        seed,
        knobs: knobs.into_iter().collect::<BTreeMap<_, _>>(),
        sweep_param: param,
        sweep_values: values.as_deref().map(parse_values).transpose()?,
    };
    let report = run_and_write(&config, &out)?;
    let summary = RunSummary {
        experiment: report.experiment.clone(),
        seed: report.seed,
        passed: report.all_passed(),
        assertions: report.assertions.len(),
        failures: report
            .failures()
            .iter()
            .map(|a| RunFailure {
                name: a.name.clone(),
                detail: a.detail.clone(),
            })
            .collect(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if summary.passed { 0 } else { EXIT_ASSERTION_FAILURE })
}

fn dispatch(command: Command) -> Result<u8, HarnessError> {
    match command {
        Command::Metrics {
            a,
            b,
            metric,
            m,
            range,
            kernel,
            out,
        } => {
            if let Some(bounds) = &range {
                if bounds[1] <= bounds[0] {
                    return Err(invalid_arg("range upper bound must exceed the lower".into()));
                }
            }
            cmd_metrics(a, b, metric, m, range, kernel, out).map(|_| 0)
        }
        Command::Maxent {
            data,
            m,
            tol,
            max_iter,
            out,
        } => cmd_maxent(data, m, tol, max_iter, out).map(|_| 0),
        Command::BoundsDemo { seed, m, grid, out } => {
            let mut config = ExperimentConfig::new(Experiment::BoundsDemo, seed);
            config.knobs.insert("m".to_string(), m as f64);
            config.knobs.insert("grid".to_string(), grid as f64);
            let report = experiments::run_and_write(&config, &out)?;
            Ok(if report.all_passed() { 0 } else { EXIT_ASSERTION_FAILURE })
        }
        Command::MannTrain {
            source,
            labels,
            target,
            lambda,
            m,
            hidden,
            optimizer,
            learning_rate,
            decay,
            epsilon,
            batch,
            iters,
            seed,
            classes,
            out,
        } => cmd_mann_train(
            source, labels, target, lambda, m, hidden, optimizer, learning_rate, decay, epsilon,
            batch, iters, seed, classes, out,
        )
        .map(|_| 0),
        Command::MannEval {
            model,
            data,
            labels,
            out,
        } => cmd_mann_eval(model, data, labels, out).map(|_| 0),
        Command::Dipals {
            train,
            y,
            target,
            components,
            gamma,
            target_y,
            out,
        } => cmd_dipals(train, y, target, components, gamma, target_y, out).map(|_| 0),
        Command::DipalsPredict {
            model,
            data,
            out,
            truth,
        } => cmd_dipals_predict(model, data, out, truth).map(|_| 0),
        Command::ScitsmFit {
            dir,
            smooth,
            anchors,
            alpha,
            beta,
            delta,
            u,
            squared,
            max_iters,
            tol,
            out,
        } => cmd_scitsm_fit(dir, smooth, anchors, alpha, beta, delta, u, squared, max_iters, tol, out)
            .map(|_| 0),
        Command::ScitsmApply {
            model,
            series,
            rho,
            channel,
            gamma,
            u,
            pair_element_weights,
            out,
        } => cmd_scitsm_apply(model, series, rho, channel, gamma, u, pair_element_weights, out)
            .map(|_| 0),
        Command::Gen {
            what,
            seed,
            out,
            n_per_class,
            n,
            domains,
            series,
            steps,
            features,
            sigma,
        } => cmd_gen(
            what, seed, out, n_per_class, n, domains, series, steps, features, sigma,
        )
        .map(|_| 0),
        Command::Run {
            experiment,
            seed,
            out,
            knobs,
            param,
            values,
        } => cmd_run(experiment, seed, out, knobs, param, values),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(1)
        }
    }
}
