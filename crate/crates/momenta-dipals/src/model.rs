//! Variance-aligned partial least squares: penalty matrix, closed-form
//! directions, the component loop with dual deflation, prediction, and the
//! per-component penalty-weight heuristic.

use ndarray::{Array1, Array2, Axis};

use crate::eig::{solve_general, solve_spd, symmetric_eigen};
use crate::{DiplsError, Result, Sample};

/// Score norms below this are treated as a degenerate (rank-exhausted)
/// component.
const SCORE_FLOOR: f64 = 1e-14;
/// Condition numbers above this abort the direction solve.
const CONDITION_LIMIT: f64 = 1e12;
/// Relative cosine between source and target scores below which the target
/// loading normalization is flagged as ill-conditioned.
const CROSS_SCORE_WARNING: f64 = 1e-8;

/// How the penalty weight γ is chosen for each component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaMode {
    /// No penalty: classical partial least squares.
    Zero,
    /// One fixed γ ≥ 0 shared by every component.
    Fixed(f64),
    /// Per-component weight equating the magnitudes of the fitting term
    /// and the penalty term along the unpenalized direction.
    Heuristic,
}

/// Fit configuration: component count and penalty-weight policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiplsConfig {
    /// Number of latent components `s ≥ 1`; must not exceed the input
    /// dimension.
    pub n_components: usize,
    /// Penalty-weight policy.
    pub gamma_mode: GammaMode,
}

impl DiplsConfig {
    /// Validate the component count and, for a fixed weight, its value.
    pub fn validate(&self) -> Result<()> {
        if self.n_components == 0 {
            return Err(DiplsError::InvalidParameter {
                name: "n_components",
                message: "at least one latent component is required".to_string(),
            });
        }
        if let GammaMode::Fixed(gamma) = self.gamma_mode {
            if !gamma.is_finite() || gamma < 0.0 {
                return Err(DiplsError::InvalidParameter {
                    name: "gamma",
                    message: format!("penalty weight must be finite and ≥ 0, got {gamma}"),
                });
            }
        }
        Ok(())
    }
}

/// A fitted model: latent weights and loadings, inner coefficients, the
/// assembled regression vector, centering statistics, and per-component
/// diagnostics.
#[derive(Debug, Clone)]
pub struct DiplsModel {
    w: Array2<f64>,
    p: Array2<f64>,
    c: Array1<f64>,
    b: Array1<f64>,
    x_mean_source: Array1<f64>,
    x_mean_target: Array1<f64>,
    y_mean: f64,
    gammas: Vec<f64>,
    variance_gaps: Vec<f64>,
    warnings: Vec<String>,
}

impl DiplsModel {
    /// Reassemble a model from stored parts, validating shape consistency.
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        w: Array2<f64>,
        p: Array2<f64>,
        c: Array1<f64>,
        b: Array1<f64>,
        x_mean_source: Array1<f64>,
        x_mean_target: Array1<f64>,
        y_mean: f64,
        gammas: Vec<f64>,
        variance_gaps: Vec<f64>,
        warnings: Vec<String>,
    ) -> Result<Self> {
        let d = w.nrows();
        let s = w.ncols();
        if p.nrows() != d || b.len() != d || x_mean_source.len() != d || x_mean_target.len() != d {
            return Err(DiplsError::DimensionMismatch {
                expected: d,
                found: p.nrows(),
            });
        }
        if p.ncols() != s || c.len() != s || gammas.len() != s || variance_gaps.len() != s {
            return Err(DiplsError::DimensionMismatch {
                expected: s,
                found: p.ncols(),
            });
        }
        let finite = w.iter().all(|v| v.is_finite())
            && p.iter().all(|v| v.is_finite())
            && c.iter().all(|v| v.is_finite())
            && b.iter().all(|v| v.is_finite())
            && x_mean_source.iter().all(|v| v.is_finite())
            && x_mean_target.iter().all(|v| v.is_finite())
            && y_mean.is_finite();
        if !finite {
            return Err(DiplsError::NonFinite {
                context: "model parts",
            });
        }
        Ok(Self {
            w,
            p,
            c,
            b,
            x_mean_source,
            x_mean_target,
            y_mean,
            gammas,
            variance_gaps,
            warnings,
        })
    }

    /// Latent weight matrix, d×s with unit-norm columns.
    pub fn w(&self) -> &Array2<f64> {
        &self.w
    }

    /// Source loading matrix, d×s.
    pub fn p(&self) -> &Array2<f64> {
        &self.p
    }

    /// Inner regression coefficients, one per component.
    pub fn inner_coefficients(&self) -> &Array1<f64> {
        &self.c
    }

    /// Assembled regression vector applied to centered inputs.
    pub fn regression_vector(&self) -> &Array1<f64> {
        &self.b
    }

    /// Column means of the source inputs at fit time.
    pub fn x_mean_source(&self) -> &Array1<f64> {
        &self.x_mean_source
    }

    /// Column means of the target inputs at fit time.
    pub fn x_mean_target(&self) -> &Array1<f64> {
        &self.x_mean_target
    }

    /// Mean of the training response.
    pub fn y_mean(&self) -> f64 {
        self.y_mean
    }

    /// Penalty weight used by each component.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    /// `wᵀΛw` along each fitted direction — the upper bound on the
    /// source/target variance difference carried by that component.
    pub fn variance_gaps(&self) -> &[f64] {
        &self.variance_gaps
    }

    /// Non-fatal diagnostics recorded during fitting.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    /// Number of latent components.
    pub fn n_components(&self) -> usize {
        self.w.ncols()
    }

    /// Input dimension.
    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }
}

/// Subtract column means; returns the centered matrix and the means.
fn center_columns(x: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    let means = x.mean_axis(Axis(0)).expect("non-empty rows");
    (x - &means.view().insert_axis(Axis(0)), means)
}

/// Sample covariance (divisor n−1) of an already centered matrix.
fn covariance_of_centered(centered: &Array2<f64>) -> Array2<f64> {
    let n = centered.nrows();
    centered.t().dot(centered) / (n as f64 - 1.0)
}

/// Penalty matrix of two centered matrices: flip the covariance-difference
/// eigenvalues to their absolute values.
fn lambda_from_centered(sp: &Array2<f64>, sq: &Array2<f64>) -> Result<Array2<f64>> {
    let mut diff = covariance_of_centered(sp) - covariance_of_centered(sq);
    let d = diff.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (diff[[i, j]] + diff[[j, i]]);
            diff[[i, j]] = avg;
            diff[[j, i]] = avg;
        }
    }
    let (values, vectors) = symmetric_eigen(&diff)?;
    let abs_values = values.mapv(f64::abs);
    let lambda = vectors
        .dot(&Array2::from_diag(&abs_values))
        .dot(&vectors.t());
    // Symmetrize away rotation rounding.
    let mut out = lambda.clone();
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (lambda[[i, j]] + lambda[[j, i]]);
            out[[i, j]] = avg;
            out[[j, i]] = avg;
        }
    }
    Ok(out)
}

/// Penalty matrix `Λ` of two samples.
///
/// Both samples are centered by their own column means; `Λ` shares the
/// eigenvectors of the difference of the two sample covariance matrices
/// (divisor n−1 each) and carries the absolute values of its eigenvalues.
/// The result is symmetric positive semidefinite, and `wᵀΛw` bounds the
/// absolute source/target variance difference along every direction `w`.
pub fn lambda_matrix(sp: &Sample, sq: &Sample) -> Result<Array2<f64>> {
    if sp.ncols() != sq.ncols() {
        return Err(DiplsError::DimensionMismatch {
            expected: sp.ncols(),
            found: sq.ncols(),
        });
    }
    for (sample, name) in [(sp, "sp"), (sq, "sq")] {
        if sample.nrows() < 2 {
            return Err(DiplsError::InvalidParameter {
                name,
                message: "covariance needs at least two rows".to_string(),
            });
        }
    }
    let (cp, _) = center_columns(&sp.view().to_owned());
    let (cq, _) = center_columns(&sq.view().to_owned());
    lambda_from_centered(&cp, &cq)
}

/// Closed-form penalized direction for one component.
///
/// `s` and `y` must be centered. Returns the unit-length scaling of
/// `(I + (γ/yᵀy)Λ)^{−1}·Sᵀy/(yᵀy)` — the minimizer of
/// `‖S − ywᵀ‖²_F + γ·wᵀΛw` over all of `R^d`, normalized. With `γ = 0`
/// this is the classical covariance direction `Sᵀy/‖Sᵀy‖`.
pub fn direction(
    s: &Array2<f64>,
    y: &Array1<f64>,
    lambda: &Array2<f64>,
    gamma: f64,
) -> Result<Array1<f64>> {
    let d = s.ncols();
    if y.len() != s.nrows() {
        return Err(DiplsError::DimensionMismatch {
            expected: s.nrows(),
            found: y.len(),
        });
    }
    if lambda.nrows() != d || lambda.ncols() != d {
        return Err(DiplsError::DimensionMismatch {
            expected: d,
            found: lambda.nrows(),
        });
    }
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(DiplsError::InvalidParameter {
            name: "gamma",
            message: format!("penalty weight must be finite and ≥ 0, got {gamma}"),
        });
    }
    let yy = y.dot(y);
    if yy <= 0.0 {
        return Err(DiplsError::InvalidParameter {
            name: "y",
            message: "constant response: yᵀy must be positive".to_string(),
        });
    }
    let sty = s.t().dot(y);
    if sty.iter().all(|v| *v == 0.0) {
        return Err(DiplsError::InvalidParameter {
            name: "direction",
            message: "response is uncorrelated with every input column".to_string(),
        });
    }
    let v = if gamma == 0.0 {
        sty / yy
    } else {
        let system = Array2::<f64>::eye(d) + &(lambda * (gamma / yy));
        let (values, _) = symmetric_eigen(&system)?;
        let min = values[0];
        let max = values[values.len() - 1];
        if min <= 0.0 || max / min > CONDITION_LIMIT {
            return Err(DiplsError::IllConditioned {
                condition: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        solve_spd(&system, &sty)? / yy
    };
    let norm = v.dot(&v).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(DiplsError::NonFinite {
            context: "direction solve",
        });
    }
    Ok(v / norm)
}

/// Outcome of the penalty-weight heuristic: the weight itself plus an
/// optional warning when the penalty is inactive along the unpenalized
/// direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEstimate {
    /// The chosen penalty weight.
    pub value: f64,
    /// Present when `w0ᵀΛw0` vanished and the weight fell back to zero.
    pub warning: Option<String>,
}

/// Equal-weighting heuristic for the penalty weight.
///
/// With `w0` the unpenalized direction `Sᵀy/‖Sᵀy‖`, returns
/// `γ = ‖S − y·w0ᵀ‖²_F / (w0ᵀΛw0)`; both terms of the component objective
/// then have equal magnitude at `w0`. When the denominator vanishes (the
/// penalty is flat along `w0`, e.g. identical domains) the weight is zero
/// and a warning is attached.
pub fn gamma_heuristic(
    s: &Array2<f64>,
    y: &Array1<f64>,
    lambda: &Array2<f64>,
) -> Result<GammaEstimate> {
    let w0 = direction(s, y, lambda, 0.0)?;
    let denom = w0.dot(&lambda.dot(&w0));
    let trace: f64 = (0..lambda.nrows()).map(|i| lambda[[i, i]]).sum();
    if denom <= 1e-14 * trace.abs().max(1.0) {
        return Ok(GammaEstimate {
            value: 0.0,
            warning: Some(
                "penalty inactive along the unpenalized direction (w0ᵀΛw0 ≈ 0); using γ = 0"
                    .to_string(),
            ),
        });
    }
    let residual = s - &outer(y, &w0);
    let frobenius_sq: f64 = residual.iter().map(|v| v * v).sum();
    Ok(GammaEstimate {
        value: frobenius_sq / denom,
        warning: None,
    })
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let a2 = a.view().insert_axis(Axis(1));
    let b2 = b.view().insert_axis(Axis(0));
    a2.dot(&b2)
}

/// Fit the model: per component, recompute `Λ` on the current deflated
/// matrices, pick the penalty weight, take the closed-form direction,
/// regress the response on the source scores, and deflate source, target,
/// and response. Finally assemble `b = W(PᵀW)^{−1}c`.
pub fn fit(xp: &Sample, y: &Array1<f64>, xq: &Sample, config: &DiplsConfig) -> Result<DiplsModel> {
    config.validate()?;
    let d = xp.ncols();
    if xq.ncols() != d {
        return Err(DiplsError::DimensionMismatch {
            expected: d,
            found: xq.ncols(),
        });
    }
    if y.len() != xp.nrows() {
        return Err(DiplsError::DimensionMismatch {
            expected: xp.nrows(),
            found: y.len(),
        });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(DiplsError::NonFinite { context: "response" });
    }
    if xp.nrows() < 2 || xq.nrows() < 2 {
        return Err(DiplsError::InvalidParameter {
            name: "rows",
            message: "both domains need at least two rows".to_string(),
        });
    }
    let s_components = config.n_components;
    if s_components > d {
        return Err(DiplsError::InvalidParameter {
            name: "n_components",
            message: format!("{s_components} components exceed the input dimension {d}"),
        });
    }

    let (mut s_mat, x_mean_source) = center_columns(&xp.view().to_owned());
    let (mut t_mat, x_mean_target) = center_columns(&xq.view().to_owned());
    let y_mean = y.mean().expect("non-empty response");
    let mut y_res = y - y_mean;
    if y_res.dot(&y_res) <= 0.0 {
        return Err(DiplsError::InvalidParameter {
            name: "y",
            message: "constant response: yᵀy must be positive".to_string(),
        });
    }

    let mut w_cols = Array2::<f64>::zeros((d, s_components));
    let mut p_cols = Array2::<f64>::zeros((d, s_components));
    let mut c_vec = Array1::<f64>::zeros(s_components);
    let mut gammas = Vec::with_capacity(s_components);
    let mut variance_gaps = Vec::with_capacity(s_components);
    let mut warnings = Vec::new();

    for i in 0..s_components {
        let lambda = lambda_from_centered(&s_mat, &t_mat)?;
        let gamma = match config.gamma_mode {
            GammaMode::Zero => 0.0,
            GammaMode::Fixed(value) => value,
            GammaMode::Heuristic => {
                let estimate = gamma_heuristic(&s_mat, &y_res, &lambda)?;
                if let Some(warning) = estimate.warning {
                    warnings.push(format!("component {}: {warning}", i + 1));
                }
                estimate.value
            }
        };
        let w = direction(&s_mat, &y_res, &lambda, gamma)?;

        let t_p = s_mat.dot(&w);
        let t_q = t_mat.dot(&w);
        let tp_sq = t_p.dot(&t_p);
        if tp_sq < SCORE_FLOOR {
            return Err(DiplsError::DegenerateComponent { iteration: i + 1 });
        }
        let c_i = t_p.dot(&y_res) / tp_sq;
        let p_i = s_mat.t().dot(&t_p) / tp_sq;

        let tq_sq = t_q.dot(&t_q);
        let q_i = if t_p.len() == t_q.len() {
            // Equal sample sizes: the stated cross-score normalization
            // (t_pᵀt_q)⁻¹·t_qᵀT_{i−1}, with a warning because the
            // cross-score can vanish independently of t_q.
            let cross = t_p.dot(&t_q);
            if tq_sq > 0.0 && cross.abs() < CROSS_SCORE_WARNING * tp_sq.sqrt() * tq_sq.sqrt() {
                warnings.push(format!(
                    "component {}: target loading normalization ill-conditioned \
                     (|t_pᵀt_q| = {:.3e} against score norms {:.3e}·{:.3e})",
                    i + 1,
                    cross.abs(),
                    tp_sq.sqrt(),
                    tq_sq.sqrt()
                ));
            }
            t_mat.t().dot(&t_q) / cross
        } else if tq_sq < SCORE_FLOOR {
            // Nothing to remove along a vanished target score.
            warnings.push(format!(
                "component {}: target scores vanish; skipping target deflation",
                i + 1
            ));
            Array1::zeros(d)
        } else {
            // Unequal sample sizes leave the cross-score undefined (t_p and
            // t_q live in different spaces); normalize by t_qᵀt_q, the same
            // projection form used for p_i.
            t_mat.t().dot(&t_q) / tq_sq
        };
        if q_i.iter().any(|v| !v.is_finite()) {
            return Err(DiplsError::NonFinite {
                context: "target loading",
            });
        }

        s_mat -= &outer(&t_p, &p_i);
        t_mat -= &outer(&t_q, &q_i);
        y_res -= &(&t_p * c_i);

        w_cols.column_mut(i).assign(&w);
        p_cols.column_mut(i).assign(&p_i);
        c_vec[i] = c_i;
        gammas.push(gamma);
        variance_gaps.push(w.dot(&lambda.dot(&w)));
    }

    let ptw = p_cols.t().dot(&w_cols);
    let z = solve_general(&ptw, &c_vec, "loading/weight system")?;
    let b = w_cols.dot(&z);
    if b.iter().any(|v| !v.is_finite()) {
        return Err(DiplsError::NonFinite {
            context: "regression vector",
        });
    }

    DiplsModel::from_parts(
        w_cols,
        p_cols,
        c_vec,
        b,
        x_mean_source,
        x_mean_target,
        y_mean,
        gammas,
        variance_gaps,
        warnings,
    )
}

/// Predict responses: `(X − x_mean_source)·b + y_mean`.
pub fn predict(model: &DiplsModel, x: &Sample) -> Result<Array1<f64>> {
    if x.ncols() != model.input_dim() {
        return Err(DiplsError::DimensionMismatch {
            expected: model.input_dim(),
            found: x.ncols(),
        });
    }
    let centered = &x.view().to_owned() - &model.x_mean_source().view().insert_axis(Axis(0));
    Ok(centered.dot(model.regression_vector()) + model.y_mean())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn sample(rows: &[Vec<f64>]) -> Sample {
        Sample::from_rows(rows).unwrap()
    }

    #[test]
    fn identical_samples_give_a_zero_penalty_matrix() {
        let sp = sample(&[vec![0.0, 1.0], vec![2.0, -1.0], vec![1.0, 3.0]]);
        let sq = sample(&[vec![0.0, 1.0], vec![2.0, -1.0], vec![1.0, 3.0]]);
        let lambda = lambda_matrix(&sp, &sq).unwrap();
        assert!(lambda.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn one_dimensional_penalty_is_the_absolute_variance_difference() {
        // var(sp) = 2 (divisor n−1), var(sq) = 0.5 → Λ = [1.5].
        let root2 = 2.0_f64.sqrt();
        let sp = sample(&[vec![0.0], vec![root2], vec![2.0 * root2]]);
        let sq = sample(&[vec![0.0], vec![1.0 / root2], vec![2.0 / root2]]);
        let lambda = lambda_matrix(&sp, &sq).unwrap();
        assert_abs_diff_eq!(lambda[[0, 0]], 1.5, epsilon = 1e-12);
    }

    #[test]
    fn zero_gamma_direction_is_the_normalized_covariance_direction() {
        let s = array![[1.0, 0.0], [0.0, 2.0], [-1.0, -2.0]];
        let y = array![1.0, -1.0, 0.0];
        let lambda = Array2::<f64>::eye(2);
        let w = direction(&s, &y, &lambda, 0.0).unwrap();
        let sty = s.t().dot(&y);
        let expected = &sty / sty.dot(&sty).sqrt();
        assert_abs_diff_eq!(w[0], expected[0], epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], expected[1], epsilon = 1e-14);
    }

    #[test]
    fn one_dimensional_directions_are_signed_units() {
        let s = array![[1.0], [-2.0], [1.0]];
        let y = array![-1.0, 2.0, -1.0];
        let lambda = array![[3.0]];
        let w = direction(&s, &y, &lambda, 5.0).unwrap();
        assert_eq!(w[0], -1.0);
    }

    #[test]
    fn huge_penalty_spread_is_reported_as_ill_conditioned() {
        let s = array![[1.0, 0.0], [-1.0, 0.5], [0.0, -0.5]];
        let y = array![1.0, -1.0, 0.0];
        let lambda = array![[1e14, 0.0], [0.0, 0.0]];
        let err = direction(&s, &y, &lambda, 1.0).unwrap_err();
        assert!(matches!(err, DiplsError::IllConditioned { .. }));
    }

    #[test]
    fn heuristic_equals_one_when_the_terms_have_equal_magnitude() {
        // 1-D: w0 = +1, ‖S − y·w0ᵀ‖²_F = 2, Λ = [2] → γ = 1.
        let s = array![[-2.0], [2.0]];
        let y = array![-1.0, 1.0];
        let lambda = array![[2.0]];
        let estimate = gamma_heuristic(&s, &y, &lambda).unwrap();
        assert!(estimate.warning.is_none());
        assert_abs_diff_eq!(estimate.value, 1.0, epsilon = 1e-12);
        // Doubling Λ halves γ.
        let halved = gamma_heuristic(&s, &y, &(lambda * 2.0)).unwrap();
        assert_abs_diff_eq!(halved.value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn heuristic_warns_and_returns_zero_for_a_vanishing_penalty() {
        let s = array![[-2.0], [2.0]];
        let y = array![-1.0, 1.0];
        let lambda = array![[0.0]];
        let estimate = gamma_heuristic(&s, &y, &lambda).unwrap();
        assert_eq!(estimate.value, 0.0);
        assert!(estimate.warning.is_some());
    }

    #[test]
    fn predicting_the_training_mean_row_returns_the_response_mean() {
        let xp = sample(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 1.0], vec![3.0, 3.0]]);
        let y = array![0.0, 1.0, 2.0, 3.0];
        let xq = sample(&[vec![0.5, 0.5], vec![1.5, 2.5], vec![2.5, 1.5], vec![3.5, 3.5]]);
        let config = DiplsConfig {
            n_components: 2,
            gamma_mode: GammaMode::Fixed(0.7),
        };
        let model = fit(&xp, &y, &xq, &config).unwrap();
        let mean_row = sample(&[model.x_mean_source().to_vec()]);
        let prediction = predict(&model, &mean_row).unwrap();
        assert_abs_diff_eq!(prediction[0], model.y_mean(), epsilon = 1e-12);
    }

    #[test]
    fn fitted_weight_columns_have_unit_norm() {
        let xp = sample(&[
            vec![0.1, 1.0, -0.5],
            vec![1.2, -0.3, 0.8],
            vec![-0.7, 0.9, 1.1],
            vec![0.4, -1.2, -0.2],
            vec![1.0, 0.5, 0.3],
        ]);
        let y = array![0.2, 1.1, -0.4, 0.9, -1.3];
        let xq = sample(&[
            vec![0.3, 0.8, -0.1],
            vec![1.4, -0.6, 1.0],
            vec![-0.2, 1.2, 0.6],
            vec![0.9, -0.9, -0.7],
            vec![0.5, 0.1, 0.9],
        ]);
        let config = DiplsConfig {
            n_components: 3,
            gamma_mode: GammaMode::Heuristic,
        };
        let model = fit(&xp, &y, &xq, &config).unwrap();
        for col in model.w().columns() {
            assert_abs_diff_eq!(col.dot(&col).sqrt(), 1.0, epsilon = 1e-12);
        }
        assert_eq!(model.gammas().len(), 3);
        assert!(model.gammas().iter().all(|g| g.is_finite() && *g >= 0.0));
    }

    #[test]
    fn rank_deficient_inputs_yield_a_degenerate_component_error() {
        // Second column is twice the first: rank 1, so the second
        // component exhausts the source matrix.
        let xp = sample(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0], vec![4.0, 8.0]]);
        let y = array![1.0, 1.5, 3.2, 4.1];
        let xq = sample(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0], vec![4.0, 8.0]]);
        let config = DiplsConfig {
            n_components: 2,
            gamma_mode: GammaMode::Zero,
        };
        let err = fit(&xp, &y, &xq, &config).unwrap_err();
        assert!(matches!(
            err,
            DiplsError::DegenerateComponent { iteration: 2 }
        ));
    }

    #[test]
    fn invalid_requests_are_rejected() {
        let xp = sample(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]]);
        let xq = sample(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]]);
        // Constant response.
        let constant = array![1.0, 1.0, 1.0];
        let config = DiplsConfig {
            n_components: 1,
            gamma_mode: GammaMode::Zero,
        };
        assert!(fit(&xp, &constant, &xq, &config).is_err());
        // More components than dimensions.
        let y = array![0.0, 1.0, 2.0];
        let too_many = DiplsConfig {
            n_components: 3,
            gamma_mode: GammaMode::Zero,
        };
        assert!(fit(&xp, &y, &xq, &too_many).is_err());
        // Negative fixed weight.
        let negative = DiplsConfig {
            n_components: 1,
            gamma_mode: GammaMode::Fixed(-1.0),
        };
        assert!(fit(&xp, &y, &xq, &negative).is_err());
        // Mismatched response length.
        let short = array![0.0, 1.0];
        assert!(fit(&xp, &short, &xq, &config).is_err());
    }
}
