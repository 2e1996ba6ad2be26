//! Fitting and evaluating polynomial exponential-family densities.

use crate::basis::LegendreBasis;
use crate::quadrature::QuadratureGrid;
use crate::{MaxEntError, Result};

/// A fitted maximum-entropy density `q(x) = c(λ)·exp(−⟨λ, φ(x)⟩)` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxEntModel {
    basis: LegendreBasis,
    lambda: Vec<f64>,
    /// `log Z(λ) = log(1/c(λ))`, the log-normalizer.
    log_norm: f64,
}

/// Convergence diagnostics of a fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Newton iterations performed.
    pub iterations: usize,
    /// ℓ∞ norm of the dual gradient at the returned iterate.
    pub grad_norm: f64,
    /// Dual objective `Γ` after every accepted step, starting with `Γ(0)`.
    /// Damping guarantees this sequence decreases monotonically.
    pub gamma_trace: Vec<f64>,
}

impl MaxEntModel {
    /// The uniform density (`λ = 0`) for a given basis.
    pub fn uniform(basis: LegendreBasis) -> Self {
        let m = basis.order();
        Self {
            basis,
            lambda: vec![0.0; m],
            log_norm: 0.0,
        }
    }

    pub fn basis(&self) -> &LegendreBasis {
        &self.basis
    }

    /// Natural parameters `λ` (sign convention `exp(−⟨λ, φ⟩)`).
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// `log Z(λ)`, the log of the reciprocal normalizing constant.
    pub fn log_norm(&self) -> f64 {
        self.log_norm
    }

    /// Moments `E_q[φ]` of the fitted density, by quadrature on `grid`.
    pub fn moments(&self, grid: &QuadratureGrid) -> Vec<f64> {
        let stats = SufficientStats::at(&self.lambda, &self.basis, grid);
        stats.mean
    }
}

/// Evaluate the model's density at `x ∈ [0, 1]`.
pub fn density_eval(model: &MaxEntModel, x: f64) -> Result<f64> {
    let phi = model.basis.phi(x)?;
    let exponent: f64 = model
        .lambda
        .iter()
        .zip(phi.iter())
        .map(|(l, p)| l * p)
        .sum();
    Ok((-exponent - model.log_norm).exp())
}

/// Differential entropy of the model, in nats, via the exponential-family
/// closed form `h(q) = log Z + ⟨λ, E_q[φ]⟩` (the expectation is evaluated on
/// the crate's default quadrature grid).
pub fn entropy(model: &MaxEntModel) -> f64 {
    let grid = QuadratureGrid::default_rule();
    let mu = model.moments(&grid);
    model.log_norm
        + model
            .lambda
            .iter()
            .zip(mu.iter())
            .map(|(l, m)| l * m)
            .sum::<f64>()
}

/// Kullback–Leibler divergence `∫ p log(p/q)` between two densities given as
/// functions, by quadrature. Both must be strictly positive at every node.
pub fn kl(p_fn: impl Fn(f64) -> f64, q_fn: impl Fn(f64) -> f64, grid: &QuadratureGrid) -> Result<f64> {
    let mut acc = 0.0;
    for (&x, &w) in grid.nodes().iter().zip(grid.weights().iter()) {
        let p = p_fn(x);
        let q = q_fn(x);
        if !(p > 0.0 && q > 0.0) {
            return Err(MaxEntError::InvalidParameter {
                name: "density",
                message: format!("nonpositive density at node {x}"),
            });
        }
        acc += w * p * (p / q).ln();
    }
    if !acc.is_finite() {
        return Err(MaxEntError::NonFinite {
            context: "kl divergence",
        });
    }
    Ok(acc)
}

/// L1 distance `∫ |p − q|` between two densities given as functions.
pub fn l1(p_fn: impl Fn(f64) -> f64, q_fn: impl Fn(f64) -> f64, grid: &QuadratureGrid) -> f64 {
    grid.integrate(|x| (p_fn(x) - q_fn(x)).abs())
}

/// Fit the maximum-entropy density with moments `mu`.
///
/// Minimizes the convex dual `Γ(λ) = ⟨λ, μ⟩ + log Z(λ)` by damped Newton:
/// the gradient is `μ − E_q[φ]`, the Hessian is `Cov_q(φ)` (positive
/// definite inside the moment set), and each step is backtracked until the
/// Armijo condition holds. Stops when the gradient's ℓ∞ norm falls below
/// `tol`; exceeding `max_iter` yields a convergence-failure error carrying
/// the final gradient norm — the typical cause is a moment vector outside or
/// too close to the boundary of the achievable set.
pub fn fit_maxent(
    mu: &[f64],
    basis: LegendreBasis,
    tol: f64,
    max_iter: usize,
) -> Result<MaxEntModel> {
    fit_maxent_detailed(mu, basis, tol, max_iter).map(|(model, _)| model)
}

/// [`fit_maxent`] returning convergence diagnostics alongside the model.
pub fn fit_maxent_detailed(
    mu: &[f64],
    basis: LegendreBasis,
    tol: f64,
    max_iter: usize,
) -> Result<(MaxEntModel, FitReport)> {
    let m = basis.order();
    if mu.len() != m {
        return Err(MaxEntError::InvalidParameter {
            name: "mu",
            message: format!("expected {} moments, found {}", m, mu.len()),
        });
    }
    if mu.iter().any(|v| !v.is_finite()) {
        return Err(MaxEntError::InvalidParameter {
            name: "mu",
            message: "moments must be finite".into(),
        });
    }
    if !(tol > 0.0) {
        return Err(MaxEntError::InvalidParameter {
            name: "tol",
            message: "tolerance must be positive".into(),
        });
    }
    let grid = QuadratureGrid::default_rule();
    let mut lambda = vec![0.0; m];
    let mut stats = SufficientStats::at(&lambda, &basis, &grid);
    let mut gamma = gamma_value(&lambda, mu, stats.log_z);
    let mut trace = vec![gamma];
    let mut grad: Vec<f64> = (0..m).map(|j| mu[j] - stats.mean[j]).collect();
    let mut grad_norm = inf_norm(&grad);

    const ARMIJO: f64 = 1e-4;
    const MAX_HALVINGS: usize = 40;
    // Below this gradient norm the iterate is inside Newton's quadratic
    // basin: full steps converge on their own, while Armijo certification
    // would stall because the per-step decrease (~‖g‖²) drops below the
    // floating-point granularity of Γ.
    const LOCAL_BASIN: f64 = 1e-6;

    let mut iterations_done = max_iter;
    for iteration in 0..max_iter {
        if grad_norm <= tol {
            return Ok((
                MaxEntModel {
                    basis,
                    lambda,
                    log_norm: stats.log_z,
                },
                FitReport {
                    iterations: iteration,
                    grad_norm,
                    gamma_trace: trace,
                },
            ));
        }
        // Newton direction Cov⁻¹ · grad; fall back to the gradient itself if
        // the covariance has lost positive definiteness to rounding.
        let direction =
            solve_spd(&stats.covariance, &grad).unwrap_or_else(|| grad.clone());
        let decrease: f64 = grad
            .iter()
            .zip(direction.iter())
            .map(|(g, d)| g * d)
            .sum();
        // A convex objective guarantees ⟨grad, H⁻¹ grad⟩ ≥ 0; a nonpositive
        // value means the direction is numerically useless.
        if !(decrease > 0.0) {
            return Err(MaxEntError::ConvergenceFailure {
                iterations: iteration,
                grad_norm,
            });
        }
        let mut accepted = None;
        if grad_norm <= LOCAL_BASIN {
            let candidate: Vec<f64> = lambda
                .iter()
                .zip(direction.iter())
                .map(|(l, d)| l - d)
                .collect();
            let cand_stats = SufficientStats::at(&candidate, &basis, &grid);
            let cand_gamma = gamma_value(&candidate, mu, cand_stats.log_z);
            // Accept the pure step as long as Γ does not genuinely increase
            // (ulp-level wiggle is expected this close to the optimum).
            if cand_gamma.is_finite() && cand_gamma <= gamma + 1e-12 * (1.0 + gamma.abs()) {
                let cand_grad: Vec<f64> =
                    (0..m).map(|j| mu[j] - cand_stats.mean[j]).collect();
                let cand_norm = inf_norm(&cand_grad);
                if cand_norm >= grad_norm {
                    // Rounding floor reached; no direction can improve.
                    iterations_done = iteration;
                    break;
                }
                accepted = Some((candidate, cand_stats, cand_gamma));
            }
        }
        if accepted.is_none() {
            let mut step = 1.0;
            for _ in 0..=MAX_HALVINGS {
                let candidate: Vec<f64> = lambda
                    .iter()
                    .zip(direction.iter())
                    .map(|(l, d)| l - step * d)
                    .collect();
                let cand_stats = SufficientStats::at(&candidate, &basis, &grid);
                let cand_gamma = gamma_value(&candidate, mu, cand_stats.log_z);
                if cand_gamma.is_finite() && cand_gamma <= gamma - ARMIJO * step * decrease {
                    accepted = Some((candidate, cand_stats, cand_gamma));
                    break;
                }
                step *= 0.5;
            }
        }
        let Some((next_lambda, next_stats, next_gamma)) = accepted else {
            return Err(MaxEntError::ConvergenceFailure {
                iterations: iteration,
                grad_norm,
            });
        };
        lambda = next_lambda;
        stats = next_stats;
        gamma = next_gamma;
        trace.push(gamma);
        grad = (0..m).map(|j| mu[j] - stats.mean[j]).collect();
        grad_norm = inf_norm(&grad);
    }
    if grad_norm <= tol {
        return Ok((
            MaxEntModel {
                basis,
                lambda,
                log_norm: stats.log_z,
            },
            FitReport {
                iterations: iterations_done,
                grad_norm,
                gamma_trace: trace,
            },
        ));
    }
    Err(MaxEntError::ConvergenceFailure {
        iterations: iterations_done,
        grad_norm,
    })
}

fn gamma_value(lambda: &[f64], mu: &[f64], log_z: f64) -> f64 {
    lambda
        .iter()
        .zip(mu.iter())
        .map(|(l, m)| l * m)
        .sum::<f64>()
        + log_z
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Log-normalizer, mean, and covariance of `φ` under `q_λ`, evaluated on the
/// quadrature grid with a max-shift so large `⟨λ, φ⟩` cannot overflow.
struct SufficientStats {
    log_z: f64,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

impl SufficientStats {
    fn at(lambda: &[f64], basis: &LegendreBasis, grid: &QuadratureGrid) -> Self {
        let m = basis.order();
        let nodes = grid.nodes();
        let weights = grid.weights();
        let phis: Vec<Vec<f64>> = nodes
            .iter()
            .map(|&x| basis.phi(x).expect("grid nodes lie in [0, 1]"))
            .collect();
        let exponents: Vec<f64> = phis
            .iter()
            .map(|phi| -lambda.iter().zip(phi.iter()).map(|(l, p)| l * p).sum::<f64>())
            .collect();
        let shift = exponents.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        // Unnormalized masses w_i · exp(s_i − shift); Z = e^shift · Σ masses.
        let masses: Vec<f64> = exponents
            .iter()
            .zip(weights.iter())
            .map(|(&s, &w)| w * (s - shift).exp())
            .collect();
        let total: f64 = masses.iter().sum();
        let log_z = shift + total.ln();
        let mut mean = vec![0.0; m];
        for (mass, phi) in masses.iter().zip(phis.iter()) {
            for j in 0..m {
                mean[j] += mass * phi[j];
            }
        }
        for v in &mut mean {
            *v /= total;
        }
        let mut covariance = vec![vec![0.0; m]; m];
        for (mass, phi) in masses.iter().zip(phis.iter()) {
            let p = mass / total;
            for a in 0..m {
                let da = phi[a] - mean[a];
                for b in a..m {
                    covariance[a][b] += p * da * (phi[b] - mean[b]);
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                covariance[a][b] = covariance[b][a];
            }
        }
        Self {
            log_z,
            mean,
            covariance,
        }
    }
}

/// Solve `A x = b` for symmetric positive definite `A` by Cholesky
/// factorization; `None` if a pivot is not strictly positive.
fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    // Forward substitution L y = b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * y[k];
        }
        y[i] = sum / l[i][i];
    }
    // Back substitution Lᵀ x = y.
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[k][i] * x[k];
        }
        x[i] = sum / l[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_moments_fit_the_uniform() {
        let basis = LegendreBasis::new(5).unwrap();
        let model = fit_maxent(&[0.0; 5], basis, 1e-9, 100).unwrap();
        for l in model.lambda() {
            assert_abs_diff_eq!(*l, 0.0, epsilon = 1e-9);
        }
        assert_abs_diff_eq!(model.log_norm(), 0.0, epsilon = 1e-9);
        for x in [0.0, 0.25, 0.8, 1.0] {
            assert_abs_diff_eq!(density_eval(&model, x).unwrap(), 1.0, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(entropy(&model), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn fitted_density_normalizes() {
        let basis = LegendreBasis::new(3).unwrap();
        let model = fit_maxent(&[0.3, -0.1, 0.05], basis, 1e-9, 100).unwrap();
        let grid = QuadratureGrid::default_rule();
        let mass = grid.integrate(|x| density_eval(&model, x).unwrap());
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn fitted_moments_match_targets() {
        let basis = LegendreBasis::new(4).unwrap();
        let mu = [0.25, 0.1, -0.08, 0.02];
        let model = fit_maxent(&mu, basis, 1e-9, 100).unwrap();
        let grid = QuadratureGrid::default_rule();
        let fitted = model.moments(&grid);
        for (a, b) in mu.iter().zip(fitted.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
    }

    #[test]
    fn single_negative_first_parameter_gives_increasing_density() {
        let basis = LegendreBasis::new(1).unwrap();
        // λ_1 < 0 makes −λ_1·η_1 increasing in x.
        let model = MaxEntModel {
            basis,
            lambda: vec![-0.7],
            log_norm: {
                let grid = QuadratureGrid::default_rule();
                grid.integrate(|x| (0.7 * crate::legendre_eval(&basis, 1, x).unwrap()).exp())
                    .ln()
            },
        };
        let mut prev = density_eval(&model, 0.0).unwrap();
        for i in 1..=20 {
            let x = i as f64 / 20.0;
            let v = density_eval(&model, x).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn infeasible_moments_fail_with_gradient_norm() {
        let basis = LegendreBasis::new(2).unwrap();
        // No density on [0,1] has a first Legendre moment of 10 (|η_1| ≤ √3).
        let err = fit_maxent(&[10.0, 0.0], basis, 1e-9, 50).unwrap_err();
        match err {
            MaxEntError::ConvergenceFailure { grad_norm, .. } => {
                assert!(grad_norm > 0.0);
            }
            other => panic!("expected convergence failure, got {other:?}"),
        }
    }

    #[test]
    fn kl_of_density_with_itself_is_zero() {
        let basis = LegendreBasis::new(2).unwrap();
        let model = fit_maxent(&[0.2, -0.05], basis, 1e-9, 100).unwrap();
        let grid = QuadratureGrid::default_rule();
        let p = |x: f64| density_eval(&model, x).unwrap();
        assert_abs_diff_eq!(kl(p, p, &grid).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l1(p, p, &grid), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kl_rejects_nonpositive_densities() {
        let grid = QuadratureGrid::default_rule();
        let uniform = |_: f64| 1.0;
        let signed = |x: f64| x - 0.5;
        assert!(kl(signed, uniform, &grid).is_err());
        assert!(kl(uniform, signed, &grid).is_err());
    }

    #[test]
    fn density_eval_rejects_outside_arguments() {
        let basis = LegendreBasis::new(1).unwrap();
        let model = MaxEntModel::uniform(basis);
        assert!(density_eval(&model, -0.01).is_err());
        assert!(density_eval(&model, 1.01).is_err());
    }

    #[test]
    fn moment_length_mismatch_is_rejected() {
        let basis = LegendreBasis::new(3).unwrap();
        assert!(fit_maxent(&[0.0, 0.0], basis, 1e-9, 100).is_err());
    }
}
