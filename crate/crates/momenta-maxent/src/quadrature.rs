//! Gauss–Legendre quadrature on the unit interval.

use crate::{MaxEntError, Result};

/// Nodes and weights of an `N`-point Gauss–Legendre rule mapped to `[0, 1]`.
///
/// The rule integrates polynomials up to degree `2N − 1` exactly; with the
/// default `N = 256` that is far beyond anything the order-5 moment machinery
/// produces, so quadrature error is negligible against the fitting tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Node count used throughout the crate unless a caller supplies a grid.
pub const DEFAULT_NODES: usize = 256;

impl QuadratureGrid {
    /// Build the `n`-point Gauss–Legendre rule on `[0, 1]`.
    ///
    /// Roots of the degree-`n` Legendre polynomial are located by Newton
    /// iteration from the Chebyshev-like initial guesses
    /// `cos(π(i − 1/4)/(n + 1/2))`, then affinely mapped from `[−1, 1]`.
    pub fn gauss_legendre(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(MaxEntError::InvalidParameter {
                name: "n",
                message: "quadrature rule needs at least two nodes".into(),
            });
        }
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots come in symmetric pairs; solve for the first half.
        for i in 0..n.div_ceil(2) {
            let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, t);
                dp = d;
                let step = p / d;
                t -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - t * t) * dp * dp);
            // t is the i-th root counted from +1 downward.
            nodes[n - 1 - i] = (t + 1.0) / 2.0;
            nodes[i] = (1.0 - t) / 2.0;
            weights[n - 1 - i] = w / 2.0;
            weights[i] = w / 2.0;
        }
        Ok(Self { nodes, weights })
    }

    /// The crate-wide default rule ([`DEFAULT_NODES`] points).
    pub fn default_rule() -> Self {
        Self::gauss_legendre(DEFAULT_NODES).expect("default node count is valid")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature nodes, strictly inside `(0, 1)`, in increasing order.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights; they sum to 1 (the length of the interval).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Approximate `∫₀¹ f(x) dx`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

/// Value and derivative of the degree-`n` Legendre polynomial on `[−1, 1]`
/// via the three-term recurrence.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = t;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * t * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (t * p - p_prev) / (t * t - 1.0);
    (p, d)
}
