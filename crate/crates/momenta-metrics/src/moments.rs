//! Central moments, the central moment discrepancy and its weighting.

use ndarray::{Array1, Array2, Axis};

use crate::{MetricsError, Result, Sample};

/// Marginal moment summary of a sample: the mean vector `c_1` and the
/// coordinate-wise central moments `c_2..c_m`.
///
/// All moments are biased plug-in estimates (divisor `n`): the summary is the
/// empirical counterpart of the population moment vectors entering the dual
/// form of the central moment discrepancy. The unbiased variants exist in the
/// literature; this crate deliberately implements the plug-in form and
/// documents the bias rather than mixing conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSummary {
    /// Highest moment order `m ≥ 1` captured by the summary.
    pub order: usize,
    /// Column means (`c_1`).
    pub mean: Array1<f64>,
    /// Central moments `c_2..c_m`; entry `j - 2` holds order `j`.
    pub central: Vec<Array1<f64>>,
}

/// Nonnegative weighting factors `a_1..a_m` of the discrepancy terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CmdWeights {
    a: Vec<f64>,
}

impl CmdWeights {
    /// Validate and wrap a weight vector (`a_j ≥ 0`, finite, nonempty).
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(MetricsError::InvalidParameter {
                name: "weights",
                message: "at least one weight is required".into(),
            });
        }
        if a.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MetricsError::InvalidParameter {
                name: "weights",
                message: "weights must be finite and nonnegative".into(),
            });
        }
        Ok(Self { a })
    }

    /// Weights of all `m` terms as a slice, `a_1` first.
    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }

    /// Number of weighted terms.
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Options altering how the discrepancy terms are assembled.
#[derive(Debug, Clone, Copy, Default)]
pub struct CmdOptions {
    /// Replace the order-2 marginal term by the full cross-covariance term:
    /// the Euclidean distance between all distinct entries `E[(x-μ)_a(x-μ)_b]`,
    /// `a ≤ b`, instead of only the diagonal. Orders other than 2 stay
    /// marginal; cross terms of higher order are out of scope.
    pub cross_second_order: bool,
}

/// Compute the marginal moment summary of `x` up to order `m`.
///
/// `mean` holds the column means; for `j = 2..m`, `central[j-2]` holds the
/// column means of the coordinate-wise `j`-th power of the centered rows.
pub fn central_moments(x: &Sample, m: usize) -> Result<MomentSummary> {
    if m < 1 {
        return Err(MetricsError::InvalidParameter {
            name: "m",
            message: "moment order must be at least 1".into(),
        });
    }
    let data = x.view();
    let n = data.nrows() as f64;
    let mean = data.mean_axis(Axis(0)).expect("sample is nonempty");
    let centered = &data - &mean;
    let mut central = Vec::with_capacity(m.saturating_sub(1));
    // Running coordinate-wise power of the centered rows: starts at power 1.
    let mut power = centered.clone();
    for _ in 2..=m {
        power *= &centered;
        central.push(power.sum_axis(Axis(0)) / n);
    }
    Ok(MomentSummary {
        order: m,
        mean,
        central,
    })
}

/// All distinct second central cross moments `E[(x-μ)_a (x-μ)_b]`, `a ≤ b`,
/// as a flat vector of length `d(d+1)/2` (biased plug-in, divisor `n`).
pub fn cross_covariances(x: &Sample) -> Array1<f64> {
    let data = x.view();
    let n = data.nrows() as f64;
    let d = data.ncols();
    let mean = data.mean_axis(Axis(0)).expect("sample is nonempty");
    let centered: Array2<f64> = &data - &mean;
    let mut out = Array1::zeros(d * (d + 1) / 2);
    let mut idx = 0;
    for a in 0..d {
        for b in a..d {
            let cov = centered
                .column(a)
                .iter()
                .zip(centered.column(b).iter())
                .map(|(u, v)| u * v)
                .sum::<f64>()
                / n;
            out[idx] = cov;
            idx += 1;
        }
    }
    out
}

fn check_same_dim(xp: &Sample, xq: &Sample) -> Result<()> {
    if xp.ncols() != xq.ncols() {
        return Err(MetricsError::DimensionMismatch {
            expected: xp.ncols(),
            found: xq.ncols(),
        });
    }
    Ok(())
}

/// Unweighted discrepancy terms `‖ĉ_j(x_p) − ĉ_j(x_q)‖_2`, `j = 1..m`.
pub fn cmd_terms(xp: &Sample, xq: &Sample, m: usize, options: CmdOptions) -> Result<Vec<f64>> {
    check_same_dim(xp, xq)?;
    let sp = central_moments(xp, m)?;
    let sq = central_moments(xq, m)?;
    let mut terms = Vec::with_capacity(m);
    let l2 = |a: &Array1<f64>, b: &Array1<f64>| -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt()
    };
    terms.push(l2(&sp.mean, &sq.mean));
    for j in 2..=m {
        if j == 2 && options.cross_second_order {
            let cp = cross_covariances(xp);
            let cq = cross_covariances(xq);
            terms.push(l2(&cp, &cq));
        } else {
            terms.push(l2(&sp.central[j - 2], &sq.central[j - 2]));
        }
    }
    Ok(terms)
}

/// Central moment discrepancy between two samples in its dual form:
/// `Σ_{j=1..m} a_j · ‖ĉ_j(x_p) − ĉ_j(x_q)‖_2` with `ĉ_1` the mean vector and
/// `ĉ_j` the coordinate-wise `j`-th central moment vector.
pub fn cmd(xp: &Sample, xq: &Sample, m: usize, weights: &CmdWeights) -> Result<f64> {
    cmd_with_options(xp, xq, m, weights, CmdOptions::default())
}

/// [`cmd`] with explicit term-assembly options.
pub fn cmd_with_options(
    xp: &Sample,
    xq: &Sample,
    m: usize,
    weights: &CmdWeights,
    options: CmdOptions,
) -> Result<f64> {
    if weights.len() != m {
        return Err(MetricsError::InvalidParameter {
            name: "weights",
            message: format!("expected {} weights, found {}", m, weights.len()),
        });
    }
    let terms = cmd_terms(xp, xq, m, options)?;
    Ok(weights
        .as_slice()
        .iter()
        .zip(terms.iter())
        .map(|(a, t)| a * t)
        .sum())
}

/// Default weighting `a_j = |b − a|^{−j}` for samples supported on `[a, b]^d`.
///
/// Under this weighting every discrepancy term obeys the decreasing closed-form
/// bound of [`cmd_term_bound`], so truncating the series at `m` has a
/// controlled error.
pub fn default_weights(a: f64, b: f64, m: usize) -> Result<CmdWeights> {
    if !(a.is_finite() && b.is_finite()) || a == b {
        return Err(MetricsError::InvalidParameter {
            name: "range",
            message: "range endpoints must be finite and distinct".into(),
        });
    }
    if m < 1 {
        return Err(MetricsError::InvalidParameter {
            name: "m",
            message: "moment order must be at least 1".into(),
        });
    }
    let width = (b - a).abs();
    CmdWeights::new((1..=m).map(|j| width.powi(-(j as i32))).collect())
}

/// Closed-form upper bound on the weighted order-`j` discrepancy term for
/// samples supported on `[a, b]^d` under [`default_weights`]:
/// `2·√d·( (1/(j+1))·(j/(j+1))^j + 1/2^{1+j} )`.
///
/// The bound decreases in `j`, which justifies truncating the moment series.
pub fn cmd_term_bound(j: usize, d: usize) -> Result<f64> {
    if j < 1 {
        return Err(MetricsError::InvalidParameter {
            name: "j",
            message: "term order must be at least 1".into(),
        });
    }
    if d < 1 {
        return Err(MetricsError::InvalidParameter {
            name: "d",
            message: "dimension must be at least 1".into(),
        });
    }
    let jf = j as f64;
    let inner = (jf / (jf + 1.0)).powi(j as i32) / (jf + 1.0) + 0.5f64.powi(1 + j as i32);
    Ok(2.0 * (d as f64).sqrt() * inner)
}
