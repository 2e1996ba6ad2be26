//! Cubic smoothing of sampled curves via a second-difference roughness
//! penalty.
//!
//! For observations `m` on an equidistant grid the smoothed curve `c`
//! minimises `sum_v (c_v - m_v)^2 + smooth * sum_v (c_{v-1} - 2 c_v +
//! c_{v+1})^2`, i.e. it solves the pentadiagonal normal equations
//! `(I + smooth * D2' D2) c = m` with `D2` the second-difference operator.
//! The system is symmetric positive definite for every `smooth >= 0`, so it
//! is solved with a banded Cholesky factorisation in O(n) time.

use crate::{Result, ScitsmError};

/// Second-difference stencil applied by each row of `D2`.
const STENCIL: [f64; 3] = [1.0, -2.0, 1.0];

/// Smooths `values` with roughness weight `smooth`.
///
/// `smooth == 0` returns the input unchanged; inputs with fewer than three
/// points have no interior second difference and are likewise returned
/// unchanged.  Constant and affine sequences are fixed points for every
/// weight because their second differences vanish.
pub fn whittaker_smooth(values: &[f64], smooth: f64) -> Result<Vec<f64>> {
    if !smooth.is_finite() || smooth < 0.0 {
        return Err(ScitsmError::InvalidParameter {
            name: "smooth",
            message: format!("roughness weight must be finite and >= 0, got {smooth}"),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(ScitsmError::NonFinite {
            context: "smoothing input",
        });
    }
    let n = values.len();
    if smooth == 0.0 || n < 3 {
        return Ok(values.to_vec());
    }

    // Assemble the lower bands of I + smooth * D2' D2.
    let mut diag = vec![1.0; n];
    let mut sub1 = vec![0.0; n.saturating_sub(1)];
    let mut sub2 = vec![0.0; n.saturating_sub(2)];
    for row in 0..n - 2 {
        for a in 0..3 {
            for b in a..3 {
                let contribution = smooth * STENCIL[a] * STENCIL[b];
                let col = row + a;
                match b - a {
                    0 => diag[col] += contribution,
                    1 => sub1[col] += contribution,
                    _ => sub2[col] += contribution,
                }
            }
        }
    }

    let solution = solve_pentadiagonal(&mut diag, &mut sub1, &mut sub2, values)?;
    Ok(solution)
}

/// Solves a symmetric positive-definite pentadiagonal system in place.
///
/// `diag`, `sub1`, and `sub2` hold the main diagonal and the first and
/// second sub-diagonals; they are overwritten with the Cholesky factor.
fn solve_pentadiagonal(
    diag: &mut [f64],
    sub1: &mut [f64],
    sub2: &mut [f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    // Banded Cholesky: L has the same bandwidth.  Row i only interacts with
    // rows i-1 and i-2.
    for i in 0..n {
        let mut d = diag[i];
        if i >= 1 {
            d -= sub1[i - 1] * sub1[i - 1];
        }
        if i >= 2 {
            d -= sub2[i - 2] * sub2[i - 2];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(ScitsmError::NonFinite {
                context: "smoothing system factorisation",
            });
        }
        let root = d.sqrt();
        diag[i] = root;
        if i + 1 < n {
            let mut s = sub1[i];
            if i >= 1 {
                s -= sub1[i - 1] * sub2[i - 1];
            }
            sub1[i] = s / root;
        }
        if i + 2 < n {
            sub2[i] /= root;
        }
    }

    // Forward substitution L y = rhs.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = rhs[i];
        if i >= 1 {
            s -= sub1[i - 1] * y[i - 1];
        }
        if i >= 2 {
            s -= sub2[i - 2] * y[i - 2];
        }
        y[i] = s / diag[i];
    }
    // Backward substitution L' c = y.
    let mut c = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        if i + 1 < n {
            s -= sub1[i] * c[i + 1];
        }
        if i + 2 < n {
            s -= sub2[i] * c[i + 2];
        }
        c[i] = s / diag[i];
    }
    Ok(c)
}
