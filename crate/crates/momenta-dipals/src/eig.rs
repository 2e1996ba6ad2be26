//! Small dense linear algebra: cyclic Jacobi eigendecomposition for
//! symmetric matrices, Cholesky solves for symmetric positive-definite
//! systems, and partially pivoted Gaussian elimination for small general
//! systems. Input dimensions in this crate are chemometric-scale (tens of
//! columns), where these textbook methods are accurate and deterministic.

use ndarray::{Array1, Array2};

use crate::{DiplsError, Result};

/// Off-diagonal Frobenius norm, the Jacobi convergence measure.
fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[[i, j]] * a[[i, j]];
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with `a = vectors · diag(values) · vectorsᵀ`;
/// eigenvalues are sorted ascending and the vector columns follow the same
/// order. Iteration stops when the off-diagonal norm falls below
/// `1e−12 · max(1, ‖a‖_F)`.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(DiplsError::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(DiplsError::NonFinite {
            context: "eigendecomposition input",
        });
    }
    let frob = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (a[[i, j]] - a[[j, i]]).abs())
        .fold(0.0f64, f64::max);
    if asym > 1e-9 * frob.max(1.0) {
        return Err(DiplsError::InvalidParameter {
            name: "matrix",
            message: format!("not symmetric (max asymmetry {asym:.3e})"),
        });
    }

    let mut m = a.clone();
    // Enforce exact symmetry so rotations stay consistent.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
    let mut vectors = Array2::<f64>::eye(n);
    let tol = 1e-12 * frob.max(1.0);
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        if off_diagonal_norm(&m) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq.abs() <= f64::EPSILON * frob.max(1.0) {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = vectors[[k, p]];
                    let vkq = vectors[[k, q]];
                    vectors[[k, p]] = c * vkp - s * vkq;
                    vectors[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut sorted_vectors = Array2::<f64>::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            sorted_vectors[[row, col]] = vectors[[row, src]];
        }
    }
    Ok((values, sorted_vectors))
}

/// Solve `a·x = b` for symmetric positive-definite `a` via Cholesky.
///
/// Returns an invalid-parameter error if the factorization encounters a
/// non-positive pivot (the matrix is not positive definite).
pub fn solve_spd(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(DiplsError::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if b.len() != n {
        return Err(DiplsError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return Err(DiplsError::InvalidParameter {
                        name: "matrix",
                        message: format!("not positive definite (pivot {sum:.3e} at row {i})"),
                    });
                }
                l[[i, i]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    // Forward then back substitution.
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[[i, k]] * y[k];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[[k, i]] * x[k];
        }
        x[i] = sum / l[[i, i]];
    }
    Ok(x)
}

/// Solve `a·x = b` for a small general square matrix by Gaussian
/// elimination with partial pivoting. A pivot below `1e−12` relative to
/// the largest input entry reports the system as rank-deficient under the
/// caller-supplied context label.
pub fn solve_general(
    a: &Array2<f64>,
    b: &Array1<f64>,
    context: &'static str,
) -> Result<Array1<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(DiplsError::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    if b.len() != n {
        return Err(DiplsError::DimensionMismatch {
            expected: n,
            found: b.len(),
        });
    }
    let mut m = a.clone();
    let mut rhs = b.clone();
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs())).max(1.0);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[[i, col]].abs().partial_cmp(&m[[j, col]].abs()).unwrap())
            .unwrap();
        let pivot = m[[pivot_row, col]];
        if pivot.abs() < 1e-12 * scale {
            return Err(DiplsError::RankDeficient { context });
        }
        if pivot_row != col {
            for k in 0..n {
                m.swap([col, k], [pivot_row, k]);
            }
            rhs.swap(col, pivot_row);
        }
        for row in (col + 1)..n {
            let factor = m[[row, col]] / m[[col, col]];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[[row, k]] -= factor * m[[col, k]];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = rhs[i];
        for k in (i + 1)..n {
            sum -= m[[i, k]] * x[k];
        }
        x[i] = sum / m[[i, i]];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn eigen_of_a_diagonal_matrix_is_immediate() {
        let a = array![[3.0, 0.0], [0.0, -1.0]];
        let (values, vectors) = symmetric_eigen(&a).unwrap();
        assert_abs_diff_eq!(values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(values[1], 3.0, epsilon = 1e-14);
        // Columns are signed unit basis vectors.
        assert_abs_diff_eq!(vectors[[1, 0]].abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vectors[[0, 1]].abs(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigen_reconstructs_a_random_symmetric_matrix() {
        let a = array![
            [2.0, -0.3, 0.8, 0.1],
            [-0.3, 1.0, 0.4, -0.6],
            [0.8, 0.4, -0.5, 0.2],
            [0.1, -0.6, 0.2, 3.0]
        ];
        let (values, vectors) = symmetric_eigen(&a).unwrap();
        let reconstructed = vectors.dot(&Array2::from_diag(&values)).dot(&vectors.t());
        for (x, y) in a.iter().zip(reconstructed.iter()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
        // Orthonormal eigenvectors.
        let gram = vectors.t().dot(&vectors);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(gram[[i, j]], expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn eigenvalues_are_sorted_ascending() {
        let a = array![[0.0, 2.0], [2.0, 0.0]];
        let (values, _) = symmetric_eigen(&a).unwrap();
        assert!(values[0] <= values[1]);
        assert_abs_diff_eq!(values[0], -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn spd_solve_matches_a_hand_inverted_system() {
        let a = array![[4.0, 1.0], [1.0, 3.0]];
        let b = array![1.0, 2.0];
        let x = solve_spd(&a, &b).unwrap();
        // Inverse of [[4,1],[1,3]] is [[3,-1],[-1,4]]/11.
        assert_abs_diff_eq!(x[0], 1.0 / 11.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 7.0 / 11.0, epsilon = 1e-14);
    }

    #[test]
    fn spd_solve_rejects_an_indefinite_matrix() {
        let a = array![[1.0, 2.0], [2.0, 1.0]];
        let b = array![1.0, 1.0];
        assert!(solve_spd(&a, &b).is_err());
    }

    #[test]
    fn general_solve_handles_a_permuted_system() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let b = array![5.0, -2.0];
        let x = solve_general(&a, &b, "test system").unwrap();
        assert_abs_diff_eq!(x[0], -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(x[1], 5.0, epsilon = 1e-14);
    }

    #[test]
    fn general_solve_reports_singularity() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        let b = array![1.0, 2.0];
        let err = solve_general(&a, &b, "test system").unwrap_err();
        assert!(matches!(err, DiplsError::RankDeficient { .. }));
    }
}
