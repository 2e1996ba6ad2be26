//! Orthonormal Legendre polynomials on the unit interval.

use crate::{MaxEntError, Result, MAX_ORDER};

/// Ascending-power coefficient tables of `η_1..η_5`, the shifted Legendre
/// polynomials normalized to unit L2 norm on `[0, 1]`:
/// `η_j = √(2j+1) · P̃_j` with `P̃_j` the shifted Legendre polynomial.
const SQRT3: f64 = 1.7320508075688772;
const SQRT5: f64 = 2.23606797749979;
const SQRT7: f64 = 2.6457513110645907;
const SQRT11: f64 = 3.3166247903554;

const ETA1: [f64; 2] = [-SQRT3, 2.0 * SQRT3];
const ETA2: [f64; 3] = [SQRT5, -6.0 * SQRT5, 6.0 * SQRT5];
const ETA3: [f64; 4] = [-SQRT7, 12.0 * SQRT7, -30.0 * SQRT7, 20.0 * SQRT7];
const ETA4: [f64; 5] = [3.0, -60.0, 270.0, -420.0, 210.0];
const ETA5: [f64; 6] = [
    -SQRT11,
    30.0 * SQRT11,
    -210.0 * SQRT11,
    560.0 * SQRT11,
    -630.0 * SQRT11,
    252.0 * SQRT11,
];

fn coefficients(j: usize) -> &'static [f64] {
    match j {
        1 => &ETA1,
        2 => &ETA2,
        3 => &ETA3,
        4 => &ETA4,
        5 => &ETA5,
        _ => unreachable!("order is validated at construction"),
    }
}

/// The moment basis `φ = (η_1, …, η_m)`, `1 ≤ m ≤ 5`.
///
/// Each `η_j` has zero mean on `[0, 1]` and the family is orthonormal, so the
/// moment vector of the uniform density is zero and moment coordinates are
/// directly comparable across orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LegendreBasis {
    order: usize,
}

impl LegendreBasis {
    /// Create a basis of the given order (`1..=5`).
    pub fn new(order: usize) -> Result<Self> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(MaxEntError::InvalidParameter {
                name: "order",
                message: format!("order must lie in 1..={MAX_ORDER}, found {order}"),
            });
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Evaluate the full feature vector `φ(x) = (η_1(x), …, η_m(x))`.
    ///
    /// `x` must lie in `[0, 1]`.
    pub fn phi(&self, x: f64) -> Result<Vec<f64>> {
        check_unit_interval(x)?;
        Ok((1..=self.order).map(|j| horner(coefficients(j), x)).collect())
    }

    /// Ascending-power polynomial coefficients of `η_j`.
    pub fn coefficients(&self, j: usize) -> Result<&'static [f64]> {
        self.check_order(j)?;
        Ok(coefficients(j))
    }

    fn check_order(&self, j: usize) -> Result<()> {
        if j < 1 || j > self.order {
            return Err(MaxEntError::InvalidParameter {
                name: "j",
                message: format!("basis index must lie in 1..={}, found {j}", self.order),
            });
        }
        Ok(())
    }
}

fn check_unit_interval(x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(MaxEntError::InvalidParameter {
            name: "x",
            message: format!("argument must lie in [0, 1], found {x}"),
        });
    }
    Ok(())
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Evaluate `η_j(x)` for `1 ≤ j ≤ basis.order()`, `x ∈ [0, 1]`.
pub fn legendre_eval(basis: &LegendreBasis, j: usize, x: f64) -> Result<f64> {
    basis.check_order(j)?;
    check_unit_interval(x)?;
    Ok(horner(coefficients(j), x))
}

/// Sample moments `μ̂_j = (1/n) Σ_i η_j(x_i)` of a one-dimensional sample.
///
/// Every sample point must lie in `[0, 1]`; callers working with raw data are
/// expected to min-max normalize first.
pub fn empirical_legendre_moments(xs: &[f64], basis: &LegendreBasis) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Err(MaxEntError::InvalidParameter {
            name: "xs",
            message: "sample must be nonempty".into(),
        });
    }
    let n = xs.len() as f64;
    let mut sums = vec![0.0; basis.order()];
    for &x in xs {
        let phi = basis.phi(x)?;
        for (s, v) in sums.iter_mut().zip(phi.iter()) {
            *s += v;
        }
    }
    for s in &mut sums {
        *s /= n;
    }
    Ok(sums)
}
