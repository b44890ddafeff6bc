//! Closed-form limits: shape functions, characteristic directions and the
//! right-hand side of the variance identity.

use serde::{Deserialize, Serialize};

use crate::env::west_parameter;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub s: f64,
    pub t: f64,
}

impl Direction {
    pub fn new(s: f64, t: f64) -> Result<Self> {
        if !(s >= 0.0 && t >= 0.0) || (s == 0.0 && t == 0.0) {
            return Err(Error::Param(format!(
                "direction ({s},{t}) must be nonnegative and nonzero"
            )));
        }
        Ok(Direction { s, t })
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Param(format!("p = {p} must lie in (0,1)")))
    }
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u <= 1.0 {
        Ok(())
    } else {
        Err(Error::Param(format!("u = {u} must lie in (0,1]")))
    }
}

/// Limit shape of the model without boundaries. Flat branches are tested
/// first.
pub fn shape_pp(p: f64, s: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    if !(s >= 0.0 && t >= 0.0) {
        return Err(Error::Param(format!("direction ({s},{t}) must be nonnegative")));
    }
    if t * p >= s {
        return Ok(s);
    }
    if t <= p * s {
        return Ok(t);
    }
    Ok((2.0 * (p * s * t).sqrt() - p * (s + t)) / (1.0 - p))
}

/// Limit of `G / N` for the boundary model: `s u + t l(u)`.
pub fn shape_boundary(p: f64, u: f64, s: f64, t: f64) -> Result<f64> {
    check_p(p)?;
    check_u(u)?;
    Ok(s * u + t * west_parameter(p, u))
}

/// Boundary parameter attaining `inf_u shape_boundary(p, u, x, 1)`.
pub fn minimizer_u(p: f64, x: f64) -> Result<f64> {
    check_p(p)?;
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Param(format!("x = {x} must lie in (0,1]")));
    }
    if x <= p {
        return Ok(1.0);
    }
    Ok(((p / x).sqrt() - p) / (1.0 - p))
}

/// Slope `n/m` of the characteristic direction, `(p + (1-p)u)^2 / p`.
pub fn characteristic_ratio(p: f64, u: f64) -> f64 {
    let a = p + (1.0 - p) * u;
    a * a / p
}

/// `(N, floor(N (p + (1-p)u)^2 / p))`. A relative nudge of 1e-12 keeps exact
/// integers from rounding down.
pub fn characteristic_endpoint(p: f64, u: f64, n: usize) -> Result<(usize, usize)> {
    check_p(p)?;
    check_u(u)?;
    if n == 0 {
        return Err(Error::Param("N must be at least 1".into()));
    }
    let y = n as f64 * characteristic_ratio(p, u);
    Ok((n, (y * (1.0 + 1e-12)).floor() as usize))
}

/// `n l(1-l) - m u(1-u) + 2 u(1-u) A`.
pub fn variance_identity_rhs(p: f64, u: f64, m: usize, n: usize, a: f64) -> f64 {
    let v = u * (1.0 - u);
    let d = u + p * (1.0 - u);
    n as f64 * p * v / (d * d) - m as f64 * v + 2.0 * v * a
}

/// Companion form from the east side: `m u(1-u) - n l(1-l) - 2 u(1-u) A_E`.
pub fn variance_identity_rhs_east(p: f64, u: f64, m: usize, n: usize, a_east: f64) -> f64 {
    let v = u * (1.0 - u);
    let d = u + p * (1.0 - u);
    m as f64 * v - n as f64 * p * v / (d * d) - 2.0 * v * a_east
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn shape_pp_branches() {
        assert_eq!(shape_pp(0.5, 1.0, 3.0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            shape_pp(0.5, 1.0, 1.0).unwrap(),
            2.0 * (2f64.sqrt() - 1.0),
            epsilon = 1e-12
        );
        assert_eq!(shape_pp(0.5, 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(shape_pp(0.5, 1.0, 0.2).unwrap(), 0.2);
        assert!(shape_pp(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn shape_boundary_values() {
        assert_abs_diff_eq!(shape_boundary(0.5, 0.5, 1.0, 1.0).unwrap(), 5.0 / 6.0, epsilon = 1e-12);
        assert_eq!(shape_boundary(0.3, 0.4, 2.0, 0.0).unwrap(), 0.8);
        assert_eq!(shape_boundary(0.3, 1.0, 2.0, 5.0).unwrap(), 2.0);
    }

    #[test]
    fn minimizer_values() {
        assert_abs_diff_eq!(minimizer_u(0.25, 1.0).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(minimizer_u(0.5, 0.3).unwrap(), 1.0);
        assert!(minimizer_u(0.5, 0.0).is_err());
    }

    #[test]
    fn characteristic_endpoint_example() {
        assert_eq!(characteristic_endpoint(0.5, 0.5, 100).unwrap(), (100, 112));
        assert_eq!(characteristic_endpoint(0.5, 1.0, 100).unwrap(), (100, 200));
    }

    #[test]
    fn identity_rhs_examples() {
        assert_eq!(variance_identity_rhs(0.5, 1.0, 10, 20, 3.7), 0.0);
        // n l(1-l) = 8 and m u(1-u) = 9 here
        assert_abs_diff_eq!(variance_identity_rhs(0.5, 0.5, 36, 36, 0.0), -1.0, epsilon = 1e-12);
    }
}
