//! Sup of a real polynomial in `ln y` from its values at geometric points.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};

pub const CACHE_MAX_DEGREE: usize = 16;
const GRID_STEP: f64 = 1e-4;
const INFLATION: f64 = 1.01;

static CACHE: [OnceLock<f64>; CACHE_MAX_DEGREE + 1] = [const { OnceLock::new() }; CACHE_MAX_DEGREE + 1];

/// Lebesgue function of the nodes `j / (d + 2)`, `0 < j < d + 2`, at `t`.
fn lebesgue_fn(d: usize, t: f64) -> f64 {
    let m = (d + 2) as f64;
    let s = m * t;
    (1..=d + 1)
        .map(|j| {
            (1..=d + 1)
                .filter(|&k| k != j)
                .map(|k| (s - k as f64) / (j as f64 - k as f64))
                .product::<f64>()
                .abs()
        })
        .sum()
}

fn compute_constant(d: usize) -> f64 {
    if d == 0 {
        return 1.0;
    }
    let steps = (1.0 / GRID_STEP).round() as usize;
    let grid_max = (0..=steps)
        .map(|i| lebesgue_fn(d, i as f64 * GRID_STEP))
        .fold(0.0, f64::max);
    // Markov on [0, 1]: |l_j'| <= 2 d^2 |l_j|_inf <= 2 d^2 L, so between grid points
    // the Lebesgue function rises by at most (h / 2) (d + 1) 2 d^2 L.
    let slack = GRID_STEP * (d + 1) as f64 * (d * d) as f64;
    INFLATION * grid_max / (1.0 - slack)
}

/// `L(d)`: `sup_[0,1] |p| <= L(d) max_j |p(j / (d + 2))|` for every degree-`d` polynomial.
pub fn node_constant(d: usize) -> f64 {
    if d <= CACHE_MAX_DEGREE {
        *CACHE[d].get_or_init(|| compute_constant(d))
    } else {
        compute_constant(d)
    }
}

/// Geometric points `a^(j/M) b^(1 - j/M)`, `0 < j < M = d + 2`, returned as `ln y`.
pub fn geometric_points_ln(d: usize, ln_a: f64, ln_b: f64) -> Vec<f64> {
    let m = (d + 2) as f64;
    (1..d + 2)
        .map(|j| {
            let s = j as f64 / m;
            s * ln_a + (1.0 - s) * ln_b
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogPolyBound {
    pub points: Vec<f64>,
    pub l: f64,
    /// `max |f|` over the points.
    pub max_at_points: f64,
    pub bound: f64,
}

fn poly_in_log(coeffs: &[f64], ln_y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * ln_y + c)
}

/// Bound on `sup_(a,b) |sum_k coeffs[k] (ln y)^k|` from the `d + 1` geometric points.
pub fn logpoly_sup(coeffs: &[f64], a: f64, b: f64) -> Result<LogPolyBound> {
    if !(a > 1.0) || !(b > a) {
        return Err(Error::InvalidDomain(format!("need 1 < a < b, got a = {a}, b = {b}")));
    }
    logpoly_sup_ln(coeffs, a.ln(), b.ln()).map(|mut r| {
        r.points = r.points.iter().map(|t| t.exp()).collect();
        r
    })
}

/// `logpoly_sup` on `(exp ln_a, exp ln_b)`, points returned as `ln y`.
pub fn logpoly_sup_ln(coeffs: &[f64], ln_a: f64, ln_b: f64) -> Result<LogPolyBound> {
    if coeffs.is_empty() {
        return Err(Error::Empty);
    }
    if !(ln_a > 0.0) || !(ln_b > ln_a) {
        return Err(Error::InvalidDomain(format!(
            "need 0 < ln a < ln b, got {ln_a}, {ln_b}"
        )));
    }
    let d = coeffs.len() - 1;
    let points = geometric_points_ln(d, ln_a, ln_b);
    let max_at_points = points.iter().map(|&t| poly_in_log(coeffs, t).abs()).fold(0.0, f64::max);
    let l = node_constant(d);
    Ok(LogPolyBound {
        points,
        l,
        max_at_points,
        bound: l * max_at_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_polynomial() {
        let r = logpoly_sup(&[5.0], 2.0, 8.0).unwrap();
        assert_eq!(r.points.len(), 1);
        assert!((r.points[0] - 4.0).abs() < 1e-12);
        assert_eq!(r.l, 1.0);
        assert_eq!(r.bound, 5.0);
    }

    #[test]
    fn log_on_e_to_e9() {
        let e = std::f64::consts::E;
        let r = logpoly_sup(&[0.0, 1.0], e, e.powi(9)).unwrap();
        assert!((r.max_at_points - 19.0 / 3.0).abs() < 1e-12);
        assert!(r.l >= 3.0 && r.l < 3.1);
        assert!(9.0 <= r.bound);
    }

    #[test]
    fn zero_polynomial() {
        let r = logpoly_sup(&[0.0, 0.0, 0.0], 2.0, 100.0).unwrap();
        assert_eq!(r.bound, 0.0);
    }

    #[test]
    fn constants_grow_with_degree() {
        let ls: Vec<f64> = (0..=6).map(node_constant).collect();
        assert!(ls.windows(2).all(|w| w[1] > w[0]));
        // cached value is stable
        assert_eq!(node_constant(4), ls[4]);
    }

    #[test]
    fn domain_errors() {
        assert!(logpoly_sup(&[1.0], 1.0, 2.0).is_err());
        assert!(logpoly_sup(&[1.0], 3.0, 2.0).is_err());
    }
}
