//! `I(n, lambda) = int_0^1 t^n e^(i lambda t) dt` by series or recursion.

use num_complex::Complex64;

const TAYLOR_CUTOFF: f64 = 1e-3;
const BACKWARD_EXTRA: usize = 80;

fn taylor(n: usize, lambda: f64) -> Complex64 {
    // sum_k (i lambda)^k / (k! (n + k + 1))
    let mut sum = Complex64::new(0.0, 0.0);
    let mut pow = Complex64::new(1.0, 0.0);
    let il = Complex64::new(0.0, lambda);
    for k in 0..40usize {
        let term = pow / (n + k + 1) as f64;
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
        pow = pow * il / (k + 1) as f64;
    }
    sum
}

/// `I(k, lambda)` for `k = 0..=nmax`.
pub fn moment_table(nmax: usize, lambda: f64) -> Vec<Complex64> {
    if lambda.abs() < TAYLOR_CUTOFF {
        return (0..=nmax).map(|n| taylor(n, lambda)).collect();
    }
    let il = Complex64::new(0.0, lambda);
    let e = Complex64::from_polar(1.0, lambda);
    let mut out = vec![Complex64::new(0.0, 0.0); nmax + 1];
    if lambda.abs() >= nmax as f64 {
        // forward: each step multiplies earlier errors by n / |lambda| <= 1
        out[0] = (e - 1.0) / il;
        for n in 1..=nmax {
            out[n] = (e - n as f64 * out[n - 1]) / il;
        }
    } else {
        // backward from a crude start; errors shrink by |lambda| / n per step
        let top = nmax + BACKWARD_EXTRA;
        let mut cur = e / (top + 1) as f64;
        for n in (1..=top).rev() {
            let prev = (e - il * cur) / n as f64;
            if n - 1 <= nmax {
                out[n - 1] = prev;
            }
            cur = prev;
        }
    }
    out
}

/// `int_0^1 t^n e^(i lambda t) dt`.
pub fn moment_integral(n: usize, lambda: f64) -> Complex64 {
    if lambda == 0.0 {
        return Complex64::new(1.0 / (n + 1) as f64, 0.0);
    }
    moment_table(n, lambda)[n]
}

/// `int_s0^s1 t^n e^(i lambda t) dt` for `0 <= s0 <= s1`, all `n <= nmax`.
pub fn window_moments(nmax: usize, lambda: f64, s0: f64, s1: f64) -> Vec<Complex64> {
    let hi = moment_table(nmax, lambda * s1);
    let lo = moment_table(nmax, lambda * s0);
    (0..=nmax)
        .map(|n| s1.powi(n as i32 + 1) * hi[n] - s0.powi(n as i32 + 1) * lo[n])
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Composite 5-point Gauss-Legendre on panels shorter than a quarter period.
    fn quad(n: usize, lambda: f64) -> Complex64 {
        let x = [
            0.0,
            -0.538_469_310_105_683,
            0.538_469_310_105_683,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        let w = [
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
            0.236_926_885_056_189,
        ];
        let panels = ((lambda.abs() * 2.0) as usize).max(64);
        let hw = 0.5 / panels as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = (2 * p + 1) as f64 * hw;
            for k in 0..5 {
                let t: f64 = mid + hw * x[k];
                s += w[k] * hw * t.powi(n as i32) * Complex64::from_polar(1.0, lambda * t);
            }
        }
        s
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(moment_integral(3, 0.0), Complex64::new(0.25, 0.0));
        let v = moment_integral(0, PI);
        assert!((v - Complex64::new(0.0, 2.0 / PI)).norm() < 1e-15);
        let v = moment_integral(1, 2.0 * PI);
        assert!((v - Complex64::new(0.0, -1.0 / (2.0 * PI))).norm() < 1e-12);
    }

    #[test]
    fn branches_agree_with_quadrature() {
        for &l in &[1e-5, -5e-4, 0.3, -2.5, 7.0, 40.0, -300.0, 1e4, 1e5] {
            let tab = moment_table(8, l);
            for (n, t) in tab.iter().enumerate() {
                let q = quad(n, l);
                assert!((t - q).norm() < 1e-11, "n={n} l={l}: {t} vs {q}");
            }
        }
    }

    #[test]
    fn window_moment_is_difference() {
        let v = window_moments(3, 5.0, 0.25, 0.75);
        // int_{1/4}^{3/4} t^0 e^{5it} dt
        let exact = (Complex64::from_polar(1.0, 3.75) - Complex64::from_polar(1.0, 1.25)) / Complex64::new(0.0, 5.0);
        assert!((v[0] - exact).norm() < 1e-14);
    }
}
