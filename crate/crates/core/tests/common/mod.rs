//! Test-side oracles written independently of the library numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton on `P_n`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite 20-point Gauss-Legendre over `[lo, hi]` with `panels` equal panels.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, lo: f64, hi: f64, panels: usize) -> Complex64 {
    let rule = gauss_legendre(20);
    let h = (hi - lo) / panels as f64;
    let mut s = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let a = lo + h * p as f64;
        for &(x, w) in &rule {
            s += f(a + 0.5 * h * (x + 1.0)) * (0.5 * h * w);
        }
    }
    s
}

/// `int_0^1 t^n e^(i lambda t) dt` by quadrature, one panel per unit of phase.
pub fn moment_quadrature(n: u32, lambda: f64) -> Complex64 {
    let panels = (lambda.abs() / 2.0).ceil().max(4.0) as usize;
    integrate(
        |t| Complex64::from_polar(t.powi(n as i32), lambda * t),
        0.0,
        1.0,
        panels,
    )
}

/// `T(c, M)` over `[s0, s1]` straight from its integral definition.
pub fn cross_quadrature(c: &[(f64, u32, Complex64)], m: f64, s0: f64, s1: f64) -> f64 {
    let amax = c.iter().map(|x| x.0).fold(0.0, f64::max);
    let amin = c.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let panels = ((m * (amax - amin) * (s1 - s0)) / 2.0).ceil().max(8.0) as usize;
    let v = integrate(
        |t| {
            let mut s = Complex64::new(0.0, 0.0);
            for (ai, gi, ci) in c {
                for (aj, gj, cj) in c {
                    if ai.to_bits() != aj.to_bits() {
                        s += ci * cj.conj() * Complex64::from_polar(t.powi((gi + gj) as i32), m * (ai - aj) * t);
                    }
                }
            }
            s
        },
        s0,
        s1,
        panels,
    );
    v.re
}

pub fn poly_eval(c: &[f64], u: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * u + a)
}

/// Exact-as-possible `max |P(u)|` on `[u0, u1]`: endpoints plus real critical
/// points (companion-matrix roots of `P'`, refined by Newton).
pub fn poly_abs_max(c: &[f64], u0: f64, u1: f64) -> f64 {
    let mut best = poly_eval(c, u0).abs().max(poly_eval(c, u1).abs());
    let d: Vec<f64> = c.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect();
    let deg = d.iter().rposition(|&a| a != 0.0);
    let Some(deg) = deg else {
        return best;
    };
    if deg == 0 {
        return best;
    }
    let lead = d[deg];
    let comp = DMatrix::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -d[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let dd: Vec<f64> = d.iter().enumerate().skip(1).map(|(k, &a)| k as f64 * a).collect();
    for z in comp.complex_eigenvalues().iter() {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut u = z.re;
        for _ in 0..50 {
            let g = poly_eval(&dd, u);
            if g == 0.0 {
                break;
            }
            let step = poly_eval(&d, u) / g;
            u -= step;
            if step.abs() < 1e-15 * (1.0 + u.abs()) {
                break;
            }
        }
        if u > u0 && u < u1 {
            best = best.max(poly_eval(c, u).abs());
        }
    }
    best
}
