//! Balanced cells: equispaced witness grids for families with a bounded zero count.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::hermitian_eig_min;
use crate::options::Options;
use crate::oracle::brute_max_ln;
use crate::termalg::{Confidence, PreparedSum};

pub const ZERO_GRID: usize = 4096;
pub const RANK_THRESHOLD: f64 = 1e-10;
pub const M_INFLATION: f64 = 1.1;

#[derive(Debug, Clone, Serialize)]
pub struct BalancedPlan {
    /// Grid size; strictly above the zero-count bound.
    pub n: usize,
    pub grid: Vec<f64>,
    /// Sampled two-sided constant.
    pub m: f64,
    pub confidence: Confidence,
}

fn require_balanced(h: &PreparedSum) -> Result<(f64, f64)> {
    let d = h.domain();
    if !d.balanced() || !d.is_bounded() {
        return Err(Error::InvalidDomain(
            "a balanced cell with finite upper boundary is required".into(),
        ));
    }
    Ok((d.lower(), d.upper()))
}

/// Family member values `f_i(y) = u_i(y) y^(alpha i + beta) (ln y)^gamma`.
fn basis_row(h: &PreparedSum, y: f64) -> Vec<Complex64> {
    let ln = y.ln();
    h.terms()
        .iter()
        .map(|t| t.unit.eval(y) * t.exp.monomial_ln(ln))
        .collect()
}

fn combine(row: &[Complex64], c: &[Complex64]) -> Complex64 {
    row.iter().zip(c).map(|(f, c)| f * c).sum()
}

fn random_unit<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if s > 1e-12 {
            return v.into_iter().map(|z| z / s).collect();
        }
    }
}

fn interior_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..n).map(|j| lo + (j as f64 / n as f64) * (hi - lo)).collect()
}

fn sign_changes(vals: impl Iterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut count = 0;
    for v in vals {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                count += 1;
            }
            last = v;
        }
    }
    count
}

/// `1 +` the largest number of sign changes of `Re` or `Im` seen on a 4096-point
/// grid across `samples` random unit coefficient vectors.
pub fn estimate_zero_bound(h: &PreparedSum, samples: usize, opts: &Options) -> Result<usize> {
    let (lo, hi) = require_balanced(h)?;
    let rows: Vec<Vec<Complex64>> = interior_grid(lo, hi, ZERO_GRID + 1)
        .into_iter()
        .map(|y| basis_row(h, y))
        .collect();
    let mut rng = opts.rng(4);
    let mut worst = 0;
    for _ in 0..samples.max(1) {
        let c = random_unit(&mut rng, h.terms().len());
        let vals: Vec<Complex64> = rows.iter().map(|r| combine(r, &c)).collect();
        let re = sign_changes(vals.iter().map(|v| v.re));
        let im = sign_changes(vals.iter().map(|v| v.im));
        worst = worst.max(re).max(im);
    }
    Ok(worst + 1)
}

/// Rejects families whose members are (numerically) linearly dependent.
pub fn rank_check(h: &PreparedSum) -> Result<f64> {
    let (lo, hi) = require_balanced(h)?;
    let k = h.terms().len();
    let pts = interior_grid(lo, hi, 4 * k + 1);
    let a = DMatrix::from_fn(pts.len(), k, |i, j| basis_row(h, pts[i])[j]);
    let gram = (a.adjoint() * &a).map(|z| z / pts.len() as f64);
    let lmin = hermitian_eig_min(&gram);
    if !(lmin > RANK_THRESHOLD) {
        return Err(Error::Degenerate {
            sigma: lmin,
            threshold: RANK_THRESHOLD,
        });
    }
    Ok(lmin)
}

/// Grid `lower + (j/N)(upper - lower)`, `0 < j < N`, with a sampled constant `M`.
pub fn balanced_witnesses(h: &PreparedSum, n: usize, opts: &Options) -> Result<BalancedPlan> {
    if n < 2 {
        return Err(Error::Grid(n));
    }
    let (lo, hi) = require_balanced(h)?;
    rank_check(h)?;
    let grid = interior_grid(lo, hi, n);
    let grid_rows: Vec<Vec<Complex64>> = grid.iter().map(|&y| basis_row(h, y)).collect();
    let t0 = (lo * (1.0 + 1e-9)).ln();
    let t1 = (hi * (1.0 - 1e-9)).ln();

    let mut rng = opts.rng(5);
    let own: Vec<Complex64> = h.terms().iter().map(|t| t.coeff).collect();
    let mut vectors = vec![own];
    vectors.extend((0..opts.trials).map(|_| random_unit(&mut rng, h.terms().len())));

    let mut ratio = 1.0f64;
    for c in &vectors {
        let grid_max = grid_rows.iter().map(|r| combine(r, c).norm()).fold(0.0, f64::max);
        let f = |t: f64| combine(&basis_row(h, t.exp()), c).norm_sqr();
        let (_, sup2) = brute_max_ln(f, t0, t1, opts.budget.max(64))?;
        let sup = sup2.sqrt().max(grid_max);
        if sup == 0.0 {
            continue;
        }
        if grid_max == 0.0 {
            return Err(Error::Window {
                check: "grid misses a nonzero family member; increase N".into(),
                lhs: 0.0,
                rhs: sup,
            });
        }
        ratio = ratio.max(sup / grid_max);
    }
    Ok(BalancedPlan {
        n,
        grid,
        m: M_INFLATION * ratio,
        confidence: Confidence::Sampled,
    })
}
