//! Brute-force supremum estimates: log-spaced grid plus golden-section refinement.
//!
//! Only the data model is used here, none of the certifiers.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::termalg::PreparedSum;

pub const REFINE_BRACKETS: usize = 8;
pub const GOLDEN_ITERS: usize = 40;
const ENDPOINT_GUARD: f64 = 1e-9;
const INVPHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub sup_estimate: f64,
    pub argmax: f64,
    pub grid_points: usize,
    pub refinement_depth: usize,
}

/// Maximizes `f(t)` for `t` in `[t0, t1]` (`t = ln y`).
///
/// Returns `(t*, f(t*))` with `f(t*)` the largest value seen.
pub fn brute_max_ln<F: Fn(f64) -> f64>(f: F, t0: f64, t1: f64, budget: usize) -> Result<(f64, f64)> {
    if budget < 2 {
        return Err(Error::Grid(budget));
    }
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("bad search range [{t0}, {t1}]")));
    }
    let step = (t1 - t0) / (budget - 1) as f64;
    let ts: Vec<f64> = (0..budget)
        .map(|i| if i + 1 == budget { t1 } else { t0 + step * i as f64 })
        .collect();
    let vals: Vec<f64> = ts.iter().map(|&t| sanitize(f(t))).collect();

    let mut best_i = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[best_i] {
            best_i = i;
        }
    }
    let (mut best_t, mut best_v) = (ts[best_i], vals[best_i]);

    // local maxima of the grid, highest first
    let mut peaks: Vec<usize> = (0..budget)
        .filter(|&i| {
            let l = if i == 0 { f64::NEG_INFINITY } else { vals[i - 1] };
            let r = if i + 1 == budget {
                f64::NEG_INFINITY
            } else {
                vals[i + 1]
            };
            vals[i] >= l && vals[i] >= r
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
    peaks.truncate(REFINE_BRACKETS);

    for &i in &peaks {
        let lo = ts[i.saturating_sub(1)];
        let hi = ts[(i + 1).min(budget - 1)];
        let (t, v) = golden(&f, lo, hi);
        if v > best_v {
            best_t = t;
            best_v = v;
        }
    }

    if let Some((t, v)) = parabolic_polish(&f, best_t, best_v, t0, t1) {
        best_t = t;
        best_v = v;
    }
    Ok((best_t, best_v))
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = sanitize(f(c));
    let mut fd = sanitize(f(d));
    let (mut bt, mut bv) = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = sanitize(f(c));
            if fc > bv {
                bt = c;
                bv = fc;
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = sanitize(f(d));
            if fd > bv {
                bt = d;
                bv = fd;
            }
        }
    }
    (bt, bv)
}

/// One vertex step of a three-point parabola around `t`.
///
/// Near a smooth maximum the values differ by less than rounding, so the
/// golden-section point can sit off the true argmax; the vertex of a wider
/// parabola locates it from value differences that are well above rounding.
fn parabolic_polish<F: Fn(f64) -> f64>(f: &F, t: f64, v: f64, t0: f64, t1: f64) -> Option<(f64, f64)> {
    let h = 1e-4;
    if t - h < t0 || t + h > t1 || !(v > 0.0) {
        return None;
    }
    let (fm, f0, fp) = (sanitize(f(t - h)), sanitize(f(t)), sanitize(f(t + h)));
    let curv = fm - 2.0 * f0 + fp;
    if !(curv < 0.0) {
        return None;
    }
    let shift = 0.5 * h * (fm - fp) / curv;
    if !(shift.abs() <= h) {
        return None;
    }
    let tn = t + shift;
    let vn = sanitize(f(tn));
    if vn >= v * (1.0 - 4.0 * f64::EPSILON) {
        Some((tn, vn))
    } else {
        None
    }
}

/// Estimate of `sup |h|` over `(lo, hi)`.
///
/// The grid is log-spaced over `[lo (1 + 1e-9), hi (1 - 1e-9)]`.
pub fn brute_sup(h: &PreparedSum, lo: f64, hi: f64, budget: usize) -> Result<OracleResult> {
    let dom = h.domain();
    if budget < 64 {
        return Err(Error::InvalidArgument(format!("budget {budget} is below 64")));
    }
    if !(lo < hi) || !hi.is_finite() || lo < dom.lower() || hi > dom.upper() || lo < 1.0 {
        return Err(Error::Domain {
            y: if lo < dom.lower() || lo < 1.0 { lo } else { hi },
            lower: dom.lower(),
            upper: dom.upper(),
        });
    }
    let t0 = (lo * (1.0 + ENDPOINT_GUARD)).ln();
    let t1 = (hi * (1.0 - ENDPOINT_GUARD)).ln();
    if !(t1 > t0) {
        return Err(Error::InvalidArgument(format!("interval ({lo}, {hi}) is too narrow")));
    }
    let f = |t: f64| h.eval_ln(t).norm_sqr();
    let (t, _) = brute_max_ln(f, t0, t1, budget)?;
    let y = t.exp();
    let sup = h.eval_ln(t).norm();
    if !sup.is_finite() {
        return Err(Error::Overflow { y });
    }
    Ok(OracleResult {
        sup_estimate: sup,
        argmax: y,
        grid_points: budget,
        refinement_depth: GOLDEN_ITERS,
    })
}

/// Bound on `sup_{y >= from} |h(y)|` for sums whose real exponents are all negative.
pub fn tail_envelope(h: &PreparedSum, from: f64) -> f64 {
    h.terms()
        .iter()
        .map(|t| {
            let b = t.exp.beta_f64();
            let g = t.exp.gamma() as f64;
            // y^b (ln y)^g decreases past e^(g / -b)
            let y = from.max((g / -b).exp());
            let ln = y.ln();
            t.coeff.norm() * t.unit.sup_abs_beyond(from) * (b * ln).exp() * ln.powf(g)
        })
        .sum()
}

/// `sup_{y > N} |h|` for all-negative `beta`, with a tail check at the horizon.
///
/// The horizon doubles (at most 8 times) until the tail envelope there drops
/// below `1e-3` times the grid sup.
pub fn brute_sup_unbounded(h: &PreparedSum, n: f64, horizon: f64, budget: usize) -> Result<OracleResult> {
    if let Some(t) = h.terms().iter().find(|t| t.exp.beta_f64() >= 0.0) {
        return Err(Error::Regime(format!("term {} has beta >= 0", t.exp)));
    }
    if !(horizon >= n * 1e3) {
        return Err(Error::InvalidArgument(format!(
            "horizon {horizon} must be at least 1e3 N = {}",
            n * 1e3
        )));
    }
    let mut hz = horizon;
    let mut last = (0.0, 0.0);
    for _ in 0..=8 {
        let upper = h.domain().upper();
        let top = hz.min(upper);
        let res = brute_sup(h, n, top, budget)?;
        if top >= upper {
            return Ok(res);
        }
        let env = tail_envelope(h, top);
        if env <= 1e-3 * res.sup_estimate || env == 0.0 {
            return Ok(res);
        }
        last = (env, res.sup_estimate);
        hz *= 2.0;
    }
    Err(Error::Horizon {
        horizon: hz / 2.0,
        envelope: last.0,
        sup: last.1,
    })
}
