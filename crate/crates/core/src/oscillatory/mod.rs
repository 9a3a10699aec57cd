//! Zero real exponent: sums `f(y) = sum c y^(alpha i) (ln y)^gamma` on `[a, b]`.
//!
//! After `y = a (b/a)^t` the sum becomes `F(t) = sum_alpha e^(i M alpha t) P_alpha(t)`
//! with `M = ln(b/a)` and polynomial coefficients `diag(a^(alpha i)) p(c)`.

mod logpoly;
mod moments;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indep::{find_species_points, SamplePlan, Species};
use crate::linalg::{binom, sym_eig_extremes};
use crate::options::Options;
use crate::termalg::{Confidence, ExponentTriple};

pub use logpoly::{geometric_points_ln, logpoly_sup, logpoly_sup_ln, node_constant, LogPolyBound, CACHE_MAX_DEGREE};
pub use moments::{moment_integral, moment_table, window_moments};

pub const SPHERE_SAMPLES: usize = 512;
pub const M_GRID_MAX: f64 = 1e6;
const M_GRID_PER_DECADE: usize = 40;
const ASYMMETRY_TOL: f64 = 1e-8;

/// Index `(alpha, gamma)` of an oscillating species.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscPair {
    pub alpha: f64,
    pub gamma: u32,
}

impl OscPair {
    pub fn new(alpha: f64, gamma: u32) -> Self {
        Self { alpha, gamma }
    }

    fn key(&self) -> (u64, u32) {
        (self.alpha.to_bits(), self.gamma)
    }
}

pub type OscCoeffs = Vec<(OscPair, Complex64)>;

/// Merges duplicates, pads each `alpha` to log powers `0..=gmax` and sorts by `(alpha, gamma)`.
pub fn pad_pairs(c: &[(OscPair, Complex64)]) -> OscCoeffs {
    let mut gmax: Vec<(f64, u32)> = Vec::new();
    for (k, _) in c {
        match gmax.iter_mut().find(|(a, _)| a.to_bits() == k.alpha.to_bits()) {
            Some(e) => e.1 = e.1.max(k.gamma),
            None => gmax.push((k.alpha, k.gamma)),
        }
    }
    gmax.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Vec::new();
    for (alpha, g) in gmax {
        for gamma in 0..=g {
            let key = OscPair::new(alpha, gamma);
            let v: Complex64 = c.iter().filter(|(k, _)| k.key() == key.key()).map(|(_, v)| v).sum();
            out.push((key, v));
        }
    }
    out
}

fn check_interval_ln(ln_a: f64, ln_b: f64) -> Result<()> {
    if !(ln_a > 0.0) || !(ln_b > ln_a) || !ln_b.is_finite() {
        return Err(Error::InvalidDomain(format!(
            "need 1 < a < b, got ln a = {ln_a}, ln b = {ln_b}"
        )));
    }
    Ok(())
}

/// `p(c)_(alpha gamma) = sum_(m >= gamma) c_(alpha m) binom(m, gamma) (ln b/a)^gamma (ln a)^(m - gamma)`.
pub fn p_transform(c: &[(OscPair, Complex64)], a: f64, b: f64) -> Result<OscCoeffs> {
    if !(a > 1.0) || !(b > a) {
        return Err(Error::InvalidDomain(format!("need 1 < a < b, got a = {a}, b = {b}")));
    }
    p_transform_ln(c, a.ln(), b.ln())
}

/// `p_transform` from `ln a`, `ln b`.
pub fn p_transform_ln(c: &[(OscPair, Complex64)], ln_a: f64, ln_b: f64) -> Result<OscCoeffs> {
    check_interval_ln(ln_a, ln_b)?;
    let padded = pad_pairs(c);
    let lw = ln_b - ln_a;
    Ok(padded
        .iter()
        .map(|(k, _)| {
            let v: Complex64 = padded
                .iter()
                .filter(|(km, _)| km.alpha.to_bits() == k.alpha.to_bits() && km.gamma >= k.gamma)
                .map(|(km, cm)| {
                    cm * binom(km.gamma, k.gamma) * lw.powi(k.gamma as i32) * ln_a.powi((km.gamma - k.gamma) as i32)
                })
                .sum();
            (*k, v)
        })
        .collect())
}

/// Coefficients of `F` in `e^(i M alpha t) t^gamma`: `a^(alpha i) p(c)`.
fn rotated(p: &OscCoeffs, ln_a: f64) -> Vec<Complex64> {
    p.iter()
        .map(|(k, v)| v * Complex64::from_polar(1.0, k.alpha * ln_a))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    /// `[0, 1]`
    Full,
    /// `[1/4, 3/4]`
    Mid,
}

impl Window {
    fn bounds(self) -> (f64, f64) {
        match self {
            Window::Full => (0.0, 1.0),
            Window::Mid => (0.25, 0.75),
        }
    }

    /// `int_window t^n dt` as an exact rational.
    fn monomial(self, n: u32) -> Rational64 {
        let k = n as i32 + 1;
        match self {
            Window::Full => Rational64::new(1, k as i64),
            Window::Mid => {
                let hi = Rational64::new(3, 4).pow(k);
                let lo = Rational64::new(1, 4).pow(k);
                (hi - lo) / k as i64
            }
        }
    }
}

/// Block-diagonal Gram matrix over the window, one block per `alpha`.
pub fn gram_form(k: &[OscPair], window: Window) -> DMatrix<f64> {
    let n = k.len();
    DMatrix::from_fn(n, n, |i, j| {
        if k[i].alpha.to_bits() != k[j].alpha.to_bits() {
            0.0
        } else {
            let r = window.monomial(k[i].gamma + k[j].gamma);
            *r.numer() as f64 / *r.denom() as f64
        }
    })
}

/// Hermitian matrix `X` with `T(c, M) = sum c_i conj(c_j) X_ij` over the window.
fn cross_matrix(k: &[OscPair], m: f64, window: Window) -> DMatrix<Complex64> {
    let n = k.len();
    let nmax = 2 * k.iter().map(|p| p.gamma).max().unwrap_or(0) as usize;
    let (s0, s1) = window.bounds();
    let mut x = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    // one moment table per ordered pair of distinct frequencies
    let mut cache: Vec<((u64, u64), Vec<Complex64>)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if k[i].alpha.to_bits() == k[j].alpha.to_bits() {
                continue;
            }
            let key = (k[i].alpha.to_bits(), k[j].alpha.to_bits());
            let idx = match cache.iter().position(|(kk, _)| *kk == key) {
                Some(p) => p,
                None => {
                    let lambda = m * (k[i].alpha - k[j].alpha);
                    cache.push((key, window_moments(nmax, lambda, s0, s1)));
                    cache.len() - 1
                }
            };
            x[(i, j)] = cache[idx].1[(k[i].gamma + k[j].gamma) as usize];
        }
    }
    x
}

fn quad_form(x: &DMatrix<Complex64>, c: &[Complex64]) -> Complex64 {
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..c.len() {
        for j in 0..c.len() {
            s += c[i] * x[(i, j)] * c[j].conj();
        }
    }
    s
}

fn real_part(v: Complex64, scale: f64) -> Result<f64> {
    if v.im.abs() > ASYMMETRY_TOL * scale.max(1.0) {
        return Err(Error::Asymmetry { imag: v.im });
    }
    Ok(v.re)
}

/// `T(c, M) = int_0^1 sum_(alpha != alpha') P_alpha conj(P_alpha') e^(i M (alpha - alpha') t) dt`
/// for `c` the coefficients of `t^gamma` in `P_alpha`.
pub fn cross_term(c: &[(OscPair, Complex64)], m: f64) -> Result<f64> {
    cross_term_window(c, m, Window::Full)
}

/// `cross_term` restricted to a window.
pub fn cross_term_window(c: &[(OscPair, Complex64)], m: f64, window: Window) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("M = {m} must be positive")));
    }
    let keys: Vec<OscPair> = c.iter().map(|(k, _)| *k).collect();
    let vals: Vec<Complex64> = c.iter().map(|(_, v)| *v).collect();
    let x = cross_matrix(&keys, m, window);
    let scale: f64 = vals.iter().map(|v| v.norm_sqr()).sum();
    real_part(quad_form(&x, &vals), scale)
}

#[derive(Debug, Clone, Serialize)]
pub struct OscCertificate {
    /// Padded `(alpha, gamma)` index set.
    pub k: Vec<OscPair>,
    pub ln_a: f64,
    pub ln_b: f64,
    pub m0: f64,
    pub nlo: f64,
    pub lhi: f64,
    /// Window constant: `max` over the middle half is at least `p_window ||p||_inf`.
    pub p_window: f64,
    pub p_of_c: Vec<Complex64>,
    pub p_norm: f64,
    pub lambda_u: f64,
    pub lambda_w: f64,
    /// Instance cross terms over `[0, 1]` and `[1/4, 3/4]`.
    pub cross_full: f64,
    pub cross_mid: f64,
    /// `[a^(3/4) b^(1/4), a^(1/4) b^(3/4)]` as `ln y`.
    pub y0_window_ln: (f64, f64),
    pub confidence: Confidence,
}

impl OscCertificate {
    pub fn lower(&self) -> f64 {
        self.nlo * self.p_norm
    }

    pub fn upper(&self) -> f64 {
        self.lhi * self.p_norm
    }
}

/// Log-spaced grid of `M` values on `[1, 1e6]`.
pub fn m_grid() -> Vec<f64> {
    let decades = M_GRID_MAX.log10();
    let n = (decades * M_GRID_PER_DECADE as f64).round() as usize;
    (0..=n).map(|i| 10f64.powf(decades * i as f64 / n as f64)).collect()
}

fn unit_sample<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Smallest grid `M` from which on every sampled unit vector satisfies
/// `|T_full| <= lambda_U / 2` and `|T_mid| <= lambda_W / 2`.
///
/// Returns infinity when no grid point qualifies.
pub fn sample_m0<R: Rng>(k: &[OscPair], lambda_u: f64, lambda_w: f64, rng: &mut R) -> f64 {
    let distinct = {
        let mut a: Vec<u64> = k.iter().map(|p| p.alpha.to_bits()).collect();
        a.sort_unstable();
        a.dedup();
        a.len()
    };
    if distinct < 2 {
        return 0.0;
    }
    let samples: Vec<Vec<Complex64>> = (0..SPHERE_SAMPLES).map(|_| unit_sample(rng, k.len())).collect();
    let grid = m_grid();
    let mut m0 = f64::INFINITY;
    for &m in grid.iter().rev() {
        let xf = cross_matrix(k, m, Window::Full);
        let xm = cross_matrix(k, m, Window::Mid);
        let ok = samples
            .iter()
            .all(|c| quad_form(&xf, c).re.abs() <= 0.5 * lambda_u && quad_form(&xm, c).re.abs() <= 0.5 * lambda_w);
        if !ok {
            break;
        }
        m0 = m;
    }
    m0
}

/// Two-sided `||p(c)||_inf` certificate on `[a, b]`.
pub fn certify_osc(c: &[(OscPair, Complex64)], a: f64, b: f64, opts: &Options) -> Result<OscCertificate> {
    if !(a > 1.0) || !(b > a) {
        return Err(Error::InvalidDomain(format!("need 1 < a < b, got a = {a}, b = {b}")));
    }
    certify_osc_ln(c, a.ln(), b.ln(), opts)
}

/// `certify_osc` on `[exp ln_a, exp ln_b]`; usable when `b` exceeds the f64 range.
pub fn certify_osc_ln(c: &[(OscPair, Complex64)], ln_a: f64, ln_b: f64, opts: &Options) -> Result<OscCertificate> {
    check_interval_ln(ln_a, ln_b)?;
    if c.is_empty() {
        return Err(Error::Empty);
    }
    let p = p_transform_ln(c, ln_a, ln_b)?;
    let k: Vec<OscPair> = p.iter().map(|(k, _)| *k).collect();
    let (lambda_u, _) = sym_eig_extremes(&gram_form(&k, Window::Full));
    let (lambda_w, _) = sym_eig_extremes(&gram_form(&k, Window::Mid));
    let mut rng = opts.rng(2);
    let m0 = sample_m0(&k, lambda_u, lambda_w, &mut rng);
    let lw = ln_b - ln_a;
    if !(lw > m0) {
        return Err(Error::Window {
            check: "ln(b/a) must exceed the sampled cross-term threshold M0".into(),
            lhs: lw,
            rhs: m0,
        });
    }
    let ct = rotated(&p, ln_a);
    let norm2: f64 = ct.iter().map(|z| z.norm_sqr()).sum();
    let cross_full = real_part(quad_form(&cross_matrix(&k, lw, Window::Full), &ct), norm2)?;
    let cross_mid = real_part(quad_form(&cross_matrix(&k, lw, Window::Mid), &ct), norm2)?;
    if cross_full.abs() > 0.5 * lambda_u * norm2 {
        return Err(Error::Window {
            check: "instance cross term |T| over [0, 1] must be at most lambda_min(U) |c|^2 / 2".into(),
            lhs: cross_full.abs(),
            rhs: 0.5 * lambda_u * norm2,
        });
    }
    if cross_mid.abs() > 0.5 * lambda_w * norm2 {
        return Err(Error::Window {
            check: "instance cross term |T| over [1/4, 3/4] must be at most lambda_min(W) |c|^2 / 2".into(),
            lhs: cross_mid.abs(),
            rhs: 0.5 * lambda_w * norm2,
        });
    }
    let p_norm = ct.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(OscCertificate {
        lhi: k.len() as f64,
        nlo: (0.5 * lambda_u).sqrt(),
        p_window: lambda_w.sqrt(),
        k,
        ln_a,
        ln_b,
        m0,
        p_of_c: p.iter().map(|(_, v)| *v).collect(),
        p_norm,
        lambda_u,
        lambda_w,
        cross_full,
        cross_mid,
        y0_window_ln: (ln_a + 0.25 * lw, ln_a + 0.75 * lw),
        confidence: Confidence::Sampled,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PureOscBound {
    pub points: Vec<f64>,
    /// `C` with `sup_(y > N) |f| <= ||c||_1 <= C max_j |f(d_j)|`.
    pub c: f64,
    pub plan: SamplePlan,
}

/// Witnesses in `[N^2, 10 N^2]` for `f = sum c_alpha y^(alpha i)`.
pub fn pure_osc_bound(c: &[(ExponentTriple, Complex64)], n: f64, opts: &Options) -> Result<PureOscBound> {
    if !(n >= 1.0) {
        return Err(Error::InvalidArgument(format!("N = {n} must be at least 1")));
    }
    if let Some((t, _)) = c
        .iter()
        .find(|(t, _)| t.gamma() != 0 || t.beta() != Rational64::from_integer(0))
    {
        return Err(Error::Regime(format!(
            "pure oscillation needs beta = gamma = 0, got {t}"
        )));
    }
    let mut alphas: Vec<f64> = c.iter().map(|(t, _)| t.alpha()).collect();
    alphas.sort_by(f64::total_cmp);
    alphas.dedup_by(|a, b| a.to_bits() == b.to_bits());
    if alphas.is_empty() {
        return Err(Error::Empty);
    }
    let species: Vec<Species> = alphas
        .iter()
        .map(|&a| Species {
            freq: a,
            beta: 0.0,
            gamma: 0,
        })
        .collect();
    let mut rng = opts.rng(3);
    let plan = find_species_points(&species, n * n, 10.0 * n * n, opts.trials, &mut rng)?;
    Ok(PureOscBound {
        points: plan.points.clone(),
        c: plan.equivalence_constant,
        plan,
    })
}

/// Evaluates `f(y) = sum c y^(alpha i) (ln y)^gamma` at `ln y`.
pub fn eval_osc_ln(c: &[(OscPair, Complex64)], ln_y: f64) -> Complex64 {
    c.iter()
        .map(|(k, v)| v * Complex64::from_polar(ln_y.powi(k.gamma as i32), k.alpha * ln_y))
        .sum()
}
