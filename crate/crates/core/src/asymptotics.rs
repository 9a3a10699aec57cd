//! Growth profiles `c x^r (log x)^l`: symbolic dominant terms and log-log fits.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use serde::Serialize;

use crate::csvio::read_pairs;
use crate::error::{Error, Result};
use crate::termalg::rational_to_f64;

/// Reference scale for subdominant contributions in `dominant_exponent`.
pub const REFERENCE_SCALE: f64 = 1e6;
/// Best residual (RMS, log space) above which a fit may be flagged.
pub const RESIDUAL_THRESHOLD: f64 = 1e-2;
/// Residual curvature t-statistic that marks the misfit as systematic.
pub const CURVATURE_T: f64 = 5.0;
pub const MIN_SAMPLES: usize = 8;
pub const MIN_DECADES: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `x -> inf`
    X,
    /// `eps -> 0+`
    Eps,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_l: u32,
    pub max_denominator: i64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_l: 8,
            max_denominator: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitDiagnostics {
    /// RMS of the log-space residual of the selected model.
    pub residual: f64,
    pub slope: f64,
    pub slope_se: f64,
    /// Whether `r` was snapped to a small-denominator rational.
    pub snapped: bool,
    /// t-statistic of a quadratic term added to the selected model.
    pub curvature_t: f64,
    pub non_power_log: bool,
    pub samples: usize,
    /// `log|log eps| / |log eps|` at the smallest sampled `eps` (flatness fits only).
    pub correction: Option<f64>,
}

/// `c_lo x^r (log x)^l <= g(x) <= c_hi x^r (log x)^l` eventually.
///
/// For `Direction::Eps` the profile reads `c eps^r |log eps|^l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticProfile {
    /// Exact exponent when known.
    #[serde(serialize_with = "ser_opt_rational")]
    pub r_exact: Option<Rational64>,
    pub r: f64,
    pub l: u32,
    pub c_band: (f64, f64),
    pub direction: Direction,
    pub fit: Option<FitDiagnostics>,
    /// Scale at which the band was sampled (symbolic profiles).
    pub reference_scale: Option<f64>,
}

fn ser_opt_rational<S: serde::Serializer>(r: &Option<Rational64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&format!("{}/{}", r.numer(), r.denom())),
        None => s.serialize_none(),
    }
}

impl AsymptoticProfile {
    pub fn non_power_log(&self) -> bool {
        self.fit.as_ref().is_some_and(|f| f.non_power_log)
    }
}

/// One term `u x^r (log x)^l` with `u` in `band`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthTerm {
    pub r: Rational64,
    pub l: u32,
    pub band: (f64, f64),
}

fn log_ratio(r: f64, l: f64, r0: f64, l0: f64, x: f64) -> f64 {
    let lx = x.ln();
    (r - r0) * lx + (l - l0) * lx.ln()
}

/// Lexicographic maximum `(r0, l0)`; equal pairs are merged first.
///
/// The lower band edge is the dominant unit's; the upper edge adds the
/// largest ratio of each subdominant term over `x >= 1e6`.
pub fn dominant_exponent(g: &[GrowthTerm]) -> Result<AsymptoticProfile> {
    if g.is_empty() {
        return Err(Error::Empty);
    }
    let mut merged: Vec<GrowthTerm> = Vec::new();
    for t in g {
        if !(t.band.0 > 0.0) || !(t.band.0 <= t.band.1) || !t.band.1.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "unit band [{}, {}] must satisfy 0 < lo <= hi < inf",
                t.band.0, t.band.1
            )));
        }
        match merged.iter_mut().find(|m| m.r == t.r && m.l == t.l) {
            Some(m) => {
                m.band.0 += t.band.0;
                m.band.1 += t.band.1;
            }
            None => merged.push(*t),
        }
    }
    let dom = *merged.iter().max_by(|a, b| a.r.cmp(&b.r).then(a.l.cmp(&b.l))).unwrap();
    let (r0, l0) = (rational_to_f64(dom.r), dom.l as f64);
    let mut extra = 0.0;
    for t in merged.iter().filter(|t| (t.r, t.l) != (dom.r, dom.l)) {
        let (r, l) = (rational_to_f64(t.r), t.l as f64);
        // ratio x^(r - r0) (log x)^(l - l0) peaks at log x = (l - l0) / (r0 - r) when r < r0
        let mut x = REFERENCE_SCALE;
        if r < r0 && l > l0 {
            let lx = (l - l0) / (r0 - r);
            if lx > x.ln() {
                x = lx.exp();
            }
        }
        let ratio = if x.is_finite() {
            log_ratio(r, l, r0, l0, x).exp()
        } else {
            // peak beyond f64: evaluate the log-ratio at the peak directly
            let lx = (l - l0) / (r0 - r);
            ((r - r0) * lx + (l - l0) * lx.ln()).exp()
        };
        extra += t.band.1 * ratio;
    }
    Ok(AsymptoticProfile {
        r_exact: Some(dom.r),
        r: r0,
        l: dom.l,
        c_band: (dom.band.0, dom.band.1 + extra),
        direction: Direction::X,
        fit: None,
        reference_scale: Some(REFERENCE_SCALE),
    })
}

struct LineFit {
    slope: f64,
    rss: f64,
    slope_se: f64,
}

fn line_fit(t: &[f64], z: &[f64]) -> LineFit {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let zm = z.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|v| (v - tm).powi(2)).sum();
    let stz: f64 = t.iter().zip(z).map(|(a, b)| (a - tm) * (b - zm)).sum();
    let slope = stz / stt;
    let intercept = zm - slope * tm;
    let rss: f64 = t.iter().zip(z).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    LineFit {
        slope,
        rss,
        slope_se: (s2 / stt).sqrt(),
    }
}

/// t-statistic of `c2` in `z = c0 + c1 t + c2 t^2`.
fn curvature_t(t: &[f64], z: &[f64]) -> f64 {
    let n = t.len();
    let tm = t.iter().sum::<f64>() / n as f64;
    let x = DMatrix::from_fn(n, 3, |i, j| (t[i] - tm).powi(j as i32));
    let y = DVector::from_column_slice(z);
    let xtx = x.transpose() * &x;
    let Some(inv) = xtx.clone().try_inverse() else {
        return 0.0;
    };
    let beta = &inv * (x.transpose() * &y);
    let resid = &y - &x * &beta;
    let s2 = resid.norm_squared() / (n as f64 - 3.0);
    let se = (s2 * inv[(2, 2)]).sqrt();
    if se > 0.0 {
        beta[2] / se
    } else if beta[2] == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Nearest `p/q` with `1 <= q <= max_den`; ties go to the smaller `q`.
pub fn nearest_rational(x: f64, max_den: i64) -> Rational64 {
    let mut best = Rational64::from_integer(x.round() as i64);
    let mut err = (x - x.round()).abs();
    for q in 2..=max_den {
        let p = (x * q as f64).round() as i64;
        let e = (x - p as f64 / q as f64).abs();
        if e < err {
            err = e;
            best = Rational64::new(p, q);
        }
    }
    best
}

fn check_samples(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::Data(format!(
            "{} samples given, at least {MIN_SAMPLES} are needed",
            samples.len()
        )));
    }
    for w in samples.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::Data(format!(
                "x must increase strictly ({} then {})",
                w[0].0, w[1].0
            )));
        }
    }
    if let Some(&(x, v)) = samples
        .iter()
        .find(|(x, v)| !(*x > 1.0) || !(*v > 0.0) || !x.is_finite() || !v.is_finite())
    {
        return Err(Error::Data(format!(
            "sample ({x}, {v}) needs x > 1 and v > 0, both finite"
        )));
    }
    let decades = (samples[samples.len() - 1].0 / samples[0].0).log10();
    if decades < MIN_DECADES {
        return Err(Error::Data(format!(
            "samples span {decades:.2} decades, at least {MIN_DECADES} are needed"
        )));
    }
    Ok(())
}

/// Fits `v ~ c x^r (log x)^l` with the default caps.
pub fn fit_growth(samples: &[(f64, f64)]) -> Result<AsymptoticProfile> {
    fit_growth_with(samples, &FitConfig::default())
}

/// Least squares of `log v - l log log x` against `log x` for each `l <= max_l`.
///
/// The flag `non_power_log` is raised when the best residual exceeds `1e-2`
/// and the leftover has a significant quadratic trend in `log x`, so
/// multiplicative noise alone does not trigger it.
pub fn fit_growth_with(samples: &[(f64, f64)], cfg: &FitConfig) -> Result<AsymptoticProfile> {
    check_samples(samples)?;
    if cfg.max_denominator < 1 {
        return Err(Error::InvalidArgument("max denominator must be at least 1".into()));
    }
    let t: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let lnv: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let n = t.len() as f64;

    let mut best: Option<(u32, LineFit, Vec<f64>)> = None;
    for l in 0..=cfg.max_l {
        let z: Vec<f64> = t.iter().zip(&lnv).map(|(t, v)| v - l as f64 * t.ln()).collect();
        let fit = line_fit(&t, &z);
        if best.as_ref().is_none_or(|b| fit.rss < b.1.rss) {
            best = Some((l, fit, z));
        }
    }
    let (l, fit, z) = best.unwrap();

    let snap = nearest_rational(fit.slope, cfg.max_denominator);
    let snap_f = rational_to_f64(snap);
    let tol = (3.0 * fit.slope_se).max(1e-9 * (1.0 + fit.slope.abs()));
    let snapped = (fit.slope - snap_f).abs() <= tol;
    let r = if snapped { snap_f } else { fit.slope };

    // refit the level with r fixed
    let resid_base: Vec<f64> = t.iter().zip(&z).map(|(t, z)| z - r * t).collect();
    let level = resid_base.iter().sum::<f64>() / n;
    let resid: Vec<f64> = resid_base.iter().map(|v| v - level).collect();
    let sigma = (resid.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
    let residual = (fit.rss / n).sqrt();
    let curv = curvature_t(&t, &z);
    let non_power_log = residual > RESIDUAL_THRESHOLD && curv.abs() > CURVATURE_T;

    Ok(AsymptoticProfile {
        r_exact: snapped.then_some(snap),
        r,
        l,
        c_band: ((level - 2.0 * sigma).exp(), (level + 2.0 * sigma).exp()),
        direction: Direction::X,
        fit: Some(FitDiagnostics {
            residual,
            slope: fit.slope,
            slope_se: fit.slope_se,
            snapped,
            curvature_t: curv,
            non_power_log,
            samples: samples.len(),
            correction: None,
        }),
        reference_scale: None,
    })
}

/// Fits `M ~ c eps^a |log eps|^l` through `x = 1/eps` and `fit_growth`.
///
/// The returned `r` is `a`, the exponent of `eps` (the x-fit slope is `-a`).
pub fn flatness_exponent(samples: &[(f64, f64)]) -> Result<AsymptoticProfile> {
    flatness_exponent_with(samples, &FitConfig::default())
}

pub fn flatness_exponent_with(samples: &[(f64, f64)], cfg: &FitConfig) -> Result<AsymptoticProfile> {
    if let Some(&(e, _)) = samples.iter().find(|(e, _)| !(*e > 0.0 && *e < 0.5)) {
        return Err(Error::Data(format!("eps = {e} is outside (0, 1/2)")));
    }
    let xs: Vec<(f64, f64)> = samples.iter().map(|&(e, m)| (1.0 / e, m)).collect();
    if xs.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Data("eps must decrease strictly".into()));
    }
    let mut p = fit_growth_with(&xs, cfg)?;
    p.r = -p.r;
    p.r_exact = p.r_exact.map(|r| -r);
    p.direction = Direction::Eps;
    let eps_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let le = eps_min.ln().abs();
    if let Some(f) = p.fit.as_mut() {
        f.correction = Some(le.ln() / le);
    }
    Ok(p)
}

/// `(true, ceil(r) + [l > 0])`: the profile is dominated by `x^degree`.
///
/// The profile is read in the `x -> inf` direction.
pub fn poly_bound_check(profile: &AsymptoticProfile) -> (bool, i64) {
    let r = profile.r_exact.map(rational_to_f64).unwrap_or(profile.r);
    if !r.is_finite() {
        return (false, 0);
    }
    let ceil = match profile.r_exact {
        Some(q) => q.ceil().to_integer(),
        None => r.ceil() as i64,
    };
    (true, ceil + i64::from(profile.l > 0))
}

/// Reads a two-column sample file (`x, v` or `eps, M`).
pub fn read_samples(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    read_pairs(&text)
}
