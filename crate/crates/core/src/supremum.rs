//! Certified approximate supremum of a prepared sum on `(N, a/N)` (or `(N, inf)`).
//!
//! The sum splits as `f- + f0 + f+` by the sign of the real exponent. The
//! negative part is certified in `y`, the positive part in `w = a / y`, and the
//! zero part either by its `p`-norm (oscillating) or by geometric evaluation
//! points (real log-polynomial). The score is
//! `max(|f-(a-_j)|, w X0, |f+(a+_j)|)` and the certificate sandwiches
//! `sup |h|` within `[score / C, C score]`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::balanced::{balanced_witnesses, estimate_zero_bound, BalancedPlan};
use crate::error::{Error, Result};
use crate::options::Options;
use crate::oscillatory::{certify_osc_ln, logpoly_sup_ln, pure_osc_bound, OscCertificate, OscPair, PureOscBound};
use crate::termalg::{Confidence, ExponentTriple, PerturbationUnit, PreparedSum, Term};
use crate::unbalanced::{
    certify_decay, neg_problem, unit_deviation, units_by_triple, Block, DecayProblem, DecaySource, NegRegimeCertificate,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Neg,
    Osc,
    Pos,
    Balanced,
}

#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub y: f64,
    pub regime: Regime,
    /// `|part(y)|` for the regime's own part (the full sum for balanced cells).
    pub value: f64,
    /// `|h(y)|`.
    pub h_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OscForm {
    /// `||p(c)||_inf` entry.
    Norm,
    /// Geometric evaluation points of a real-exponent log-polynomial.
    Geometric,
    /// Pure oscillation on an unbounded cell.
    Pure,
}

#[derive(Debug, Clone, Serialize)]
pub struct OscComponent {
    pub form: OscForm,
    /// `||p||_inf` (norm form) or `max |f0|` over the osc witnesses.
    pub x: f64,
    /// `sup |f0| <= lambda x`.
    pub lambda: f64,
    /// A point where `|f0| >= p_window x` exists in the window `[window.0, window.1]`.
    pub p_window: f64,
    pub window: (f64, f64),
    /// Weight applied to `x` in the score.
    pub weight: f64,
}

/// One numeric hypothesis `lhs <= rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessCertificate {
    /// Certified range `(lo, hi)`; `hi` may be infinite.
    pub range: (f64, f64),
    pub witnesses: Vec<Witness>,
    pub osc_component: Option<OscComponent>,
    pub score: f64,
    /// Regime attaining the score (ties: neg, osc, pos).
    pub dominant: Option<Regime>,
    /// `sup >= score / c_lower`.
    pub c_lower: f64,
    /// `sup <= c_upper score`.
    pub c_upper: f64,
    pub c_total: f64,
    pub confidence: Confidence,
    pub checks: Vec<Check>,
    pub neg: Option<NegRegimeCertificate>,
    pub pos: Option<NegRegimeCertificate>,
    pub osc: Option<OscCertificate>,
    pub pure_osc: Option<PureOscBound>,
    pub balanced: Option<BalancedPlan>,
}

impl WitnessCertificate {
    /// True when `score / c_total <= s <= c_total score`.
    pub fn contains(&self, s: f64) -> bool {
        self.score / self.c_total <= s && s <= self.c_total * self.score
    }
}

/// Parts of a sum by the sign of the real exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub neg: Option<PreparedSum>,
    pub osc: Option<PreparedSum>,
    pub pos: Option<PreparedSum>,
}

/// Splits `h` by the sign of `beta`; every part keeps the domain of `h`.
///
/// On an unbounded cell only the constant-modulus zero-exponent terms may sit
/// beside the negative ones.
pub fn decompose(h: &PreparedSum) -> Result<Decomposition> {
    let unbounded = !h.domain().is_bounded();
    let mut parts: [Vec<Term>; 3] = Default::default();
    for t in h.terms() {
        let b = t.exp.beta();
        if unbounded && (b.is_positive() || (b.is_zero() && t.exp.gamma() > 0)) {
            return Err(Error::Form(format!(
                "fiberwise boundedness violated: term {} cannot appear on an unbounded cell",
                t.exp
            )));
        }
        let idx = if b.is_negative() {
            0
        } else if b.is_zero() {
            1
        } else {
            2
        };
        parts[idx].push(t.clone());
    }
    let wrap = |v: Vec<Term>| {
        if v.is_empty() {
            None
        } else {
            Some(PreparedSum::from_parts(v, *h.domain()))
        }
    };
    let [neg, osc, pos] = parts;
    Ok(Decomposition {
        neg: wrap(neg),
        osc: wrap(osc),
        pos: wrap(pos),
    })
}

/// Sum of nonnegative scores; lies in `[max, k max]`.
pub fn nonneg_single_witness(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&s) = scores.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::Negative(s));
    }
    Ok(scores.iter().sum())
}

fn pos_problem(units: &BTreeMap<ExponentTriple, (&PerturbationUnit, bool)>, n: f64, a: f64) -> Result<DecayProblem> {
    let hi = a / n;
    let two_b = 2 * units.keys().map(|t| t.gamma()).max().unwrap_or(0);
    let mut blocks: Vec<Block> = Vec::new();
    let mut sources = Vec::new();
    for (t, (unit, nonzero)) in units {
        let freq = -t.alpha();
        let beta = -t.beta();
        let idx = match blocks
            .iter()
            .position(|b| b.freq.to_bits() == freq.to_bits() && b.beta == beta)
        {
            Some(i) => {
                blocks[i].gmax = blocks[i].gmax.max(t.gamma());
                i
            }
            None => {
                blocks.push(Block {
                    freq,
                    beta,
                    gmax: t.gamma(),
                });
                blocks.len() - 1
            }
        };
        if *nonzero && !unit.is_identity() {
            let (eps, delta, confidence) = unit_deviation(unit, n, hi, t.gamma(), two_b)?;
            sources.push(DecaySource {
                block: idx,
                beta,
                eps,
                delta,
                confidence,
            });
        }
    }
    Ok(DecayProblem {
        blocks,
        sources,
        shift: (a / (2.0 * n)).ln(),
        n,
    })
}

/// Certificate for the positive part of `h` on `(N, a/N)`, in the variable `w = a / y`.
///
/// Witness points are returned in `w`; the matching `y` is `a / w`.
pub fn certify_pos(h: &PreparedSum, n: f64, a: f64, opts: &Options) -> Result<NegRegimeCertificate> {
    if let Some(t) = h.terms().iter().find(|t| !t.exp.beta().is_positive()) {
        return Err(Error::Regime(format!("term {} has beta <= 0", t.exp)));
    }
    if !a.is_finite() {
        return Err(Error::InvalidDomain(
            "the positive regime needs a finite upper boundary".into(),
        ));
    }
    let units = units_by_triple(h)?;
    certify_decay(&pos_problem(&units, n, a)?, opts, 6)
}

/// Osc component of a zero-exponent sum on `(N, a/N)` (unweighted).
pub fn osc_component(h: &PreparedSum, n: f64, a: f64, opts: &Options) -> Result<OscComponent> {
    if let Some(t) = h.terms().iter().find(|t| !t.exp.beta().is_zero()) {
        return Err(Error::Regime(format!("term {} has beta != 0", t.exp)));
    }
    osc_part(h, n, a, opts).map(|o| o.component)
}

fn gate(checks: &mut Vec<Check>, name: &str, lhs: f64, rhs: f64) -> Result<()> {
    checks.push(Check {
        name: name.to_string(),
        lhs,
        rhs,
    });
    if lhs <= rhs {
        Ok(())
    } else {
        Err(Error::Window {
            check: name.to_string(),
            lhs,
            rhs,
        })
    }
}

/// `T (2N / w)^A`: the tail factor of a decay certificate at working-variable point `w`.
fn tail_factor(cert: &NegRegimeCertificate, w: f64) -> f64 {
    cert.tail_bound(w, 1.0)
}

struct OscPart {
    component: OscComponent,
    witnesses: Vec<(f64, f64)>,
    confidence: Confidence,
    cert: Option<OscCertificate>,
    pure: Option<PureOscBound>,
}

fn osc_part(osc: &PreparedSum, n: f64, a: f64, opts: &Options) -> Result<OscPart> {
    if let Some(t) = osc.terms().iter().find(|t| !t.unit.is_identity()) {
        return Err(Error::Form(format!(
            "zero-exponent term {} carries a unit; only plain coefficients are supported there",
            t.exp
        )));
    }
    let eval = |ln_y: f64| osc.eval_ln(ln_y).norm();
    if !a.is_finite() {
        let c: Vec<(ExponentTriple, Complex64)> = osc.terms().iter().map(|t| (t.exp, t.coeff)).collect();
        let pure = pure_osc_bound(&c, n, opts)?;
        let witnesses: Vec<(f64, f64)> = pure.points.iter().map(|&y| (y, eval(y.ln()))).collect();
        let x = witnesses.iter().map(|w| w.1).fold(0.0, f64::max);
        let lo = pure.points.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pure.points.iter().copied().fold(0.0, f64::max);
        return Ok(OscPart {
            component: OscComponent {
                form: OscForm::Pure,
                x,
                lambda: pure.c,
                p_window: 1.0,
                window: (lo, hi),
                weight: 1.0,
            },
            witnesses,
            confidence: Confidence::Exact,
            cert: None,
            pure: Some(pure),
        });
    }
    let (ln_lo, ln_hi) = (n.ln(), (a / n).ln());
    if osc.terms().iter().all(|t| t.exp.alpha() == 0.0) {
        let d = osc.terms().iter().map(|t| t.exp.gamma()).max().unwrap_or(0) as usize;
        let mut coeffs = vec![Complex64::zero(); d + 1];
        for t in osc.terms() {
            coeffs[t.exp.gamma() as usize] += t.coeff;
        }
        let real = coeffs.iter().all(|c| c.im == 0.0);
        let re: Vec<f64> = coeffs.iter().map(|c| c.re).collect();
        let lp = logpoly_sup_ln(&re, ln_lo, ln_hi)?;
        let witnesses: Vec<(f64, f64)> = lp.points.iter().map(|&t| (t.exp(), eval(t))).collect();
        let x = witnesses.iter().map(|w| w.1).fold(0.0, f64::max);
        // |f| <= |Re f| + |Im f| when the coefficients are not all real
        let lambda = if real { lp.l } else { 2.0 * lp.l };
        let lo = witnesses.iter().map(|w| w.0).fold(f64::INFINITY, f64::min);
        let hi = witnesses.iter().map(|w| w.0).fold(0.0, f64::max);
        return Ok(OscPart {
            component: OscComponent {
                form: OscForm::Geometric,
                x,
                lambda,
                p_window: 1.0,
                window: (lo, hi),
                weight: 1.0,
            },
            witnesses,
            confidence: Confidence::Exact,
            cert: None,
            pure: None,
        });
    }
    let c: Vec<(OscPair, Complex64)> = osc
        .terms()
        .iter()
        .map(|t| (OscPair::new(t.exp.alpha(), t.exp.gamma()), t.coeff))
        .collect();
    let cert = certify_osc_ln(&c, ln_lo, ln_hi, opts)?;
    Ok(OscPart {
        component: OscComponent {
            form: OscForm::Norm,
            x: cert.p_norm,
            lambda: cert.lhi,
            p_window: cert.p_window,
            window: (cert.y0_window_ln.0.exp(), cert.y0_window_ln.1.exp()),
            weight: 1.0,
        },
        witnesses: Vec::new(),
        confidence: cert.confidence,
        cert: Some(cert),
        pure: None,
    })
}

fn balanced_certificate(h: &PreparedSum, opts: &Options) -> Result<WitnessCertificate> {
    let bound = estimate_zero_bound(h, opts.trials, opts)?;
    let plan = balanced_witnesses(h, (bound + 1).max(2), opts)?;
    let witnesses: Vec<Witness> = plan
        .grid
        .iter()
        .map(|&y| {
            let v = h.eval_ln(y.ln()).norm();
            Witness {
                y,
                regime: Regime::Balanced,
                value: v,
                h_abs: v,
            }
        })
        .collect();
    let score = witnesses.iter().map(|w| w.value).fold(0.0, f64::max);
    let d = h.domain();
    Ok(WitnessCertificate {
        range: (d.lower(), d.upper()),
        witnesses,
        osc_component: None,
        score,
        dominant: Some(Regime::Balanced),
        c_lower: 1.0,
        c_upper: plan.m,
        c_total: plan.m,
        confidence: plan.confidence,
        checks: Vec::new(),
        neg: None,
        pos: None,
        osc: None,
        pure_osc: None,
        balanced: Some(plan),
    })
}

/// Builds the witness set and the two-sided constant for `h`.
pub fn witness_set(h: &PreparedSum, opts: &Options) -> Result<WitnessCertificate> {
    if h.domain().balanced() {
        return balanced_certificate(h, opts);
    }
    let n = h.domain().lower();
    let a = h.domain().upper();
    if !(n > 1.0) {
        return Err(Error::InvalidDomain(format!("lower cutoff N = {n} must exceed 1")));
    }
    let parts = decompose(h)?;
    let mut checks = Vec::new();
    if a.is_finite() {
        gate(&mut checks, "cell depth: 4 N^2 < a", 4.0 * n * n, a)?;
    }
    let hi = if a.is_finite() { a / n } else { f64::INFINITY };

    let neg = match &parts.neg {
        Some(p) => {
            let units = units_by_triple(p)?;
            Some(certify_decay(&neg_problem(&units, n, hi)?, opts, 1)?)
        }
        None => None,
    };
    let pos = match &parts.pos {
        Some(p) => Some(certify_pos(p, n, a, opts)?),
        None => None,
    };
    let osc = match &parts.osc {
        Some(p) => Some(osc_part(p, n, a, opts)?),
        None => None,
    };

    let h_abs = |y: f64| h.eval_ln(y.ln()).norm();
    let mut witnesses = Vec::new();
    let mut x_neg = 0.0f64;
    if let (Some(c), Some(p)) = (&neg, &parts.neg) {
        for &y in &c.points {
            let v = p.eval_ln(y.ln()).norm();
            x_neg = x_neg.max(v);
            witnesses.push(Witness {
                y,
                regime: Regime::Neg,
                value: v,
                h_abs: h_abs(y),
            });
        }
    }
    let mut x_pos = 0.0f64;
    if let (Some(c), Some(p)) = (&pos, &parts.pos) {
        for &w in &c.points {
            let ln_y = a.ln() - w.ln();
            let y = ln_y.exp();
            let v = p.eval_ln(ln_y).norm();
            x_pos = x_pos.max(v);
            witnesses.push(Witness {
                y,
                regime: Regime::Pos,
                value: v,
                h_abs: h_abs(y),
            });
        }
    }

    let tails_present = neg.is_some() || pos.is_some();
    let mut component = osc.as_ref().map(|o| o.component.clone());
    if let (Some(comp), Some(o)) = (component.as_mut(), &osc) {
        comp.weight = if tails_present { 3.0 * comp.lambda } else { 1.0 };
        for &(y, v) in &o.witnesses {
            witnesses.push(Witness {
                y,
                regime: Regime::Osc,
                value: v,
                h_abs: h_abs(y),
            });
        }
    }

    let osc_entry = component.as_ref().map(|c| c.weight * c.x).unwrap_or(0.0);
    let score = x_neg.max(x_pos).max(osc_entry);
    let dominant = if score == 0.0 {
        None
    } else if neg.is_some() && x_neg == score {
        Some(Regime::Neg)
    } else if component.is_some() && osc_entry == score {
        Some(Regime::Osc)
    } else {
        Some(Regime::Pos)
    };

    // upper bound: each part is bounded by its own certificate
    let lambda_over_w = component.as_ref().map(|c| c.lambda / c.weight).unwrap_or(0.0);
    let c_upper = neg.as_ref().map(|c| c.upper_factor()).unwrap_or(0.0)
        + pos.as_ref().map(|c| c.upper_factor()).unwrap_or(0.0)
        + lambda_over_w;

    // lower bound: whichever entry attains the score, the other parts are small there
    let mut margins = Vec::new();
    if let Some(nc) = &neg {
        let eps_pos = match &pos {
            Some(pc) => {
                let y_max = nc.points.iter().copied().fold(0.0, f64::max);
                let e = tail_factor(pc, a / y_max);
                gate(&mut checks, "positive tail at the negative witnesses", e, 1.0 / 3.0)?;
                e
            }
            None => 0.0,
        };
        margins.push(1.0 - lambda_over_w - eps_pos);
    }
    if let Some(pc) = &pos {
        let eps_neg = match &neg {
            Some(nc) => {
                let w_max = pc.points.iter().copied().fold(0.0, f64::max);
                let e = tail_factor(nc, a / w_max);
                gate(&mut checks, "negative tail at the positive witnesses", e, 1.0 / 3.0)?;
                e
            }
            None => 0.0,
        };
        margins.push(1.0 - lambda_over_w - eps_neg);
    }
    if let Some(comp) = &component {
        let (y_lo, y_hi) = comp.window;
        let tau_neg = neg.as_ref().map(|c| tail_factor(c, y_lo)).unwrap_or(0.0);
        let tau_pos = pos.as_ref().map(|c| tail_factor(c, a / y_hi)).unwrap_or(0.0);
        let p_over_w = comp.p_window / comp.weight;
        if tails_present {
            gate(
                &mut checks,
                "tails inside the oscillatory window: tau- + tau+ <= (2/3) P / w",
                tau_neg + tau_pos,
                2.0 / 3.0 * p_over_w,
            )?;
        }
        margins.push(p_over_w - tau_neg - tau_pos);
    }
    let min_margin = margins.iter().copied().fold(f64::INFINITY, f64::min);
    let c_lower = 1.0 / min_margin;
    let c_total = c_lower.max(c_upper).max(1.0);

    let confidence = [
        neg.as_ref().map(|c| c.confidence),
        pos.as_ref().map(|c| c.confidence),
        osc.as_ref().map(|o| o.confidence),
    ]
    .into_iter()
    .flatten()
    .fold(Confidence::Exact, Ord::min);

    let (osc_cert, pure) = match osc {
        Some(o) => (o.cert, o.pure),
        None => (None, None),
    };
    Ok(WitnessCertificate {
        range: (n, hi),
        witnesses,
        osc_component: component,
        score,
        dominant,
        c_lower,
        c_upper,
        c_total,
        confidence,
        checks,
        neg,
        pos,
        osc: osc_cert,
        pure_osc: pure,
        balanced: None,
    })
}

/// `(score, certificate)`.
pub fn approx_sup(h: &PreparedSum, opts: &Options) -> Result<(f64, WitnessCertificate)> {
    let cert = witness_set(h, opts)?;
    Ok((cert.score, cert))
}

/// Evaluation-witness certificate; refuses oscillating terms.
pub fn evaluation_witnesses(h: &PreparedSum, opts: &Options) -> Result<WitnessCertificate> {
    if let Some(t) = h.terms().iter().find(|t| t.exp.alpha() != 0.0) {
        return Err(Error::Osc { alpha: t.exp.alpha() });
    }
    witness_set(h, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_sup;
    use crate::termalg::DomainSpec;
    use num_rational::Rational64;

    fn term(c: f64, alpha: f64, p: i64, q: i64, g: u32) -> Term {
        Term::plain(
            Complex64::new(c, 0.0),
            ExponentTriple::new(alpha, Rational64::new(p, q), g).unwrap(),
        )
    }

    fn sum(terms: Vec<Term>, n: f64, a: f64) -> PreparedSum {
        PreparedSum::new(terms, DomainSpec::new(n, a, false).unwrap()).unwrap()
    }

    #[test]
    fn decompose_partitions() {
        let h = sum(
            vec![
                term(1.0, 0.0, -1, 1, 0),
                term(1.0, 0.0, 0, 1, 0),
                term(1.0, 0.0, 2, 1, 0),
            ],
            10.0,
            1e6,
        );
        let d = decompose(&h).unwrap();
        assert_eq!(d.neg.unwrap().terms().len(), 1);
        assert_eq!(d.osc.unwrap().terms().len(), 1);
        assert_eq!(d.pos.unwrap().terms().len(), 1);

        let h = sum(
            vec![term(1.0, 0.0, -1, 1, 0), term(1.0, 0.0, -2, 1, 0)],
            10.0,
            f64::INFINITY,
        );
        let d = decompose(&h).unwrap();
        assert!(d.osc.is_none() && d.pos.is_none());

        let h = sum(vec![term(1.0, 0.0, 1, 1, 0)], 10.0, f64::INFINITY);
        let err = decompose(&h).unwrap_err();
        assert!(err.to_string().contains("fiberwise boundedness violated"));
    }

    #[test]
    fn single_negative_term() {
        let h = sum(vec![term(3.0, 0.0, -1, 1, 0)], 10.0, f64::INFINITY);
        let (score, cert) = approx_sup(&h, &Options::default()).unwrap();
        assert_eq!(cert.witnesses.len(), 1);
        assert!((score - 3.0 / cert.witnesses[0].y).abs() < 1e-15);
        assert!(cert.contains(3.0 / 10.0));
    }

    #[test]
    fn constant_is_exact() {
        let h = sum(vec![term(-2.5, 0.0, 0, 1, 0)], 10.0, 1e6);
        let (score, cert) = approx_sup(&h, &Options::default()).unwrap();
        assert_eq!(score, 2.5);
        assert_eq!(cert.c_total, 1.0);
    }

    #[test]
    fn zero_function_scores_zero() {
        let h = sum(vec![term(0.0, 0.0, -1, 1, 0)], 10.0, f64::INFINITY);
        let (score, _) = approx_sup(&h, &Options::default()).unwrap();
        assert_eq!(score, 0.0);
    }

    #[test]
    fn mixed_example_is_sandwiched() {
        let a = 1e10;
        let h = sum(vec![term(1.0, 0.0, -1, 1, 1), term(1.0 / a, 0.0, 1, 1, 0)], 10.0, a);
        match approx_sup(&h, &Options::default()) {
            Ok((_, cert)) => {
                let s = brute_sup(&h, 10.0, a / 10.0, 8192).unwrap().sup_estimate;
                assert!(cert.contains(s), "sup {s} vs score {} C {}", cert.score, cert.c_total);
            }
            Err(Error::Window { lhs, rhs, .. }) => assert!(lhs > rhs),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn shallow_cell_is_rejected() {
        let h = sum(vec![term(1.0, 0.0, -1, 1, 0)], 10.0, 300.0);
        assert!(matches!(approx_sup(&h, &Options::default()), Err(Error::Window { .. })));
    }

    #[test]
    fn oscillating_terms_block_evaluation_witnesses() {
        let h = sum(vec![term(1.0, std::f64::consts::PI, 0, 1, 0)], 10.0, 1e8);
        assert!(matches!(
            evaluation_witnesses(&h, &Options::default()),
            Err(Error::Osc { .. })
        ));
    }

    #[test]
    fn nonneg_sums() {
        assert_eq!(nonneg_single_witness(&[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert_eq!(nonneg_single_witness(&[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(nonneg_single_witness(&[5.0]).unwrap(), 5.0);
        assert_eq!(nonneg_single_witness(&[1.0, -1.0]), Err(Error::Negative(-1.0)));
    }
}
