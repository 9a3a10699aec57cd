//! Negative real exponents on an unbounded cell: witnesses `2N d_j`, the tail
//! envelope `(A, D)` and the two-sided constant.
//!
//! The engine works in a variable `w` with `h` a perturbed sum of species
//! `w^(freq i + b) (ln w)^m`, `b < 0`. The negative part of a sum uses `w = y`;
//! the positive part uses `w = a / y` (see the supremum module).

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_rational::Rational64;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::indep::{find_species_points, SamplePlan, Species};
use crate::linalg::binom;
use crate::options::Options;
use crate::termalg::{rational_to_f64, Confidence, ExponentTriple, PerturbationUnit, PreparedSum};

pub const A_DENOMINATOR_CAP: i64 = 64;

/// Largest `A <= min(-beta) / 2` with denominator at most 64 (or exactly half when that floors to 0).
fn envelope_exponent(min_neg_beta: Rational64) -> Rational64 {
    let half = min_neg_beta / 2;
    if *half.denom() <= A_DENOMINATOR_CAP {
        return half;
    }
    let cap = Rational64::from_integer(A_DENOMINATOR_CAP);
    let floored = (half * cap).floor() / cap;
    if floored.is_zero() {
        half
    } else {
        floored
    }
}

/// `sup_{z > 1/2} z^(beta + A) |ln z|^gamma` for `beta + A < 0`.
fn envelope_sup(beta: f64, a: f64, gamma: u32) -> f64 {
    let e = beta + a;
    let endpoint = 2f64.powf(-e) * std::f64::consts::LN_2.powi(gamma as i32);
    if gamma == 0 {
        return endpoint;
    }
    let g = gamma as f64;
    // critical point exp(g / -e) on z > 1
    let crit = (-g).exp() * (g / -e).powf(g);
    endpoint.max(crit)
}

/// `(A, D)` for pairs `(beta, gamma)` with every `beta < 0`.
pub fn envelope_for(pairs: &[(Rational64, u32)]) -> Result<(Rational64, f64)> {
    if pairs.is_empty() {
        return Err(Error::Empty);
    }
    if let Some((b, _)) = pairs.iter().find(|(b, _)| !b.is_negative()) {
        return Err(Error::Regime(format!("real exponent {b} is not negative")));
    }
    let min_neg = pairs.iter().map(|(b, _)| -b).min().unwrap();
    let a = envelope_exponent(min_neg);
    let af = rational_to_f64(a);
    let d = pairs
        .iter()
        .map(|&(b, g)| envelope_sup(rational_to_f64(b), af, g))
        .fold(0.0, f64::max);
    Ok((a, d))
}

/// Tail envelope of a set of triples: `|z^beta (ln z)^gamma| <= D z^-A` on `(1/2, inf)`.
pub fn tail_envelope(k: &[ExponentTriple]) -> Result<(Rational64, f64)> {
    let pairs: Vec<_> = k.iter().map(|t| (t.beta(), t.gamma())).collect();
    envelope_for(&pairs)
}

/// `1 / (2 C D)`.
pub fn delta_threshold(c: f64, d: f64) -> f64 {
    1.0 / (2.0 * c * d)
}

/// Explicit inverse of the unitriangular matrix `B[m][g] = binom(g, m) s^(g - m)`.
pub fn log_shift_inverse(gmax: u32, s: f64) -> DMatrix<f64> {
    let n = gmax as usize + 1;
    DMatrix::from_fn(n, n, |m, g| {
        if m > g {
            0.0
        } else {
            binom(g as u32, m as u32) * (-s).powi((g - m) as i32)
        }
    })
}

/// Induced 1-norm (largest absolute column sum) of the inverse log-shift matrix.
pub fn log_shift_norm(gmax: u32, s: f64) -> f64 {
    let inv = log_shift_inverse(gmax, s);
    (0..inv.ncols())
        .map(|j| inv.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// One perturbed source term, expressed in the working variable.
#[derive(Debug, Clone)]
pub(crate) struct DecaySource {
    pub block: usize,
    pub beta: Rational64,
    /// `sup |u - 1| (ln y)^gamma` over the certified range.
    pub eps: f64,
    /// The unit's `(ln y)^(2b)`-weighted deviation (computed or declared).
    pub delta: f64,
    pub confidence: Confidence,
}

/// A group of species sharing `(freq, beta)` with log powers `0..=gmax`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Block {
    pub freq: f64,
    pub beta: Rational64,
    pub gmax: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct DecayProblem {
    pub blocks: Vec<Block>,
    pub sources: Vec<DecaySource>,
    /// `ln` of the substitution scale (`ln 2N` or `ln(a / 2N)`).
    pub shift: f64,
    pub n: f64,
}

/// Certificate for a decaying sum on `w > N`.
#[derive(Debug, Clone, Serialize)]
pub struct NegRegimeCertificate {
    /// Species after closure padding, in the working variable.
    pub species: Vec<(f64, String, u32)>,
    pub n: f64,
    /// Witness points `2N d_j` in the working variable.
    pub points: Vec<f64>,
    pub plan: SamplePlan,
    #[serde(serialize_with = "ser_rational")]
    pub a: Rational64,
    pub d: f64,
    /// `1 / (2 C D)`.
    pub delta: f64,
    /// Largest unit deviation seen by the gate.
    pub unit_delta: f64,
    /// Norm of the inverse log-shift matrix.
    pub e: f64,
    /// Perturbation factor `eta` with `|h - g| <= eta ||c'||_1 z^-A`.
    pub eta: f64,
    /// `T` in `|h(w)| <= T (2N)^A w^-A max_S |h|`.
    pub tail_constant: f64,
    pub c_total: f64,
    pub confidence: Confidence,
}

fn ser_rational<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

impl NegRegimeCertificate {
    pub fn a_f64(&self) -> f64 {
        rational_to_f64(self.a)
    }

    /// Bound on `|h(w)|` for `w > N` given `max_s = max_S |h|`.
    pub fn tail_bound(&self, w: f64, max_s: f64) -> f64 {
        let a = self.a_f64();
        self.tail_constant * (2.0 * self.n / w).powf(a) * max_s
    }

    /// `T 2^A`, the factor between `max_S |h|` and `sup_{w > N} |h|`.
    pub fn upper_factor(&self) -> f64 {
        self.tail_constant * 2f64.powf(self.a_f64())
    }
}

pub(crate) fn certify_decay(p: &DecayProblem, opts: &Options, stream: u64) -> Result<NegRegimeCertificate> {
    if !(p.n > 1.0) {
        return Err(Error::InvalidArgument(format!("N = {} must exceed 1", p.n)));
    }
    let mut species = Vec::new();
    let mut pairs = Vec::new();
    for b in &p.blocks {
        for m in 0..=b.gmax {
            species.push(Species {
                freq: b.freq,
                beta: rational_to_f64(b.beta),
                gamma: m,
            });
            pairs.push((b.beta, m));
        }
    }
    let (a, d) = envelope_for(&pairs)?;
    let af = rational_to_f64(a);
    let mut rng = opts.rng(stream);
    let plan = find_species_points(&species, 1.0, 2.0, opts.trials, &mut rng)?;
    let c = plan.equivalence_constant;
    let delta = delta_threshold(c, d);

    let mut unit_delta = 0.0f64;
    for s in &p.sources {
        unit_delta = unit_delta.max(s.delta);
        if !(s.delta < delta) {
            return Err(Error::Delta {
                check: format!("unit deviation must stay below 1/(2CD) with C = {c:.6e}, D = {d:.6e}"),
                value: s.delta,
                limit: delta,
            });
        }
    }

    let norms: Vec<f64> = p.blocks.iter().map(|b| log_shift_norm(b.gmax, p.shift)).collect();
    let e = norms.iter().copied().fold(1.0, f64::max);
    // per block: sum_t |c_t| <= E_b ||c'_b||_1, so the worst block factor bounds the sum
    let eta = p
        .sources
        .iter()
        .map(|s| norms[s.block] * s.eps * 2f64.powf(-(rational_to_f64(s.beta) + af)))
        .fold(0.0, f64::max);
    if !(eta * c <= 0.5) {
        return Err(Error::Delta {
            check: "perturbation factor eta C must be at most 1/2".into(),
            value: eta * c,
            limit: 0.5,
        });
    }
    let tail_constant = 2.0 * (c * d + eta * c);
    let c_total = (tail_constant * 2f64.powf(af)).max(1.0);
    let confidence = p.sources.iter().map(|s| s.confidence).fold(Confidence::Exact, Ord::min);
    let points = plan.points.iter().map(|d| 2.0 * p.n * d).collect();
    Ok(NegRegimeCertificate {
        species: species
            .iter()
            .zip(&pairs)
            .map(|(s, (b, _))| (s.freq, format!("{}/{}", b.numer(), b.denom()), s.gamma))
            .collect(),
        n: p.n,
        points,
        plan,
        a,
        d,
        delta,
        unit_delta,
        e,
        eta,
        tail_constant,
        c_total,
        confidence,
    })
}

/// Per-triple unit map; one triple may carry only one unit.
pub(crate) fn units_by_triple(h: &PreparedSum) -> Result<BTreeMap<ExponentTriple, (&PerturbationUnit, bool)>> {
    let mut map: BTreeMap<ExponentTriple, (&PerturbationUnit, bool)> = BTreeMap::new();
    for t in h.terms() {
        let nonzero = t.coeff.norm() > 0.0;
        match map.get(&t.exp) {
            Some((u, _)) if *u != &t.unit => {
                return Err(Error::Form(format!(
                    "triple {} carries two different units; the certifier needs one unit per triple",
                    t.exp
                )))
            }
            Some((_, nz)) => {
                let nz = *nz || nonzero;
                map.insert(t.exp, (&t.unit, nz));
            }
            None => {
                map.insert(t.exp, (&t.unit, nonzero));
            }
        }
    }
    Ok(map)
}

/// Unit deviations `(eps, delta, confidence)` over `(lo, hi)` for log power `gamma` and `2b`.
pub(crate) fn unit_deviation(
    unit: &PerturbationUnit,
    lo: f64,
    hi: f64,
    gamma: u32,
    two_b: u32,
) -> Result<(f64, f64, Confidence)> {
    unit.check_declared(lo, hi, two_b)?;
    let eps = unit.deviation_bound(lo, hi, gamma, two_b)?;
    let delta = match unit {
        PerturbationUnit::Tabulated(t) => t.delta(),
        u => u.deviation_bound(lo, hi, two_b, two_b)?.value,
    };
    Ok((eps.value, delta, unit.confidence()))
}

/// Certificate for `sup_{y > N} |h|` when every real exponent of `h` is negative.
pub fn certify_neg(h: &PreparedSum, n: f64, opts: &Options) -> Result<NegRegimeCertificate> {
    if let Some(t) = h.terms().iter().find(|t| !t.exp.beta().is_negative()) {
        return Err(Error::Regime(format!("term {} has beta >= 0", t.exp)));
    }
    let units = units_by_triple(h)?;
    let problem = neg_problem(&units, n, f64::INFINITY)?;
    certify_decay(&problem, opts, 1)
}

/// Builds the decay problem for negative-beta triples on `(n, hi)` with `w = y`.
pub(crate) fn neg_problem(
    units: &BTreeMap<ExponentTriple, (&PerturbationUnit, bool)>,
    n: f64,
    hi: f64,
) -> Result<DecayProblem> {
    let two_b = 2 * units.keys().map(|t| t.gamma()).max().unwrap_or(0);
    let mut blocks: Vec<Block> = Vec::new();
    let mut sources = Vec::new();
    for (t, (unit, nonzero)) in units {
        let idx = match blocks
            .iter()
            .position(|b| b.freq.to_bits() == t.alpha().to_bits() && b.beta == t.beta())
        {
            Some(i) => {
                blocks[i].gmax = blocks[i].gmax.max(t.gamma());
                i
            }
            None => {
                blocks.push(Block {
                    freq: t.alpha(),
                    beta: t.beta(),
                    gmax: t.gamma(),
                });
                blocks.len() - 1
            }
        };
        if *nonzero && !unit.is_identity() {
            let (eps, delta, confidence) = unit_deviation(unit, n, hi, t.gamma(), two_b)?;
            sources.push(DecaySource {
                block: idx,
                beta: t.beta(),
                eps,
                delta,
                confidence,
            });
        }
    }
    Ok(DecayProblem {
        blocks,
        sources,
        shift: (2.0 * n).ln(),
        n,
    })
}

/// `|h|` at each witness of a certificate (working variable `y`).
pub fn witness_values(h: &PreparedSum, cert: &NegRegimeCertificate) -> Vec<f64> {
    cert.points.iter().map(|&y| h.eval_ln(y.ln()).norm()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::termalg::{DomainSpec, RationalTail, Term};
    use num_complex::Complex64;
    use std::f64::consts::LN_2;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn envelope_examples() {
        let (a, d) = tail_envelope(&[ExponentTriple::real(r(-1, 1), 0)]).unwrap();
        assert_eq!(a, r(1, 2));
        assert!((d - 2f64.sqrt()).abs() < 1e-15);

        let (a, d) = tail_envelope(&[ExponentTriple::real(r(-2, 1), 0)]).unwrap();
        assert_eq!(a, r(1, 1));
        assert!((d - 2.0).abs() < 1e-15);

        let (a, d) = tail_envelope(&[ExponentTriple::real(r(-1, 1), 1)]).unwrap();
        assert_eq!(a, r(1, 2));
        assert!((d - 2f64.sqrt() * LN_2).abs() < 1e-15);
        assert!((d - 0.98026).abs() < 1e-5);
    }

    #[test]
    fn envelope_denominator_cap() {
        let (a, _) = envelope_for(&[(r(-1, 97), 0)]).unwrap();
        // 1/194 floors to 0 at denominator 64, so the exact half is kept
        assert_eq!(a, r(1, 194));
        let (a, _) = envelope_for(&[(r(-100, 97), 0)]).unwrap();
        assert!(*a.denom() <= 64 && a < r(100, 97) / 2 + r(1, 64));
        assert!(envelope_for(&[(r(0, 1), 0)]).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(delta_threshold(1.0, 1.0), 0.5);
        assert_eq!(delta_threshold(2.0, 0.5), 0.5);
        assert_eq!(delta_threshold(4.0, 2.0), 1.0 / 16.0);
    }

    #[test]
    fn log_shift_inverse_inverts() {
        let s = 1.7;
        let inv = log_shift_inverse(3, s);
        let b = DMatrix::from_fn(4, 4, |m, g| {
            if m > g {
                0.0
            } else {
                binom(g as u32, m as u32) * s.powi((g - m) as i32)
            }
        });
        let prod = &b * &inv;
        assert!((prod - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-12);
        assert!((log_shift_norm(3, s) - (1.0 + s).powi(3)).abs() < 1e-12);
    }

    fn neg_sum(terms: Vec<Term>, n: f64) -> PreparedSum {
        PreparedSum::new(terms, DomainSpec::unbounded(n).unwrap()).unwrap()
    }

    #[test]
    fn single_term_sup_in_band() {
        let h = neg_sum(
            vec![Term::plain(Complex64::new(5.0, 0.0), ExponentTriple::real(r(-1, 1), 0))],
            2.0,
        );
        let cert = certify_neg(&h, 2.0, &Options::default()).unwrap();
        assert_eq!(cert.points.len(), 1);
        let ms = witness_values(&h, &cert)[0];
        assert!((ms - 5.0 / cert.points[0]).abs() < 1e-14);
        let sup = 2.5;
        assert!(ms / cert.c_total <= sup && sup <= cert.c_total * ms);
    }

    #[test]
    fn zero_sum_has_zero_witness_max() {
        let h = neg_sum(
            vec![Term::plain(Complex64::new(0.0, 0.0), ExponentTriple::real(r(-1, 1), 0))],
            2.0,
        );
        let cert = certify_neg(&h, 2.0, &Options::default()).unwrap();
        assert!(witness_values(&h, &cert).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn closure_pads_lower_log_powers() {
        let h = neg_sum(
            vec![Term::plain(Complex64::new(1.0, 0.0), ExponentTriple::real(r(-1, 1), 2))],
            3.0,
        );
        let cert = certify_neg(&h, 3.0, &Options::default()).unwrap();
        assert_eq!(cert.points.len(), 3);
    }

    #[test]
    fn regime_and_delta_errors() {
        let h = neg_sum(
            vec![Term::plain(Complex64::new(1.0, 0.0), ExponentTriple::real(r(0, 1), 0))],
            2.0,
        );
        assert!(matches!(
            certify_neg(&h, 2.0, &Options::default()),
            Err(Error::Regime(_))
        ));

        let big = PerturbationUnit::RationalTail(RationalTail::new(vec![(1, 50.0)]).unwrap());
        let h = neg_sum(
            vec![Term::new(
                Complex64::new(1.0, 0.0),
                ExponentTriple::real(r(-1, 1), 0),
                big,
            )],
            2.0,
        );
        assert!(matches!(
            certify_neg(&h, 2.0, &Options::default()),
            Err(Error::Delta { .. })
        ));
    }

    #[test]
    fn conflicting_units_are_a_form_error() {
        let u = PerturbationUnit::RationalTail(RationalTail::new(vec![(1, 0.01)]).unwrap());
        let t = ExponentTriple::real(r(-1, 1), 0);
        let h = neg_sum(
            vec![
                Term::plain(Complex64::new(1.0, 0.0), t),
                Term::new(Complex64::new(1.0, 0.0), t, u),
            ],
            2.0,
        );
        assert!(matches!(certify_neg(&h, 2.0, &Options::default()), Err(Error::Form(_))));
    }
}
