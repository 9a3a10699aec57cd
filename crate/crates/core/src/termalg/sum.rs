use num_complex::Complex64;

use super::exponent::ExponentTriple;
use super::unit::PerturbationUnit;
use crate::error::{Error, Result};

/// One monomial `c u(y) y^(alpha i + beta) (log y)^gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: Complex64,
    pub exp: ExponentTriple,
    pub unit: PerturbationUnit,
}

impl Term {
    pub fn new(coeff: Complex64, exp: ExponentTriple, unit: PerturbationUnit) -> Self {
        Self { coeff, exp, unit }
    }

    pub fn plain(coeff: Complex64, exp: ExponentTriple) -> Self {
        Self::new(coeff, exp, PerturbationUnit::Identity)
    }

    /// Value at `y = exp(ln_y)` without domain checks.
    pub fn eval_ln(&self, ln_y: f64) -> Complex64 {
        if self.coeff == Complex64::new(0.0, 0.0) {
            return Complex64::new(0.0, 0.0);
        }
        let u = match self.unit {
            PerturbationUnit::Identity => 1.0,
            ref unit => unit.eval(ln_y.exp()),
        };
        self.coeff * u * self.exp.monomial_ln(ln_y)
    }
}

/// The cell `(lower, upper)` a sum lives on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    lower: f64,
    upper: f64,
    balanced: bool,
}

impl DomainSpec {
    /// `upper = f64::INFINITY` encodes an unbounded cell.
    pub fn new(lower: f64, upper: f64, balanced: bool) -> Result<Self> {
        if !lower.is_finite() || lower < 1.0 {
            return Err(Error::InvalidDomain(format!(
                "lower cutoff {lower} must be finite and >= 1"
            )));
        }
        if upper.is_nan() || upper <= lower {
            return Err(Error::InvalidDomain(format!("upper {upper} must exceed lower {lower}")));
        }
        if balanced && !upper.is_finite() {
            return Err(Error::InvalidDomain(
                "a balanced cell needs a finite upper boundary".into(),
            ));
        }
        if !balanced && upper.is_finite() && upper <= lower * lower {
            return Err(Error::InvalidDomain(format!(
                "unbalanced cell needs upper > lower^2 (upper = {upper}, lower^2 = {})",
                lower * lower
            )));
        }
        Ok(Self { lower, upper, balanced })
    }

    pub fn unbounded(lower: f64) -> Result<Self> {
        Self::new(lower, f64::INFINITY, false)
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }

    pub fn balanced(&self) -> bool {
        self.balanced
    }

    pub fn is_bounded(&self) -> bool {
        self.upper.is_finite()
    }

    pub fn contains(&self, y: f64) -> bool {
        y > self.lower && y < self.upper && y > 1.0
    }
}

/// Merges equal (triple, unit) pairs, drops zero terms and sorts canonically.
///
/// An input whose terms all cancel keeps a single zero term.
pub fn normalize_terms(terms: Vec<Term>) -> Vec<Term> {
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.iter_mut().find(|m| m.exp == t.exp && m.unit == t.unit) {
            Some(m) => m.coeff += t.coeff,
            None => merged.push(t),
        }
    }
    let first = merged.first().cloned();
    merged.retain(|t| t.coeff != Complex64::new(0.0, 0.0));
    if merged.is_empty() {
        if let Some(mut t) = first {
            t.coeff = Complex64::new(0.0, 0.0);
            merged.push(t);
        }
    }
    merged.sort_by(|a, b| a.exp.canonical_cmp(&b.exp));
    merged
}

/// A finite power-log sum on a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSum {
    terms: Vec<Term>,
    domain: DomainSpec,
}

impl PreparedSum {
    pub fn new(terms: Vec<Term>, domain: DomainSpec) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Empty);
        }
        if terms.iter().any(|t| !t.coeff.re.is_finite() || !t.coeff.im.is_finite()) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self {
            terms: normalize_terms(terms),
            domain,
        })
    }

    /// Builds the sum from already canonical terms, e.g. a slice of another sum.
    pub(crate) fn from_parts(terms: Vec<Term>, domain: DomainSpec) -> Self {
        Self { terms, domain }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn with_domain(&self, domain: DomainSpec) -> Self {
        Self {
            terms: self.terms.clone(),
            domain,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    /// Distinct triples in canonical order.
    pub fn triples(&self) -> Vec<ExponentTriple> {
        let mut out: Vec<ExponentTriple> = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if out.last() != Some(&t.exp) && !out.contains(&t.exp) {
                out.push(t.exp);
            }
        }
        out
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * s,
                ..t.clone()
            })
            .collect();
        Self::from_parts(terms, self.domain)
    }

    /// Evaluation from `ln y`, skipping domain checks; callers guarantee `y > 1`.
    pub fn eval_ln(&self, ln_y: f64) -> Complex64 {
        self.terms.iter().map(|t| t.eval_ln(ln_y)).sum()
    }

    /// `h(y)` for `y` in the open domain.
    pub fn eval(&self, y: f64) -> Result<Complex64> {
        if !self.domain.contains(y) {
            return Err(Error::Domain {
                y,
                lower: self.domain.lower,
                upper: self.domain.upper,
            });
        }
        let v = self.eval_ln(y.ln());
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(Error::Overflow { y });
        }
        Ok(v)
    }

    /// `|h(y)|` for `y` in the open domain.
    pub fn abs_at(&self, y: f64) -> Result<f64> {
        let v = self.eval(y)?;
        let m = v.norm();
        if !m.is_finite() {
            return Err(Error::Overflow { y });
        }
        Ok(m)
    }
}
