use std::fmt;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Evaluation contract for tabulated perturbation units.
pub trait UnitFunction: Send + Sync + fmt::Debug {
    fn eval(&self, y: f64) -> f64;

    /// Identifier used for serialization and unit equality (a path for file tables).
    fn label(&self) -> &str;

    /// Upper bound on `|u(y)|` over `y >= from`.
    fn sup_abs_beyond(&self, from: f64) -> f64;
}

/// Samples `(y, u(y))` interpolated linearly in `ln y`, clamped outside the table.
#[derive(Debug, Clone)]
pub struct UnitTable {
    label: String,
    ln_y: Vec<f64>,
    values: Vec<f64>,
}

impl UnitTable {
    pub fn new(label: impl Into<String>, mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Data("unit table has no rows".into()));
        }
        if points
            .iter()
            .any(|&(y, v)| !(y > 0.0) || !y.is_finite() || !v.is_finite())
        {
            return Err(Error::Data(
                "unit table rows need finite y > 0 and finite values".into(),
            ));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        points.dedup_by(|a, b| a.0 == b.0);
        Ok(Self {
            label: label.into(),
            ln_y: points.iter().map(|p| p.0.ln()).collect(),
            values: points.iter().map(|p| p.1).collect(),
        })
    }

    /// Reads a two-column `y,value` file; `#` starts a comment, a header row is skipped.
    pub fn load(path: &Path, label: impl Into<String>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let rows = crate::csvio::read_pairs(&text)?;
        Self::new(label, rows)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl UnitFunction for UnitTable {
    fn eval(&self, y: f64) -> f64 {
        let u = y.ln();
        let n = self.ln_y.len();
        if n == 1 || u <= self.ln_y[0] {
            return self.values[0];
        }
        if u >= self.ln_y[n - 1] {
            return self.values[n - 1];
        }
        let i = self.ln_y.partition_point(|&x| x <= u);
        let (x0, x1) = (self.ln_y[i - 1], self.ln_y[i]);
        let t = (u - x0) / (x1 - x0);
        self.values[i - 1] * (1.0 - t) + self.values[i] * t
    }

    fn label(&self) -> &str {
        &self.label
    }

    fn sup_abs_beyond(&self, from: f64) -> f64 {
        // piecewise linear: the extremes are the value at `from` and the later nodes
        let mut m = self.eval(from).abs();
        let u = from.ln();
        for (x, v) in self.ln_y.iter().zip(&self.values) {
            if *x >= u {
                m = m.max(v.abs());
            }
        }
        m
    }
}

/// Provenance of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Confidence {
    Asserted,
    Sampled,
    Exact,
}

impl fmt::Display for Confidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Confidence::Asserted => "asserted",
            Confidence::Sampled => "sampled",
            Confidence::Exact => "exact",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationBound {
    pub value: f64,
    pub confidence: Confidence,
}

/// `f(y) = 1 + sum a_i y^(-i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTail {
    terms: Vec<(u32, f64)>,
}

impl RationalTail {
    /// Entries are `(power, coefficient)` with power >= 1; equal powers are summed.
    pub fn new(mut terms: Vec<(u32, f64)>) -> Result<Self> {
        if terms.iter().any(|&(k, a)| k == 0 || !a.is_finite()) {
            return Err(Error::InvalidArgument(
                "tail powers must be positive and coefficients finite".into(),
            ));
        }
        terms.sort_by_key(|t| t.0);
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(terms.len());
        for (k, a) in terms {
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += a,
                _ => merged.push((k, a)),
            }
        }
        Ok(Self { terms: merged })
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn eval(&self, y: f64) -> f64 {
        1.0 + self.terms.iter().map(|&(k, a)| a * y.powi(-(k as i32))).sum::<f64>()
    }

    /// `sup_{y in [lo, hi]} sum |a_i| y^(-i) (ln y)^p`, bounding each summand at its own maximizer.
    fn weighted_deviation(&self, lo: f64, hi: f64, p: u32) -> f64 {
        self.terms
            .iter()
            .map(|&(k, a)| {
                // y^-k (ln y)^p peaks at e^(p/k)
                let y = ((p as f64) / (k as f64)).exp().clamp(lo, hi);
                a.abs() * y.powi(-(k as i32)) * y.ln().max(0.0).powi(p as i32)
            })
            .sum()
    }
}

/// Tabulated unit together with its declared bound `|u(y) - 1| (ln y)^(2b) < delta`.
#[derive(Debug, Clone)]
pub struct TabulatedUnit {
    source: Arc<dyn UnitFunction>,
    delta: f64,
}

impl TabulatedUnit {
    pub fn new(source: Arc<dyn UnitFunction>, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "declared delta must be positive and finite, got {delta}"
            )));
        }
        Ok(Self { source, delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn label(&self) -> &str {
        self.source.label()
    }

    pub fn source(&self) -> &Arc<dyn UnitFunction> {
        &self.source
    }
}

impl PartialEq for TabulatedUnit {
    fn eq(&self, other: &Self) -> bool {
        self.source.label() == other.source.label() && self.delta.to_bits() == other.delta.to_bits()
    }
}

/// Near-constant factor `f(y) = 1 + o(1)` multiplying one monomial.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum PerturbationUnit {
    #[default]
    Identity,
    RationalTail(RationalTail),
    Tabulated(TabulatedUnit),
}

pub const TABLE_CHECK_POINTS: usize = 256;
pub const TABLE_CHECK_HORIZON: f64 = 1e8;

impl PerturbationUnit {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            PerturbationUnit::Identity => 1.0,
            PerturbationUnit::RationalTail(t) => t.eval(y),
            PerturbationUnit::Tabulated(t) => t.source.eval(y),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, PerturbationUnit::Identity)
            || matches!(self, PerturbationUnit::RationalTail(t) if t.terms.iter().all(|x| x.1 == 0.0))
    }

    /// Upper bound on `|u(y)|` for all `y >= from`.
    pub fn sup_abs_beyond(&self, from: f64) -> f64 {
        match self {
            PerturbationUnit::Identity => 1.0,
            PerturbationUnit::RationalTail(t) => {
                1.0 + t
                    .terms
                    .iter()
                    .map(|&(k, a)| a.abs() * from.powi(-(k as i32)))
                    .sum::<f64>()
            }
            PerturbationUnit::Tabulated(t) => t.source.sup_abs_beyond(from),
        }
    }

    /// Bound on `sup_{y in (lo, hi)} |u(y) - 1| (ln y)^p`.
    ///
    /// Tabulated units only know `|u - 1| (ln y)^two_b < delta`, so they return
    /// `delta sup (ln y)^(p - two_b)` after the declared bound passes a grid check.
    pub fn deviation_bound(&self, lo: f64, hi: f64, p: u32, two_b: u32) -> Result<DeviationBound> {
        match self {
            PerturbationUnit::Identity => Ok(DeviationBound {
                value: 0.0,
                confidence: Confidence::Exact,
            }),
            PerturbationUnit::RationalTail(t) => Ok(DeviationBound {
                value: t.weighted_deviation(lo, hi, p),
                confidence: Confidence::Exact,
            }),
            PerturbationUnit::Tabulated(t) => {
                self.check_declared(lo, hi, two_b)?;
                let e = p as i32 - two_b as i32;
                let (w_lo, w_hi) = (lo.ln(), hi.ln());
                let factor = match e.cmp(&0) {
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Less if w_lo > 0.0 => w_lo.powi(e),
                    std::cmp::Ordering::Greater if w_hi.is_finite() => w_hi.powi(e),
                    _ => f64::INFINITY,
                };
                Ok(DeviationBound {
                    value: t.delta * factor,
                    confidence: Confidence::Sampled,
                })
            }
        }
    }

    /// Samples the declared tabulated bound on a log-spaced grid over `(lo, min(hi, 1e8)]`.
    pub fn check_declared(&self, lo: f64, hi: f64, two_b: u32) -> Result<()> {
        let PerturbationUnit::Tabulated(t) = self else {
            return Ok(());
        };
        let top = hi.min(TABLE_CHECK_HORIZON).max(lo * (1.0 + 1e-9));
        let (l0, l1) = (lo.ln(), top.ln());
        for i in 1..=TABLE_CHECK_POINTS {
            let u = l0 + (l1 - l0) * i as f64 / TABLE_CHECK_POINTS as f64;
            let y = u.exp();
            let v = (t.source.eval(y) - 1.0).abs() * u.max(0.0).powi(two_b as i32);
            if !(v < t.delta) {
                return Err(Error::Delta {
                    check: format!("tabulated unit '{}' exceeds its declared bound at y = {y}", t.label()),
                    value: v,
                    limit: t.delta,
                });
            }
        }
        Ok(())
    }

    pub fn confidence(&self) -> Confidence {
        match self {
            PerturbationUnit::Tabulated(_) => Confidence::Sampled,
            _ => Confidence::Exact,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_eval_and_limit() {
        let t = RationalTail::new(vec![(1, 0.5), (2, -0.25)]).unwrap();
        assert!((t.eval(2.0) - (1.0 + 0.25 - 0.0625)).abs() < 1e-15);
        assert!((t.eval(1e12) - 1.0).abs() < 1e-11);
    }

    #[test]
    fn tail_deviation_peaks_at_interior_point() {
        // |0.1| y^-1 (ln y)^2 peaks at y = e^2 with value 0.1 * 4 / e^2
        let u = PerturbationUnit::RationalTail(RationalTail::new(vec![(1, 0.1)]).unwrap());
        let b = u.deviation_bound(2.0, f64::INFINITY, 2, 0).unwrap();
        let expect = 0.1 * 4.0 * (-2.0f64).exp();
        assert!((b.value - expect).abs() < 1e-15);
        // brute check
        let brute = (0..100_000)
            .map(|i| 2.0 * (1.0 + i as f64 * 1e-3))
            .map(|y| 0.1 / y * y.ln().powi(2))
            .fold(0.0, f64::max);
        assert!(brute <= b.value + 1e-15);
    }

    #[test]
    fn table_interpolates_in_log() {
        let t = UnitTable::new("t", vec![(1.0, 1.0), (100.0, 3.0)]).unwrap();
        assert!((t.eval(10.0) - 2.0).abs() < 1e-12);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(1e9), 3.0);
        assert_eq!(t.sup_abs_beyond(10.0), 3.0);
    }

    #[test]
    fn declared_bound_violation_is_caught() {
        let table = UnitTable::new("bad", vec![(2.0, 1.5), (1e9, 1.5)]).unwrap();
        let unit = PerturbationUnit::Tabulated(TabulatedUnit::new(Arc::new(table), 0.1).unwrap());
        let err = unit.deviation_bound(2.0, f64::INFINITY, 0, 0).unwrap_err();
        assert!(matches!(err, Error::Delta { .. }));
    }
}
