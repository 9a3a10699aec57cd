use std::cmp::Ordering;
use std::f64::consts::TAU;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent data `(alpha, beta, gamma)` of one monomial `y^(alpha i + beta) (log y)^gamma`.
///
/// `alpha` lives in `[0, 2pi)`, `beta` is an exact rational and `gamma` a
/// nonnegative integer. Equality and hashing use the bit pattern of `alpha`.
#[derive(Debug, Clone, Copy)]
pub struct ExponentTriple {
    alpha: f64,
    beta: Rational64,
    gamma: u32,
}

impl ExponentTriple {
    pub fn new(alpha: f64, beta: Rational64, gamma: u32) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..TAU).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} is outside [0, 2pi)")));
        }
        // -0.0 and 0.0 must compare equal bitwise
        let alpha = if alpha == 0.0 { 0.0 } else { alpha };
        Ok(Self { alpha, beta, gamma })
    }

    /// Builds a triple after reducing `alpha` modulo `2pi`.
    pub fn wrapped(alpha: f64, beta: Rational64, gamma: u32) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("alpha = {alpha} is not finite")));
        }
        let mut a = alpha.rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        Self::new(a, beta, gamma)
    }

    /// A non-oscillating triple `(0, beta, gamma)`.
    pub fn real(beta: Rational64, gamma: u32) -> Self {
        Self {
            alpha: 0.0,
            beta,
            gamma,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> Rational64 {
        self.beta
    }

    pub fn beta_f64(&self) -> f64 {
        rational_to_f64(self.beta)
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// Canonical order: `beta` descending, then `gamma` descending, then `alpha` ascending.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        other
            .beta
            .cmp(&self.beta)
            .then(other.gamma.cmp(&self.gamma))
            .then(self.alpha.total_cmp(&other.alpha))
    }

    pub fn sign_of_beta(&self) -> Ordering {
        if self.beta.is_zero() {
            Ordering::Equal
        } else if self.beta.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// `y^(alpha i + beta) (log y)^gamma` evaluated from `ln y`.
    pub fn monomial_ln(&self, ln_y: f64) -> Complex64 {
        power_log_monomial(self.alpha, self.beta_f64(), self.gamma, ln_y)
    }
}

impl PartialEq for ExponentTriple {
    fn eq(&self, other: &Self) -> bool {
        self.alpha.to_bits() == other.alpha.to_bits() && self.beta == other.beta && self.gamma == other.gamma
    }
}

impl Eq for ExponentTriple {}

impl Hash for ExponentTriple {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.alpha.to_bits().hash(state);
        self.beta.hash(state);
        self.gamma.hash(state);
    }
}

impl PartialOrd for ExponentTriple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExponentTriple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(other)
    }
}

impl fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}/{}, {})",
            self.alpha,
            self.beta.numer(),
            self.beta.denom(),
            self.gamma
        )
    }
}

/// `y^(freq i + beta) (log y)^gamma` from `ln y`, for any real frequency.
///
/// `y^(freq i) = exp(i freq ln y)` through the principal real logarithm.
pub fn power_log_monomial(freq: f64, beta: f64, gamma: u32, ln_y: f64) -> Complex64 {
    let modulus = if beta == 0.0 { 1.0 } else { (beta * ln_y).exp() };
    let log_part = if gamma == 0 { 1.0 } else { ln_y.powi(gamma as i32) };
    let phase = freq * ln_y;
    if freq == 0.0 {
        Complex64::new(modulus * log_part, 0.0)
    } else {
        Complex64::from_polar(modulus * log_part, phase)
    }
}

pub fn rational_to_f64(r: Rational64) -> f64 {
    r.to_f64().unwrap_or_else(|| *r.numer() as f64 / *r.denom() as f64)
}

/// Parses `p/q` or an integer into a reduced rational.
pub fn parse_rational(s: &str) -> Option<Rational64> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().ok()?;
            let q: i64 = q.trim().parse().ok()?;
            if q == 0 {
                return None;
            }
            Some(Rational64::new(p, q))
        }
        None => s.parse::<i64>().ok().map(Rational64::from_integer),
    }
}
