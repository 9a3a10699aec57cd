//! Prepared power-log sums: exponents, perturbation units, terms and evaluation.

mod exponent;
mod sum;
mod unit;

pub use exponent::{parse_rational, power_log_monomial, rational_to_f64, ExponentTriple};
pub use sum::{normalize_terms, DomainSpec, PreparedSum, Term};
pub use unit::{
    Confidence, DeviationBound, PerturbationUnit, RationalTail, TabulatedUnit, UnitFunction, UnitTable,
    TABLE_CHECK_HORIZON, TABLE_CHECK_POINTS,
};
