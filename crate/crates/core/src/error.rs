use thiserror::Error;

/// Errors raised by the data model, the certifiers and the CLI front end.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("y = {y} lies outside the open domain ({lower}, {upper})")]
    Domain { y: f64, lower: f64, upper: f64 },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("evaluation overflow at y = {y}: |h(y)| exceeds the f64 range")]
    Overflow { y: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate exponent set: best smallest singular value {sigma:e} is below {threshold:e}")]
    Degenerate { sigma: f64, threshold: f64 },

    #[error("singular evaluation matrix")]
    Singular,

    #[error("regime violated: {0}")]
    Regime(String),

    #[error("perturbation hypothesis violated: {check} ({value:e} >= {limit:e})")]
    Delta { check: String, value: f64, limit: f64 },

    #[error("window hypothesis violated: {check} ({lhs:e} vs required {rhs:e})")]
    Window { check: String, lhs: f64, rhs: f64 },

    #[error("cross term has non-negligible imaginary part {imag:e}")]
    Asymmetry { imag: f64 },

    #[error("grid size {0} is below 2")]
    Grid(usize),

    #[error("form error: {0}")]
    Form(String),

    #[error("negative score {0} passed where nonnegative values are required")]
    Negative(f64),

    #[error("empty input")]
    Empty,

    #[error("data error: {0}")]
    Data(String),

    #[error("tail not negligible at horizon {horizon:e}: envelope {envelope:e} vs sup {sup:e}")]
    Horizon { horizon: f64, envelope: f64, sup: f64 },

    #[error("oscillating term present (alpha = {alpha}); evaluation-witness form is unavailable")]
    Osc { alpha: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a certificate hypothesis (as opposed to bad input).
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::Window { .. }
                | Error::Delta { .. }
                | Error::Form(_)
                | Error::Regime(_)
                | Error::Osc { .. }
                | Error::Degenerate { .. }
                | Error::Singular
                | Error::Horizon { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
