//! Certified approximate suprema of prepared power-log sums.

pub mod csvio;
pub mod error;
pub mod termalg;

pub use error::{Error, Result};
pub mod indep;
pub mod linalg;
pub mod options;
pub mod oracle;

pub use options::Options;
pub mod asymptotics;
pub mod balanced;
pub mod cli;
pub mod format;
pub mod oscillatory;
pub mod supremum;
pub mod unbalanced;
