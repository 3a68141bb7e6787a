use thiserror::Error;

use crate::model::CaseOrdering;

/// Errors raised by the overlap-time library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rate must be positive, got {name} = {value}")]
    NonPositiveRate { name: &'static str, value: f64 },

    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("threshold {name} must be finite and >= 0, got {value}")]
    InvalidThreshold { name: &'static str, value: f64 },

    #[error("geometry (j={j}, k={k}, m-n={delta}) has coinciding pair endpoints and matches none of the nine orderings")]
    UnclassifiableGeometry { j: u32, k: u32, delta: i64 },

    #[error("(s-1)! overflows f64 for s = {s}; use the regularized form")]
    Overflow { s: u32 },

    #[error("quadrant probability {name} = {value} outside [0, 1]")]
    InternalInconsistency { name: &'static str, value: f64 },

    #[error("formula for case {0:?} is ledgered as disputed and strict mode is on")]
    FormulaUnderReview(CaseOrdering),

    #[error("index {index} out of range (trajectory has {len} entries)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("no event decomposition for {0}")]
    UnsupportedEvent(String),

    #[error("adaptive quadrature did not reach tolerance {tol:e} (estimated error {err:e})")]
    QuadratureNonConvergence { tol: f64, err: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
