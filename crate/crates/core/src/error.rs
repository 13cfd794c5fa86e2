use thiserror::Error;

use crate::params::BsKind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates one of its invariants.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: String, reason: String },

    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of budget before reaching the tolerance.
    #[error(
        "quadrature did not converge: estimate {estimate:e}, error {error:e} > tolerance {tolerance:e} after {evaluations} evaluations"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        tolerance: f64,
        evaluations: usize,
    },

    /// An internal identity that must hold analytically was numerically violated.
    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("no {0:?} base station can serve at this distance")]
    NoServer(BsKind),
}

impl Error {
    pub(crate) fn param(field: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}
