use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The field parameters fall outside every regime in which the
    /// explicit formulas are defined.
    #[error("{quantity} = {value} violates {quantity} < {bound} required for N = {dim}")]
    InvalidRegime {
        quantity: &'static str,
        value: f64,
        bound: f64,
        dim: usize,
    },

    /// An adaptive integration exhausted its budget before reaching the
    /// requested tolerance.
    #[error(
        "integration did not converge: estimated error {estimate:e} exceeds tolerance {tolerance:e} \
         after {evaluations} evaluations"
    )]
    Convergence {
        estimate: f64,
        tolerance: f64,
        evaluations: usize,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
