use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root finder failed to converge at s = {s:e} after {iterations} iterations")]
    RootFinding { s: f64, iterations: usize },

    #[error("quadrature did not converge for {what}: error estimate {estimate:e} after {panels} panels")]
    Quadrature {
        what: &'static str,
        estimate: f64,
        panels: usize,
    },

    #[error(
        "evaluation budget of {budget} exhausted: partial value {partial}, error estimate {estimate:e}, tolerance {tol:e}"
    )]
    Budget {
        budget: usize,
        partial: Complex64,
        estimate: f64,
        tol: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
