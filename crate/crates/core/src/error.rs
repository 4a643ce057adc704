use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("expected a unit quaternion, got norm {norm}")]
    NonUnit { norm: f64 },

    #[error("nematic average is degenerate (spectral gap {gap:e})")]
    DegenerateAverage { gap: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("non-finite state at step {step}")]
    NonFinite { step: u64 },

    #[error("matrix has non-positive determinant {det:e}")]
    NonPositiveDeterminant { det: f64 },

    #[error("periodic attitude field has an odd number of sign flips around the loop")]
    TopologicalDefect,

    #[error("linear system is singular")]
    Singular,
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
