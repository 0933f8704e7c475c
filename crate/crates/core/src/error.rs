use thiserror::Error;

/// Errors raised by rate evaluation, sampling, orbit computation and the
/// brute-force checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function being evaluated.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A value could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Exhaustive enumeration was requested past the configured limit.
    #[error("enumeration of {what} up to {requested} exceeds the limit {limit}")]
    EnumerationLimit {
        what: &'static str,
        requested: String,
        limit: u64,
    },

    /// An orbit was requested beyond its cap.
    #[error("orbit cap {cap} exceeded (requested index {requested})")]
    OrbitCap { cap: u64, requested: u64 },

    /// A map produced a NaN or infinite coordinate.
    #[error("non-finite coordinate produced at orbit step {step}")]
    NonFinite { step: u64 },

    /// A profile or scenario is missing a component an operation needs.
    #[error("missing component: {0}")]
    Missing(&'static str),

    /// A fixed-ball certificate or scenario failed validation.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
