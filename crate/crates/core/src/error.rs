use thiserror::Error;

/// Broad failure class, used by front-ends to map errors onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Inputs violate a model or contract invariant.
    Validation,
    /// A numerical routine failed on otherwise valid inputs.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` must be strictly positive and finite, got {value}")]
    NonPositiveParameter { name: &'static str, value: f64 },

    #[error("Feller condition violated for the variance process: 2*kappa*theta = {lhs} < sigma^2 = {rhs}")]
    FellerVariance { lhs: f64, rhs: f64 },

    #[error(
        "Feller condition violated for the rate process: 2*alpha*beta = {lhs} < eta^2 = {rhs}"
    )]
    FellerRate { lhs: f64, rhs: f64 },

    #[error("correlation `{name}` = {value} lies outside [-1, 1]")]
    CorrelationOutOfRange { name: &'static str, value: f64 },

    #[error("correlation matrix is not positive semi-definite (determinant {determinant})")]
    CorrelationNotPsd { determinant: f64 },

    #[error("correlation matrix is not strictly positive definite: {0}")]
    CorrelationSingular(&'static str),

    #[error("invalid contract: {0}")]
    InvalidContract(String),

    #[error("time {t} outside the admissible range [0, {maturity}]")]
    InvalidTime { t: f64, maturity: f64 },

    #[error("moment approximation undefined: {0}")]
    MomentUndefined(String),

    #[error("ODE integration produced a non-finite state at tau = {tau}")]
    IntegrationFailure { tau: f64 },

    #[error("closed-form D is singular at tau = {tau} (|1 - g e^(b tau)| below tolerance)")]
    Singularity { tau: f64 },

    #[error("exponential overflow in strike assembly (exponent {exponent})")]
    Overflow { exponent: f64 },

    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidMcConfig(String),

    #[error("path {path} produced a non-finite state at observation {observation}")]
    NonFinitePath { path: usize, observation: usize },

    #[error("observation {index} is not strictly positive ({value})")]
    NonPositiveObservation { index: usize, value: f64 },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::IntegrationFailure { .. }
            | Error::Singularity { .. }
            | Error::Overflow { .. }
            | Error::NonFinitePath { .. } => ErrorClass::Numerical,
            _ => ErrorClass::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
