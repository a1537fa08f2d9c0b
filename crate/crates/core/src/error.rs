use thiserror::Error;

use crate::cauchy::Violation;

pub type Result<T, E = FlowError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid parallel Cauchy pair: {}", format_violations(.0))]
    InvalidPair(Vec<Violation>),

    #[error("t = {t} is at or beyond the lifespan boundary of the flow")]
    SingularTime { t: f64 },

    #[error("t = {t} lies outside the lapse table domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("operation not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("adaptive step underflow at t = {t} (step {step:e})")]
    StepFailure { t: f64, step: f64 },

    #[error("invalid lapse profile: {0}")]
    InvalidLapse(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
