use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("alpha must be < 1 or -inf, got {0}")]
    InvalidAlpha(String),

    #[error("parameter domain violation: {0}")]
    Domain(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error("conditioning on an event of probability zero: {0}")]
    ZeroProbability(String),

    #[error("the first Bernoulli parameter must equal 1, got {0}")]
    LeadingProbability(String),

    #[error("set is not upward closed: {0}")]
    NotUpwardClosed(String),

    #[error("singleton probability decreases from k={k} to k={}", k + 1)]
    MonotonicityViolation { n: usize, k: usize },

    #[error("layers are not adjacent: {0}")]
    NonAdjacentLayers(String),

    #[error("instance is infeasible: {0}")]
    Infeasible(String),

    #[error("state is outside the coupling support: {0}")]
    NotInSupport(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("state-space guard exceeded: {states} states requested, limit {limit}")]
    GuardExceeded { states: u128, limit: u128 },

    #[error("parse error: {0}")]
    Parse(String),
}
