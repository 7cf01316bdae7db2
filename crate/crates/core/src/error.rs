use thiserror::Error;

/// Everything that can go wrong while building or analysing a finite model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed rational `{0}` (expected `num/den`)")]
    MalformedRational(String),

    #[error("invalid probability space: {0}")]
    InvalidSpace(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("filtration does not refine from t={t} to t={}", t + 1)]
    NotRefining { t: usize },

    #[error("horizon mismatch: expected {expected}, found {found}")]
    HorizonMismatch { expected: usize, found: usize },

    #[error("outcome count mismatch: expected {expected}, found {found}")]
    OutcomeMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("process is not adapted at t={t} (outcome {outcome})")]
    NotAdapted { t: usize, outcome: usize },

    #[error("process is not predictable at t={t} (outcome {outcome})")]
    NotPredictable { t: usize, outcome: usize },

    #[error("process is not nondecreasing at t={t} (outcome {outcome})")]
    NonMonotone { t: usize, outcome: usize },

    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("random time is infinite on outcome {outcome}")]
    InfiniteTau { outcome: usize },

    #[error("random time is not honest at t={t} (atom {atom:?})")]
    NotHonest { t: usize, atom: Vec<usize> },

    #[error("Z at tau is not below one on outcome {outcome}")]
    ZTauNotBelowOne { outcome: usize },

    #[error("stochastic exponential factor is not positive at t={t} (outcome {outcome})")]
    PositivityFailure { t: usize, outcome: usize },

    #[error("invalid predictable time: {0}")]
    InvalidPredictableTime(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency failure: {0}")]
    Internal(String),

    #[error("model generation failed: {0}")]
    Generation(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
