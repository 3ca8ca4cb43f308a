use thiserror::Error;

use crate::construct::TrialReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid order {0}: n must be odd and at least 3")]
    InvalidGrid(u64),

    #[error("residue {residue} is not an admissible atom on the grid of order {n}")]
    InvalidAtom { residue: u64, n: u64 },

    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("malformed measure: {0}")]
    Malformed(String),

    #[error("transform output {value} at index {index} is too far from an integer to round safely")]
    RoundingUnsafe { index: usize, value: f64 },

    #[error("{points} points requested on a grid of order {n}; need points < n")]
    TooManyPoints { points: u64, n: u64 },

    #[error("invalid construction parameters: {0}")]
    InvalidParams(String),

    #[error("no trial passed after {} attempts (best max deviation {})", .0.attempts_used, .0.max_deviation)]
    ExhaustedAttempts(Box<TrialReport>),

    #[error("set is empty")]
    EmptySet,

    #[error("set is not closed under negation: {0} has no mirror point")]
    NotSymmetric(String),

    #[error("outside the hypotheses of the binomial tail bound: {0}")]
    OutOfHypothesis(String),

    #[error("variance proxy must be positive, got {0}")]
    InvalidVariance(f64),

    #[error("multiplicity cap tripped at step {0}")]
    CapTripped(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
