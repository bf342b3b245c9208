use thiserror::Error;

/// Errors produced by the minimization toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown observation `{0}`")]
    UnknownObservation(String),
    #[error("state index {0} is out of range")]
    StateOutOfRange(usize),
    #[error("observation index {0} is out of range")]
    ObservationOutOfRange(usize),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("state `{0}` has an empty output set")]
    EmptyOutputs(String),
    #[error("filter has no initial state")]
    NoInitialState,
    #[error("filter is not deterministic: {0}")]
    NotDeterministic(String),
    #[error("filter is multi-outputting but a single-outputting filter is required")]
    NotSingleOutput,
    #[error("state set must be nonempty")]
    EmptyStateSet,
    #[error("face limit of {0} exceeded while enumerating the compatibility complex")]
    FaceLimit(usize),
    #[error("limit of {0} exceeded while generating zipper constraints")]
    ZipperLimit(usize),
    #[error("limit of {0} exceeded while enumerating minimal non-faces")]
    NonFaceLimit(usize),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("cover violates zipper constraint {0}")]
    ZipperViolation(String),
    #[error(
        "paper-exact encoding enumerates all 2^{states} state subsets, above the cap of 2^{cap}; \
         use the minimal-nonface encoding instead"
    )]
    ExactEncodingTooLarge { states: usize, cap: usize },
    #[error("k must be at least 1")]
    InvalidK,
    #[error("solver error: {0}")]
    Solver(String),
    #[error("brute-force oracle is limited to {limit} states, filter has {states}")]
    OracleTooLarge { states: usize, limit: usize },
    #[error("too many output choices to enumerate ({0})")]
    TooManyChoices(usize),
    #[error("unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("postcondition failed: {0}")]
    Postcondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
