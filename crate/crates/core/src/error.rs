use thiserror::Error;

/// Errors raised by the solver library.
///
/// States and actions in messages are 1-based to match the external
/// numbering used by the JSON format and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("state {state} has an empty action set")]
    EmptyActionSet { state: usize },

    #[error("transition row for state {state}, action {action} sums to {sum} (must be 1 within 1e-12)")]
    BadRow { state: usize, action: usize, sum: f64 },

    #[error("transition p({target}|{state},{action}) = {value} is negative or not finite")]
    NegativeProbability {
        state: usize,
        action: usize,
        target: usize,
        value: f64,
    },

    #[error("reward r({state},{action}) = {value} is not finite")]
    NonFiniteReward { state: usize, action: usize, value: f64 },

    #[error("malformed MDP description: {0}")]
    Shape(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("value vector entry {index} is not finite")]
    NonFiniteValue { index: usize },

    #[error("policy selects action {action} at state {state}, which has only {available} actions")]
    InvalidPolicy {
        state: usize,
        action: usize,
        available: usize,
    },

    #[error("invalid discount factor {0}")]
    InvalidAlpha(f64),

    #[error("invalid epsilon {0} (must be finite and > 0)")]
    InvalidEpsilon(f64),

    #[error("invalid ergodicity coefficient {0}")]
    InvalidGamma(f64),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("iteration cap of {cap} exceeded")]
    IterationCapExceeded { cap: u64 },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("alpha = 0.5 is the switching point: both policies are optimal")]
    BoundaryAlpha,

    #[error("singular linear system")]
    Singular,

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
