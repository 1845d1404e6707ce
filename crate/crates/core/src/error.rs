use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid flow parameter: {0}")]
    InvalidParams(String),

    #[error("level {level} needs {nodes} grid nodes, over the budget of {budget}")]
    LevelTooDeep {
        level: u32,
        nodes: u128,
        budget: u64,
    },

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("interval of length {length:.3e} is under-resolved at level {level} (needs at least {min_length:.3e})")]
    UnderResolved {
        length: f64,
        level: u32,
        min_length: f64,
    },

    #[error("phase error t*|k|*bound = {phase:.3e} exceeds tolerance {tol:.1e}; use level >= {min_level}")]
    ResolutionGuard { phase: f64, tol: f64, min_level: u32 },

    #[error("window half-width {delta:.3e} is under-resolved at level {level}; use level >= {min_level}")]
    WindowUnderResolved {
        delta: f64,
        level: u32,
        min_level: u32,
    },

    #[error("zero x-frequency mode is not allowed (scalar must have zero x-average)")]
    ZeroMode,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("fit needs at least 4 points in the window, got {0}")]
    TooFewPoints(usize),

    #[error("non-positive value {value} at index {index} cannot enter a log-log fit")]
    NonPositive { index: usize, value: f64 },

    #[error("{path}: {source}")]
    Config {
        path: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
