use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid is not strictly increasing at index {index}")]
    NonMonotoneGrid { index: usize },

    #[error("grid is not dyadic: {0}")]
    NonDyadicGrid(String),

    #[error("value at index {index} must be finite and positive, got {value}")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("jump mark at index {index} has zero size")]
    ZeroJump { index: usize },

    #[error("jump mark index {index} is invalid: {reason}")]
    InvalidJumpMark { index: usize, reason: &'static str },

    #[error("time {t} is not on the grid (or is not admissible here)")]
    OffGrid { t: f64 },

    #[error("level {requested} exceeds the available grid level {available}")]
    LevelTooFine { requested: u32, available: u32 },

    #[error("trajectories do not share a grid")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {constraint}")]
    InvalidParameter { name: String, constraint: String },

    #[error("non-finite evaluation: {0}")]
    NonFinite(String),

    #[error("missing volatility metadata: {0}")]
    MissingVolatility(&'static str),

    #[error("trajectory has jumps; {0}")]
    JumpsNotAllowed(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("recipe is infeasible: {0}")]
    InfeasibleRecipe(String),

    #[error("recipe emitted a trajectory outside its neighborhood: {0}")]
    RecipeViolation(String),

    #[error("martingale precheck failed: {0}")]
    MartingalePrecheck(String),

    #[error("config hash mismatch: report has {recorded}, current config hashes to {current}")]
    HashMismatch { recorded: String, current: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            constraint: constraint.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
