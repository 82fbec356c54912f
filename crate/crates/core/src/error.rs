use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("outcome space has {size} outcomes, limit for this operation is {limit}")]
    SpaceTooLarge { size: usize, limit: usize },

    #[error("invalid outcome space: {0}")]
    InvalidSpace(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("event over {event} outcomes used with a space of {space} outcomes")]
    SpaceMismatch { event: usize, space: usize },

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error("nonconformity measure needs a non-empty bag")]
    EmptyBag,

    #[error("invalid contour: {0}")]
    InvalidContour(String),

    #[error("contour is identically zero")]
    AllZeroContour,

    #[error("contour is not consonant: its maximum is {max}, not 1")]
    NonConsonantContour { max: String },

    #[error("set function is not a belief function: mass of event {event:?} is {mass}")]
    NegativeMass { event: Vec<usize>, mass: String },

    #[error("invalid set function: {0}")]
    InvalidSetFunction(String),

    #[error("brute-force check over {space} outcomes with k = {k} exceeds the budget (K <= 6, k <= 4)")]
    BudgetExceeded { space: usize, k: usize },

    #[error("k must be at least 2, got {0}")]
    InvalidOrder(usize),

    #[error("tropical sum of an empty list")]
    EmptyList,

    #[error("expected a vector of dimension {expected}, got {actual}")]
    WrongDimension { expected: usize, actual: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("alpha = {0} is outside the admissible range")]
    AlphaOutOfRange(String),

    #[error("invalid Gamma parameters: shape {shape}, rate {rate}")]
    InvalidGamma { shape: f64, rate: f64 },

    #[error("negative count {0} in Poisson data")]
    NegativeCount(i64),

    #[error("truncated support holds mass {mass}, below 1 - 1e-10")]
    TruncationInsufficient { mass: f64 },

    #[error("event contains {value}, outside the truncated support 0..={max}")]
    OutsideSupport { value: u64, max: u64 },

    #[error("invalid process specification: {0}")]
    InvalidSpec(String),

    #[error("nonconformity measure {measure} cannot score {family} data")]
    IncompatibleMeasure { measure: String, family: String },

    #[error("{0}")]
    Json(String),

    #[error("output differs from the fixture: {0}")]
    FixtureMismatch(String),
}
