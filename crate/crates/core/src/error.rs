use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("base not Hausdorff: {0}")]
    NotHausdorff(String),

    #[error("invalid base: {0}")]
    InvalidBase(String),

    #[error("level {level} is beyond the chain depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("zero is in every neighborhood")]
    ZeroSeparation,

    #[error("growth violation at n = {n}: f is not strictly increasing")]
    GrowthViolation { n: u64 },

    #[error("f is not evaluable at n = {n}")]
    NotEvaluable { n: u64 },

    #[error("empty tracking interval at n = {n}")]
    EmptyInterval { n: u64 },

    #[error("tracking interval at n = {n} contains 0, so no maximal level exists")]
    IntervalContainsZero { n: u64 },

    #[error("tracking interval at n = {n} has {width} points, above the scan limit {limit}")]
    IntervalTooWide { n: u64, width: String, limit: u64 },

    #[error("ratio must satisfy r > 1, got {0}")]
    RatioNotAboveOne(String),

    #[error("index {index} out of range (sequence has indices {first}..={last})")]
    IndexOutOfRange { index: u64, first: u64, last: u64 },

    #[error("zero denominator at n = {n}")]
    ZeroDenominator { n: u64 },

    #[error("sequence is not strictly increasing at n = {n}")]
    NotIncreasing { n: u64 },

    #[error("sequence must be positive at n = {n}")]
    NotPositive { n: u64 },

    #[error("g must be non-zero")]
    ZeroShift,

    #[error("element is not in H")]
    NotInH,

    #[error("fiber audit failed: {0}")]
    FiberAudit(String),

    #[error("window too large: {0}")]
    WindowTooLarge(String),

    #[error("modulus must be positive, got {0}")]
    NonPositiveModulus(String),

    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(String, String),

    #[error("not in H: {0} is not a multiple of {1}")]
    NotInSubgroup(String, String),

    #[error("invalid slot sequence: {0}")]
    InvalidSlots(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("config error in field `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
