use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("n must be at least 1")]
    ZeroDimension,
    #[error("theta must lie in (0, 1], got {0}")]
    InvalidTheta(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("{0} is undefined at theta = 1 because log(1 - theta) diverges")]
    UndefinedAtThetaOne(&'static str),
    #[error("inclusion-exclusion is limited to n <= {max}, got n = {n}; use the tail-sum method")]
    InclusionExclusionTooLarge { n: usize, max: usize },
    #[error("need at least {min} trials, got {got}")]
    TooFewTrials { min: u64, got: u64 },
    #[error("inverted range: p_min = {p_min} exceeds p_max = {p_max}")]
    InvertedRange { p_min: usize, p_max: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed instance dump: {0}")]
    MalformedDump(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
