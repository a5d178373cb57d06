use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("epsilon {0} outside (0, 1/e)")]
    EpsilonDomain(f64),
    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,
    #[error("control direction {0} is zero")]
    ZeroControl(usize),
    #[error("scaling of coordinate {0} is infinite")]
    InfiniteScaling(usize),
    #[error("system is noise-defective (stuck at layer {0})")]
    NoiseDefective(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
