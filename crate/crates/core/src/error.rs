use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid jump law: {0}")]
    InvalidLaw(String),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("time {t} outside [0, {horizon}]")]
    OutOfDomain { t: f64, horizon: f64 },
    #[error("estimation failed: {0}")]
    Estimation(String),
    #[error("bound undefined: {0}")]
    UndefinedBound(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
