use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error("invalid dimensions {m}x{n}: both extents must be at least 1")]
    Dims { m: usize, n: usize },
    #[error("site ({0},{1}) is outside the admissible region")]
    Site(usize, usize),
    #[error("instance too large for exhaustive enumeration ({steps} > {limit} steps)")]
    TooLarge { steps: usize, limit: usize },
    #[error("insufficient data: {0}")]
    Data(String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
