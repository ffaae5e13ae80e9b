use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("ground truth does not match the model: {0}")]
    KindMismatch(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("instance too large for exhaustive search: n = {n}, m = {m} (limit {limit})")]
    TooLarge { n: usize, m: usize, limit: usize },

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("instance format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
