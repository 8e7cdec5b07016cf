use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid parameters: {0}")]
    Param(String),
    #[error("simulation state became non-finite at t = {t:.3} s")]
    NonFinite { t: f64 },
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("sweep exhausted: {0}")]
    SweepExhausted(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
