use thiserror::Error;

#[derive(Debug, Error)]
pub enum HblError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("flow stalled: {0}")]
    Stall(String),

    #[error("verification failure: {0}")]
    SuiteFailure(String),

    #[error("snapshot format error: {0}")]
    Snapshot(String),
}

pub type Result<T> = std::result::Result<T, HblError>;
