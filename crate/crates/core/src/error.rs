use thiserror::Error;

/// Errors raised by the aggregation engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A reference to a question or forecaster that does not exist.
    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    /// Nothing is visible yet at the requested aggregation time.
    #[error("no forecasts visible for question `{0}`")]
    NoForecasts(String),

    /// A statistic is undefined for the given input.
    #[error("undefined statistic: {0}")]
    Undefined(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
