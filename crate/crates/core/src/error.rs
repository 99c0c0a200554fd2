use thiserror::Error;

pub type Result<T, E = FodeError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FodeError {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent problem, grid or strategy configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("index {index} out of range (limit {limit})")]
    Index { index: usize, limit: usize },

    /// The right-hand side (or the state it produced) became non-finite.
    #[error("non-finite value at step {step} (t = {t}): {what}")]
    Step { step: usize, t: f64, what: String },

    /// A parallel strategy failed for a reason unrelated to the numerics.
    #[error("strategy error: {0}")]
    Strategy(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    /// Input outside the range in which an oracle is validated.
    #[error("out of validated range: {0}")]
    OutOfRange(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for FodeError {
    fn from(e: std::io::Error) -> Self {
        FodeError::Io(e.to_string())
    }
}

impl FodeError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        FodeError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        FodeError::Config(msg.into())
    }
}
