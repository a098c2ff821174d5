use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown point id `{0}`")]
    UnknownPoint(String),
    #[error("graph is disconnected; components: {0:?}")]
    Disconnected(Vec<Vec<String>>),
    #[error("unknown generator in word `{0}`")]
    UnknownGenerator(String),
    #[error("window too small: {0}")]
    WindowExhausted(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("unsatisfiable: {0}")]
    Unsatisfiable(String),
    #[error("unsound ledger: {0}")]
    Unsound(String),
    #[error("bound violated: {0}")]
    BoundViolated(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
