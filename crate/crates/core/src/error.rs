use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("refinement level {requested} exceeds the cap {cap}")]
    CapExceeded { requested: u32, cap: u32 },
    #[error("tolerance {eps} not reachable at the refinement cap (best width {width})")]
    EpsUnachievable { eps: f64, width: f64 },
    #[error("undecided at refinement budget {level}")]
    Undecided { level: u32 },
    #[error("no hit before horizon {horizon}")]
    NotFound { horizon: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not reach tolerance: estimate {value}, error {error}")]
    Quadrature { value: f64, error: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("missing boundary value for square ({0}, {1})")]
    MissingBoundaryValue(i64, i64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
