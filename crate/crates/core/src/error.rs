use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("knapsack too large for exact DP: {cells} table cells exceed the budget of {limit}")]
    TooLarge { cells: u128, limit: u128 },

    #[error("brute force limited to {limit} items, got {items}")]
    TooManyItems { items: usize, limit: usize },

    #[error("quadrature did not converge: error estimate {estimate:e} above tolerance {tolerance:e} at {nodes} nodes")]
    NonConvergence {
        estimate: f64,
        tolerance: f64,
        nodes: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(String),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
