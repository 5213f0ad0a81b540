use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid permutation pair: {0}")]
    InvalidPermutation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{what} exceeded cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("inadmissible suspension data: {0}")]
    Inadmissible(String),

    #[error("eigensolver did not converge after {iterations} matrix-vector products (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } => 3,
            Error::Inadmissible(_) => 4,
            Error::NonConvergence { .. } => 5,
            Error::Parse(_)
            | Error::InvalidPermutation(_)
            | Error::Precondition(_)
            | Error::Config(_) => 2,
            Error::Overflow(_) | Error::Io(_) | Error::Csv(_) | Error::Json(_) => 1,
        }
    }
}
