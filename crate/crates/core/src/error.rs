use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Number of settings per plane must be at least two.
    #[error("N must be >= 2, got {0}")]
    InvalidOrder(usize),

    #[error("{name} = {value} is outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("unphysical two-qubit state: {0}")]
    Unphysical(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn range(name: &'static str, value: f64, lo: f64, hi: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            lo,
            hi,
        }
    }

    /// True for errors caused by malformed documents (JSON/CSV content).
    pub fn is_schema(&self) -> bool {
        matches!(self, Error::Schema(_) | Error::Json(_) | Error::Csv(_))
    }
}
