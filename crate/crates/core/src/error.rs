use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} cells, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("observed counts sum to {actual}, model sample size is {expected}")]
    SampleSize { expected: u64, actual: u64 },

    #[error("invalid null model: {0}")]
    Model(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("exact enumeration needs {count} compositions, budget is {budget}")]
    Capacity { count: u128, budget: u128 },

    #[error("cannot bracket target level {target}: {reason}")]
    Bracket { target: f64, reason: String },

    #[error("no study entry for alternative `{alternative}` at n = {n}")]
    Lookup { alternative: String, n: u64 },

    #[error("{context}: {source}")]
    Cell {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Wraps an error with the study grid cell it came from.
    pub fn in_cell(self, context: impl Into<String>) -> Self {
        Error::Cell {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Capacity and bracket failures, possibly wrapped in grid-cell context.
    pub fn is_capacity_or_bracket(&self) -> bool {
        match self {
            Error::Capacity { .. } | Error::Bracket { .. } => true,
            Error::Cell { source, .. } => source.is_capacity_or_bracket(),
            _ => false,
        }
    }
}
