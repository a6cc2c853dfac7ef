use thiserror::Error;

use crate::grid::Domain;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is out of range; `field` names the offender.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("memory budget exceeded: {required} bytes requested, budget is {budget} bytes")]
    MemoryBudget { required: u128, budget: u128 },

    #[error("expected a {expected:?}-domain function, got {got:?}")]
    Domain { expected: Domain, got: Domain },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("band limit violated: {0}")]
    BandLimit(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("sample {index}: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by user input rather than numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config { .. } | Error::MemoryBudget { .. } | Error::Parse(_) | Error::Io(_) => {
                true
            }
            Error::Sample { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
