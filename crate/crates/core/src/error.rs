use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value violates an invariant of the owning type.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pattern integral {integral:e} over the screen is too small to normalize")]
    DegeneratePattern { integral: f64 },

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("sample x = {x:e} m lies outside the screen [-{x_max:e}, {x_max:e}]")]
    OutOfRangeSample { x: f64, x_max: f64 },

    #[error("sample-size search did not converge below {limit} samples")]
    NonConvergent { limit: u64 },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    /// True for errors caused by bad user input rather than a failing run.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::Parse { .. }
                | Error::Format { .. }
                | Error::TooFewSamples { .. }
                | Error::OutOfRangeSample { .. }
        )
    }
}
