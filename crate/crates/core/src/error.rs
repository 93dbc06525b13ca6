use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A value violates the invariant of the named field.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("generation failed for distribution `{name}`: {reason}")]
    Generation { name: String, reason: String },

    #[error("numerical failure in {stage}: {reason}")]
    Numerical { stage: String, reason: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("{path}: line {line}: {reason}")]
    Csv { path: String, line: u64, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn numerical(stage: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Numerical {
            stage: stage.into(),
            reason: reason.into(),
        }
    }
}
