use thiserror::Error;

/// Errors produced by estimation, diagnostics and the panel pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The data are structurally valid but carry no usable information
    /// (constant series, zero variance, empty input).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// An estimation routine could not produce a usable fit.
    #[error("fit failure: {0}")]
    FitFailure(String),

    /// A pipeline stage failed while processing a specific panel series.
    #[error("series '{label}': {source}")]
    Pipeline {
        label: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub(crate) fn fit(msg: impl Into<String>) -> Self {
        Error::FitFailure(msg.into())
    }

    pub(crate) fn for_series(self, label: &str) -> Self {
        Error::Pipeline {
            label: label.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
