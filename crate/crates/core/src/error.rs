use thiserror::Error;

/// Errors raised by the numerical kernels and model constructors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument fell outside the function's domain.
    #[error("{func}: {detail}")]
    Domain { func: &'static str, detail: String },

    /// A series hit its iteration cap before meeting the tolerance.
    #[error("{func}: series did not converge after {terms} terms (partial value {partial:e})")]
    NonConvergence {
        func: &'static str,
        partial: f64,
        terms: usize,
    },

    /// A model or simulation configuration is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            func,
            detail: detail.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
