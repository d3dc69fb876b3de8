use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A kernel was evaluated where it has a pole.
    #[error("kernel `{kernel}` is singular at t = {t}")]
    Singular { kernel: String, t: f64 },

    /// Two distinct points coincide (or are antipodal) under a kernel that is singular there.
    #[error("kernel `{kernel}` is singular on the pair ({i}, {j})")]
    SingularPair { kernel: String, i: usize, j: usize },

    /// The request is well-formed but outside what the implementation supports.
    #[error("unsupported: {0}")]
    Capability(String),

    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("validation failed: {0}")]
    Validation(String),

    /// The interpolation system is singular or numerically too ill-conditioned to trust.
    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics (poles, conditioning) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. }
                | Error::SingularPair { .. }
                | Error::Conditioning { .. }
                | Error::Overflow(_)
                | Error::Configuration(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
