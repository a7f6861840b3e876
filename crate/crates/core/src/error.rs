use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("numerical consistency: {0}")]
    Numerical(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("input inconsistency: {0}")]
    InputInconsistency(String),

    #[error("particle-number symmetry violated: element ({row}, {col}) = {magnitude:e} couples sectors")]
    SymmetryViolation { row: usize, col: usize, magnitude: f64 },

    #[error("Fock truncation: {0}")]
    Truncation(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("optimization did not converge: {0}")]
    Convergence(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
