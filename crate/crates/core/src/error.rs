use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("solver did not converge after {iterations} iterations (max residual {max_residual:.3e})")]
    NonConvergence {
        iterations: usize,
        max_residual: f64,
        residuals: Vec<f64>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("phonon truncation guard violated: amplitude {amplitude:.3e} at n = {n_max}")]
    Truncation { n_max: usize, amplitude: f64 },

    #[error("ion index {index} out of range for {n_ions} ions")]
    IonIndex { index: usize, n_ions: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("config line {line}: {message}")]
    ConfigSyntax { line: usize, message: String },

    #[error("config key `{key}`: {message}")]
    ConfigValue { key: String, message: String },

    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Physics,
    NonConvergence,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Physics => 3,
            ErrorKind::NonConvergence => 4,
        }
    }
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::ConfigSyntax { .. } | Error::ConfigValue { .. } | Error::Script { .. } => {
                ErrorKind::Config
            }
            Error::NonConvergence { .. } => ErrorKind::NonConvergence,
            Error::Context { source, .. } => source.kind(),
            _ => ErrorKind::Physics,
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Wraps the error with the report section (or other context) it came from.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
