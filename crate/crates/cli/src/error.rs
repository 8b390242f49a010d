use discrete_ito::dif::DifError;
use discrete_ito::fdsolver::FdError;
use discrete_ito::montecarlo::McError;
use discrete_ito::scheme::SchemeError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    /// A bad key or value; names the key.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },
    /// A bad invocation not tied to one key (unknown preset, unreadable file).
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(key: &str, message: impl Into<String>) -> Self {
        CliError::Config { key: key.to_string(), message: message.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Budget(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SchemeError> for CliError {
    fn from(e: SchemeError) -> Self {
        match e {
            SchemeError::ExplosionGuard { .. }
            | SchemeError::ResolutionTooFine(_)
            | SchemeError::QmcDimension { .. }
            | SchemeError::QmcPoints { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<FdError> for CliError {
    fn from(e: FdError) -> Self {
        match e {
            FdError::NodeBudgetExceeded { .. } => CliError::Budget(e.to_string()),
            FdError::Scheme(inner) => inner.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::NoiseDominated { .. } => CliError::Budget(e.to_string()),
            McError::Scheme(inner) => inner.into(),
            McError::Solver(inner) => inner.into(),
            McError::ZeroSamples | McError::TooFewSamples { .. } => CliError::config("samples", e.to_string()),
            McError::TooFewRandomizations(_) => CliError::config("randomizations", e.to_string()),
            McError::InvalidGrid(_) => CliError::config("grid", e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DifError> for CliError {
    fn from(e: DifError) -> Self {
        match e {
            DifError::TooManyOutcomes(_) | DifError::ResolutionTooFine(_) => CliError::Budget(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
