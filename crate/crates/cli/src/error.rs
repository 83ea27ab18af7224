use std::path::Path;

/// Failure of a command, mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl CliError {
    pub const EXIT_IO: i32 = 1;
    pub const EXIT_PARSE: i32 = 2;
    pub const EXIT_CONFIG: i32 = 3;
    pub const EXIT_NUMERICAL: i32 = 4;

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => Self::EXIT_IO,
            CliError::Parse { .. } => Self::EXIT_PARSE,
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Numerical(_) => Self::EXIT_NUMERICAL,
        }
    }

    pub fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }

    pub fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        CliError::Parse {
            path: path.display().to_string(),
            line,
            message: message.into(),
        }
    }
}

impl From<poisson_dict::Error> for CliError {
    fn from(err: poisson_dict::Error) -> Self {
        use poisson_dict::Error as E;
        match err {
            E::Overflow { .. } | E::NoConvergence { .. } | E::Divergence { .. } => {
                CliError::Numerical(err.to_string())
            }
            _ => CliError::Config(err.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
