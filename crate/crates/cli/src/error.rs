use thiserror::Error;

/// Process exit codes.
pub mod code {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 2;
    pub const DATA: u8 = 3;
    pub const OBJECTIVE: u8 = 4;
    pub const VERIFICATION: u8 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Core(#[from] zovr_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{failed} of {total} checks failed")]
    Verification { failed: usize, total: usize },
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => code::USAGE,
            CliError::Data(_) | CliError::Io { .. } => code::DATA,
            CliError::Verification { .. } => code::VERIFICATION,
            CliError::Core(e) if e.is_objective_failure() => code::OBJECTIVE,
            CliError::Core(e) if e.is_parse_failure() => code::DATA,
            CliError::Core(_) => code::USAGE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
