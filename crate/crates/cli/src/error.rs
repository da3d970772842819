use std::path::Path;
use std::process::ExitCode;

use thiserror::Error;

/// Failure of a subcommand. Usage and configuration problems exit with 2, faults met while
/// running exit with 1.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) | CliError::Config(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }

    pub fn config(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{context}: {err}"))
    }

    pub fn runtime(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Runtime(format!("{context}: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Opens an input file; a missing or unreadable input is a configuration error.
pub fn open_input(path: &Path) -> CliResult<std::io::BufReader<std::fs::File>> {
    std::fs::File::open(path).map(std::io::BufReader::new).map_err(|e| CliError::config(path.display(), e))
}

pub fn read_input(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(path.display(), e))
}

pub fn create_output(path: &Path) -> CliResult<std::io::BufWriter<std::fs::File>> {
    std::fs::File::create(path).map(std::io::BufWriter::new).map_err(|e| CliError::runtime(path.display(), e))
}
