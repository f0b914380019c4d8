use std::fmt;
use std::path::Path;

use inerton_lattice::Error;

/// Failure of one command, classified for the exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flag values or combinations.
    Usage(String),
    /// A file could not be read or written.
    File(String),
    /// Malformed model file.
    Config(String),
    /// The model is unphysical or fails validation.
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::File(_) => 1,
            CliError::Config(_) | CliError::Model(_) => 2,
        }
    }

    pub fn file(path: &Path, err: std::io::Error) -> CliError {
        CliError::File(format!("{}: {err}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::File(m) => write!(f, "file error: {m}"),
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Model(m) => write!(f, "model error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> CliError {
        let text = err.to_string();
        match err {
            Error::Config { .. } => CliError::Config(text),
            Error::Io(_) => CliError::File(text),
            Error::Validation(_)
            | Error::ImaginaryResidual { .. }
            | Error::PolarizationSingularity { .. }
            | Error::Asymmetry { .. }
            | Error::Instability { .. }
            | Error::AtWaveVector { .. }
            | Error::RealityViolation { .. } => CliError::Model(text),
            _ => CliError::Usage(text),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
