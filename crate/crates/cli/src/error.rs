use std::fmt;

use maad_core::CoreError;
use maad_datagen::DatagenError;
use maad_dataio::DataError;
use maad_eval::EvalError;
use maad_models::ModelError;
use maad_oneclass::OneClassError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_RUNTIME: u8 = 4;

/// A failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_USAGE, error: anyhow::anyhow!("{msg}") }
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        CliError { code: EXIT_RUNTIME, error: anyhow::anyhow!("{msg}") }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        DataError::Io { path: path.to_path_buf(), source }.into()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Exit code of a library error.
pub trait ExitCode {
    fn exit_code(&self) -> u8;
}

impl ExitCode for DataError {
    fn exit_code(&self) -> u8 {
        match self {
            DataError::Io { .. } | DataError::Parse { .. } | DataError::Schema { .. } | DataError::Grid { .. } | DataError::Json { .. } => {
                EXIT_IO
            }
            DataError::VersionMismatch { .. } | DataError::ArchitectureMismatch { .. } | DataError::Core(_) => EXIT_RUNTIME,
        }
    }
}

impl ExitCode for DatagenError {
    fn exit_code(&self) -> u8 {
        match self {
            DatagenError::Config(_) => EXIT_USAGE,
            DatagenError::Data(e) => e.exit_code(),
            _ => EXIT_RUNTIME,
        }
    }
}

impl ExitCode for ModelError {
    fn exit_code(&self) -> u8 {
        match self {
            ModelError::NotTrainable(_) | ModelError::InvalidPairing { .. } | ModelError::Unknown { .. } | ModelError::BadConfig(_) => {
                EXIT_USAGE
            }
            ModelError::Data(e) => e.exit_code(),
            _ => EXIT_RUNTIME,
        }
    }
}

impl ExitCode for EvalError {
    fn exit_code(&self) -> u8 {
        match self {
            EvalError::MissingLabel { .. } | EvalError::MissingLabels { .. } | EvalError::NoScores(_) => EXIT_USAGE,
            EvalError::Data(e) => e.exit_code(),
            EvalError::Model(e) => e.exit_code(),
            _ => EXIT_RUNTIME,
        }
    }
}

impl ExitCode for OneClassError {
    fn exit_code(&self) -> u8 {
        match self {
            OneClassError::InvalidParameter(_) | OneClassError::DegenerateLabels { .. } => EXIT_USAGE,
            OneClassError::Data(e) => e.exit_code(),
            OneClassError::Model(e) => e.exit_code(),
            OneClassError::Eval(e) => e.exit_code(),
            _ => EXIT_RUNTIME,
        }
    }
}

macro_rules! from_library_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError { code: e.exit_code(), error: e.into() }
            }
        }
    )*};
}

from_library_error!(DataError, DatagenError, ModelError, EvalError, OneClassError);

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError { code: EXIT_RUNTIME, error: e.into() }
    }
}
