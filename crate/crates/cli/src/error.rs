use mop_core::MopError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Invalid configuration; `path` names the offending field.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("data error: {0}")]
    Data(MopError),
    #[error("data error in {}: {source}", path.display())]
    DataFile {
        path: std::path::PathBuf,
        #[source]
        source: MopError,
    },
    #[error("dimension mismatch: model expects columns {expected:?}, points file has {found:?}")]
    DimensionMismatch { expected: Vec<String>, found: Vec<String> },
    #[error("no feasible model for response `{response}`:\n  {}", reasons.join("\n  "))]
    NoFeasibleModel { response: String, reasons: Vec<String> },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    /// Attaches the offending file to a data error.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            CliError::Data(source) => CliError::DataFile { path: path.to_path_buf(), source },
            e => e,
        }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    /// Process exit status for this error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Data(_) | CliError::DataFile { .. } | CliError::DimensionMismatch { .. } => 3,
            CliError::NoFeasibleModel { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<MopError> for CliError {
    fn from(e: MopError) -> Self {
        CliError::Data(e)
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
