use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the command-line front end. Each class has its own
/// exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unknown set `{0}`")]
    UnknownSet(String),
    #[error("seed mismatch: {0}")]
    SeedMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {msg}")]
    Corrupt { path: PathBuf, msg: String },
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Parse(_) | CliError::BadParameter(_) => 2,
            CliError::UnknownSet(_) => 3,
            CliError::SeedMismatch(_) => 4,
            CliError::Io { .. } | CliError::Corrupt { .. } => 5,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

impl From<mrset::Error> for CliError {
    fn from(e: mrset::Error) -> CliError {
        use mrset::Error as E;
        match e {
            E::Parse(p) => CliError::Parse(p.to_string()),
            E::UnknownSet(n) => CliError::UnknownSet(n),
            E::SeedMismatch(m) => CliError::SeedMismatch(m),
            E::Format(m) => CliError::Corrupt {
                path: PathBuf::new(),
                msg: m,
            },
            other => CliError::BadParameter(other.to_string()),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
