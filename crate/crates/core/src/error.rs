use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A valid input the model does not cover (e.g. elevation below 5°).
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("{}line {line}: {message}", file.as_ref().map(|p| format!("{}, ", p.display())).unwrap_or_default())]
    Parse {
        file: Option<PathBuf>,
        line: u64,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    /// Inconsistent or missing configuration. `field` names the offending key.
    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("undefined comparison: {0}")]
    UndefinedComparison(String),

    #[error("unknown report format `{0}` (expected csv, json or table)")]
    UnknownFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: msg.into(),
        }
    }

    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            file: None,
            line,
            message: msg.into(),
        }
    }

    /// Prefix a parse error with the file it came from.
    pub fn in_file(self, path: &std::path::Path) -> Self {
        match self {
            Error::Parse { line, message, .. } => Error::Parse {
                file: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}
