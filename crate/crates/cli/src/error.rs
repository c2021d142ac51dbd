use std::path::PathBuf;

use rma_core::{ColumnarError, SqlError};

#[derive(Debug, thiserror::Error)]
pub enum ShellError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    BadCsv { path: PathBuf, message: String },
    #[error("catalog {path}: {message}")]
    Catalog { path: PathBuf, message: String },
    #[error(transparent)]
    Columnar(#[from] ColumnarError),
    #[error(transparent)]
    Sql(#[from] SqlError),
    #[error("{0}")]
    Usage(String),
    #[error("unknown table '{0}'")]
    UnknownTable(String),
}

impl ShellError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ShellError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn bad_csv(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        ShellError::BadCsv {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn catalog(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        ShellError::Catalog {
            path: path.into(),
            message: message.into(),
        }
    }
}
