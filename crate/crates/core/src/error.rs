use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("ingestion error in {}{}{}: {message}", path.display(), row_note(*row), column_note(column))]
    Ingestion {
        path: PathBuf,
        /// 1-based data row (header excluded); 0 for header problems.
        row: usize,
        column: Option<String>,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateData(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn row_note(row: usize) -> String {
    if row == 0 {
        " (header)".to_string()
    } else {
        format!(" row {row}")
    }
}

fn column_note(column: &Option<String>) -> String {
    column
        .as_ref()
        .map(|c| format!(" column {c}"))
        .unwrap_or_default()
}
