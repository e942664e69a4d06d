use std::path::PathBuf;

use crate::embedding::ValidationReport;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("format error in {context}: {message}")]
    Format { context: String, message: String },

    #[error("invalid embedding: {0}")]
    InvalidEmbedding(ValidationReport),

    #[error("no embedding found after {tries} tries")]
    EmbeddingNotFound { tries: usize },

    #[error("{what} needs {needed} spins, enumeration is capped at {cap}")]
    TooLarge {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("io error on {path}: {source}")]
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
    /// Stable machine-readable name of the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Argument(_) => "argument",
            Error::Format { .. } => "format",
            Error::InvalidEmbedding(_) => "invalid_embedding",
            Error::EmbeddingNotFound { .. } => "embedding_not_found",
            Error::TooLarge { .. } => "too_large",
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg(msg: impl Into<String>) -> Error {
    Error::Argument(msg.into())
}

pub(crate) fn format_err(context: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Format {
        context: context.into(),
        message: message.into(),
    }
}

pub(crate) fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn write_file(path: &std::path::Path, contents: &[u8]) -> Result<()> {
    // write-then-rename so a crashed run never leaves a half-written output
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents)
        .and_then(|_| std::fs::rename(&tmp, path))
        .map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
}
