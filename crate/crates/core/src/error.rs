use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes of matrices or vectors do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("invalid sparse matrix: {0}")]
    Matrix(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A file in a dataset directory (or an embedding file) could not be read.
    #[error("{}{}: {message}", path.display(), line.map(|l| format!(":{l}")).unwrap_or_default())]
    Load {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },

    #[error("XML parse error at byte {offset}: {message}")]
    Xml { offset: u64, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corpus has no tokens, vocabulary would be empty")]
    EmptyVocabulary,

    #[error("missing entities in embedding file ({count} total): {shown}")]
    MissingEntities { count: usize, shown: String },

    #[error("query {query}: {message}")]
    Query { query: usize, message: String },
}

impl Error {
    pub(crate) fn load(path: impl Into<PathBuf>, line: Option<usize>, message: impl Into<String>) -> Self {
        Error::Load {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
