/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Malformed input file; `line` is 1-based.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// The same frame index appeared twice in one sequence file.
    #[error("{path}: duplicate frame index {frame}")]
    DuplicateFrame { path: String, frame: u64 },

    /// Structurally valid input that violates a pipeline contract.
    #[error("invalid input: {0}")]
    Validation(String),

    /// A pipeline stage failed; names the stage around the underlying error.
    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Name of the failing pipeline stage, when known.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    /// True when the root cause is a missing file or directory.
    pub fn is_not_found(&self) -> bool {
        match self {
            Error::Io(e) => e.kind() == std::io::ErrorKind::NotFound,
            Error::Stage { source, .. } => source.is_not_found(),
            _ => false,
        }
    }
}
