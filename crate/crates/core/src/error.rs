use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("search for {query:?} failed: {message}")]
    Transport {
        query: String,
        message: String,
        retryable: bool,
    },

    #[error("page not found in corpus: {url}")]
    MissingPage { url: String },

    #[error("malformed fixture entry {entry}: {message}")]
    FixtureParse { entry: String, message: String },

    #[error("fixture references {} missing page(s): {}", urls.len(), urls.join(", "))]
    DanglingUrls { urls: Vec<String> },

    #[error("position {pos} out of range for document of {len} characters")]
    OutOfRange { pos: usize, len: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Whether retrying the same call may succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::Transport {
                retryable: true,
                ..
            }
        )
    }
}
