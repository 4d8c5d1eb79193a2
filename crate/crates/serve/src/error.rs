use thiserror::Error;

pub type Result<T, E = ServeError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("unknown setting `{0}`")]
    UnknownSetting(String),

    #[error("no assets loaded for env `{0}`")]
    UnknownEnv(String),

    #[error("username must be 1-64 characters of [A-Za-z0-9_-], got `{0}`")]
    InvalidUsername(String),

    #[error("user `{0}` already has an active session")]
    DuplicateSession(String),

    #[error("session `{0}` already exists")]
    SessionExists(String),

    #[error("no session `{0}`")]
    NoSession(String),

    #[error("session is in phase {found}, expected {expected}")]
    WrongPhase { expected: &'static str, found: &'static str },

    #[error("rating {0} outside 1..=7")]
    Rating(u8),

    #[error("session `{0}` is already finalized")]
    AlreadyFinalized(String),

    #[error("recovering `{path}`: {message}")]
    Recovery { path: String, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] teachkit_core::CoreError),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl ServeError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        ServeError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
