use thiserror::Error;

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("empty input: {0}")]
    Empty(String),

    #[error("paired samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("need at least {min} pairs, got {got}")]
    TooFewPairs { min: usize, got: usize },

    #[error("every paired difference is zero; the test is undefined")]
    AllZero,

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] teachkit_core::CoreError),

    #[error(transparent)]
    Student(#[from] teachkit_student::StudentError),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub fn stage<E>(stage: &'static str) -> impl FnOnce(E) -> Self
    where
        E: std::error::Error + Send + Sync + 'static,
    {
        move |e| HarnessError::Stage {
            stage,
            source: Box::new(e),
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
