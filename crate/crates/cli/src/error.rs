use std::fmt;
use std::path::Path;

/// A failure tagged with the pipeline stage it happened in, plus an optional
/// hint telling the operator how to fix it.
#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub message: String,
    pub hint: Option<String>,
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn new(stage: &'static str, message: impl fmt::Display) -> Self {
        CliError {
            stage,
            message: message.to_string(),
            hint: None,
        }
    }

    pub fn hint(mut self, hint: impl Into<String>) -> Self {
        self.hint = Some(hint.into());
        self
    }

    /// Wraps any error as a stage failure.
    pub fn at<E: fmt::Display>(stage: &'static str) -> impl FnOnce(E) -> Self {
        move |e| CliError::new(stage, e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.stage, self.message)?;
        if let Some(h) = &self.hint {
            write!(f, "\n  hint: {h}")?;
        }
        Ok(())
    }
}

impl std::error::Error for CliError {}

/// Fails with a remediation hint when an input produced by an earlier stage
/// is missing.
pub fn require(stage: &'static str, path: &Path, produced_by: &str) -> Result<()> {
    if path.exists() {
        return Ok(());
    }
    Err(CliError::new(stage, format!("missing input {}", path.display()))
        .hint(format!("run `teachkit {produced_by}` first or pass the path explicitly")))
}
