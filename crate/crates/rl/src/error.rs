use synergy_env::EnvError;
use synergy_nn::NnError;

#[derive(Debug, thiserror::Error)]
pub enum RlError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("environment failed at step {step}: {source}")]
    EnvStep { step: u64, source: EnvError },
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("cannot sample {requested} transitions from a buffer holding {size}")]
    InsufficientData { requested: usize, size: usize },
    #[error("non-finite {what} at update {update}: {detail}")]
    NonFinite {
        what: &'static str,
        update: u64,
        detail: String,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, RlError>;

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(RlError::Dimension {
            context,
            expected,
            actual,
        })
    }
}
