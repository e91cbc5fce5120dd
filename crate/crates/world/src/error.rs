use thiserror::Error;

pub type Result<T> = std::result::Result<T, WorldError>;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("scene generation exhausted after {attempts} attempts; most frequent failure: {constraint}")]
    GenerationExhausted { attempts: usize, constraint: String },
    #[error("invalid push command: {0}")]
    Push(String),
    #[error("invalid throw kernel: {0}")]
    Kernel(String),
    #[error("time {t} s outside trajectory [0, {duration}] s")]
    TimeOutOfRange { t: f64, duration: f64 },
    #[error("grasp precondition violated: {0}")]
    GraspPrecondition(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
