use thiserror::Error;

/// Failures split by exit code: configuration problems are the caller's to
/// fix before anything runs, runtime failures happen mid-run.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

macro_rules! runtime_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Runtime(e.to_string())
            }
        }
    )*};
}

runtime_from!(
    std::io::Error,
    serde_json::Error,
    csv::Error,
    synergy_rl::RlError,
    synergy_env::EnvError,
    synergy_world::WorldError
);

pub type Result<T> = std::result::Result<T, CliError>;
