use thiserror::Error;

pub type Result<T> = std::result::Result<T, EnvError>;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error(transparent)]
    World(#[from] synergy_world::WorldError),
    #[error("episode is terminal; call reset before stepping again")]
    EpisodeTerminated,
    #[error("step called before reset")]
    NotReset,
    #[error("action has {actual} components, expected {expected}")]
    ActionDim { expected: usize, actual: usize },
    #[error("action component {0} is not finite")]
    NonFiniteAction(usize),
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("policy failed: {0}")]
    Policy(#[from] crate::rollout::PolicyError),
}
