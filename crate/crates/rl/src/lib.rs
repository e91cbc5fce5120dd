//! Off-policy actor-critic agents trained from scratch on the pipeline's MDPs.
//!
//! [`SacAgent`] is soft actor-critic with twin critics, a tanh-squashed
//! Gaussian actor and an auto-tuned entropy coefficient. [`DdpgAgent`] is the
//! deterministic baseline. Both learn from a uniform FIFO [`ReplayBuffer`]
//! and checkpoint to a directory holding `agent.json` plus raw parameter
//! and optimizer blobs.

mod agent;
mod ddpg;
mod error;
mod nets;
mod replay;
mod sac;
mod scaling;
pub mod squash;
mod train;

pub use agent::{
    load_agent, Agent, AgentManifest, AgentPolicy, Algorithm, AnyAgent, RngState, UpdateStats, MANIFEST_FILE,
};
pub use ddpg::{DdpgAgent, DdpgConfig};
pub use error::{Result, RlError};
pub use replay::{Minibatch, ReplayBuffer, Transition};
pub use scaling::{InputScaling, ScaledRange};
pub use sac::{SacAgent, SacConfig, TargetComponents};
pub use train::{
    curve_eval_seeds, evaluate, train, training_episode_seed, CurvePoint, EvalSummary, TrainConfig, TrainReport,
};
