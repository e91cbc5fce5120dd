//! The two MDPs of the pipeline as reset/step environments.
//!
//! [`PushGraspEnv`] singulates a cluttered target with pushes until its grasp
//! quality clears the threshold, then grasps it. [`ThrowEnv`] adjusts a taught
//! throwing kernel with one residual action per episode. [`task3_episode`]
//! chains the two.

mod error;
mod push_grasp;
mod rollout;
mod throw_env;

pub use error::{EnvError, Result};
pub use push_grasp::{
    decode_push_action, shaped_reward, PushGraspEnv, PushGraspObservation, PUSH_ACTION_DIM, PUSH_GRASP_OBS_DIM,
};
pub use rollout::{rollout, task3_episode, EpisodeRecord, Policy, PolicyError, TraceStep, Traceable};
pub use throw_env::{decode_throw_action, ThrowEnv, ThrowObservation, ThrowResiduals, THROW_ACTION_DIM, THROW_OBS_DIM};

use serde::{Deserialize, Serialize};

/// Reward for a successful grasp or throw.
pub const SUCCESS_REWARD: f64 = 1.0;
/// Reward for a useless push, an out-of-workspace target or a failed grasp.
pub const PENALTY_REWARD: f64 = -0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub push_count: usize,
    pub beta: f64,
    pub success: bool,
    pub landing_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f32>,
    pub reward: f64,
    pub terminal: bool,
    pub info: StepInfo,
}

/// reset(seed) → observation; step(action) → (observation, reward, terminal, info).
pub trait Environment {
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Result<Vec<f32>>;
    fn step(&mut self, action: &[f32]) -> Result<StepResult>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpisodeBudget {
    pub max_pushes: usize,
}

impl Default for EpisodeBudget {
    fn default() -> Self {
        Self { max_pushes: 5 }
    }
}

pub(crate) fn check_action(action: &[f32], dim: usize) -> Result<()> {
    if action.len() != dim {
        return Err(EnvError::ActionDim {
            expected: dim,
            actual: action.len(),
        });
    }
    if let Some(i) = action.iter().position(|a| !a.is_finite()) {
        return Err(EnvError::NonFiniteAction(i));
    }
    Ok(())
}
