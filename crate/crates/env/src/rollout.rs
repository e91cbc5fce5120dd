use serde::{Deserialize, Serialize};
use synergy_world::{generate_scene, SceneState, Task, ThrowKernel};

use crate::error::{EnvError, Result};
use crate::push_grasp::PushGraspEnv;
use crate::throw_env::ThrowEnv;
use crate::{Environment, StepResult};

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct PolicyError(pub String);

/// Anything that maps an observation to an action in `[-1, 1]^k`.
pub trait Policy {
    fn act(&mut self, observation: &[f32]) -> std::result::Result<Vec<f32>, PolicyError>;
}

impl<F> Policy for F
where
    F: FnMut(&[f32]) -> Vec<f32>,
{
    fn act(&mut self, observation: &[f32]) -> std::result::Result<Vec<f32>, PolicyError> {
        Ok(self(observation))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode_id: u64,
    pub seed: u64,
    pub success: bool,
    /// Pushes plus grasp plus throw actions taken.
    pub n_actions: usize,
    pub n_pushes: usize,
    pub landing_distance: Option<f64>,
    pub total_reward: f64,
    pub singulation_success: Option<bool>,
    pub throw_success: Option<bool>,
}

/// One line of a JSON-lines episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub task: Task,
    pub seed: u64,
    pub step: usize,
    pub action: Vec<f32>,
    pub reward: f64,
    pub cumulative_reward: f64,
    pub terminal: bool,
    pub push_count: usize,
    pub beta: f64,
    pub success: bool,
    pub landing_distance: Option<f64>,
    /// Scene after the step.
    pub scene: SceneState,
    pub kernel: Option<ThrowKernel>,
}

/// Environments that can describe themselves for traces.
pub trait Traceable: Environment {
    fn task(&self) -> Task;
    fn current_scene(&self) -> Option<&SceneState>;
    fn current_kernel(&self) -> Option<ThrowKernel> {
        None
    }
}

impl Traceable for PushGraspEnv {
    fn task(&self) -> Task {
        Task::Task1
    }
    fn current_scene(&self) -> Option<&SceneState> {
        self.scene()
    }
}

impl Traceable for ThrowEnv {
    fn task(&self) -> Task {
        Task::Task2
    }
    fn current_scene(&self) -> Option<&SceneState> {
        self.scene()
    }
    fn current_kernel(&self) -> Option<ThrowKernel> {
        self.last_kernel().copied()
    }
}

struct PhaseOutcome {
    steps: usize,
    reward: f64,
    last: StepResult,
}

fn run_phase<E: Traceable>(
    env: &mut E,
    policy: &mut dyn Policy,
    mut obs: Vec<f32>,
    seed: u64,
    task: Task,
    mut trace: Option<&mut Vec<TraceStep>>,
    reward_offset: f64,
) -> Result<PhaseOutcome> {
    let mut total = 0.0;
    let mut steps = 0;
    loop {
        let action = policy.act(&obs)?;
        let r = env.step(&action)?;
        steps += 1;
        total += r.reward;
        if let Some(t) = trace.as_deref_mut() {
            t.push(TraceStep {
                task,
                seed,
                step: t.len(),
                action,
                reward: r.reward,
                cumulative_reward: reward_offset + total,
                terminal: r.terminal,
                push_count: r.info.push_count,
                beta: r.info.beta,
                success: r.info.success,
                landing_distance: r.info.landing_distance,
                scene: env.current_scene().cloned().expect("stepped env has a scene"),
                kernel: env.current_kernel(),
            });
        }
        if r.terminal {
            return Ok(PhaseOutcome {
                steps,
                reward: total,
                last: r,
            });
        }
        obs = r.observation.clone();
    }
}

/// Runs one episode of a single environment to termination.
pub fn rollout<E: Traceable>(
    env: &mut E,
    policy: &mut dyn Policy,
    seed: u64,
    episode_id: u64,
    trace: Option<&mut Vec<TraceStep>>,
) -> Result<EpisodeRecord> {
    let obs = env.reset(seed)?;
    let task = env.task();
    let out = run_phase(env, policy, obs, seed, task, trace, 0.0)?;
    let success = out.last.info.success;
    let (n_pushes, n_actions) = match task {
        Task::Task2 => (0, out.steps),
        _ => (out.last.info.push_count, out.last.info.push_count + usize::from(success)),
    };
    Ok(EpisodeRecord {
        episode_id,
        seed,
        success,
        n_actions,
        n_pushes,
        landing_distance: out.last.info.landing_distance,
        total_reward: out.reward,
        singulation_success: (task != Task::Task2).then_some(success),
        throw_success: (task == Task::Task2).then_some(success),
    })
}

/// Singulate and grasp, then throw into the out-of-reach basket of the same scene.
pub fn task3_episode(
    push_env: &mut PushGraspEnv,
    throw_env: &mut ThrowEnv,
    push_policy: &mut dyn Policy,
    throw_policy: &mut dyn Policy,
    seed: u64,
    episode_id: u64,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<EpisodeRecord> {
    let scene = generate_scene(Task::Task3, seed, push_env.config())?;
    let obs = push_env.reset_with_scene(scene)?;
    let push = run_phase(push_env, push_policy, obs, seed, Task::Task3, trace.as_deref_mut(), 0.0)?;
    let grasped = push.last.info.success;
    let n_pushes = push.last.info.push_count;
    let mut record = EpisodeRecord {
        episode_id,
        seed,
        success: false,
        n_actions: n_pushes + usize::from(grasped),
        n_pushes,
        landing_distance: None,
        total_reward: push.reward,
        singulation_success: Some(grasped),
        throw_success: None,
    };
    if !grasped {
        return Ok(record);
    }
    let held_scene = push_env.scene().cloned().ok_or(EnvError::NotReset)?;
    let obs = throw_env.reset_with_scene(held_scene)?;
    let throw = run_phase(throw_env, throw_policy, obs, seed, Task::Task3, trace, push.reward)?;
    let thrown = throw.last.info.success;
    record.success = thrown;
    record.n_actions += throw.steps;
    record.landing_distance = throw.last.info.landing_distance;
    record.total_reward += throw.reward;
    record.throw_success = Some(thrown);
    Ok(record)
}
