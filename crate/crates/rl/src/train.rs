use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use synergy_env::{rollout, EpisodeRecord, Traceable};

use crate::agent::{Agent, AgentPolicy};
use crate::error::{check_dim, Result, RlError};
use crate::nets::mix_seed;
use crate::replay::{ReplayBuffer, Transition};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub total_steps: u64,
    /// Uniform-random steps before the first gradient update.
    pub warmup_steps: u64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub eval_interval: u64,
    pub eval_episodes: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            total_steps: 100_000,
            warmup_steps: 1_000,
            batch_size: 256,
            buffer_capacity: 1_000_000,
            eval_interval: 5_000,
            eval_episodes: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return Err(RlError::Config("need 0 < batch_size <= buffer_capacity".into()));
        }
        if self.eval_interval == 0 {
            return Err(RlError::Config("eval_interval must be positive".into()));
        }
        Ok(())
    }
}

/// One row of the learning curve. Losses are averaged over the updates since
/// the previous row and are absent while no update has run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub env_step: u64,
    pub eval_success_rate: f64,
    pub eval_mean_reward: f64,
    pub eval_mean_actions: f64,
    pub critic_loss: Option<f64>,
    pub actor_loss: Option<f64>,
    pub entropy_coef: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub success_rate: f64,
    pub mean_reward: f64,
    pub mean_actions: f64,
}

impl EvalSummary {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let n = records.len().max(1) as f64;
        Self {
            episodes: records.len(),
            success_rate: records.iter().filter(|r| r.success).count() as f64 / n,
            mean_reward: records.iter().map(|r| r.total_reward).sum::<f64>() / n,
            mean_actions: records.iter().map(|r| r.n_actions as f64).sum::<f64>() / n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub curve: Vec<CurvePoint>,
    pub env_steps: u64,
    pub updates: u64,
    pub episodes: u64,
}

const TRAIN_STREAM: u64 = 0x7472_6169_6e;
const CURVE_STREAM: u64 = 0x6375_7276_65;
const SAMPLER_STREAM: u64 = 0x7361_6d70;

/// Scene seed of the `n`-th training episode.
pub fn training_episode_seed(seed: u64, n: u64) -> u64 {
    mix_seed(seed ^ TRAIN_STREAM, n)
}

/// Held-out scene seeds for the learning-curve evaluations.
pub fn curve_eval_seeds(seed: u64, episodes: usize) -> Vec<u64> {
    (0..episodes as u64).map(|i| mix_seed(seed ^ CURVE_STREAM, i)).collect()
}

/// Runs one greedy episode per seed.
pub fn evaluate<E: Traceable, A: Agent + ?Sized>(env: &mut E, agent: &mut A, seeds: &[u64]) -> Result<Vec<EpisodeRecord>> {
    let mut policy = AgentPolicy::greedy(agent);
    seeds
        .iter()
        .enumerate()
        .map(|(i, &s)| Ok(rollout(env, &mut policy, s, i as u64, None)?))
        .collect()
}

#[derive(Default)]
struct LossAccumulator {
    n: u64,
    critic: f64,
    actor: f64,
    entropy: f64,
}

/// Off-policy training: uniform actions during warmup, then one gradient
/// update per environment step. `on_eval` sees each curve row as it lands.
pub fn train<E, A>(
    env: &mut E,
    agent: &mut A,
    cfg: &TrainConfig,
    seed: u64,
    on_eval: &mut dyn FnMut(&CurvePoint),
) -> Result<TrainReport>
where
    E: Traceable + Clone,
    A: Agent + ?Sized,
{
    cfg.validate()?;
    check_dim("agent observation width", env.observation_dim(), agent.observation_dim())?;
    check_dim("agent action width", env.action_dim(), agent.action_dim())?;
    let mut eval_env = env.clone();
    let eval_seeds = curve_eval_seeds(seed, cfg.eval_episodes);
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, SAMPLER_STREAM));
    let capacity = cfg.buffer_capacity.min(cfg.total_steps.max(1) as usize);
    let mut buffer = ReplayBuffer::new(capacity.max(cfg.batch_size), env.observation_dim(), env.action_dim())?;
    let k = env.action_dim();

    let mut episodes = 0u64;
    let mut obs = env.reset(training_episode_seed(seed, 0))?;
    let mut acc = LossAccumulator::default();
    let mut curve = Vec::new();
    for step in 1..=cfg.total_steps {
        let action: Vec<f32> = if step <= cfg.warmup_steps {
            (0..k).map(|_| rng.random_range(-1.0f32..=1.0)).collect()
        } else {
            agent.act(&obs, true)?
        };
        let r = env.step(&action).map_err(|source| RlError::EnvStep { step, source })?;
        let next = r.observation;
        buffer.store(Transition {
            state: std::mem::take(&mut obs),
            action,
            reward: r.reward as f32,
            next_state: next.clone(),
            terminal: r.terminal,
        })?;
        obs = if r.terminal {
            episodes += 1;
            env.reset(training_episode_seed(seed, episodes))
                .map_err(|source| RlError::EnvStep { step, source })?
        } else {
            next
        };

        if step > cfg.warmup_steps && buffer.len() >= cfg.batch_size {
            let batch = buffer.sample(cfg.batch_size, &mut rng)?;
            let stats = agent.update(&batch)?;
            acc.n += 1;
            acc.critic += stats.critic_loss;
            acc.actor += stats.actor_loss;
            acc.entropy += stats.entropy_coef;
        }

        if step % cfg.eval_interval == 0 || step == cfg.total_steps {
            let summary = EvalSummary::from_records(&evaluate(&mut eval_env, agent, &eval_seeds)?);
            let mean = |v: f64| (acc.n > 0).then(|| v / acc.n as f64);
            let point = CurvePoint {
                env_step: step,
                eval_success_rate: summary.success_rate,
                eval_mean_reward: summary.mean_reward,
                eval_mean_actions: summary.mean_actions,
                critic_loss: mean(acc.critic),
                actor_loss: mean(acc.actor),
                entropy_coef: mean(acc.entropy),
            };
            on_eval(&point);
            curve.push(point);
            acc = LossAccumulator::default();
        }
    }
    Ok(TrainReport {
        curve,
        env_steps: cfg.total_steps,
        updates: agent.update_count(),
        episodes,
    })
}
