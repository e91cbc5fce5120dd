//! Deep deterministic policy gradient with Gaussian exploration.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use synergy_nn::{polyak_update, Adam, AdamConfig, Mlp, OutputActivation};

use crate::agent::{Agent, AgentManifest, Algorithm, UpdateStats};
use crate::error::{check_dim, Result, RlError};
use crate::nets::{apply_gradients, concat_rows, ensure_finite, gather_rows, mix_seed, regress};
use crate::replay::Minibatch;
use crate::scaling::InputScaling;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DdpgConfig {
    pub hidden_sizes: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub exploration_std: f64,
    pub grad_clip: f64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![256, 256],
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            exploration_std: 0.1,
            grad_clip: 10.0,
        }
    }
}

impl DdpgConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(RlError::Config(m.into()));
        if self.hidden_sizes.is_empty() || self.hidden_sizes.contains(&0) {
            return err("hidden_sizes must be non-empty and positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return err("gamma must lie in [0, 1]");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return err("tau must lie in (0, 1]");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return err("learning rates must be positive");
        }
        if !(self.exploration_std >= 0.0) || !(self.grad_clip > 0.0) {
            return err("exploration_std must be non-negative and grad_clip positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DdpgAgent {
    cfg: DdpgConfig,
    obs_dim: usize,
    act_dim: usize,
    seed: u64,
    actor: Mlp,
    actor_target: Mlp,
    critic: Mlp,
    critic_target: Mlp,
    scaling: InputScaling,
    actor_opt: Adam<f32>,
    critic_opt: Adam<f32>,
    rng: ChaCha8Rng,
    updates: u64,
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

impl DdpgAgent {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: DdpgConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let actor = Mlp::init(&sizes(obs_dim, &cfg.hidden_sizes, act_dim), OutputActivation::Tanh, mix_seed(seed, 11))?;
        let critic = Mlp::init(&sizes(obs_dim + act_dim, &cfg.hidden_sizes, 1), OutputActivation::Identity, mix_seed(seed, 12))?;
        Ok(Self {
            actor_opt: Adam::new(actor.num_params(), AdamConfig::with_learning_rate(cfg.actor_lr))?,
            critic_opt: Adam::new(critic.num_params(), AdamConfig::with_learning_rate(cfg.critic_lr))?,
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            scaling: InputScaling::default(),
            actor,
            critic,
            rng: ChaCha8Rng::seed_from_u64(mix_seed(seed, 13)),
            cfg,
            obs_dim,
            act_dim,
            seed,
            updates: 0,
        })
    }

    /// Rescales observation slices before every network.
    pub fn with_input_scaling(mut self, scaling: InputScaling) -> Result<Self> {
        scaling.validate(self.obs_dim)?;
        self.scaling = scaling;
        Ok(self)
    }

    pub fn input_scaling(&self) -> &InputScaling {
        &self.scaling
    }

    pub fn config(&self) -> &DdpgConfig {
        &self.cfg
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn critic(&self) -> &Mlp {
        &self.critic
    }

    pub fn critic_target(&self) -> &Mlp {
        &self.critic_target
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn q_values(&self, states: &[f32], actions: &[f32], batch: usize) -> Result<Vec<f32>> {
        let states = self.scaling.apply(states, self.obs_dim);
        let x = concat_rows(&states, self.obs_dim, actions, self.act_dim, batch);
        Ok(self.critic.forward_batch(&x, batch)?.into_output())
    }

    /// `y = r + γ·Q'(s', μ'(s'))` on non-terminal rows, `y = r` otherwise.
    pub fn bellman_targets(&self, mb: &Minibatch) -> Result<Vec<f32>> {
        check_dim("minibatch observation width", self.obs_dim, mb.obs_dim)?;
        check_dim("minibatch action width", self.act_dim, mb.act_dim)?;
        let mut y = mb.rewards.clone();
        let live: Vec<usize> = (0..mb.batch).filter(|&r| !mb.terminals[r]).collect();
        if live.is_empty() {
            return Ok(y);
        }
        let n = live.len();
        let next = gather_rows(&mb.next_states, self.obs_dim, &live);
        let next = self.scaling.apply(&next, self.obs_dim);
        let a = self.actor_target.forward_batch(&next, n)?.into_output();
        let x = concat_rows(&next, self.obs_dim, &a, self.act_dim, n);
        let q = self.critic_target.forward_batch(&x, n)?.into_output();
        for (i, &r) in live.iter().enumerate() {
            y[r] = (mb.rewards[r] as f64 + self.cfg.gamma * q[i] as f64) as f32;
        }
        ensure_finite(y.iter().map(|&v| v as f64), "critic target", self.updates)?;
        Ok(y)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let m = AgentManifest::read(dir)?;
        m.expect_algorithm(Algorithm::Ddpg)?;
        let cfg: DdpgConfig = serde_json::from_value(m.hyperparameters.clone())?;
        cfg.validate()?;
        let (o, k) = (m.observation_dim, m.action_dim);
        let actor_sizes = sizes(o, &cfg.hidden_sizes, k);
        let critic_sizes = sizes(o + k, &cfg.hidden_sizes, 1);
        let actor = m.network(dir, "actor", &actor_sizes)?;
        let critic = m.network(dir, "critic", &critic_sizes)?;
        Ok(Self {
            actor_opt: m.optimizer(dir, "actor", actor.num_params())?,
            critic_opt: m.optimizer(dir, "critic", critic.num_params())?,
            actor_target: m.network(dir, "actor_target", &actor_sizes)?,
            critic_target: m.network(dir, "critic_target", &critic_sizes)?,
            scaling: {
                m.input_scaling.validate(o)?;
                m.input_scaling.clone()
            },
            actor,
            critic,
            rng: m.rng.restore()?,
            cfg,
            obs_dim: o,
            act_dim: k,
            seed: m.seed,
            updates: m.updates,
        })
    }
}

impl Agent for DdpgAgent {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Ddpg
    }

    fn observation_dim(&self) -> usize {
        self.obs_dim
    }

    fn action_dim(&self) -> usize {
        self.act_dim
    }

    fn act(&mut self, observation: &[f32], explore: bool) -> Result<Vec<f32>> {
        check_dim("observation", self.obs_dim, observation.len())?;
        let mut a = self.actor.forward(&self.scaling.apply(observation, self.obs_dim))?;
        ensure_finite(a.iter().map(|&v| v as f64), "actor output", self.updates)?;
        if explore {
            for v in &mut a {
                let noise: f64 = self.rng.sample(StandardNormal);
                *v = (*v as f64 + self.cfg.exploration_std * noise).clamp(-1.0, 1.0) as f32;
            }
        }
        Ok(a)
    }

    fn update(&mut self, mb: &Minibatch) -> Result<UpdateStats> {
        let (b, o, k) = (mb.batch, self.obs_dim, self.act_dim);
        let clip = self.cfg.grad_clip;
        let step = self.updates;
        let y = self.bellman_targets(mb)?;
        let states = self.scaling.apply(&mb.states, o).into_owned();
        let x = concat_rows(&states, o, &mb.actions, k, b);
        let critic_loss = regress(&mut self.critic, &mut self.critic_opt, &x, &y, clip, "critic", step)?;

        let tape = self.actor.forward_batch(&states, b)?;
        let xa = concat_rows(&states, o, tape.output(), k, b);
        let qt = self.critic.forward_batch(&xa, b)?;
        let actor_loss = -qt.output().iter().map(|&q| q as f64).sum::<f64>() / b as f64;
        ensure_finite([actor_loss], "actor loss", step)?;
        let ones = vec![1.0f32; b];
        let dq_da = self.critic.backward_batch(&qt, &ones, false, Some(o..o + k))?.input.expect("requested");
        let head: Vec<f32> = dq_da.iter().map(|&g| (-(g as f64) / b as f64) as f32).collect();
        let grads = self.actor.backward_batch(&tape, &head, true, None)?.params.expect("requested");
        apply_gradients(&mut self.actor, &mut self.actor_opt, grads, clip, "actor", step)?;

        polyak_update(self.critic_target.params_mut(), self.critic.params(), self.cfg.tau)?;
        polyak_update(self.actor_target.params_mut(), self.actor.params(), self.cfg.tau)?;
        self.updates += 1;
        Ok(UpdateStats {
            critic_loss,
            actor_loss,
            entropy_coef: 0.0,
        })
    }

    fn update_count(&self) -> u64 {
        self.updates
    }

    fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut m = AgentManifest::new(Algorithm::Ddpg, self.obs_dim, self.act_dim, self.seed, self.updates, &self.rng);
        m.hyperparameters = serde_json::to_value(&self.cfg)?;
        m.input_scaling = self.scaling.clone();
        m.add_network(dir, "actor", &self.actor)?;
        m.add_network(dir, "critic", &self.critic)?;
        m.add_network(dir, "actor_target", &self.actor_target)?;
        m.add_network(dir, "critic_target", &self.critic_target)?;
        m.add_optimizer(dir, "actor", &self.actor_opt)?;
        m.add_optimizer(dir, "critic", &self.critic_opt)?;
        m.write(dir)
    }
}
