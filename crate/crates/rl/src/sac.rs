//! Soft actor-critic with twin critics and an auto-tuned entropy coefficient.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use synergy_nn::{polyak_update, Adam, AdamConfig, Mlp, OutputActivation};

use crate::agent::{Agent, AgentManifest, Algorithm, ScalarAdamState, UpdateStats};
use crate::error::{check_dim, Result, RlError};
use crate::nets::{apply_gradients, concat_rows, ensure_finite, gather_rows, mix_seed, regress};
use crate::replay::Minibatch;
use crate::scaling::InputScaling;
use crate::squash::{squash, PolicySample};

/// Starting entropy coefficient. With rewards on a 0.1 to 1 scale, the
/// customary 1.0 lets the entropy bonus swamp the bootstrapped targets.
pub const INITIAL_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub hidden_sizes: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub alpha_lr: f64,
    pub initial_log_alpha: f64,
    /// Defaults to minus the action dimension.
    pub target_entropy: Option<f64>,
    pub grad_clip: f64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            hidden_sizes: vec![256, 256],
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
            alpha_lr: 3e-4,
            initial_log_alpha: INITIAL_ALPHA.ln(),
            target_entropy: None,
            grad_clip: 10.0,
        }
    }
}

impl SacConfig {
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
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0 && self.alpha_lr > 0.0) {
            return err("learning rates must be positive");
        }
        if !(self.grad_clip > 0.0) || !self.initial_log_alpha.is_finite() {
            return err("grad_clip must be positive and initial_log_alpha finite");
        }
        Ok(())
    }
}

/// Pieces of the critic target for one minibatch.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetComponents {
    /// Target-critic values at the sampled next actions (0 for terminal rows).
    pub q1: Vec<f32>,
    pub q2: Vec<f32>,
    pub next_log_prob: Vec<f64>,
    pub targets: Vec<f32>,
}

#[derive(Debug, Clone)]
pub struct SacAgent {
    cfg: SacConfig,
    obs_dim: usize,
    act_dim: usize,
    seed: u64,
    actor: Mlp,
    q1: Mlp,
    q2: Mlp,
    q1_target: Mlp,
    q2_target: Mlp,
    scaling: InputScaling,
    actor_opt: Adam<f32>,
    q1_opt: Adam<f32>,
    q2_opt: Adam<f32>,
    log_alpha: f64,
    alpha_opt: Adam<f64>,
    rng: ChaCha8Rng,
    updates: u64,
}

fn sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut s = vec![input];
    s.extend_from_slice(hidden);
    s.push(output);
    s
}

impl SacAgent {
    pub fn new(obs_dim: usize, act_dim: usize, cfg: SacConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let actor = Mlp::init(&sizes(obs_dim, &cfg.hidden_sizes, 2 * act_dim), OutputActivation::Identity, mix_seed(seed, 1))?;
        let critic_sizes = sizes(obs_dim + act_dim, &cfg.hidden_sizes, 1);
        let q1 = Mlp::init(&critic_sizes, OutputActivation::Identity, mix_seed(seed, 2))?;
        let q2 = Mlp::init(&critic_sizes, OutputActivation::Identity, mix_seed(seed, 3))?;
        Ok(Self {
            actor_opt: Adam::new(actor.num_params(), AdamConfig::with_learning_rate(cfg.actor_lr))?,
            q1_opt: Adam::new(q1.num_params(), AdamConfig::with_learning_rate(cfg.critic_lr))?,
            q2_opt: Adam::new(q2.num_params(), AdamConfig::with_learning_rate(cfg.critic_lr))?,
            alpha_opt: Adam::new(1, AdamConfig::with_learning_rate(cfg.alpha_lr))?,
            log_alpha: cfg.initial_log_alpha,
            q1_target: q1.clone(),
            q2_target: q2.clone(),
            scaling: InputScaling::default(),
            actor,
            q1,
            q2,
            rng: ChaCha8Rng::seed_from_u64(mix_seed(seed, 4)),
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

    pub fn config(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn log_alpha(&self) -> f64 {
        self.log_alpha
    }

    pub fn target_entropy(&self) -> f64 {
        self.cfg.target_entropy.unwrap_or(-(self.act_dim as f64))
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_mut(&mut self) -> &mut Mlp {
        &mut self.actor
    }

    pub fn critics(&self) -> [&Mlp; 2] {
        [&self.q1, &self.q2]
    }

    pub fn critics_mut(&mut self) -> [&mut Mlp; 2] {
        [&mut self.q1, &mut self.q2]
    }

    pub fn target_critics(&self) -> [&Mlp; 2] {
        [&self.q1_target, &self.q2_target]
    }

    pub fn target_critics_mut(&mut self) -> [&mut Mlp; 2] {
        [&mut self.q1_target, &mut self.q2_target]
    }

    /// Online critic values for row-major states and actions.
    pub fn q_values(&self, states: &[f32], actions: &[f32], batch: usize) -> Result<[Vec<f32>; 2]> {
        let states = self.scaling.apply(states, self.obs_dim);
        let x = concat_rows(&states, self.obs_dim, actions, self.act_dim, batch);
        Ok([
            self.q1.forward_batch(&x, batch)?.into_output(),
            self.q2.forward_batch(&x, batch)?.into_output(),
        ])
    }

    fn check_batch(&self, mb: &Minibatch) -> Result<()> {
        check_dim("minibatch observation width", self.obs_dim, mb.obs_dim)?;
        check_dim("minibatch action width", self.act_dim, mb.act_dim)?;
        check_dim("minibatch rewards", mb.batch, mb.rewards.len())?;
        Ok(())
    }

    /// `y = r + γ·(min(Q1', Q2')(s', a') − α·log π(a'|s'))` on non-terminal
    /// rows with `a' ~ π(·|s')`; terminal rows get `y = r`.
    pub fn target_components(&mut self, mb: &Minibatch) -> Result<TargetComponents> {
        self.check_batch(mb)?;
        let b = mb.batch;
        let mut out = TargetComponents {
            q1: vec![0.0; b],
            q2: vec![0.0; b],
            next_log_prob: vec![0.0; b],
            targets: mb.rewards.clone(),
        };
        let live: Vec<usize> = (0..b).filter(|&r| !mb.terminals[r]).collect();
        if live.is_empty() {
            return Ok(out);
        }
        let next = gather_rows(&mb.next_states, self.obs_dim, &live);
        let next = self.scaling.apply(&next, self.obs_dim);
        let n = live.len();
        let head = self.actor.forward_batch(&next, n)?.into_output();
        let sample = PolicySample::draw(&head, self.act_dim, &mut self.rng);
        let x = concat_rows(&next, self.obs_dim, &sample.actions, self.act_dim, n);
        let t1 = self.q1_target.forward_batch(&x, n)?.into_output();
        let t2 = self.q2_target.forward_batch(&x, n)?.into_output();
        let alpha = self.alpha();
        for (i, &r) in live.iter().enumerate() {
            let soft = (t1[i].min(t2[i]) as f64) - alpha * sample.log_prob[i];
            out.q1[r] = t1[i];
            out.q2[r] = t2[i];
            out.next_log_prob[r] = sample.log_prob[i];
            out.targets[r] = (mb.rewards[r] as f64 + self.cfg.gamma * soft) as f32;
        }
        ensure_finite(out.targets.iter().map(|&y| y as f64), "critic target", self.updates)?;
        Ok(out)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let m = AgentManifest::read(dir)?;
        m.expect_algorithm(Algorithm::Sac)?;
        let cfg: SacConfig = serde_json::from_value(m.hyperparameters.clone())?;
        cfg.validate()?;
        let (o, k) = (m.observation_dim, m.action_dim);
        let actor_sizes = sizes(o, &cfg.hidden_sizes, 2 * k);
        let critic_sizes = sizes(o + k, &cfg.hidden_sizes, 1);
        let actor = m.network(dir, "actor", &actor_sizes)?;
        let q1 = m.network(dir, "critic1", &critic_sizes)?;
        let q2 = m.network(dir, "critic2", &critic_sizes)?;
        let log_alpha = m
            .log_alpha
            .ok_or_else(|| RlError::Checkpoint("log_alpha: expected a value, found none".into()))?;
        let alpha_opt = m
            .alpha_optimizer
            .as_ref()
            .ok_or_else(|| RlError::Checkpoint("alpha_optimizer: expected a value, found none".into()))?
            .restore()?;
        Ok(Self {
            actor_opt: m.optimizer(dir, "actor", actor.num_params())?,
            q1_opt: m.optimizer(dir, "critic1", q1.num_params())?,
            q2_opt: m.optimizer(dir, "critic2", q2.num_params())?,
            q1_target: m.network(dir, "critic1_target", &critic_sizes)?,
            q2_target: m.network(dir, "critic2_target", &critic_sizes)?,
            scaling: {
                m.input_scaling.validate(o)?;
                m.input_scaling.clone()
            },
            actor,
            q1,
            q2,
            log_alpha,
            alpha_opt,
            rng: m.rng.restore()?,
            cfg,
            obs_dim: o,
            act_dim: k,
            seed: m.seed,
            updates: m.updates,
        })
    }
}

impl Agent for SacAgent {
    fn algorithm(&self) -> Algorithm {
        Algorithm::Sac
    }

    fn observation_dim(&self) -> usize {
        self.obs_dim
    }

    fn action_dim(&self) -> usize {
        self.act_dim
    }

    /// Greedy mode returns `tanh(mean)`; exploring mode samples the squashed Gaussian.
    fn act(&mut self, observation: &[f32], explore: bool) -> Result<Vec<f32>> {
        check_dim("observation", self.obs_dim, observation.len())?;
        let head = self.actor.forward(&self.scaling.apply(observation, self.obs_dim))?;
        ensure_finite(head.iter().map(|&v| v as f64), "actor output", self.updates)?;
        if explore {
            Ok(PolicySample::draw(&head, self.act_dim, &mut self.rng).actions)
        } else {
            Ok(head[..self.act_dim].iter().map(|&m| squash(m as f64)).collect())
        }
    }

    fn update(&mut self, mb: &Minibatch) -> Result<UpdateStats> {
        self.check_batch(mb)?;
        let (b, o, k) = (mb.batch, self.obs_dim, self.act_dim);
        let alpha = self.alpha();
        let clip = self.cfg.grad_clip;
        let step = self.updates;

        let targets = self.target_components(mb)?.targets;
        let states = self.scaling.apply(&mb.states, o).into_owned();
        let x = concat_rows(&states, o, &mb.actions, k, b);
        let l1 = regress(&mut self.q1, &mut self.q1_opt, &x, &targets, clip, "critic1", step)?;
        let l2 = regress(&mut self.q2, &mut self.q2_opt, &x, &targets, clip, "critic2", step)?;

        // Actor step through the freshly updated critics.
        let tape = self.actor.forward_batch(&states, b)?;
        let sample = PolicySample::draw(tape.output(), k, &mut self.rng);
        let xa = concat_rows(&states, o, &sample.actions, k, b);
        let t1 = self.q1.forward_batch(&xa, b)?;
        let t2 = self.q2.forward_batch(&xa, b)?;
        let mut pick1 = vec![0.0f32; b];
        let mut pick2 = vec![0.0f32; b];
        let mut actor_loss = 0.0;
        for r in 0..b {
            let (a, c) = (t1.output()[r], t2.output()[r]);
            if a <= c {
                pick1[r] = 1.0;
            } else {
                pick2[r] = 1.0;
            }
            actor_loss += alpha * sample.log_prob[r] - a.min(c) as f64;
        }
        actor_loss /= b as f64;
        ensure_finite([actor_loss], "actor loss", step)?;
        let cols = Some(o..o + k);
        let g1 = self.q1.backward_batch(&t1, &pick1, false, cols.clone())?.input.expect("requested");
        let g2 = self.q2.backward_batch(&t2, &pick2, false, cols)?.input.expect("requested");
        let dq_da: Vec<f64> = g1.iter().zip(&g2).map(|(&p, &q)| p as f64 + q as f64).collect();
        let head_grad = sample.head_gradient(&dq_da, alpha, 1.0 / b as f64);
        let grads = self.actor.backward_batch(&tape, &head_grad, true, None)?.params.expect("requested");
        apply_gradients(&mut self.actor, &mut self.actor_opt, grads, clip, "actor", step)?;

        // Entropy coefficient: descend -log α · (log π + target entropy).
        let mean_log_prob = sample.log_prob.iter().sum::<f64>() / b as f64;
        let alpha_grad = -(mean_log_prob + self.target_entropy());
        let mut la = [self.log_alpha];
        self.alpha_opt.step(&mut la, &[alpha_grad]).map_err(|_| RlError::NonFinite {
            what: "entropy coefficient",
            update: step,
            detail: format!("mean log-probability {mean_log_prob}"),
        })?;
        self.log_alpha = la[0];

        polyak_update(self.q1_target.params_mut(), self.q1.params(), self.cfg.tau)?;
        polyak_update(self.q2_target.params_mut(), self.q2.params(), self.cfg.tau)?;
        self.updates += 1;
        Ok(UpdateStats {
            critic_loss: 0.5 * (l1 + l2),
            actor_loss,
            entropy_coef: alpha,
        })
    }

    fn update_count(&self) -> u64 {
        self.updates
    }

    fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut m = AgentManifest::new(Algorithm::Sac, self.obs_dim, self.act_dim, self.seed, self.updates, &self.rng);
        m.hyperparameters = serde_json::to_value(&self.cfg)?;
        m.input_scaling = self.scaling.clone();
        m.log_alpha = Some(self.log_alpha);
        m.alpha_optimizer = Some(ScalarAdamState::capture(&self.alpha_opt));
        m.add_network(dir, "actor", &self.actor)?;
        m.add_network(dir, "critic1", &self.q1)?;
        m.add_network(dir, "critic2", &self.q2)?;
        m.add_network(dir, "critic1_target", &self.q1_target)?;
        m.add_network(dir, "critic2_target", &self.q2_target)?;
        m.add_optimizer(dir, "actor", &self.actor_opt)?;
        m.add_optimizer(dir, "critic1", &self.q1_opt)?;
        m.add_optimizer(dir, "critic2", &self.q2_opt)?;
        m.write(dir)
    }
}
