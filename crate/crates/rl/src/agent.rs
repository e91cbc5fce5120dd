use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use synergy_env::{Policy, PolicyError};
use synergy_nn::checkpoint::{network_from_manifest, read_f32_blob, write_f32_blob, NetworkManifest};
use synergy_nn::{Adam, AdamConfig, Mlp};

use crate::ddpg::DdpgAgent;
use crate::error::{Result, RlError};
use crate::replay::Minibatch;
use crate::sac::SacAgent;
use crate::scaling::InputScaling;

pub const AGENT_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "agent.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Sac,
    Ddpg,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Sac => "sac",
            Algorithm::Ddpg => "ddpg",
        })
    }
}

impl FromStr for Algorithm {
    type Err = RlError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sac" => Ok(Algorithm::Sac),
            "ddpg" => Ok(Algorithm::Ddpg),
            other => Err(RlError::Config(format!("unknown algorithm {other:?} (expected sac or ddpg)"))),
        }
    }
}

/// Scalar diagnostics of one gradient update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Mean of the critics' squared Bellman errors.
    pub critic_loss: f64,
    pub actor_loss: f64,
    /// Entropy coefficient used by the update; 0 for deterministic agents.
    pub entropy_coef: f64,
}

pub trait Agent {
    fn algorithm(&self) -> Algorithm;
    fn observation_dim(&self) -> usize;
    fn action_dim(&self) -> usize;
    /// Action in `[-1, 1]^k`; `explore` selects the stochastic behaviour policy.
    fn act(&mut self, observation: &[f32], explore: bool) -> Result<Vec<f32>>;
    fn update(&mut self, batch: &Minibatch) -> Result<UpdateStats>;
    fn update_count(&self) -> u64;
    fn save(&self, dir: &Path) -> Result<()>;
}

/// Drives an environment rollout with an agent.
pub struct AgentPolicy<'a, A: ?Sized> {
    agent: &'a mut A,
    explore: bool,
}

impl<'a, A: Agent + ?Sized> AgentPolicy<'a, A> {
    pub fn greedy(agent: &'a mut A) -> Self {
        Self { agent, explore: false }
    }

    pub fn exploring(agent: &'a mut A) -> Self {
        Self { agent, explore: true }
    }
}

impl<A: Agent + ?Sized> Policy for AgentPolicy<'_, A> {
    fn act(&mut self, observation: &[f32]) -> std::result::Result<Vec<f32>, PolicyError> {
        self.agent
            .act(observation, self.explore)
            .map_err(|e| PolicyError(e.to_string()))
    }
}

/// Either agent, as restored from a checkpoint directory.
#[derive(Debug, Clone)]
pub enum AnyAgent {
    Sac(SacAgent),
    Ddpg(DdpgAgent),
}

impl Agent for AnyAgent {
    fn algorithm(&self) -> Algorithm {
        match self {
            AnyAgent::Sac(a) => a.algorithm(),
            AnyAgent::Ddpg(a) => a.algorithm(),
        }
    }
    fn observation_dim(&self) -> usize {
        match self {
            AnyAgent::Sac(a) => a.observation_dim(),
            AnyAgent::Ddpg(a) => a.observation_dim(),
        }
    }
    fn action_dim(&self) -> usize {
        match self {
            AnyAgent::Sac(a) => a.action_dim(),
            AnyAgent::Ddpg(a) => a.action_dim(),
        }
    }
    fn act(&mut self, observation: &[f32], explore: bool) -> Result<Vec<f32>> {
        match self {
            AnyAgent::Sac(a) => a.act(observation, explore),
            AnyAgent::Ddpg(a) => a.act(observation, explore),
        }
    }
    fn update(&mut self, batch: &Minibatch) -> Result<UpdateStats> {
        match self {
            AnyAgent::Sac(a) => a.update(batch),
            AnyAgent::Ddpg(a) => a.update(batch),
        }
    }
    fn update_count(&self) -> u64 {
        match self {
            AnyAgent::Sac(a) => a.update_count(),
            AnyAgent::Ddpg(a) => a.update_count(),
        }
    }
    fn save(&self, dir: &Path) -> Result<()> {
        match self {
            AnyAgent::Sac(a) => a.save(dir),
            AnyAgent::Ddpg(a) => a.save(dir),
        }
    }
}

/// Restores whichever agent a checkpoint directory holds.
pub fn load_agent(dir: &Path) -> Result<AnyAgent> {
    let manifest = AgentManifest::read(dir)?;
    match manifest.algorithm {
        Algorithm::Sac => Ok(AnyAgent::Sac(SacAgent::load(dir)?)),
        Algorithm::Ddpg => Ok(AnyAgent::Ddpg(DdpgAgent::load(dir)?)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RngState {
    pub seed_hex: String,
    pub stream: u64,
    /// Decimal, since JSON numbers cannot hold a u128 portably.
    pub word_pos: String,
}

impl RngState {
    pub fn capture(rng: &ChaCha8Rng) -> Self {
        Self {
            seed_hex: rng.get_seed().iter().map(|b| format!("{b:02x}")).collect(),
            stream: rng.get_stream(),
            word_pos: rng.get_word_pos().to_string(),
        }
    }

    pub fn restore(&self) -> Result<ChaCha8Rng> {
        use rand::SeedableRng;
        let bad = || RlError::Checkpoint("malformed RNG state".into());
        if self.seed_hex.len() != 64 {
            return Err(bad());
        }
        let mut seed = [0u8; 32];
        for (i, b) in seed.iter_mut().enumerate() {
            *b = u8::from_str_radix(&self.seed_hex[2 * i..2 * i + 2], 16).map_err(|_| bad())?;
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(self.stream);
        rng.set_word_pos(self.word_pos.parse().map_err(|_| bad())?);
        Ok(rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkEntry {
    pub name: String,
    pub file: String,
    pub network: NetworkManifest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerEntry {
    pub name: String,
    pub config: AdamConfig,
    pub step: u64,
    pub first_moments_file: String,
    pub second_moments_file: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarAdamState {
    pub config: AdamConfig,
    pub step: u64,
    pub first_moment: f64,
    pub second_moment: f64,
}

impl ScalarAdamState {
    pub fn capture(adam: &Adam<f64>) -> Self {
        Self {
            config: adam.config(),
            step: adam.step_count(),
            first_moment: adam.first_moments()[0],
            second_moment: adam.second_moments()[0],
        }
    }

    pub fn restore(&self) -> Result<Adam<f64>> {
        Ok(Adam::from_parts(self.config, vec![self.first_moment], vec![self.second_moment], self.step)?)
    }
}

/// The `agent.json` file of a checkpoint directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentManifest {
    pub format_version: u32,
    pub algorithm: Algorithm,
    pub observation_dim: usize,
    pub action_dim: usize,
    pub seed: u64,
    pub updates: u64,
    pub hyperparameters: serde_json::Value,
    #[serde(default, skip_serializing_if = "InputScaling::is_empty")]
    pub input_scaling: InputScaling,
    pub log_alpha: Option<f64>,
    pub alpha_optimizer: Option<ScalarAdamState>,
    pub rng: RngState,
    pub networks: Vec<NetworkEntry>,
    pub optimizers: Vec<OptimizerEntry>,
}

impl AgentManifest {
    pub fn new(algorithm: Algorithm, observation_dim: usize, action_dim: usize, seed: u64, updates: u64, rng: &ChaCha8Rng) -> Self {
        Self {
            format_version: AGENT_FORMAT_VERSION,
            algorithm,
            observation_dim,
            action_dim,
            seed,
            updates,
            hyperparameters: serde_json::Value::Null,
            input_scaling: InputScaling::default(),
            log_alpha: None,
            alpha_optimizer: None,
            rng: RngState::capture(rng),
            networks: Vec::new(),
            optimizers: Vec::new(),
        }
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST_FILE))?;
        let manifest: Self = serde_json::from_str(&text)?;
        if manifest.format_version != AGENT_FORMAT_VERSION {
            return Err(RlError::Checkpoint(format!(
                "format_version: expected {AGENT_FORMAT_VERSION}, found {}",
                manifest.format_version
            )));
        }
        Ok(manifest)
    }

    pub fn expect_algorithm(&self, algorithm: Algorithm) -> Result<()> {
        if self.algorithm == algorithm {
            Ok(())
        } else {
            Err(RlError::Checkpoint(format!(
                "algorithm: expected {algorithm}, found {}",
                self.algorithm
            )))
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }

    pub fn add_network(&mut self, dir: &Path, name: &str, net: &Mlp) -> Result<()> {
        let file = format!("{name}.params.bin");
        write_f32_blob(&dir.join(&file), net.params())?;
        self.networks.push(NetworkEntry {
            name: name.into(),
            file,
            network: NetworkManifest::describe(net, self.updates),
        });
        Ok(())
    }

    pub fn add_optimizer(&mut self, dir: &Path, name: &str, adam: &Adam<f32>) -> Result<()> {
        let first = format!("{name}.adam_m.bin");
        let second = format!("{name}.adam_v.bin");
        write_f32_blob(&dir.join(&first), adam.first_moments())?;
        write_f32_blob(&dir.join(&second), adam.second_moments())?;
        self.optimizers.push(OptimizerEntry {
            name: name.into(),
            config: adam.config(),
            step: adam.step_count(),
            first_moments_file: first,
            second_moments_file: second,
        });
        Ok(())
    }

    pub fn network(&self, dir: &Path, name: &str, expected_sizes: &[usize]) -> Result<Mlp> {
        let entry = self
            .networks
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| RlError::Checkpoint(format!("network {name:?} missing from manifest")))?;
        if entry.network.layer_sizes != expected_sizes {
            return Err(RlError::Checkpoint(format!(
                "{name}.layer_sizes: expected {expected_sizes:?}, found {:?}",
                entry.network.layer_sizes
            )));
        }
        Ok(network_from_manifest(&entry.network, &dir.join(&entry.file))?)
    }

    pub fn optimizer(&self, dir: &Path, name: &str, num_params: usize) -> Result<Adam<f32>> {
        let entry = self
            .optimizers
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| RlError::Checkpoint(format!("optimizer {name:?} missing from manifest")))?;
        let m = read_f32_blob(&dir.join(&entry.first_moments_file), num_params)?;
        let v = read_f32_blob(&dir.join(&entry.second_moments_file), num_params)?;
        Ok(Adam::from_parts(entry.config, m, v, entry.step)?)
    }
}
