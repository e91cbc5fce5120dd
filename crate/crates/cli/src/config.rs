//! Run configuration: four TOML sections, every key optional, unknown keys
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synergy_env::{EpisodeBudget, ThrowResiduals};
use synergy_rl::{Algorithm, DdpgConfig, SacConfig, TrainConfig};
use synergy_world::{Task, WorldConfig, GRID_SIZE};

use crate::error::{CliError, Result};

/// Name of the fully resolved config written into every run directory.
pub const RESOLVED_CONFIG_FILE: &str = "resolved_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Grid points per action dimension.
    pub grid_resolution: usize,
    /// Goal grid points per axis (distance and azimuth).
    pub goals_per_axis: usize,
    /// Goal distance range as multiples of the arm reach.
    pub distance_range: [f64; 2],
    /// Half-width of the goal azimuth range, radians.
    pub azimuth_half_range: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            grid_resolution: 21,
            goals_per_axis: 5,
            distance_range: [0.8, 1.6],
            azimuth_half_range: 30f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TaskSection {
    pub task: Task,
    pub budget: EpisodeBudget,
    pub residuals: ThrowResiduals,
    /// Fixed generator seeds standing in for hand-built evaluation scenarios.
    pub scenario_seeds: Vec<u64>,
    pub oracle: OracleConfig,
}

impl Default for TaskSection {
    fn default() -> Self {
        Self {
            task: Task::Task2,
            budget: EpisodeBudget::default(),
            residuals: ThrowResiduals::default(),
            scenario_seeds: (1..=10).map(|i| 1000 + i).collect(),
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub algo: Algorithm,
    /// Factor on the grasp-quality-map block of push-grasp observations as
    /// the networks see it. The default bounds the block's norm by 1, like
    /// the eleven scalar features next to it.
    pub map_input_scale: f64,
    pub sac: SacConfig,
    pub ddpg: DdpgConfig,
}

impl Default for AgentSection {
    fn default() -> Self {
        Self {
            algo: Algorithm::Sac,
            map_input_scale: 1.0 / GRID_SIZE as f64,
            sac: SacConfig::default(),
            ddpg: DdpgConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Episodes run by `eval` and `task3`.
    pub eval_episodes: usize,
    /// Training budget and learning-curve cadence.
    pub training: TrainConfig,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
            eval_episodes: 100,
            training: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub physics: WorldConfig,
    pub task: TaskSection,
    pub agent: AgentSection,
    pub run: RunSection,
}

fn field<E: std::fmt::Display>(name: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Config(format!("{name}: {e}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks every section before anything runs.
    pub fn validate(&self) -> Result<()> {
        self.physics.validate().map_err(field("physics"))?;
        self.task.residuals.validate().map_err(field("task.residuals"))?;
        if self.task.budget.max_pushes == 0 {
            return Err(CliError::Config("task.budget.max_pushes must be positive".into()));
        }
        let scale = self.agent.map_input_scale;
        if !(scale.is_finite() && scale > 0.0) {
            return Err(CliError::Config(format!("agent.map_input_scale must be positive, found {scale}")));
        }
        let o = &self.task.oracle;
        if o.grid_resolution < 2 || o.goals_per_axis == 0 {
            return Err(CliError::Config(
                "task.oracle: grid_resolution must be >= 2 and goals_per_axis >= 1".into(),
            ));
        }
        let [lo, hi] = o.distance_range;
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || !(o.azimuth_half_range >= 0.0) {
            return Err(CliError::Config("task.oracle: goal ranges are invalid".into()));
        }
        self.agent.sac.validate().map_err(field("agent.sac"))?;
        self.agent.ddpg.validate().map_err(field("agent.ddpg"))?;
        self.run.training.validate().map_err(field("run.training"))?;
        if self.run.training.eval_episodes == 0 {
            return Err(CliError::Config("run.training.eval_episodes must be positive".into()));
        }
        if self.run.eval_episodes == 0 {
            return Err(CliError::Config("run.eval_episodes must be positive".into()));
        }
        Ok(())
    }

    /// TOML with every default spelled out.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| CliError::Runtime(format!("serialising config: {e}")))
    }

    pub fn write_resolved(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(RESOLVED_CONFIG_FILE), self.to_toml()?)?;
        Ok(())
    }
}
