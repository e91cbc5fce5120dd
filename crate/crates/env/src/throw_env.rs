use serde::{Deserialize, Serialize};
use synergy_world::{generate_scene, simulate_throw, FlightResult, SceneState, Task, ThrowKernel, WorldConfig};

use crate::error::{EnvError, Result};
use crate::{check_action, Environment, StepInfo, StepResult, SUCCESS_REWARD};

pub const THROW_OBS_DIM: usize = 10;
pub const THROW_ACTION_DIM: usize = 4;

/// Half-ranges of the residual corrections applied to the taught kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThrowResiduals {
    pub angle: f64,
    pub duration: f64,
    pub duration_min: f64,
    pub duration_max: f64,
    pub release_fraction: f64,
    pub release_fraction_min: f64,
    pub release_fraction_max: f64,
}

impl Default for ThrowResiduals {
    fn default() -> Self {
        Self {
            angle: 30f64.to_radians(),
            duration: 0.3,
            duration_min: 0.2,
            duration_max: 1.2,
            release_fraction: 0.40,
            release_fraction_min: 0.05,
            release_fraction_max: 0.95,
        }
    }
}

impl ThrowResiduals {
    pub fn validate(&self) -> Result<()> {
        let ok = self.angle >= 0.0
            && self.duration >= 0.0
            && self.duration_min > 0.0
            && self.duration_max >= self.duration_min
            && self.release_fraction >= 0.0
            && self.release_fraction_min > 0.0
            && self.release_fraction_max < 1.0
            && self.release_fraction_max >= self.release_fraction_min;
        if ok {
            Ok(())
        } else {
            Err(EnvError::World(synergy_world::WorldError::Config(
                "throw residual ranges are inconsistent".into(),
            )))
        }
    }
}

/// Applies a residual action in `[-1, 1]^4` to the taught kernel.
/// The release time is a clamped fraction of the duration, so `t_r < τ` always.
pub fn decode_throw_action(action: &[f32], cfg: &WorldConfig, residuals: &ThrowResiduals) -> ThrowKernel {
    let a = |i: usize| (action.get(i).copied().unwrap_or(0.0) as f64).clamp(-1.0, 1.0);
    let taught = ThrowKernel::taught(cfg);
    let duration = (taught.duration + a(2) * residuals.duration).clamp(residuals.duration_min, residuals.duration_max);
    let fraction = (cfg.kernel.release_fraction + a(3) * residuals.release_fraction)
        .clamp(residuals.release_fraction_min, residuals.release_fraction_max);
    ThrowKernel {
        initial_angle: taught.initial_angle + a(0) * residuals.angle,
        final_angle: taught.final_angle + a(1) * residuals.angle,
        duration,
        release_time: fraction * duration,
        link_length: taught.link_length,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrowObservation {
    pub proprio: [f64; 2],
    pub goal: [f64; 3],
    pub dist: [f64; 3],
    pub time: [f64; 2],
}

impl ThrowObservation {
    pub fn to_vec(&self) -> Vec<f32> {
        self.proprio
            .iter()
            .chain(&self.goal)
            .chain(&self.dist)
            .chain(&self.time)
            .map(|&v| v as f32)
            .collect()
    }

    fn new(kernel: &ThrowKernel, scene: &SceneState, flight: Option<&FlightResult>) -> Self {
        let b = scene.basket;
        Self {
            proprio: [kernel.initial_angle, kernel.final_angle],
            goal: [b.x, b.y, b.z],
            dist: flight.map_or([0.0; 3], |f| [f.distance_to_goal, f.dx, f.dy]),
            time: [kernel.release_time, kernel.duration],
        }
    }
}

/// Single-step throwing MDP.
#[derive(Debug, Clone)]
pub struct ThrowEnv {
    cfg: WorldConfig,
    residuals: ThrowResiduals,
    scene: Option<SceneState>,
    terminal: bool,
    last_kernel: Option<ThrowKernel>,
    last_flight: Option<FlightResult>,
}

impl ThrowEnv {
    pub fn new(cfg: WorldConfig, residuals: ThrowResiduals) -> Result<Self> {
        cfg.validate()?;
        residuals.validate()?;
        Ok(Self {
            cfg,
            residuals,
            scene: None,
            terminal: false,
            last_kernel: None,
            last_flight: None,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn residuals(&self) -> &ThrowResiduals {
        &self.residuals
    }

    pub fn scene(&self) -> Option<&SceneState> {
        self.scene.as_ref()
    }

    pub fn last_kernel(&self) -> Option<&ThrowKernel> {
        self.last_kernel.as_ref()
    }

    pub fn last_flight(&self) -> Option<&FlightResult> {
        self.last_flight.as_ref()
    }

    /// Starts a throw from an existing scene (the object must be held).
    pub fn reset_with_scene(&mut self, scene: SceneState) -> Result<Vec<f32>> {
        scene.validate()?;
        let obs = ThrowObservation::new(&ThrowKernel::taught(&self.cfg), &scene, None);
        self.scene = Some(scene);
        self.terminal = false;
        self.last_kernel = None;
        self.last_flight = None;
        Ok(obs.to_vec())
    }
}

impl Environment for ThrowEnv {
    fn observation_dim(&self) -> usize {
        THROW_OBS_DIM
    }

    fn action_dim(&self) -> usize {
        THROW_ACTION_DIM
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        let scene = generate_scene(Task::Task2, seed, &self.cfg)?;
        self.reset_with_scene(scene)
    }

    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        if self.terminal {
            return Err(EnvError::EpisodeTerminated);
        }
        check_action(action, THROW_ACTION_DIM)?;
        let scene = self.scene.as_ref().ok_or(EnvError::NotReset)?;
        let kernel = decode_throw_action(action, &self.cfg, &self.residuals);
        let flight = simulate_throw(scene, &kernel, &self.cfg)?;
        let reward = if flight.in_basket {
            SUCCESS_REWARD
        } else {
            -flight.distance_to_goal
        };
        let observation = ThrowObservation::new(&kernel, scene, Some(&flight)).to_vec();
        self.terminal = true;
        self.last_kernel = Some(kernel);
        self.last_flight = Some(flight);
        Ok(StepResult {
            observation,
            reward,
            terminal: true,
            info: StepInfo {
                push_count: 0,
                beta: 0.0,
                success: flight.in_basket,
                landing_distance: Some(flight.distance_to_goal),
            },
        })
    }
}
