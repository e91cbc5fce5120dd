use std::f64::consts::{PI, TAU};

use synergy_world::{
    apply_push, decide_action, execute_grasp, generate_scene, render_quality_map, target_mask, target_out_of_workspace,
    target_quality, GraspDecision, PushCommand, QualityMap, SceneState, Task, WorldConfig, GRID_SIZE,
};

use crate::error::{EnvError, Result};
use crate::{check_action, EpisodeBudget, Environment, StepInfo, StepResult, PENALTY_REWARD, SUCCESS_REWARD};

pub const PUSH_GRASP_OBS_DIM: usize = GRID_SIZE * GRID_SIZE + 11;
pub const PUSH_ACTION_DIM: usize = 4;

/// Heights are normalised by this extent above the table.
const HEIGHT_EXTENT: f64 = 0.1;

const SHAPED_ALPHA: f64 = 0.9;
const SHAPED_NARROW: f64 = 0.001;
const SHAPED_WIDE: f64 = 0.05;

/// Reward for a push that improved the target's grasp quality to `beta`.
pub fn shaped_reward(beta: f64) -> f64 {
    let d = 1.0 - beta;
    let d2 = d * d;
    SHAPED_ALPHA * (-d2 / SHAPED_NARROW).exp() + (1.0 - SHAPED_ALPHA) * (-d2 / SHAPED_WIDE).exp()
}

/// Maps a policy action in `[-1, 1]^4` to a push; out-of-range components are clamped.
pub fn decode_push_action(action: &[f32], scene: &SceneState, cfg: &WorldConfig) -> PushCommand {
    let a = |i: usize| (action.get(i).copied().unwrap_or(0.0) as f64).clamp(-1.0, 1.0);
    let unit = |v: f64| 0.5 * (v + 1.0);
    let ws = scene.workspace;
    let mut direction = PI * (a(2) + 1.0);
    if direction >= TAU {
        direction -= TAU;
    }
    PushCommand {
        start: [
            ws.min_x + unit(a(0)) * ws.width(),
            ws.min_y + unit(a(1)) * ws.height(),
            cfg.pusher_height,
        ],
        direction,
        length: cfg.push_length_min + unit(a(3)) * (cfg.push_length_max - cfg.push_length_min),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushGraspObservation {
    pub quality_map_flat: Vec<f64>,
    pub push_point: [f64; 3],
    pub push_direction: f64,
    pub push_length: f64,
    pub target_pos: [f64; 3],
    pub beta_initial: f64,
    pub beta_after: f64,
    pub beta_delta: f64,
}

impl PushGraspObservation {
    pub fn to_vec(&self) -> Vec<f32> {
        let mut v = Vec::with_capacity(PUSH_GRASP_OBS_DIM);
        v.extend(self.quality_map_flat.iter().map(|&q| q as f32));
        v.extend(self.push_point.iter().map(|&x| x as f32));
        v.push(self.push_direction as f32);
        v.push(self.push_length as f32);
        v.extend(self.target_pos.iter().map(|&x| x as f32));
        v.extend([self.beta_initial, self.beta_after, self.beta_delta].map(|x| x as f32));
        v
    }
}

/// Singulation MDP: push until the target's grasp quality exceeds the
/// threshold, then grasp.
#[derive(Debug, Clone)]
pub struct PushGraspEnv {
    cfg: WorldConfig,
    budget: EpisodeBudget,
    scene: Option<SceneState>,
    map: Option<QualityMap>,
    observation: Option<PushGraspObservation>,
    beta_initial: f64,
    beta: f64,
    push_count: usize,
    terminal: bool,
    last_push: Option<PushCommand>,
}

impl PushGraspEnv {
    pub fn new(cfg: WorldConfig, budget: EpisodeBudget) -> Result<Self> {
        cfg.validate()?;
        if budget.max_pushes == 0 {
            return Err(EnvError::Budget("max_pushes must be at least 1".into()));
        }
        Ok(Self {
            cfg,
            budget,
            scene: None,
            map: None,
            observation: None,
            beta_initial: 0.0,
            beta: 0.0,
            push_count: 0,
            terminal: false,
            last_push: None,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.cfg
    }

    pub fn scene(&self) -> Option<&SceneState> {
        self.scene.as_ref()
    }

    pub fn quality_map(&self) -> Option<&QualityMap> {
        self.map.as_ref()
    }

    pub fn observation(&self) -> Option<&PushGraspObservation> {
        self.observation.as_ref()
    }

    pub fn push_count(&self) -> usize {
        self.push_count
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn last_push(&self) -> Option<&PushCommand> {
        self.last_push.as_ref()
    }

    /// Starts an episode from an existing cluttered scene.
    pub fn reset_with_scene(&mut self, scene: SceneState) -> Result<Vec<f32>> {
        scene.validate()?;
        let map = render_quality_map(&scene, &self.cfg.grasp);
        let beta = target_quality(&map, &target_mask(&scene));
        self.beta_initial = beta;
        self.beta = beta;
        self.push_count = 0;
        self.terminal = false;
        self.last_push = None;
        let obs = PushGraspObservation {
            quality_map_flat: map.grid.clone(),
            push_point: [0.0; 3],
            push_direction: 0.0,
            push_length: 0.0,
            target_pos: self.target_position(&scene),
            beta_initial: beta,
            beta_after: 0.0,
            beta_delta: 0.0,
        };
        let v = obs.to_vec();
        self.scene = Some(scene);
        self.map = Some(map);
        self.observation = Some(obs);
        Ok(v)
    }

    fn target_position(&self, scene: &SceneState) -> [f64; 3] {
        let ws = scene.workspace;
        let z = self.cfg.pusher_height / HEIGHT_EXTENT;
        match scene.target().or(scene.held.as_ref()) {
            Some(t) => [
                (t.center.x - ws.min_x) / ws.width(),
                (t.center.y - ws.min_y) / ws.height(),
                z,
            ],
            None => [0.0, 0.0, z],
        }
    }

    fn observe(&mut self, cmd: &PushCommand, beta_before: f64) -> Vec<f32> {
        let scene = self.scene.as_ref().expect("reset before observe");
        let map = self.map.as_ref().expect("reset before observe");
        let ws = scene.workspace;
        let cfg = &self.cfg;
        let obs = PushGraspObservation {
            quality_map_flat: map.grid.clone(),
            push_point: [
                (cmd.start[0] - ws.min_x) / ws.width(),
                (cmd.start[1] - ws.min_y) / ws.height(),
                cmd.start[2] / HEIGHT_EXTENT,
            ],
            push_direction: cmd.direction / TAU,
            push_length: (cmd.length - cfg.push_length_min) / (cfg.push_length_max - cfg.push_length_min),
            target_pos: self.target_position(scene),
            beta_initial: self.beta_initial,
            beta_after: self.beta,
            beta_delta: self.beta - beta_before,
        };
        let v = obs.to_vec();
        self.observation = Some(obs);
        v
    }
}

impl Environment for PushGraspEnv {
    fn observation_dim(&self) -> usize {
        PUSH_GRASP_OBS_DIM
    }

    fn action_dim(&self) -> usize {
        PUSH_ACTION_DIM
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f32>> {
        let scene = generate_scene(Task::Task1, seed, &self.cfg)?;
        self.reset_with_scene(scene)
    }

    fn step(&mut self, action: &[f32]) -> Result<StepResult> {
        if self.terminal {
            return Err(EnvError::EpisodeTerminated);
        }
        check_action(action, PUSH_ACTION_DIM)?;
        let scene = self.scene.as_ref().ok_or(EnvError::NotReset)?;

        let cmd = decode_push_action(action, scene, &self.cfg);
        let mut scene = apply_push(scene, &cmd, &self.cfg);
        self.push_count += 1;
        let map = render_quality_map(&scene, &self.cfg.grasp);
        let mask = target_mask(&scene);
        let beta_before = self.beta;
        let beta_after = target_quality(&map, &mask);

        let budget_spent = self.push_count >= self.budget.max_pushes;
        let mut success = false;
        let (reward, terminal) = if target_out_of_workspace(&scene) {
            (PENALTY_REWARD, true)
        } else if decide_action(beta_after, self.cfg.grasp.threshold) == GraspDecision::Grasp {
            match execute_grasp(&scene, &map, &mask, &self.cfg.grasp) {
                Ok(outcome) if outcome.success => {
                    success = true;
                    scene = outcome.scene;
                    (SUCCESS_REWARD, true)
                }
                _ => (PENALTY_REWARD, true),
            }
        } else if beta_after > beta_before {
            (shaped_reward(beta_after), budget_spent)
        } else {
            (PENALTY_REWARD, budget_spent)
        };

        self.beta = beta_after;
        self.terminal = terminal;
        self.scene = Some(scene);
        self.map = Some(map);
        self.last_push = Some(cmd);
        let observation = self.observe(&cmd, beta_before);
        Ok(StepResult {
            observation,
            reward,
            terminal,
            info: StepInfo {
                push_count: self.push_count,
                beta: beta_after,
                success,
                landing_distance: None,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shaped_reward_examples() {
        assert_eq!(shaped_reward(1.0), 1.0);
        let r = shaped_reward(0.6);
        assert!((r - 0.1 * (-3.2f64).exp()).abs() < 1e-15);
        assert!((r - 4.0762203978366211e-3).abs() < 1e-15);
    }

    #[test]
    fn decode_push_examples() {
        let cfg = WorldConfig::default();
        let scene = generate_scene(Task::Task1, 0, &cfg).unwrap();
        let ws = scene.workspace;

        let c = decode_push_action(&[0.0; 4], &scene, &cfg);
        assert!((c.start[0] - ws.center().x).abs() < 1e-15 && (c.start[1] - ws.center().y).abs() < 1e-15);
        assert_eq!(c.direction, PI);
        assert!((c.length - 0.06).abs() < 1e-15);
        assert_eq!(c.start[2], cfg.pusher_height);

        let c = decode_push_action(&[-1.0; 4], &scene, &cfg);
        assert_eq!((c.start[0], c.start[1], c.direction), (ws.min_x, ws.min_y, 0.0));
        assert!((c.length - 0.02).abs() < 1e-15);

        let c = decode_push_action(&[1.0; 4], &scene, &cfg);
        assert_eq!((c.start[0], c.start[1], c.direction), (ws.max_x, ws.max_y, 0.0));
        assert!((c.length - 0.10).abs() < 1e-15);

        let clamped = decode_push_action(&[5.0, -9.0, 3.0, 2.0], &scene, &cfg);
        assert_eq!(clamped, decode_push_action(&[1.0, -1.0, 1.0, 1.0], &scene, &cfg));
        clamped.validate(&scene, &cfg).unwrap();
    }

    #[test]
    fn reset_observation_layout() {
        let mut env = PushGraspEnv::new(WorldConfig::default(), EpisodeBudget::default()).unwrap();
        let obs = env.reset(11).unwrap();
        assert_eq!(obs.len(), 2511);
        let tail = &obs[2500..];
        assert_eq!(&tail[..5], &[0.0; 5]);
        assert!(tail[10] == 0.0 && tail[9] == 0.0);
        assert!(tail[8] < 0.7);
        assert_eq!(obs, env.reset(11).unwrap());
    }

    #[test]
    fn useless_push_is_penalised() {
        let mut env = PushGraspEnv::new(WorldConfig::default(), EpisodeBudget::default()).unwrap();
        env.reset(3).unwrap();
        // Shortest push from the workspace corner, pointing away from the table.
        let r = env.step(&[-1.0, -1.0, 0.5, -1.0]).unwrap();
        assert_eq!(r.reward, PENALTY_REWARD);
        assert!(!r.terminal);
        assert_eq!(r.info.push_count, 1);
    }

    #[test]
    fn step_before_reset_and_after_terminal_is_rejected() {
        let mut env = PushGraspEnv::new(WorldConfig::default(), EpisodeBudget { max_pushes: 1 }).unwrap();
        assert!(matches!(env.step(&[0.0; 4]), Err(EnvError::NotReset)));
        env.reset(0).unwrap();
        assert!(matches!(env.step(&[0.0; 3]), Err(EnvError::ActionDim { .. })));
        assert!(matches!(env.step(&[0.0, f32::NAN, 0.0, 0.0]), Err(EnvError::NonFiniteAction(1))));
        let r = env.step(&[-1.0, -1.0, 0.5, -1.0]).unwrap();
        assert!(r.terminal);
        assert!(matches!(env.step(&[0.0; 4]), Err(EnvError::EpisodeTerminated)));
    }

    #[test]
    fn zero_budget_is_rejected() {
        assert!(PushGraspEnv::new(WorldConfig::default(), EpisodeBudget { max_pushes: 0 }).is_err());
    }
}
