use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::WorldConfig;
use crate::error::{Result, WorldError};
use crate::geometry::{Rect, Vec2};
use crate::grasp::{render_quality_map, target_mask, target_quality};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Singulate a cluttered target until it is graspable.
    Task1,
    /// Throw a held object into a basket in front of the arm.
    Task2,
    /// Singulate, grasp, then throw beyond the arm's reach.
    Task3,
}

impl std::str::FromStr for Task {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "task1" => Ok(Task::Task1),
            "task2" => Ok(Task::Task2),
            "task3" => Ok(Task::Task3),
            other => Err(format!("unknown task `{other}` (expected task1, task2 or task3)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc {
    pub id: u32,
    pub center: Vec2,
    pub radius: f64,
}

/// Basket rim centre and the radius of the cylinder fitted inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basket {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmBase {
    pub x: f64,
    pub y: f64,
    pub shoulder_height: f64,
}

impl ArmBase {
    pub fn xy(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneState {
    pub objects: Vec<Disc>,
    pub target_id: u32,
    /// Object currently in the gripper, if any.
    pub held: Option<Disc>,
    pub workspace: Rect,
    pub basket: Basket,
    pub arm_base: ArmBase,
    pub pusher_radius: f64,
}

impl SceneState {
    pub fn target(&self) -> Option<&Disc> {
        self.objects.iter().find(|d| d.id == self.target_id)
    }

    pub fn validate(&self) -> Result<()> {
        let on_table = self.objects.iter().any(|d| d.id == self.target_id);
        let held = self.held.map(|d| d.id == self.target_id).unwrap_or(false);
        if !on_table && !held {
            return Err(WorldError::Scene(format!("target id {} does not exist", self.target_id)));
        }
        if let Some(d) = self.objects.iter().chain(self.held.iter()).find(|d| !(d.radius > 0.0)) {
            return Err(WorldError::Scene(format!("object {} has non-positive radius", d.id)));
        }
        if !self.workspace.is_valid() {
            return Err(WorldError::Scene("workspace must have positive area".into()));
        }
        if !(self.basket.radius > 0.0) {
            return Err(WorldError::Scene("basket radius must be positive".into()));
        }
        if !(self.pusher_radius > 0.0) {
            return Err(WorldError::Scene("pusher radius must be positive".into()));
        }
        Ok(())
    }

    /// Distance in the horizontal plane from the arm base to the basket centre.
    pub fn basket_distance(&self) -> f64 {
        (Vec2::new(self.basket.x, self.basket.y) - self.arm_base.xy()).norm()
    }

    /// Same scene rotated by a quarter turn about the workspace centre.
    pub fn rotated_quarter_turn(&self) -> SceneState {
        let c = self.workspace.center();
        let rot = |p: Vec2| {
            let d = p - c;
            c + Vec2::new(-d.y, d.x)
        };
        let mut out = self.clone();
        for d in &mut out.objects {
            d.center = rot(d.center);
        }
        out
    }
}

/// JSON snapshot of a scene with its units spelled out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSnapshot {
    pub length_unit: String,
    pub angle_unit: String,
    pub scene: SceneState,
}

impl SceneSnapshot {
    pub fn new(scene: SceneState) -> Self {
        Self {
            length_unit: "m".into(),
            angle_unit: "rad".into(),
            scene,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let snap: SceneSnapshot = serde_json::from_str(s)?;
        if snap.length_unit != "m" || snap.angle_unit != "rad" {
            return Err(WorldError::Scene(format!(
                "unsupported units {}/{}",
                snap.length_unit, snap.angle_unit
            )));
        }
        snap.scene.validate()?;
        Ok(snap)
    }
}

/// True iff the target centre lies outside the closed workspace rectangle.
/// A held or removed target is never out of the workspace.
pub fn target_out_of_workspace(scene: &SceneState) -> bool {
    scene.target().map(|t| !scene.workspace.contains(t.center)).unwrap_or(false)
}

const ATTEMPTS_PER_ROUND: usize = 100;
const ROUNDS: usize = 10;
pub const TARGET_ID: u32 = 0;

fn round_seed(seed: u64, round: usize) -> u64 {
    // splitmix64 finaliser over (seed, round)
    let mut z = seed ^ (round as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sample_basket(rng: &mut ChaCha8Rng, cfg: &WorldConfig, range: (f64, f64), azimuth: (f64, f64), mirror: bool) -> Basket {
    let dist = rng.random_range(range.0..=range.1) * cfg.arm.reach;
    let mut az = rng.random_range(azimuth.0..=azimuth.1);
    if mirror && rng.random_bool(0.5) {
        az = -az;
    }
    Basket {
        x: cfg.arm.base_x + dist * az.cos(),
        y: cfg.arm.base_y + dist * az.sin(),
        z: cfg.basket.rim_height,
        radius: cfg.basket.radius,
    }
}

fn arm_base(cfg: &WorldConfig) -> ArmBase {
    ArmBase {
        x: cfg.arm.base_x,
        y: cfg.arm.base_y,
        shoulder_height: cfg.arm.shoulder_height,
    }
}

/// Basket distance range for throwing tasks, as multiples of the arm reach.
pub fn basket_range(task: Task) -> (f64, f64) {
    match task {
        Task::Task1 => (0.6, 1.0),
        Task::Task2 => (0.8, 1.6),
        Task::Task3 => (1.05, 1.6),
    }
}

/// Basket azimuth half-range around the arm's forward (+x) axis.
pub const THROW_AZIMUTH: f64 = PI / 6.0;

fn try_cluttered_scene(rng: &mut ChaCha8Rng, cfg: &WorldConfig, task: Task) -> std::result::Result<SceneState, &'static str> {
    let ws = cfg.workspace;
    let c = ws.center();
    let target_r = rng.random_range(cfg.object_radius_min..=cfg.object_radius_max);
    let target = Vec2::new(
        c.x + rng.random_range(-0.3..=0.3) * ws.width(),
        c.y + rng.random_range(-0.3..=0.3) * ws.height(),
    );
    let mut objects = vec![Disc {
        id: TARGET_ID,
        center: target,
        radius: target_r,
    }];
    let n = rng.random_range(cfg.neighbors_min..=cfg.neighbors_max);
    let phase = rng.random_range(0.0..TAU);
    let sector = TAU / n as f64;
    for k in 0..n {
        let angle = phase + sector * (k as f64 + rng.random_range(-0.25..=0.25));
        let r = rng.random_range(cfg.object_radius_min..=cfg.object_radius_max);
        let gap = rng.random_range(0.0..=cfg.neighbor_gap_max);
        let center = target + Vec2::from_angle(angle) * (target_r + gap + r);
        if !ws.contains_disc(center, r) {
            return Err("surrounding disc inside workspace");
        }
        if objects.iter().any(|o| (o.center - center).norm() < o.radius + r) {
            return Err("surrounding discs non-overlapping");
        }
        objects.push(Disc {
            id: k as u32 + 1,
            center,
            radius: r,
        });
    }
    let basket = match task {
        Task::Task1 => sample_basket(rng, cfg, basket_range(task), (PI / 3.0, PI / 2.0), true),
        _ => sample_basket(rng, cfg, basket_range(task), (-THROW_AZIMUTH, THROW_AZIMUTH), false),
    };
    let scene = SceneState {
        objects,
        target_id: TARGET_ID,
        held: None,
        workspace: ws,
        basket,
        arm_base: arm_base(cfg),
        pusher_radius: cfg.pusher_radius,
    };
    let map = render_quality_map(&scene, &cfg.grasp);
    let beta = target_quality(&map, &target_mask(&scene));
    if beta >= cfg.grasp.threshold {
        return Err("target ungraspable at reset (quality < threshold)");
    }
    Ok(scene)
}

/// Samples a scene for `task`, deterministic in `seed`.
pub fn generate_scene(task: Task, seed: u64, cfg: &WorldConfig) -> Result<SceneState> {
    cfg.validate()?;
    if task == Task::Task2 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radius = rng.random_range(cfg.object_radius_min..=cfg.object_radius_max);
        let basket = sample_basket(&mut rng, cfg, basket_range(task), (-THROW_AZIMUTH, THROW_AZIMUTH), false);
        return Ok(SceneState {
            objects: Vec::new(),
            target_id: TARGET_ID,
            held: Some(Disc {
                id: TARGET_ID,
                center: Vec2::new(cfg.arm.base_x, cfg.arm.base_y),
                radius,
            }),
            workspace: cfg.workspace,
            basket,
            arm_base: arm_base(cfg),
            pusher_radius: cfg.pusher_radius,
        });
    }
    let mut failures: BTreeMap<&'static str, usize> = BTreeMap::new();
    for round in 0..ROUNDS {
        let mut rng = ChaCha8Rng::seed_from_u64(round_seed(seed, round));
        for _ in 0..ATTEMPTS_PER_ROUND {
            match try_cluttered_scene(&mut rng, cfg, task) {
                Ok(scene) => return Ok(scene),
                Err(why) => *failures.entry(why).or_default() += 1,
            }
        }
    }
    let constraint = failures
        .iter()
        .max_by_key(|(_, &n)| n)
        .map(|(k, _)| k.to_string())
        .unwrap_or_default();
    Err(WorldError::GenerationExhausted {
        attempts: ROUNDS * ATTEMPTS_PER_ROUND,
        constraint,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scene() {
        let cfg = WorldConfig::default();
        for task in [Task::Task1, Task::Task2, Task::Task3] {
            assert_eq!(generate_scene(task, 7, &cfg).unwrap(), generate_scene(task, 7, &cfg).unwrap());
        }
        assert_ne!(
            generate_scene(Task::Task1, 7, &cfg).unwrap(),
            generate_scene(Task::Task1, 8, &cfg).unwrap()
        );
    }

    #[test]
    fn cluttered_scenes_start_ungraspable() {
        let cfg = WorldConfig::default();
        for seed in 0..50 {
            let scene = generate_scene(Task::Task1, seed, &cfg).unwrap();
            scene.validate().unwrap();
            let beta = target_quality(&render_quality_map(&scene, &cfg.grasp), &target_mask(&scene));
            assert!(beta < 0.7, "seed {seed}: beta {beta}");
            assert!((5..=8).contains(&scene.objects.len()));
        }
    }

    #[test]
    fn task3_basket_lies_in_annulus() {
        let cfg = WorldConfig::default();
        for seed in 0..1000 {
            let scene = generate_scene(Task::Task3, seed, &cfg).unwrap();
            let d = scene.basket_distance() / cfg.arm.reach;
            assert!((1.05 - 1e-12..=1.6 + 1e-12).contains(&d), "seed {seed}: {d}");
            let az = scene.basket.y.atan2(scene.basket.x);
            assert!(az.abs() <= THROW_AZIMUTH + 1e-12);
        }
    }

    #[test]
    fn task2_holds_the_target() {
        let scene = generate_scene(Task::Task2, 3, &WorldConfig::default()).unwrap();
        assert!(scene.objects.is_empty());
        assert_eq!(scene.held.unwrap().id, scene.target_id);
        scene.validate().unwrap();
        let d = scene.basket_distance() / 0.9;
        assert!((0.8..=1.6).contains(&d));
    }

    #[test]
    fn impossible_constraints_name_the_failure() {
        let mut cfg = WorldConfig::default();
        cfg.neighbors_min = 30;
        cfg.neighbors_max = 30;
        match generate_scene(Task::Task1, 0, &cfg) {
            Err(WorldError::GenerationExhausted { constraint, .. }) => {
                assert!(constraint.contains("non-overlapping"), "{constraint}")
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn out_of_workspace_uses_closed_centre_test() {
        let cfg = WorldConfig::default();
        let mut scene = generate_scene(Task::Task1, 0, &cfg).unwrap();
        let ws = scene.workspace;
        let set = |s: &mut SceneState, p: Vec2| s.objects[0].center = p;
        set(&mut scene, ws.center());
        assert!(!target_out_of_workspace(&scene));
        set(&mut scene, Vec2::new(ws.max_x + 0.001, 0.0));
        assert!(target_out_of_workspace(&scene));
        set(&mut scene, Vec2::new(ws.max_x, 0.0));
        assert!(!target_out_of_workspace(&scene));
    }

    #[test]
    fn snapshot_round_trips_with_units() {
        let scene = generate_scene(Task::Task3, 5, &WorldConfig::default()).unwrap();
        let json = SceneSnapshot::new(scene.clone()).to_json().unwrap();
        assert!(json.contains("\"length_unit\": \"m\""));
        assert_eq!(SceneSnapshot::from_json(&json).unwrap().scene, scene);
    }

    #[test]
    fn validation_catches_missing_target() {
        let mut scene = generate_scene(Task::Task1, 1, &WorldConfig::default()).unwrap();
        scene.target_id = 99;
        assert!(scene.validate().is_err());
    }
}
