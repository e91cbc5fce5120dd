//! Quasi-static pushing: a cylindrical pusher is swept across the table and
//! every overlap it creates is removed by projection.

use serde::{Deserialize, Serialize};

use crate::config::WorldConfig;
use crate::error::{Result, WorldError};
use crate::geometry::Vec2;
use crate::scene::{Disc, SceneState};

/// Overlap below which the projection is considered converged.
pub const OVERLAP_TOLERANCE: f64 = 1e-4;
const MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushCommand {
    pub start: [f64; 3],
    /// Radians in [0, 2π).
    pub direction: f64,
    pub length: f64,
}

impl PushCommand {
    pub fn start_xy(&self) -> Vec2 {
        Vec2::new(self.start[0], self.start[1])
    }

    pub fn validate(&self, scene: &SceneState, cfg: &WorldConfig) -> Result<()> {
        let tol = 1e-12;
        if !(self.length >= cfg.push_length_min - tol && self.length <= cfg.push_length_max + tol) {
            return Err(WorldError::Push(format!(
                "length {} outside [{}, {}]",
                self.length, cfg.push_length_min, cfg.push_length_max
            )));
        }
        if !scene.workspace.contains(self.start_xy()) {
            return Err(WorldError::Push("start point outside workspace".into()));
        }
        if !(self.direction >= 0.0 && self.direction < std::f64::consts::TAU) {
            return Err(WorldError::Push(format!("direction {} outside [0, 2π)", self.direction)));
        }
        if (self.start[2] - cfg.pusher_height).abs() > tol {
            return Err(WorldError::Push("start height must equal the pusher plane".into()));
        }
        Ok(())
    }
}

fn max_overlap(objects: &[Disc], pusher: Vec2, pusher_radius: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in objects.iter().enumerate() {
        worst = worst.max(pusher_radius + a.radius - (a.center - pusher).norm());
        for b in &objects[i + 1..] {
            worst = worst.max(a.radius + b.radius - (a.center - b.center).norm());
        }
    }
    worst
}

/// Unit normal from `from` to `to`, falling back to `fallback` when coincident.
fn normal(from: Vec2, to: Vec2, fallback: Vec2) -> (Vec2, f64) {
    let d = to - from;
    let dist = d.norm();
    if dist > 1e-12 {
        (d * (1.0 / dist), dist)
    } else {
        (fallback, dist)
    }
}

/// Removes overlaps created by the pusher at `pusher`. Returns whether anything moved.
fn resolve(objects: &mut [Disc], pusher: Vec2, pusher_radius: f64, heading: Vec2) -> bool {
    let touched = objects
        .iter()
        .any(|o| pusher_radius + o.radius - (o.center - pusher).norm() > 0.0);
    if !touched {
        return false;
    }
    for _ in 0..MAX_ITERATIONS {
        for o in objects.iter_mut() {
            let (n, dist) = normal(pusher, o.center, heading);
            let overlap = pusher_radius + o.radius - dist;
            if overlap > 0.0 {
                o.center += n * overlap;
            }
        }
        for i in 0..objects.len() {
            for j in i + 1..objects.len() {
                let (n, dist) = normal(objects[i].center, objects[j].center, heading.perp());
                let overlap = objects[i].radius + objects[j].radius - dist;
                if overlap > 0.0 {
                    objects[i].center -= n * (0.5 * overlap);
                    objects[j].center += n * (0.5 * overlap);
                }
            }
        }
        if max_overlap(objects, pusher, pusher_radius) < OVERLAP_TOLERANCE {
            break;
        }
    }
    true
}

/// Sweeps the pusher from `cmd.start` along `cmd.direction` for `cmd.length`
/// in steps of `cfg.push_step`. Objects may leave the workspace.
pub fn apply_push(scene: &SceneState, cmd: &PushCommand, cfg: &WorldConfig) -> SceneState {
    let mut out = scene.clone();
    let heading = Vec2::from_angle(cmd.direction);
    let start = cmd.start_xy();
    let steps = (cmd.length / cfg.push_step).ceil().max(0.0) as usize;
    for k in 0..=steps {
        let travelled = (k as f64 * cfg.push_step).min(cmd.length);
        resolve(&mut out.objects, start + heading * travelled, out.pusher_radius, heading);
    }
    out
}

/// Pusher position at the end of a sweep.
pub fn push_end(cmd: &PushCommand) -> Vec2 {
    cmd.start_xy() + Vec2::from_angle(cmd.direction) * cmd.length
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rect;
    use crate::scene::{ArmBase, Basket};

    fn scene_with(objects: Vec<Disc>) -> SceneState {
        SceneState {
            objects,
            target_id: 0,
            held: None,
            workspace: Rect {
                min_x: 0.3,
                min_y: -0.25,
                max_x: 0.8,
                max_y: 0.25,
            },
            basket: Basket {
                x: 1.2,
                y: 0.0,
                z: 0.1,
                radius: 0.1,
            },
            arm_base: ArmBase {
                x: 0.0,
                y: 0.0,
                shoulder_height: 0.4,
            },
            pusher_radius: 0.01,
        }
    }

    fn disc(id: u32, x: f64, y: f64, r: f64) -> Disc {
        Disc {
            id,
            center: Vec2::new(x, y),
            radius: r,
        }
    }

    fn cmd(x: f64, y: f64, direction: f64, length: f64) -> PushCommand {
        PushCommand {
            start: [x, y, 0.02],
            direction,
            length,
        }
    }

    #[test]
    fn missing_everything_leaves_scene_unchanged() {
        let scene = scene_with(vec![disc(0, 0.55, 0.0, 0.025)]);
        let out = apply_push(&scene, &cmd(0.35, 0.15, 0.0, 0.1), &WorldConfig::default());
        assert_eq!(out, scene);
    }

    #[test]
    fn single_contact_translates_by_overshoot() {
        // Contact occurs after 0.1 − 0.035 = 0.065 m of travel.
        let scene = scene_with(vec![disc(0, 0.5, 0.0, 0.025)]);
        let out = apply_push(&scene, &cmd(0.4, 0.0, 0.0, 0.065 + 0.05), &WorldConfig {
            push_length_max: 0.2,
            ..WorldConfig::default()
        });
        let moved = out.objects[0].center - scene.objects[0].center;
        assert!((moved.x - 0.05).abs() < 1e-12, "{moved:?}");
        assert!(moved.y.abs() < 1e-12);
    }

    #[test]
    fn tangent_pair_moves_without_interpenetration() {
        let scene = scene_with(vec![disc(0, 0.5, 0.0, 0.025), disc(1, 0.55, 0.0, 0.025)]);
        let c = cmd(0.44, 0.0, 0.0, 0.08);
        let out = apply_push(&scene, &c, &WorldConfig::default());
        assert!(out.objects[0].center.x > 0.5 && out.objects[1].center.x > 0.55);
        let gap = (out.objects[1].center - out.objects[0].center).norm() - 0.05;
        assert!(gap >= -OVERLAP_TOLERANCE, "gap {gap}");
        let pusher = push_end(&c);
        for o in &out.objects {
            assert!((o.center - pusher).norm() - o.radius - 0.01 >= -OVERLAP_TOLERANCE);
        }
    }

    #[test]
    fn validation_enforces_ranges() {
        let scene = scene_with(vec![disc(0, 0.5, 0.0, 0.025)]);
        let cfg = WorldConfig::default();
        assert!(cmd(0.5, 0.0, 1.0, 0.05).validate(&scene, &cfg).is_ok());
        assert!(cmd(0.5, 0.0, 1.0, 0.5).validate(&scene, &cfg).is_err());
        assert!(cmd(0.1, 0.0, 1.0, 0.05).validate(&scene, &cfg).is_err());
        assert!(cmd(0.5, 0.0, 7.0, 0.05).validate(&scene, &cfg).is_err());
    }
}
