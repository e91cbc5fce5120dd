//! Exhaustive grid search over throw actions: checks that every goal in the
//! sampling annulus can be hit before any policy is trained.

use serde::{Deserialize, Serialize};
use synergy_env::{decode_throw_action, ThrowResiduals, THROW_ACTION_DIM};
use synergy_world::{generate_scene, simulate_throw, Task, WorldConfig};

use crate::config::OracleConfig;
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalFeasibility {
    /// Basket distance from the arm base, meters.
    pub distance: f64,
    /// Basket azimuth, radians.
    pub azimuth: f64,
    pub feasible: bool,
    pub in_basket_actions: usize,
    pub best_landing_distance: f64,
    pub best_action: [f32; THROW_ACTION_DIM],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub grid_resolution: usize,
    pub actions_per_goal: usize,
    pub goals: Vec<GoalFeasibility>,
}

impl FeasibilityReport {
    pub fn feasible_goals(&self) -> usize {
        self.goals.iter().filter(|g| g.feasible).count()
    }

    pub fn all_feasible(&self) -> bool {
        self.feasible_goals() == self.goals.len()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Deterministic: no randomness beyond the fixed held-object scene.
pub fn throw_feasibility(world: &WorldConfig, residuals: &ThrowResiduals, oracle: &OracleConfig) -> Result<FeasibilityReport> {
    let levels: Vec<f32> = linspace(-1.0, 1.0, oracle.grid_resolution).into_iter().map(|v| v as f32).collect();
    let mut kernels = Vec::with_capacity(levels.len().pow(4));
    for &a0 in &levels {
        for &a1 in &levels {
            for &a2 in &levels {
                for &a3 in &levels {
                    let action = [a0, a1, a2, a3];
                    kernels.push((action, decode_throw_action(&action, world, residuals)));
                }
            }
        }
    }
    let base = generate_scene(Task::Task2, 0, world)?;
    let [dlo, dhi] = oracle.distance_range;
    let distances = linspace(dlo * world.arm.reach, dhi * world.arm.reach, oracle.goals_per_axis);
    let azimuths = linspace(-oracle.azimuth_half_range, oracle.azimuth_half_range, oracle.goals_per_axis);

    let mut goals = Vec::with_capacity(distances.len() * azimuths.len());
    for &distance in &distances {
        for &azimuth in &azimuths {
            let mut scene = base.clone();
            scene.basket.x = world.arm.base_x + distance * azimuth.cos();
            scene.basket.y = world.arm.base_y + distance * azimuth.sin();
            let mut hits = 0;
            let mut best = (f64::INFINITY, [0.0f32; THROW_ACTION_DIM]);
            for (action, kernel) in &kernels {
                let flight = simulate_throw(&scene, kernel, world)?;
                hits += usize::from(flight.in_basket);
                if flight.distance_to_goal < best.0 {
                    best = (flight.distance_to_goal, *action);
                }
            }
            goals.push(GoalFeasibility {
                distance,
                azimuth,
                feasible: hits > 0,
                in_basket_actions: hits,
                best_landing_distance: best.0,
                best_action: best.1,
            });
        }
    }
    Ok(FeasibilityReport {
        grid_resolution: oracle.grid_resolution,
        actions_per_goal: kernels.len(),
        goals,
    })
}
