//! Single-link throwing arm and ballistic flight.
//!
//! The shoulder follows a cubic smoothstep from `initial_angle` to
//! `final_angle`. The throw plane is the vertical plane through the arm base
//! and the basket centre; angles are measured from the horizontal in that
//! plane, positive upward.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::WorldConfig;
use crate::error::{Result, WorldError};
use crate::geometry::Vec2;
use crate::scene::{Basket, SceneState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrowKernel {
    pub initial_angle: f64,
    pub final_angle: f64,
    pub duration: f64,
    pub release_time: f64,
    pub link_length: f64,
}

impl ThrowKernel {
    /// The taught kernel from the world configuration.
    pub fn taught(cfg: &WorldConfig) -> Self {
        Self {
            initial_angle: cfg.kernel.initial_angle,
            final_angle: cfg.kernel.final_angle,
            duration: cfg.kernel.duration,
            release_time: cfg.kernel.release_fraction * cfg.kernel.duration,
            link_length: cfg.arm.link_length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.initial_angle, self.final_angle, self.duration, self.release_time, self.link_length]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(WorldError::Kernel("non-finite field".into()));
        }
        if !(self.release_time > 0.0 && self.release_time < self.duration) {
            return Err(WorldError::Kernel(format!(
                "release time {} must satisfy 0 < t_r < {}",
                self.release_time, self.duration
            )));
        }
        if self.initial_angle == self.final_angle {
            return Err(WorldError::Kernel("initial and final angles coincide".into()));
        }
        if !(self.link_length > 0.0) {
            return Err(WorldError::Kernel("link length must be positive".into()));
        }
        Ok(())
    }
}

/// Shoulder angle and angular velocity at time `t`.
pub fn shoulder_profile(kernel: &ThrowKernel, t: f64) -> Result<(f64, f64)> {
    kernel.validate()?;
    if !(0.0..=kernel.duration).contains(&t) {
        return Err(WorldError::TimeOutOfRange {
            t,
            duration: kernel.duration,
        });
    }
    let u = t / kernel.duration;
    let sweep = kernel.final_angle - kernel.initial_angle;
    let angle = kernel.initial_angle + sweep * (3.0 * u * u - 2.0 * u * u * u);
    let velocity = sweep * (6.0 * u - 6.0 * u * u) / kernel.duration;
    Ok((angle, velocity))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReleaseState {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlightResult {
    pub landing: [f64; 2],
    /// Height of the plane the landing point was computed on (rim or ground).
    pub landing_height: f64,
    pub release: ReleaseState,
    pub flight_time: f64,
    /// Whether the object came down through the rim plane.
    pub crossed_rim: bool,
    pub in_basket: bool,
    pub distance_to_goal: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Later root of `z0 + vz·t − g·t²/2 = h`, if that root is not in the past.
fn descending_crossing(z0: f64, vz: f64, g: f64, h: f64) -> Option<f64> {
    let disc = vz * vz - 2.0 * g * (h - z0);
    if disc < 0.0 {
        return None;
    }
    let t = (vz + disc.sqrt()) / g;
    (t >= 0.0).then_some(t)
}

/// Drag-free flight from `release` until the object comes down through the
/// basket rim plane, or the ground plane when it never does.
pub fn project_flight(release: ReleaseState, basket: &Basket, gravity: f64) -> FlightResult {
    let [x0, y0, z0] = release.position;
    let [vx, vy, vz] = release.velocity;
    let (t, height, crossed) = match descending_crossing(z0, vz, gravity, basket.z) {
        Some(t) => (t, basket.z, true),
        None => (descending_crossing(z0, vz, gravity, 0.0).unwrap_or(0.0), 0.0, false),
    };
    let landing = [x0 + vx * t, y0 + vy * t];
    let dx = landing[0] - basket.x;
    let dy = landing[1] - basket.y;
    let distance = dx.hypot(dy);
    FlightResult {
        landing,
        landing_height: height,
        release,
        flight_time: t,
        crossed_rim: crossed,
        in_basket: crossed && distance <= basket.radius,
        distance_to_goal: distance,
        dx,
        dy,
    }
}

/// Unit horizontal vector from the arm base toward the basket.
pub fn throw_heading(scene: &SceneState) -> Vec2 {
    let d = Vec2::new(scene.basket.x, scene.basket.y) - scene.arm_base.xy();
    let n = d.norm();
    if n > 1e-12 {
        d * (1.0 / n)
    } else {
        Vec2::new(1.0, 0.0)
    }
}

fn end_effector(scene: &SceneState, kernel: &ThrowKernel, angle: f64, rate: f64) -> ReleaseState {
    let u = throw_heading(scene);
    let base = scene.arm_base;
    let (s, c) = angle.sin_cos();
    let l = kernel.link_length;
    ReleaseState {
        position: [base.x + l * c * u.x, base.y + l * c * u.y, base.shoulder_height + l * s],
        velocity: [-l * rate * s * u.x, -l * rate * s * u.y, l * rate * c],
    }
}

pub fn release_state(scene: &SceneState, kernel: &ThrowKernel) -> Result<ReleaseState> {
    let (angle, rate) = shoulder_profile(kernel, kernel.release_time)?;
    Ok(end_effector(scene, kernel, angle, rate))
}

pub fn simulate_throw(scene: &SceneState, kernel: &ThrowKernel, cfg: &WorldConfig) -> Result<FlightResult> {
    let release = release_state(scene, kernel)?;
    Ok(project_flight(release, &scene.basket, cfg.gravity))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub angle: f64,
    pub rate: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Object trajectory at `dt` resolution: carried by the arm until release,
/// ballistic afterwards. The joint columns keep following the profile until
/// the trajectory ends and then hold the final angle.
pub fn throw_trajectory(scene: &SceneState, kernel: &ThrowKernel, cfg: &WorldConfig, dt: f64) -> Result<Vec<TrajectorySample>> {
    let flight = simulate_throw(scene, kernel, cfg)?;
    let end = kernel.duration.max(kernel.release_time + flight.flight_time);
    let n = (end / dt).floor() as usize;
    let mut out = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        let (angle, rate) = shoulder_profile(kernel, t.min(kernel.duration))?;
        let pos = if t <= kernel.release_time {
            end_effector(scene, kernel, angle, rate).position
        } else {
            let s = (t - kernel.release_time).min(flight.flight_time);
            let r = flight.release;
            [
                r.position[0] + r.velocity[0] * s,
                r.position[1] + r.velocity[1] * s,
                r.position[2] + r.velocity[2] * s - 0.5 * cfg.gravity * s * s,
            ]
        };
        out.push(TrajectorySample {
            t,
            angle,
            rate,
            x: pos[0],
            y: pos[1],
            z: pos[2],
        });
    }
    Ok(out)
}

pub fn write_trajectory_csv<W: Write>(mut w: W, samples: &[TrajectorySample]) -> std::io::Result<()> {
    writeln!(w, "t,j,omega,x,y,z")?;
    for s in samples {
        writeln!(w, "{:.3},{},{},{},{},{}", s.t, s.angle, s.rate, s.x, s.y, s.z)?;
    }
    Ok(())
}
