//! Physical and geometric constants of the world. All lengths in meters,
//! angles in radians, times in seconds.

use serde::{Deserialize, Serialize};

use crate::error::{Result, WorldError};
use crate::geometry::Rect;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArmConfig {
    pub base_x: f64,
    pub base_y: f64,
    pub shoulder_height: f64,
    pub link_length: f64,
    /// Distance from the base to the farthest graspable point.
    pub reach: f64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        Self {
            base_x: 0.0,
            base_y: 0.0,
            shoulder_height: 0.4,
            link_length: 0.8,
            reach: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BasketConfig {
    pub rim_height: f64,
    pub radius: f64,
}

impl Default for BasketConfig {
    fn default() -> Self {
        Self {
            rim_height: 0.1,
            radius: 0.10,
        }
    }
}

/// The taught throwing kernel the throw policy adjusts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub initial_angle: f64,
    pub final_angle: f64,
    pub duration: f64,
    /// Release time as a fraction of the duration.
    pub release_fraction: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            initial_angle: (-45.0f64).to_radians(),
            final_angle: 60.0f64.to_radians(),
            duration: 0.6,
            release_fraction: 0.45,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraspConfig {
    pub finger_width: f64,
    pub finger_depth: f64,
    pub standoff: f64,
    pub orientations: usize,
    pub threshold: f64,
}

impl Default for GraspConfig {
    fn default() -> Self {
        Self {
            finger_width: 0.015,
            finger_depth: 0.02,
            standoff: 0.002,
            orientations: 8,
            threshold: 0.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WorldConfig {
    pub workspace: Rect,
    pub object_radius_min: f64,
    pub object_radius_max: f64,
    pub neighbors_min: usize,
    pub neighbors_max: usize,
    /// Upper bound on the gap between the target and each surrounding disc.
    pub neighbor_gap_max: f64,
    pub pusher_radius: f64,
    pub pusher_height: f64,
    pub push_length_min: f64,
    pub push_length_max: f64,
    pub push_step: f64,
    pub gravity: f64,
    pub arm: ArmConfig,
    pub basket: BasketConfig,
    pub kernel: KernelConfig,
    pub grasp: GraspConfig,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            workspace: Rect {
                min_x: 0.3,
                min_y: -0.25,
                max_x: 0.8,
                max_y: 0.25,
            },
            object_radius_min: 0.02,
            object_radius_max: 0.03,
            neighbors_min: 4,
            neighbors_max: 7,
            neighbor_gap_max: 0.012,
            pusher_radius: 0.01,
            pusher_height: 0.02,
            push_length_min: 0.02,
            push_length_max: 0.10,
            push_step: 0.002,
            gravity: 9.81,
            arm: ArmConfig::default(),
            basket: BasketConfig::default(),
            kernel: KernelConfig::default(),
            grasp: GraspConfig::default(),
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(WorldError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.workspace.is_valid() {
            return Err(WorldError::Config("workspace must have positive area".into()));
        }
        if (self.workspace.width() - self.workspace.height()).abs() > 1e-12 {
            return Err(WorldError::Config(format!(
                "workspace must be square for the 50x50 grid, got {} x {}",
                self.workspace.width(),
                self.workspace.height()
            )));
        }
        positive("object_radius_min", self.object_radius_min)?;
        if self.object_radius_max < self.object_radius_min {
            return Err(WorldError::Config("object_radius_max < object_radius_min".into()));
        }
        if self.neighbors_min == 0 || self.neighbors_max < self.neighbors_min {
            return Err(WorldError::Config("neighbor count range is empty".into()));
        }
        if !(self.neighbor_gap_max >= 0.0) {
            return Err(WorldError::Config("neighbor_gap_max must be non-negative".into()));
        }
        positive("pusher_radius", self.pusher_radius)?;
        positive("pusher_height", self.pusher_height)?;
        positive("push_length_min", self.push_length_min)?;
        positive("push_step", self.push_step)?;
        if self.push_length_max < self.push_length_min {
            return Err(WorldError::Config("push_length_max < push_length_min".into()));
        }
        positive("gravity", self.gravity)?;
        positive("arm.link_length", self.arm.link_length)?;
        positive("arm.reach", self.arm.reach)?;
        positive("basket.radius", self.basket.radius)?;
        if !self.basket.rim_height.is_finite() || !self.arm.shoulder_height.is_finite() {
            return Err(WorldError::Config("heights must be finite".into()));
        }
        positive("kernel.duration", self.kernel.duration)?;
        if !(self.kernel.release_fraction > 0.0 && self.kernel.release_fraction < 1.0) {
            return Err(WorldError::Config("kernel.release_fraction must lie in (0, 1)".into()));
        }
        if self.kernel.initial_angle == self.kernel.final_angle {
            return Err(WorldError::Config("kernel angles must differ".into()));
        }
        positive("grasp.finger_width", self.grasp.finger_width)?;
        positive("grasp.finger_depth", self.grasp.finger_depth)?;
        if self.grasp.standoff < 0.0 || self.grasp.orientations == 0 {
            return Err(WorldError::Config("grasp standoff/orientations invalid".into()));
        }
        if !(0.0..1.0).contains(&self.grasp.threshold) {
            return Err(WorldError::Config("grasp.threshold must lie in [0, 1)".into()));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> f64 {
        self.workspace.width() / crate::grasp::GRID_SIZE as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_give_centimetre_cells() {
        let cfg = WorldConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.cell_size() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_overrides() {
        let mut cfg = WorldConfig::default();
        cfg.basket.radius = 0.0;
        assert!(cfg.validate().unwrap_err().to_string().contains("basket.radius"));

        let mut cfg = WorldConfig::default();
        cfg.workspace.max_x = cfg.workspace.min_x;
        assert!(cfg.validate().is_err());

        let mut cfg = WorldConfig::default();
        cfg.kernel.release_fraction = 1.0;
        assert!(cfg.validate().is_err());
    }
}
