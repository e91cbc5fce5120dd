//! Deterministic planar tabletop world.
//!
//! Objects are discs on a square workspace seen from above. Pushes are
//! quasi-static sweeps of a cylindrical pusher; throws come from a single
//! revolute shoulder whose throw plane is yawed toward the basket, followed
//! by drag-free ballistic flight. The [`grasp`] module scores top-down
//! antipodal grasps on a 50×50 grid over the workspace.

pub mod config;
pub mod geometry;
pub mod grasp;
pub mod push;
pub mod scene;
pub mod throw;

mod error;

pub use config::{ArmConfig, BasketConfig, GraspConfig, KernelConfig, WorldConfig};
pub use error::{Result, WorldError};
pub use geometry::{Rect, Vec2};
pub use grasp::{
    decide_action, execute_grasp, render_quality_map, target_mask, target_quality, GraspDecision,
    GraspOutcome, QualityMap, TargetMask, GRID_SIZE,
};
pub use push::{apply_push, PushCommand};
pub use scene::{generate_scene, target_out_of_workspace, ArmBase, Basket, Disc, SceneSnapshot, SceneState, Task};
pub use throw::{
    project_flight, shoulder_profile, simulate_throw, throw_trajectory, write_trajectory_csv, FlightResult,
    ReleaseState, ThrowKernel, TrajectorySample,
};
