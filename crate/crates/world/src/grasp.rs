//! Object-agnostic top-down grasp quality over a 50×50 grid.
//!
//! For every cell centre lying on an object, a parallel-jaw grasp is tried at
//! `orientations` evenly spaced axes in [0, π). Each finger sweeps a
//! rectangular zone `finger_depth` deep and `finger_width` wide whose inner
//! edge sits `radius + standoff` from the cell centre on either side. A zone's
//! clearance is the free depth from its inner edge to the nearest obstruction
//! (another disc or the outside of the workspace), as a fraction of
//! `finger_depth`. Quality is `min(clearance of both zones) × centre score`,
//! where the centre score falls linearly from 1 at the object's centre to 0
//! at its rim.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::GraspConfig;
use crate::error::{Result, WorldError};
use crate::geometry::{Rect, Vec2};
use crate::scene::{Disc, SceneState};

pub const GRID_SIZE: usize = 50;
const CELLS: usize = GRID_SIZE * GRID_SIZE;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityMap {
    /// Row-major; row 0 is the top (max y) row, column 0 the min-x column.
    pub grid: Vec<f64>,
    pub best_angle: Vec<f64>,
    pub cell_size: f64,
    pub origin: Vec2,
}

impl QualityMap {
    pub fn empty(workspace: &Rect) -> Self {
        Self {
            grid: vec![0.0; CELLS],
            best_angle: vec![0.0; CELLS],
            cell_size: workspace.width() / GRID_SIZE as f64,
            origin: Vec2::new(workspace.min_x, workspace.max_y),
        }
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y - (row as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.grid[row * GRID_SIZE + col]
    }

    /// 50 lines of 50 comma-separated qualities, top row first.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for row in self.grid.chunks(GRID_SIZE) {
            let line: Vec<String> = row.iter().map(|q| format!("{q:.6}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Binary PGM (P5), quality × 255, top row = max y.
    pub fn write_pgm<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P5\n{GRID_SIZE} {GRID_SIZE}\n255\n")?;
        let bytes: Vec<u8> = self.grid.iter().map(|q| (q.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
        w.write_all(&bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetMask {
    pub mask: Vec<bool>,
}

impl TargetMask {
    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }
}

fn inside(p: Vec2, d: &Disc) -> bool {
    (p - d.center).norm() < d.radius
}

/// Cells whose centres lie strictly inside the target disc.
pub fn target_mask(scene: &SceneState) -> TargetMask {
    let map = QualityMap::empty(&scene.workspace);
    let mut mask = vec![false; CELLS];
    if let Some(t) = scene.target() {
        for (row, col) in cells_covering(&map, t) {
            mask[row * GRID_SIZE + col] = inside(map.cell_center(row, col), t);
        }
    }
    TargetMask { mask }
}

/// Grid cells whose centres could lie inside `d`.
fn cells_covering(map: &QualityMap, d: &Disc) -> impl Iterator<Item = (usize, usize)> {
    let cs = map.cell_size;
    let to_idx = |v: f64| v.floor().clamp(0.0, (GRID_SIZE - 1) as f64) as usize;
    let c0 = to_idx((d.center.x - d.radius - map.origin.x) / cs);
    let c1 = to_idx((d.center.x + d.radius - map.origin.x) / cs);
    let r0 = to_idx((map.origin.y - d.center.y - d.radius) / cs);
    let r1 = to_idx((map.origin.y - d.center.y + d.radius) / cs);
    let outside = d.center.x + d.radius < map.origin.x
        || d.center.x - d.radius > map.origin.x + cs * GRID_SIZE as f64
        || d.center.y - d.radius > map.origin.y
        || d.center.y + d.radius < map.origin.y - cs * GRID_SIZE as f64;
    let (r1, c1) = if outside { (0, 0) } else { (r1 + 1, c1 + 1) };
    (r0..r1.max(r0)).flat_map(move |r| (c0..c1.max(c0)).map(move |c| (r, c)))
}

/// A finger zone in local coordinates: `a` runs outward from the inner edge
/// over `[0, depth]`, `w` across over `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy)]
pub struct FingerZone {
    pub origin: Vec2,
    pub axis: Vec2,
    pub inner: f64,
    pub depth: f64,
    pub half_width: f64,
}

impl FingerZone {
    pub fn new(cell: Vec2, axis: Vec2, object_radius: f64, cfg: &GraspConfig) -> Self {
        Self {
            origin: cell,
            axis,
            inner: object_radius + cfg.standoff,
            depth: cfg.finger_depth,
            half_width: 0.5 * cfg.finger_width,
        }
    }

    pub fn point(&self, a: f64, w: f64) -> Vec2 {
        self.origin + self.axis * (self.inner + a) + self.axis.perp() * w
    }

    fn reach(&self) -> f64 {
        (self.inner + self.depth).hypot(self.half_width)
    }

    /// Smallest depth `a` at which `disc` occupies the zone.
    fn disc_depth(&self, disc: &Disc) -> Option<f64> {
        let rel = disc.center - self.origin;
        let ca = rel.dot(self.axis) - self.inner;
        let cw = rel.dot(self.axis.perp());
        let dw = cw.clamp(-self.half_width, self.half_width) - cw;
        if dw.abs() >= disc.radius {
            return None;
        }
        let h = (disc.radius * disc.radius - dw * dw).sqrt();
        if ca - h >= self.depth || ca + h <= 0.0 {
            return None;
        }
        Some((ca - h).max(0.0))
    }

    /// Smallest depth `a` at which the zone leaves the workspace.
    fn boundary_depth(&self, ws: &Rect) -> Option<f64> {
        // Each outside region is a half-plane `g(p) < 0`.
        let x = Vec2::new(1.0, 0.0);
        let y = Vec2::new(0.0, 1.0);
        let halfplanes = [
            (x, -ws.min_x),
            (-x, ws.max_x),
            (y, -ws.min_y),
            (-y, ws.max_y),
        ];
        let corners = [
            (0.0, -self.half_width),
            (self.depth, -self.half_width),
            (self.depth, self.half_width),
            (0.0, self.half_width),
        ];
        let mut best: Option<f64> = None;
        for (normal, offset) in halfplanes {
            let g = |(a, w): (f64, f64)| self.point(a, w).dot(normal) + offset;
            for i in 0..4 {
                let p = corners[i];
                let q = corners[(i + 1) % 4];
                let (gp, gq) = (g(p), g(q));
                let mut consider = |a: f64| best = Some(best.map_or(a, |b: f64| b.min(a)));
                if gp < 0.0 {
                    consider(p.0);
                }
                if (gp < 0.0) != (gq < 0.0) {
                    let s = gp / (gp - gq);
                    consider(p.0 + s * (q.0 - p.0));
                }
            }
        }
        best.map(|a| a.max(0.0))
    }

    /// Free depth from the inner edge as a fraction of the zone depth.
    pub fn clearance<'a>(&self, obstacles: impl Iterator<Item = &'a Disc>, ws: &Rect) -> f64 {
        let reach = self.reach();
        let mut depth = self.boundary_depth(ws).unwrap_or(self.depth);
        for d in obstacles {
            if (d.center - self.origin).norm() > reach + d.radius {
                continue;
            }
            if let Some(a) = self.disc_depth(d) {
                depth = depth.min(a);
            }
        }
        (depth / self.depth).clamp(0.0, 1.0)
    }
}

/// Best quality and orientation index for grasping `object` at `cell`.
pub fn cell_quality(scene: &SceneState, object: &Disc, cell: Vec2, cfg: &GraspConfig) -> (f64, usize) {
    let center_score = (1.0 - (cell - object.center).norm() / object.radius).max(0.0);
    if center_score == 0.0 {
        return (0.0, 0);
    }
    let mut best = (-1.0, 0);
    for k in 0..cfg.orientations {
        let axis = Vec2::from_angle(k as f64 * PI / cfg.orientations as f64);
        let clearance = [axis, -axis]
            .into_iter()
            .map(|u| {
                let zone = FingerZone::new(cell, u, object.radius, cfg);
                zone.clearance(scene.objects.iter().filter(|o| o.id != object.id), &scene.workspace)
            })
            .fold(1.0f64, f64::min);
        let q = clearance * center_score;
        if q > best.0 {
            best = (q, k);
        }
    }
    best
}

pub fn render_quality_map(scene: &SceneState, cfg: &GraspConfig) -> QualityMap {
    let mut map = QualityMap::empty(&scene.workspace);
    for object in &scene.objects {
        for (row, col) in cells_covering(&map, object) {
            let cell = map.cell_center(row, col);
            if !inside(cell, object) {
                continue;
            }
            let (q, k) = cell_quality(scene, object, cell, cfg);
            let idx = row * GRID_SIZE + col;
            if q > map.grid[idx] {
                map.grid[idx] = q;
                map.best_angle[idx] = k as f64 * PI / cfg.orientations as f64;
            }
        }
    }
    map
}

/// Maximum quality over the masked cells; 0 for an empty mask.
pub fn target_quality(map: &QualityMap, mask: &TargetMask) -> f64 {
    map.grid
        .iter()
        .zip(&mask.mask)
        .filter(|(_, &m)| m)
        .map(|(&q, _)| q)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraspDecision {
    Grasp,
    Push,
}

/// Grasp only when the quality strictly exceeds the threshold.
pub fn decide_action(beta: f64, threshold: f64) -> GraspDecision {
    if beta > threshold {
        GraspDecision::Grasp
    } else {
        GraspDecision::Push
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspOutcome {
    pub success: bool,
    pub scene: SceneState,
    pub row: usize,
    pub col: usize,
    pub angle: f64,
    pub quality: f64,
}

/// Grasps at the best masked cell (ties go to the lowest row-major index).
/// On success the target leaves the table and is held by the gripper.
pub fn execute_grasp(scene: &SceneState, map: &QualityMap, mask: &TargetMask, cfg: &GraspConfig) -> Result<GraspOutcome> {
    let mut best: Option<(usize, f64)> = None;
    for (idx, (&q, _)) in map.grid.iter().zip(&mask.mask).enumerate().filter(|(_, (_, &m))| m) {
        if best.is_none_or(|(_, b)| q > b) {
            best = Some((idx, q));
        }
    }
    let (idx, quality) = best.ok_or_else(|| WorldError::GraspPrecondition("target mask is empty".into()))?;
    if decide_action(quality, cfg.threshold) != GraspDecision::Grasp {
        return Err(WorldError::GraspPrecondition(format!(
            "target quality {quality:.4} does not exceed threshold {}",
            cfg.threshold
        )));
    }
    let mut out = scene.clone();
    let success = quality > cfg.threshold;
    if success {
        if let Some(pos) = out.objects.iter().position(|d| d.id == scene.target_id) {
            out.held = Some(out.objects.remove(pos));
        }
    }
    Ok(GraspOutcome {
        success,
        scene: out,
        row: idx / GRID_SIZE,
        col: idx % GRID_SIZE,
        angle: map.best_angle[idx],
        quality,
    })
}
