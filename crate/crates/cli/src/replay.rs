//! Narrates a JSON-lines episode trace and optionally dumps grasp maps and
//! throw trajectories for inspection.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use synergy_env::TraceStep;
use synergy_world::{render_quality_map, throw_trajectory, WorldConfig};

use crate::error::{CliError, Result};

const TRAJECTORY_DT: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub steps: usize,
    pub summed_reward: f64,
    /// Cumulative reward recorded on the last line.
    pub recorded_total: Option<f64>,
}

impl ReplaySummary {
    pub fn consistent(&self) -> bool {
        self.recorded_total
            .is_none_or(|r| (r - self.summed_reward).abs() <= 1e-9 * r.abs().max(1.0))
    }
}

/// Parses a trace, reporting the first malformed line by number.
pub fn read_trace(path: &Path) -> Result<Vec<TraceStep>> {
    let file = File::open(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let mut steps = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let step: TraceStep = serde_json::from_str(&line)
            .map_err(|e| CliError::Runtime(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        steps.push(step);
    }
    Ok(steps)
}

fn fmt_action(a: &[f32]) -> String {
    let parts: Vec<String> = a.iter().map(|v| format!("{v:+.3}")).collect();
    format!("[{}]", parts.join(", "))
}

/// Writes one narration line per step, then a reward check.
pub fn narrate<W: Write>(steps: &[TraceStep], mut w: W) -> Result<ReplaySummary> {
    let mut sum = 0.0;
    for s in steps {
        sum += s.reward;
        let kind = if s.kernel.is_some() { "throw" } else { "push" };
        write!(
            w,
            "step {:>2} {:?} seed {} {kind} {} reward {:+.4} beta {:.3} pushes {} terminal {}",
            s.step,
            s.task,
            s.seed,
            fmt_action(&s.action),
            s.reward,
            s.beta,
            s.push_count,
            s.terminal
        )?;
        if let Some(d) = s.landing_distance {
            write!(w, " landing {d:.4} m")?;
        }
        if s.terminal {
            write!(w, " {}", if s.success { "SUCCESS" } else { "failure" })?;
        }
        writeln!(w)?;
    }
    let summary = ReplaySummary {
        steps: steps.len(),
        summed_reward: sum,
        recorded_total: steps.last().map(|s| s.cumulative_reward),
    };
    if let Some(recorded) = summary.recorded_total {
        writeln!(
            w,
            "total reward {sum:.6} (recorded {recorded:.6}, {})",
            if summary.consistent() { "consistent" } else { "MISMATCH" }
        )?;
    }
    Ok(summary)
}

/// Grasp-quality PGM per push-grasp step and a trajectory CSV per throw.
pub fn write_debug_dumps(steps: &[TraceStep], world: &WorldConfig, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in steps {
        if let Some(kernel) = &s.kernel {
            let name = format!("step_{:02}_trajectory.csv", s.step);
            let samples = throw_trajectory(&s.scene, kernel, world, TRAJECTORY_DT)?;
            let mut w = BufWriter::new(File::create(dir.join(&name))?);
            synergy_world::write_trajectory_csv(&mut w, &samples)?;
            w.flush()?;
            written.push(name);
        } else if !s.scene.objects.is_empty() {
            let name = format!("step_{:02}_quality.pgm", s.step);
            let map = render_quality_map(&s.scene, &world.grasp);
            let mut w = BufWriter::new(File::create(dir.join(&name))?);
            map.write_pgm(&mut w)?;
            w.flush()?;
            written.push(name);
        }
    }
    Ok(written)
}
