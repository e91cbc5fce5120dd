//! Per-episode metrics and their summary.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use synergy_env::EpisodeRecord;
use synergy_rl::CurvePoint;

use crate::error::{CliError, Result};

pub const METRICS_HEADER: [&str; 6] = ["episode_id", "success", "n_actions", "landing_distance", "total_reward", "seed"];
pub const CURVE_HEADER: [&str; 7] = [
    "env_step",
    "eval_success_rate",
    "eval_mean_reward",
    "eval_mean_actions",
    "critic_loss",
    "actor_loss",
    "entropy_coef",
];

/// One `metrics.csv` row.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub episode_id: u64,
    pub success: bool,
    pub n_actions: usize,
    pub landing_distance: Option<f64>,
    pub total_reward: f64,
    pub seed: u64,
}

impl From<&EpisodeRecord> for MetricsRow {
    fn from(r: &EpisodeRecord) -> Self {
        Self {
            episode_id: r.episode_id,
            success: r.success,
            n_actions: r.n_actions,
            landing_distance: r.landing_distance,
            total_reward: r.total_reward,
            seed: r.seed,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_metrics_csv<W: Write>(w: W, rows: &[MetricsRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(METRICS_HEADER)?;
    for r in rows {
        out.write_record([
            r.episode_id.to_string(),
            u8::from(r.success).to_string(),
            r.n_actions.to_string(),
            opt(r.landing_distance),
            r.total_reward.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_metrics_csv<R: Read>(r: R) -> Result<Vec<MetricsRow>> {
    let mut input = csv::Reader::from_reader(r);
    let header: Vec<String> = input.headers()?.iter().map(str::to_owned).collect();
    if header != METRICS_HEADER {
        return Err(CliError::Runtime(format!("unexpected metrics header {header:?}")));
    }
    let bad = |line: u64, what: &str| CliError::Runtime(format!("metrics line {line}: bad {what}"));
    let mut rows = Vec::new();
    for (i, rec) in input.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 2;
        let num = |k: usize, what: &str| rec[k].parse::<f64>().map_err(|_| bad(line, what));
        rows.push(MetricsRow {
            episode_id: rec[0].parse().map_err(|_| bad(line, "episode_id"))?,
            success: match &rec[1] {
                "1" => true,
                "0" => false,
                _ => return Err(bad(line, "success")),
            },
            n_actions: rec[2].parse().map_err(|_| bad(line, "n_actions"))?,
            landing_distance: if rec[3].is_empty() { None } else { Some(num(3, "landing_distance")?) },
            total_reward: num(4, "total_reward")?,
            seed: rec[5].parse().map_err(|_| bad(line, "seed"))?,
        });
    }
    Ok(rows)
}

pub fn write_curve_csv<W: Write>(w: W, curve: &[CurvePoint]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CURVE_HEADER)?;
    for p in curve {
        out.write_record([
            p.env_step.to_string(),
            p.eval_success_rate.to_string(),
            p.eval_mean_reward.to_string(),
            p.eval_mean_actions.to_string(),
            opt(p.critic_loss),
            opt(p.actor_loss),
            opt(p.entropy_coef),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Success rate in percent plus action statistics over a set of episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub n_episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_actions: f64,
    /// Sample standard deviation; absent with fewer than two episodes.
    pub std_actions: Option<f64>,
    pub mean_reward: f64,
}

impl MetricsSummary {
    pub fn from_rows(rows: &[MetricsRow]) -> Self {
        let n = rows.len();
        let successes = rows.iter().filter(|r| r.success).count();
        let mean = |f: &dyn Fn(&MetricsRow) -> f64| {
            if n == 0 {
                0.0
            } else {
                rows.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let mean_actions = mean(&|r| r.n_actions as f64);
        let std_actions = (n >= 2).then(|| {
            let ss: f64 = rows.iter().map(|r| (r.n_actions as f64 - mean_actions).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Self {
            n_episodes: n,
            successes,
            success_rate: if n == 0 { 0.0 } else { 100.0 * successes as f64 / n as f64 },
            mean_actions,
            std_actions,
            mean_reward: mean(&|r| r.total_reward),
        }
    }
}

/// Phase outcomes of composed push-grasp-throw episodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBreakdown {
    /// Percent of episodes whose target was singulated and grasped.
    pub singulation_success_rate: f64,
    /// Percent of grasped episodes whose throw landed in the basket.
    pub throw_success_rate: Option<f64>,
    pub mean_pushes: f64,
}

impl PhaseBreakdown {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let n = records.len().max(1) as f64;
        let grasped = records.iter().filter(|r| r.singulation_success == Some(true)).count();
        let thrown = records.iter().filter(|r| r.throw_success == Some(true)).count();
        Self {
            singulation_success_rate: 100.0 * grasped as f64 / n,
            throw_success_rate: (grasped > 0).then(|| 100.0 * thrown as f64 / grasped as f64),
            mean_pushes: records.iter().map(|r| r.n_pushes as f64).sum::<f64>() / n,
        }
    }
}
