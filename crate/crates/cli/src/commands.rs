//! The subcommands as library functions. Each writes its artifacts into an
//! output directory and returns what it wrote for programmatic callers.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use synergy_env::{
    rollout, task3_episode, EpisodeRecord, Environment, PushGraspEnv, ThrowEnv, TraceStep, Traceable,
    PUSH_GRASP_OBS_DIM,
};
use synergy_rl::{
    load_agent, train, Agent, AgentPolicy, Algorithm, AnyAgent, CurvePoint, DdpgAgent, InputScaling, SacAgent,
    ScaledRange, TrainReport,
};
use synergy_world::{Task, GRID_SIZE};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::metrics::{write_curve_csv, write_metrics_csv, MetricsRow, MetricsSummary, PhaseBreakdown};
use crate::oracle::{throw_feasibility, FeasibilityReport};

pub const CHECKPOINT_DIR: &str = "checkpoint";
pub const CURVE_FILE: &str = "learning_curve.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const TRAIN_SUMMARY_FILE: &str = "train_summary.json";
pub const ORACLE_FILE: &str = "oracle_report.json";
pub const TRACE_DIR: &str = "traces";

pub fn push_grasp_env(cfg: &RunConfig) -> Result<PushGraspEnv> {
    Ok(PushGraspEnv::new(cfg.physics.clone(), cfg.task.budget)?)
}

pub fn throw_env(cfg: &RunConfig) -> Result<ThrowEnv> {
    Ok(ThrowEnv::new(cfg.physics.clone(), cfg.task.residuals.clone())?)
}

/// Push-grasp agents get the quality-map block rescaled; throw agents see
/// their observation unchanged.
pub fn new_agent(cfg: &RunConfig, obs_dim: usize, act_dim: usize) -> Result<AnyAgent> {
    let seed = cfg.run.seed;
    let scaling = if obs_dim == PUSH_GRASP_OBS_DIM {
        InputScaling::new(vec![ScaledRange {
            start: 0,
            end: GRID_SIZE * GRID_SIZE,
            factor: cfg.agent.map_input_scale,
        }])
    } else {
        InputScaling::default()
    };
    Ok(match cfg.agent.algo {
        Algorithm::Sac => {
            AnyAgent::Sac(SacAgent::new(obs_dim, act_dim, cfg.agent.sac.clone(), seed)?.with_input_scaling(scaling)?)
        }
        Algorithm::Ddpg => {
            AnyAgent::Ddpg(DdpgAgent::new(obs_dim, act_dim, cfg.agent.ddpg.clone(), seed)?.with_input_scaling(scaling)?)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub task: Task,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub env_steps: u64,
    pub updates: u64,
    pub episodes: u64,
    pub final_point: Option<CurvePoint>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn train_on<E: Traceable + Clone>(
    env: &mut E,
    cfg: &RunConfig,
    out: &Path,
    progress: &mut dyn FnMut(&CurvePoint),
) -> Result<(AnyAgent, TrainReport)> {
    let mut agent = new_agent(cfg, env.observation_dim(), env.action_dim())?;
    let report = train(env, &mut agent, &cfg.run.training, cfg.run.seed, progress)?;
    agent.save(&out.join(CHECKPOINT_DIR))?;
    Ok((agent, report))
}

/// Trains the configured agent on task 1 or 2 and writes the checkpoint,
/// learning curve, training summary and resolved config.
pub fn cmd_train(cfg: &RunConfig, out: &Path, progress: &mut dyn FnMut(&CurvePoint)) -> Result<TrainReport> {
    cfg.validate()?;
    fs::create_dir_all(out)?;
    cfg.write_resolved(out)?;
    let (_, report) = match cfg.task.task {
        Task::Task1 => train_on(&mut push_grasp_env(cfg)?, cfg, out, progress)?,
        Task::Task2 => train_on(&mut throw_env(cfg)?, cfg, out, progress)?,
        Task::Task3 => {
            return Err(CliError::Config(
                "task.task = task3 cannot be trained directly; train task1 and task2, then run task3".into(),
            ))
        }
    };
    write_curve_csv(create(&out.join(CURVE_FILE))?, &report.curve)?;
    write_json(
        &out.join(TRAIN_SUMMARY_FILE),
        &TrainSummary {
            task: cfg.task.task,
            algorithm: cfg.agent.algo,
            seed: cfg.run.seed,
            env_steps: report.env_steps,
            updates: report.updates,
            episodes: report.episodes,
            final_point: report.curve.last().cloned(),
        },
    )?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioResult {
    pub seed: u64,
    pub success: bool,
    pub n_actions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub task: Task,
    pub algorithms: Vec<Algorithm>,
    pub first_seed: u64,
    pub metrics: MetricsSummary,
    pub mean_pushes: f64,
    /// Task 3 only.
    pub phases: Option<PhaseBreakdown>,
    /// Outcomes on the fixed scenario seeds.
    pub scenarios: Vec<ScenarioResult>,
}

#[derive(Debug, Clone)]
pub struct EvalOutcome {
    pub records: Vec<EpisodeRecord>,
    pub summary: EvalSummary,
}

fn episode_seeds(cfg: &RunConfig) -> impl Iterator<Item = (u64, u64)> {
    let base = cfg.run.seed;
    (0..cfg.run.eval_episodes as u64).map(move |i| (i, base.wrapping_add(i)))
}

fn write_trace(dir: &Path, episode_id: u64, trace: &[TraceStep]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(&dir.join(format!("episode_{episode_id:04}.jsonl")))?;
    for step in trace {
        writeln!(w, "{}", serde_json::to_string(step)?)?;
    }
    w.flush()?;
    Ok(())
}

fn check_agent<E: Environment>(agent: &AnyAgent, env: &E, task: Task) -> Result<()> {
    if agent.observation_dim() != env.observation_dim() || agent.action_dim() != env.action_dim() {
        return Err(CliError::Runtime(format!(
            "checkpoint expects observations of width {} and actions of width {}, but {task:?} uses {} and {}",
            agent.observation_dim(),
            agent.action_dim(),
            env.observation_dim(),
            env.action_dim()
        )));
    }
    Ok(())
}

fn finish_eval(
    cfg: &RunConfig,
    out: &Path,
    records: Vec<EpisodeRecord>,
    algorithms: Vec<Algorithm>,
    scenarios: Vec<ScenarioResult>,
) -> Result<EvalOutcome> {
    let rows: Vec<MetricsRow> = records.iter().map(MetricsRow::from).collect();
    write_metrics_csv(create(&out.join(METRICS_FILE))?, &rows)?;
    let phases = (cfg.task.task == Task::Task3).then(|| PhaseBreakdown::from_records(&records));
    let summary = EvalSummary {
        task: cfg.task.task,
        algorithms,
        first_seed: cfg.run.seed,
        metrics: MetricsSummary::from_rows(&rows),
        mean_pushes: records.iter().map(|r| r.n_pushes as f64).sum::<f64>() / records.len().max(1) as f64,
        phases,
        scenarios,
    };
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    Ok(EvalOutcome { records, summary })
}

fn eval_on<E: Traceable>(
    env: &mut E,
    agent: &mut AnyAgent,
    cfg: &RunConfig,
    out: &Path,
    debug_dumps: bool,
) -> Result<(Vec<EpisodeRecord>, Vec<ScenarioResult>)> {
    check_agent(agent, env, cfg.task.task)?;
    let mut records = Vec::with_capacity(cfg.run.eval_episodes);
    for (id, seed) in episode_seeds(cfg) {
        let mut trace = Vec::new();
        let mut policy = AgentPolicy::greedy(&mut *agent);
        records.push(rollout(env, &mut policy, seed, id, debug_dumps.then_some(&mut trace))?);
        if debug_dumps {
            write_trace(&out.join(TRACE_DIR), id, &trace)?;
        }
    }
    let mut scenarios = Vec::new();
    for (i, &seed) in cfg.task.scenario_seeds.iter().enumerate() {
        let r = rollout(env, &mut AgentPolicy::greedy(&mut *agent), seed, i as u64, None)?;
        scenarios.push(ScenarioResult {
            seed,
            success: r.success,
            n_actions: r.n_actions,
        });
    }
    Ok((records, scenarios))
}

/// Runs `run.eval_episodes` greedy episodes with seeds `seed, seed + 1, …`.
pub fn cmd_eval(cfg: &RunConfig, checkpoint: &Path, out: &Path, debug_dumps: bool) -> Result<EvalOutcome> {
    cfg.validate()?;
    let mut agent = load_agent(checkpoint)?;
    fs::create_dir_all(out)?;
    cfg.write_resolved(out)?;
    let (records, scenarios) = match cfg.task.task {
        Task::Task1 => eval_on(&mut push_grasp_env(cfg)?, &mut agent, cfg, out, debug_dumps)?,
        Task::Task2 => eval_on(&mut throw_env(cfg)?, &mut agent, cfg, out, debug_dumps)?,
        Task::Task3 => {
            return Err(CliError::Config(
                "task.task = task3 is evaluated with the task3 subcommand and two checkpoints".into(),
            ))
        }
    };
    finish_eval(cfg, out, records, vec![agent.algorithm()], scenarios)
}

/// Assigns two checkpoints to the push-grasp and throw roles by their widths.
pub fn load_task3_agents(cfg: &RunConfig, checkpoints: &[PathBuf]) -> Result<(AnyAgent, AnyAgent)> {
    if checkpoints.len() != 2 {
        return Err(CliError::Config(format!(
            "task3 needs exactly two checkpoints (push-grasp and throw), got {}",
            checkpoints.len()
        )));
    }
    let push_env = push_grasp_env(cfg)?;
    let mut agents = checkpoints.iter().map(|p| load_agent(p)).collect::<std::result::Result<Vec<_>, _>>()?;
    if agents[0].observation_dim() != push_env.observation_dim() {
        agents.swap(0, 1);
    }
    let throw = agents.pop().expect("two agents");
    let push = agents.pop().expect("two agents");
    check_agent(&push, &push_env, Task::Task1)?;
    check_agent(&throw, &throw_env(cfg)?, Task::Task2)?;
    Ok((push, throw))
}

/// Composes a push-grasp and a throw policy on task 3 scenes.
pub fn cmd_task3(cfg: &RunConfig, checkpoints: &[PathBuf], out: &Path, debug_dumps: bool) -> Result<EvalOutcome> {
    cfg.validate()?;
    let mut cfg = cfg.clone();
    cfg.task.task = Task::Task3;
    let (mut push, mut throw) = load_task3_agents(&cfg, checkpoints)?;
    fs::create_dir_all(out)?;
    cfg.write_resolved(out)?;
    let mut push_env = push_grasp_env(&cfg)?;
    let mut throw_env = throw_env(&cfg)?;
    let mut run = |seed: u64, id: u64, trace: Option<&mut Vec<TraceStep>>| {
        task3_episode(
            &mut push_env,
            &mut throw_env,
            &mut AgentPolicy::greedy(&mut push),
            &mut AgentPolicy::greedy(&mut throw),
            seed,
            id,
            trace,
        )
    };
    let mut records = Vec::with_capacity(cfg.run.eval_episodes);
    for (id, seed) in episode_seeds(&cfg) {
        let mut trace = Vec::new();
        records.push(run(seed, id, debug_dumps.then_some(&mut trace))?);
        if debug_dumps {
            write_trace(&out.join(TRACE_DIR), id, &trace)?;
        }
    }
    let mut scenarios = Vec::new();
    for (i, &seed) in cfg.task.scenario_seeds.iter().enumerate() {
        let r = run(seed, i as u64, None)?;
        scenarios.push(ScenarioResult {
            seed,
            success: r.success,
            n_actions: r.n_actions,
        });
    }
    let algorithms = vec![push.algorithm(), throw.algorithm()];
    finish_eval(&cfg, out, records, algorithms, scenarios)
}

/// Grid-searches throw actions for every goal and writes the report.
pub fn cmd_oracle_throw(cfg: &RunConfig, out: &Path) -> Result<FeasibilityReport> {
    cfg.validate()?;
    let report = throw_feasibility(&cfg.physics, &cfg.task.residuals, &cfg.task.oracle)?;
    fs::create_dir_all(out)?;
    cfg.write_resolved(out)?;
    write_json(&out.join(ORACLE_FILE), &report)?;
    Ok(report)
}
