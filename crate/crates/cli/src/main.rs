use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use synergy_cli::commands::{cmd_eval, cmd_oracle_throw, cmd_task3, cmd_train, EvalOutcome};
use synergy_cli::replay::{narrate, read_trace, write_debug_dumps};
use synergy_cli::{CliError, Result, RunConfig};

#[derive(Parser)]
#[command(name = "synergy", version, about = "Push, grasp and throw: training and evaluation harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides run.seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides run.output_dir.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the configured agent on task1 or task2.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a checkpoint with greedy actions.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Overrides run.eval_episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Write a JSON-lines trace per episode.
        #[arg(long)]
        debug_dumps: bool,
    },
    /// Compose push-grasp and throw checkpoints on task 3 scenes.
    Task3 {
        #[command(flatten)]
        common: Common,
        /// Pass twice: the push-grasp and the throw checkpoint, in either order.
        #[arg(long, num_args = 1, required = true)]
        checkpoint: Vec<PathBuf>,
        /// Overrides run.eval_episodes.
        #[arg(long)]
        episodes: Option<usize>,
        /// Write a JSON-lines trace per episode.
        #[arg(long)]
        debug_dumps: bool,
    },
    /// Grid-search throw actions for every goal of the sampling annulus.
    OracleThrow {
        #[command(flatten)]
        common: Common,
    },
    /// Narrate a JSON-lines episode trace.
    Replay {
        trace: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Write grasp-map PGMs and throw trajectory CSVs into --out.
        #[arg(long)]
        debug_dumps: bool,
    },
}

fn resolve(common: &Common, episodes: Option<usize>) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.run.output_dir = out.clone();
    }
    if let Some(n) = episodes {
        cfg.run.eval_episodes = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn print_eval(outcome: &EvalOutcome) {
    let s = &outcome.summary;
    let m = &s.metrics;
    println!(
        "{:?}: success {:.1}% ({}/{}), actions {:.2} ± {:.2}, pushes {:.2}, reward {:.4}",
        s.task,
        m.success_rate,
        m.successes,
        m.n_episodes,
        m.mean_actions,
        m.std_actions.unwrap_or(0.0),
        s.mean_pushes,
        m.mean_reward
    );
    if let Some(p) = &s.phases {
        println!(
            "  singulation {:.1}%, throw {} (given a grasp)",
            p.singulation_success_rate,
            p.throw_success_rate.map_or("n/a".to_string(), |t| format!("{t:.1}%"))
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { common } => {
            let cfg = resolve(&common, None)?;
            let out = cfg.run.output_dir.clone();
            let report = cmd_train(&cfg, &out, &mut |p| {
                eprintln!(
                    "step {:>7}  success {:.2}  reward {:+.4}  actions {:.2}",
                    p.env_step, p.eval_success_rate, p.eval_mean_reward, p.eval_mean_actions
                )
            })?;
            println!(
                "trained {} steps, {} updates, {} episodes -> {}",
                report.env_steps,
                report.updates,
                report.episodes,
                out.display()
            );
        }
        Command::Eval {
            common,
            checkpoint,
            episodes,
            debug_dumps,
        } => {
            let cfg = resolve(&common, episodes)?;
            print_eval(&cmd_eval(&cfg, &checkpoint, &cfg.run.output_dir, debug_dumps)?);
        }
        Command::Task3 {
            common,
            checkpoint,
            episodes,
            debug_dumps,
        } => {
            let cfg = resolve(&common, episodes)?;
            print_eval(&cmd_task3(&cfg, &checkpoint, &cfg.run.output_dir, debug_dumps)?);
        }
        Command::OracleThrow { common } => {
            let cfg = resolve(&common, None)?;
            let report = cmd_oracle_throw(&cfg, &cfg.run.output_dir)?;
            for g in &report.goals {
                println!(
                    "goal d={:.3} m az={:+6.1}°  {}  hits {:>6}  best {:.4} m",
                    g.distance,
                    g.azimuth.to_degrees(),
                    if g.feasible { "feasible  " } else { "INFEASIBLE" },
                    g.in_basket_actions,
                    g.best_landing_distance
                );
            }
            println!(
                "{}/{} goals feasible over {} actions each",
                report.feasible_goals(),
                report.goals.len(),
                report.actions_per_goal
            );
        }
        Command::Replay {
            trace,
            common,
            debug_dumps,
        } => {
            let cfg = resolve(&common, None)?;
            let steps = read_trace(&trace)?;
            let summary = narrate(&steps, std::io::stdout().lock())?;
            if debug_dumps {
                let dir = &cfg.run.output_dir;
                let written = write_debug_dumps(&steps, &cfg.physics, dir)?;
                println!("wrote {} debug files to {}", written.len(), dir.display());
            }
            if !summary.consistent() {
                return Err(CliError::Runtime("trace rewards do not sum to the recorded total".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
