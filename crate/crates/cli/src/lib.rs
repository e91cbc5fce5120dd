//! Command-line harness: configuration, training and evaluation runs for the
//! three tasks, the throw feasibility oracle and trace replay.

pub mod commands;
pub mod config;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod replay;

pub use commands::{cmd_eval, cmd_oracle_throw, cmd_task3, cmd_train, EvalOutcome, EvalSummary, TrainSummary};
pub use config::{RunConfig, RESOLVED_CONFIG_FILE};
pub use error::{CliError, Result};
pub use metrics::{MetricsRow, MetricsSummary, PhaseBreakdown};
pub use oracle::{throw_feasibility, FeasibilityReport};
