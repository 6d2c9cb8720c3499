//! Experiment runner behind the `gmvi` binary.

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{ExperimentConfig, GeneratorParams, ProblemSource, Sampling, Solver};
pub use experiment::{generate_instance, run_experiment};
pub use output::{load_summary, read_csv, write_csv, write_summary, MetricStats, RunSummary, SeedRun};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid-config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("solver: {0}")]
    Solver(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) | CliError::Solver(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// Exit status when some seeds failed but outputs were written.
pub const EXIT_PARTIAL_FAILURE: i32 = 3;
