//! Front end for the benchmark: synthetic datasets, runs and report data.

pub mod commands;
pub mod synthetic;

use featbench_core::Error;

pub use commands::{
    cmd_generate_synthetic, cmd_report, cmd_run, parse_combinations, ReportSummary, RunConfig, RunSummary,
    CSV_NAME, RUN_NAME, STATS_NAME,
};

/// A command failure, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config values or manifest contents (exit 1).
    #[error("config error: {0}")]
    Config(String),
    /// Failure while loading images, running or writing results (exit 2).
    #[error("{0}")]
    Pipeline(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Pipeline(_) => 2,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) | Error::Manifest(m) => CliError::Config(m),
            other => CliError::Pipeline(other),
        }
    }
}
