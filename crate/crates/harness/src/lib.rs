//! Experiment runner for the adsorption receiver: config loading, seeded
//! trial fan-out, analytic curves on the same window grid, comparison
//! metrics and CSV output.

pub mod config;
pub mod output;
pub mod report;
pub mod runner;

use adrx_core::analytic::AnalyticError;
use adrx_core::simulator::SimError;
use thiserror::Error;

pub use config::{load_config, ConfigError, ExperimentConfig, Mode, Overrides, Sweep, SweepParameter};
pub use output::{format_value, write_csv, NamedSeries, OutputError};
pub use report::{ComparisonReport, TrialSummary, WindowComparison};
pub use runner::{execute, run_experiment, threads_from_env, ExperimentOutput, ExperimentResults, RunError};

/// `git describe`-style build version.
pub const VERSION: &str = env!("ADRX_VERSION");

pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error(transparent)]
    Output(#[from] OutputError),
}

impl HarnessError {
    /// 2 for bad input, 3 for quadrature or inversion failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => EXIT_VALIDATION,
            HarnessError::Run(RunError::Analytic(AnalyticError::Domain(_))) => EXIT_VALIDATION,
            HarnessError::Run(RunError::Analytic(_)) => EXIT_NUMERICAL,
            HarnessError::Run(RunError::Simulation(SimError::Invalid(_))) => EXIT_VALIDATION,
            HarnessError::Run(_) | HarnessError::Output(_) => 1,
        }
    }
}
