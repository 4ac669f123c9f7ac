//! Experiment runner for fermionic classical shadows.
//!
//! The binary is a thin clap layer over the `cmd_*` functions here, so the
//! same code paths are exercised by the integration and acceptance tests.

pub mod config;
pub mod estimate;
pub mod slater;
pub mod sweep;
pub mod validate;

pub use config::{EstimatorKind, ExperimentConfig, OutputFormat, StateSource, Targets};
pub use estimate::{cmd_estimate, run_estimate, EstimateRecord, RunManifest};
pub use slater::{cmd_slater_overlap, run_slater_overlap, OverlapRecord, OverlapRun};
pub use sweep::{cmd_variance_sweep, variance_sweep, SweepRanges, SweepRow};
pub use validate::{cmd_validate, run_validation, CheckResult, ValidationLevel, ValidationOptions, ValidationSummary};

/// Errors surfaced by the runner.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error(transparent)]
    Core(#[from] fermishadow::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// Process exit code: 2 for configuration errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Size the global rayon pool from `FERMISHADOW_THREADS`, if set.
pub fn init_threads_from_env() -> Result<()> {
    let Ok(raw) = std::env::var("FERMISHADOW_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("FERMISHADOW_THREADS must be a positive integer, got {raw:?}")))?;
    // A pool that already exists (tests, repeated calls) keeps its size.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
