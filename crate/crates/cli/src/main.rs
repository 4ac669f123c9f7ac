use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fermishadow_cli::sweep::parse_range;
use fermishadow_cli::{
    cmd_estimate, cmd_slater_overlap, cmd_validate, cmd_variance_sweep, init_threads_from_env, CliError,
    ExperimentConfig, OutputFormat, SweepRanges, ValidationLevel, ValidationOptions,
};

#[derive(Parser)]
#[command(name = "fermishadow", version, about = "Fermionic classical shadows with particle-number symmetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate k-RDM elements from simulated shadows.
    Estimate(RunArgs),
    /// Estimate overlaps with basis Slater determinants.
    SlaterOverlap(RunArgs),
    /// Tabulate exact and empirical variance quantities over a parameter grid.
    VarianceSweep(SweepArgs),
    /// Run the invariant suites; exits 1 if any fails.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    eta: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// Mode counts: `4`, `2..8` or `2,4,8`.
    #[arg(long, default_value = "2..6")]
    n: String,
    #[arg(long, default_value = "1..3")]
    eta: String,
    #[arg(long, default_value = "1..2")]
    k: String,
    /// Shadows per row for the empirical column; 0 skips it.
    #[arg(long, default_value_t = 0)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file.
    #[arg(long, default_value = "variance_sweep.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "quick")]
    level: ValidationLevel,
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write the JSON report; printed to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Negative control: perturb the estimation matrix so a suite must fail.
    #[arg(long, hide = true)]
    corrupt_estimation_matrix: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

/// `k_defaults_to_eta` lets overlap runs omit `--k`, which they do not use.
fn build_config(args: &RunArgs, k_defaults_to_eta: bool) -> Result<ExperimentConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => {
            let need = |v: Option<usize>, name: &str| {
                v.ok_or_else(|| CliError::Config(format!("--{name} is required without --config")))
            };
            let eta = need(args.eta, "eta")?;
            let k = match args.k {
                None if k_defaults_to_eta => eta,
                k => need(k, "k")?,
            };
            ExperimentConfig::new(
                need(args.n, "n")?,
                eta,
                k,
                need(args.samples, "samples")?,
                args.seed.unwrap_or(0),
            )
        }
    };
    if let Some(v) = args.n {
        config.n = v;
    }
    if let Some(v) = args.eta {
        config.eta = v;
    }
    if let Some(v) = args.k {
        config.k = v;
    }
    if let Some(v) = args.samples {
        config.samples = v;
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    init_threads_from_env()?;
    match cli.command {
        Command::Estimate(args) => {
            let config = build_config(&args, false)?;
            let m = cmd_estimate(&config, &args.out, args.format.into())?;
            eprintln!("wrote {} rows to {} in {:.2}s", m.rows, args.out.join(&m.output).display(), m.wall_time_seconds);
        }
        Command::SlaterOverlap(args) => {
            let config = build_config(&args, true)?;
            let m = cmd_slater_overlap(&config, &args.out, args.format.into())?;
            eprintln!("wrote {} rows to {} in {:.2}s", m.rows, args.out.join(&m.output).display(), m.wall_time_seconds);
        }
        Command::VarianceSweep(args) => {
            let ranges = SweepRanges {
                n: parse_range(&args.n)?,
                eta: parse_range(&args.eta)?,
                k: parse_range(&args.k)?,
                samples: args.samples,
                seed: args.seed,
            };
            let rows = cmd_variance_sweep(&ranges, &args.out, args.format.into())?;
            eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
        }
        Command::Validate(args) => {
            let mut options = ValidationOptions::new(args.level);
            if let Some(seed) = args.seed {
                options.seed = seed;
            }
            options.corrupt_estimation_matrix = args.corrupt_estimation_matrix;
            let summary = cmd_validate(&options, args.out.as_deref())?;
            if args.out.is_none() {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            }
            for c in &summary.checks {
                eprintln!("{} {} ({:.2}s): {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.seconds, c.detail);
            }
            return Ok(summary.passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
