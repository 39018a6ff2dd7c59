//! `decaylab` — simulate the degradation of a collection of objects.
//!
//! Subcommands: `run` (ensemble + artifacts), `ablate` (one-process-removed
//! comparison with significance tests), `validate` (config check), `schema`
//! (config format reference). Exit codes: 0 success, 2 invalid configuration,
//! 3 I/O failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "decaylab", version, about = "Stochastic collection-degradation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario ensemble and write summary, time series, event logs
    /// and condition histograms
    Run(RunArgs),
    /// Rerun the ensemble with one degradation process removed at a time and
    /// test each removal for significance
    Ablate(AblateArgs),
    /// Check a scenario file against every model invariant
    Validate(ValidateArgs),
    /// Print the scenario file schema with a ready-to-run example
    Schema,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
    Both,
}

impl OutputFormat {
    fn wants_csv(self) -> bool {
        matches!(self, OutputFormat::Csv | OutputFormat::Both)
    }

    fn wants_json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (.toml or .json)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if absent
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's number of simulation runs
    #[arg(long)]
    runs: Option<u32>,
    /// Which artifacts to write (csv: time series, event logs, histograms;
    /// json: summary.json)
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    /// Worker threads for the ensemble (default: all cores)
    #[arg(long, env = "DECAYLAB_THREADS")]
    threads: Option<usize>,
    /// Overwrite existing output files
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct AblateArgs {
    /// Scenario file (.toml or .json)
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if absent
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the scenario's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the scenario's number of simulation runs
    #[arg(long)]
    runs: Option<u32>,
    /// Which artifacts to write (csv: table.txt; json: ablation_report.json)
    #[arg(long, value_enum, default_value_t = OutputFormat::Both)]
    format: OutputFormat,
    /// Worker threads for the ensembles (default: all cores)
    #[arg(long, env = "DECAYLAB_THREADS")]
    threads: Option<usize>,
    /// Significance level for the Welch t-tests
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Overwrite existing output files
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file (.toml or .json)
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::cmd_run(args),
        Command::Ablate(args) => commands::cmd_ablate(args),
        Command::Validate(args) => commands::cmd_validate(args),
        Command::Schema => commands::cmd_schema(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{err}");
            ExitCode::from(err.exit_code())
        }
    }
}
