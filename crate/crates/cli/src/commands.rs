//! Subcommand implementations: config ingestion, run orchestration, output
//! emission. Machine artifacts go to files; stdout carries only the human
//! summary.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use decaylab::analysis::{histogram, histogram_csv, run_ablation};
use decaylab::damage::DamageError;
use decaylab::domain::{ConfigError, ScenarioConfig, Violation};
use decaylab::engine::{initialize_population, CompiledScenario, EnsembleResult};
use decaylab::events::event_log_csv;
use decaylab::sampling::RngStream;

use crate::{AblateArgs, RunArgs, ValidateArgs};

const HISTOGRAM_BIN_WIDTH: f64 = 5.0;

#[derive(Debug)]
pub enum CliError {
    /// Unparsable config, invariant violations, bad model parameters. Exit 2.
    Config(String),
    /// Unreadable inputs, unwritable outputs, overwrite refusal. Exit 3.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "invalid configuration: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    ScenarioConfig::from_path(path).map_err(|err| match err {
        ConfigError::Io { .. } => CliError::Io(err.to_string()),
        ConfigError::Parse { .. } => CliError::Config(err.to_string()),
    })
}

fn damage_error(err: DamageError) -> CliError {
    match err {
        DamageError::CoefficientsIo { .. } => CliError::Io(err.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

fn render_violations(violations: &[Violation]) -> String {
    let lines: Vec<String> = violations.iter().map(|v| format!("  - {v}")).collect();
    format!(
        "{} invariant violation(s)\n{}",
        violations.len(),
        lines.join("\n")
    )
}

fn validated(mut cfg: ScenarioConfig, seed: Option<u64>, runs: Option<u32>) -> Result<ScenarioConfig, CliError> {
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    if let Some(runs) = runs {
        cfg.num_simulations = runs;
    }
    let violations = cfg.validate();
    if violations.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(render_violations(&violations)))
    }
}

/// Create the output directory and refuse to clobber existing target files
/// unless `--force` was given. Called before any simulation work.
fn prepare_output_dir(dir: &Path, targets: &[PathBuf], force: bool) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    if !force {
        let existing: Vec<String> = targets
            .iter()
            .filter(|p| p.exists())
            .map(|p| p.display().to_string())
            .collect();
        if !existing.is_empty() {
            return Err(CliError::Io(format!(
                "refusing to overwrite {} (pass --force to allow)",
                existing.join(", ")
            )));
        }
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Run `f` on a rayon pool capped at `threads` workers, or on the global pool.
fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Config(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn describe_ensemble(ensemble: &EnsembleResult, total_runs: u32) -> String {
    match ensemble.average_time {
        Some(avg) => format!(
            "collection lifetime: mean {avg:.1} years, sd {}, max {} ({} of {total_runs} runs censored)",
            ensemble
                .sd_time
                .map(|s| format!("{s:.2}"))
                .unwrap_or_else(|| "n/a".to_string()),
            ensemble
                .max_time
                .map(|m| m.to_string())
                .unwrap_or_else(|| "n/a".to_string()),
            ensemble.censored_run_count,
        ),
        None => format!(
            "collection lifetime: not reached within the horizon (all {total_runs} runs censored)"
        ),
    }
}

pub fn cmd_run(args: RunArgs) -> Result<(), CliError> {
    let cfg = validated(load_config(&args.config)?, args.seed, args.runs)?;
    let scenario =
        CompiledScenario::with_base_dir(&cfg, args.config.parent()).map_err(damage_error)?;

    let mut targets = Vec::new();
    if args.format.wants_json() {
        targets.push(args.out.join("summary.json"));
    }
    if args.format.wants_csv() {
        for i in 0..cfg.num_simulations {
            targets.push(args.out.join(format!("run_{i:03}.csv")));
            targets.push(args.out.join(format!("events_{i:03}.csv")));
        }
        targets.push(args.out.join("histogram_initial.csv"));
        targets.push(args.out.join("histogram_final.csv"));
    }
    prepare_output_dir(&args.out, &targets, args.force)?;

    let ensemble = with_threads(args.threads, || scenario.run_ensemble())?;

    if args.format.wants_json() {
        let json = serde_json::to_string_pretty(&ensemble.summary())
            .expect("summary serializes");
        write_file(&args.out.join("summary.json"), &json)?;
    }
    if args.format.wants_csv() {
        for run in &ensemble.runs {
            write_file(
                &args.out.join(format!("run_{:03}.csv", run.run_index)),
                &run.time_series_csv(),
            )?;
            write_file(
                &args.out.join(format!("events_{:03}.csv", run.run_index)),
                &event_log_csv(&run.event_log),
            )?;
        }
        // year-0 conditions are reproducible from the run streams, so the
        // initial histogram is rebuilt rather than stored per run
        let mut initial = Vec::with_capacity((cfg.num_agents * cfg.num_simulations) as usize);
        let mut final_conditions = Vec::with_capacity(initial.capacity());
        for run in &ensemble.runs {
            let mut rng = RngStream::new(cfg.master_seed, run.run_index);
            initial.extend(initialize_population(&mut rng, &cfg).conditions);
            final_conditions.extend_from_slice(&run.final_conditions);
        }
        let bins = histogram(&initial, HISTOGRAM_BIN_WIDTH, 0.0, 100.0);
        write_file(&args.out.join("histogram_initial.csv"), &histogram_csv(&bins))?;
        let bins = histogram(&final_conditions, HISTOGRAM_BIN_WIDTH, 0.0, 100.0);
        write_file(&args.out.join("histogram_final.csv"), &histogram_csv(&bins))?;
    }

    println!(
        "scenario: {} ({} agents, {} years, {} runs, seed {})",
        args.config.display(),
        cfg.num_agents,
        cfg.num_years,
        cfg.num_simulations,
        cfg.master_seed
    );
    println!("{}", describe_ensemble(&ensemble, cfg.num_simulations));
    println!("artifacts written to {}", args.out.display());
    Ok(())
}

pub fn cmd_ablate(args: AblateArgs) -> Result<(), CliError> {
    let cfg = validated(load_config(&args.config)?, args.seed, args.runs)?;
    if cfg.adverse_events.is_empty() && cfg.continuous_processes.is_empty() {
        return Err(CliError::Config(
            "ablation needs at least one degradation process".to_string(),
        ));
    }

    let mut targets = Vec::new();
    if args.format.wants_json() {
        targets.push(args.out.join("ablation_report.json"));
    }
    if args.format.wants_csv() {
        targets.push(args.out.join("table.txt"));
    }
    prepare_output_dir(&args.out, &targets, args.force)?;

    let report = with_threads(args.threads, || {
        run_ablation(&cfg, args.alpha, args.config.parent())
    })?
    .map_err(damage_error)?;

    if args.format.wants_json() {
        write_file(
            &args.out.join("ablation_report.json"),
            &report.to_json_string(),
        )?;
    }
    let table = report.render_table();
    if args.format.wants_csv() {
        write_file(&args.out.join("table.txt"), &table)?;
    }

    print!("{table}");
    println!("artifacts written to {}", args.out.display());
    Ok(())
}

pub fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let violations = cfg.validate();
    if violations.is_empty() {
        println!("{}: configuration is valid", args.config.display());
        Ok(())
    } else {
        Err(CliError::Config(render_violations(&violations)))
    }
}

const SCHEMA_TEXT: &str = r#"Scenario file schema (TOML shown; JSON with the same field names is accepted)

Top level
  num_agents                integer >= 1    population size
  num_years                 integer >= 0    years to simulate per run
  num_simulations           integer >= 1    runs in the ensemble
  master_seed               integer         run i draws from stream (master_seed, i)
  good_condition_threshold  real, default 0       agent is "good" while condition > threshold
  lifetime_fraction         real (0,1], default 0.01   lifetime = first year good fraction <= this
  select_from_all_agents    bool, default false   let events hit fallen agents (sensitivity runs)

[init]  initial condition distribution (truncated normal on [lower_bound, upper_bound])
  mean, sd, lower_bound, upper_bound   with 0 <= lower_bound < upper_bound <= 100

[[adverse_events]]  zero or more
  name               unique label
  fraction_affected  [lo, hi] within [0, 1]
  condition_loss     [lo, hi] within [0, 100]
  mean_time          [lo, hi] in years, lo > 0
  weibull_shape      real > 0, default 1 (constant hazard)
  mean_time_sampling "uniform" (default) | "normal"
  severity_sampling  "normal" (default) | "uniform"

[[continuous_processes]]  zero or more
  name               unique label
  kind               "linear_rate" | "cellulose_hydrolysis"
  applies_to         "all" (default) | { index_range = { start, end } } | { fraction = f }
  trajectory         "shared" (default) | "per_agent"   (cellulose only)
  coefficients_file  optional path, resolved relative to the scenario file
  [continuous_processes.params]
    linear_rate:          rate  (condition units/year, >= 0)
    cellulose_hydrolysis: DP0 > DP_threshold > 0, plus either an explicit kc
                          or T (deg C), RH (%), pH together with coefficients
                          ln_pre_exp, activation_energy (J/mol), acid_exp,
                          rh_exp (inline or from coefficients_file)

Every range is a [lo, hi] pair. "normal" sampling reads the range as a 95%
confidence interval of a normal distribution, truncated to the quantity's
physical bounds; "uniform" draws uniformly inside the range.

Example scenario (shipped at examples/paper_table2.toml):

"#;

pub fn cmd_schema() -> Result<(), CliError> {
    print!("{SCHEMA_TEXT}");
    print!("{}", include_str!("../../../examples/paper_table2.toml"));
    Ok(())
}
