//! The yearly simulation loop, single-run executor, and deterministic
//! parallel ensemble runner.
//!
//! Draw-order contract (normative; the naive reference implementation in the
//! test suite replicates it draw for draw):
//!
//! 1. initialization: one truncated-normal draw per agent, index ascending;
//! 2. each year applies continuous degradation first (no draws), then the
//!    adverse events in config order;
//! 3. each adverse event draws its mean time, then one Weibull deviate; only
//!    on occurrence it draws the affected fraction, `k` subset-selection
//!    integer draws, and one impact per affected agent in selection order.
//!
//! Degenerate ranges and zero standard deviations consume no draws (see
//! [`crate::sampling`]).
//!
//! A run records the percentage of agents in good condition at year 0 (before
//! any degradation) and after every simulated year, and stops early once that
//! percentage falls to `100 * lifetime_fraction` or below.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::damage::{DamageError, DamageFunction};
use crate::domain::{AgentSelector, Population, ScenarioConfig};
use crate::events::{apply_event, event_occurs_this_year, EventOccurrence};
use crate::sampling::{sample_truncated_normal, RngStream};

/// Outcome of one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub run_index: u64,
    /// Percentage in good condition per recorded year; entry 0 is the initial
    /// snapshot. Censored runs have `num_years + 1` entries; uncensored runs
    /// end at the crossing year.
    pub percentage_good: Vec<f64>,
    pub final_conditions: Vec<f64>,
    pub event_log: Vec<EventOccurrence>,
    /// First year index at which `percentage_good` reached the lifetime
    /// fraction; `None` if the run was censored at the horizon.
    pub time_to_lifetime_fraction: Option<u32>,
}

impl RunResult {
    /// Per-run time series as CSV (LF line endings, `.` decimal separator).
    pub fn time_series_csv(&self) -> String {
        let mut out = String::from("year,percentage_good\n");
        for (year, pct) in self.percentage_good.iter().enumerate() {
            out.push_str(&format!("{year},{pct}\n"));
        }
        out
    }
}

/// Cross-run aggregate of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    pub runs: Vec<RunResult>,
    /// Mean lifetime over uncensored runs; `None` when every run censored.
    pub average_time: Option<f64>,
    /// Sample standard deviation (n-1) of uncensored lifetimes; `None` with
    /// fewer than two uncensored runs.
    pub sd_time: Option<f64>,
    pub max_time: Option<u32>,
    pub censored_run_count: usize,
}

/// The summary block written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleSummary {
    pub average_time: Option<f64>,
    pub sd_time: Option<f64>,
    pub max_time: Option<u32>,
    pub censored_run_count: usize,
    /// Per-run lifetimes in run order; `null` marks a censored run.
    pub lifetimes: Vec<Option<u32>>,
}

impl EnsembleResult {
    pub fn from_runs(runs: Vec<RunResult>) -> Self {
        let lifetimes: Vec<u32> = runs
            .iter()
            .filter_map(|r| r.time_to_lifetime_fraction)
            .collect();
        let censored_run_count = runs.len() - lifetimes.len();
        let average_time = if lifetimes.is_empty() {
            None
        } else {
            Some(lifetimes.iter().map(|&t| t as f64).sum::<f64>() / lifetimes.len() as f64)
        };
        let sd_time = if lifetimes.len() < 2 {
            None
        } else {
            let mean = average_time.unwrap();
            let ss: f64 = lifetimes
                .iter()
                .map(|&t| (t as f64 - mean).powi(2))
                .sum();
            Some((ss / (lifetimes.len() - 1) as f64).sqrt())
        };
        let max_time = lifetimes.iter().copied().max();
        Self {
            runs,
            average_time,
            sd_time,
            max_time,
            censored_run_count,
        }
    }

    /// Uncensored lifetimes in run order, as reals (for significance tests).
    pub fn uncensored_lifetimes(&self) -> Vec<f64> {
        self.runs
            .iter()
            .filter_map(|r| r.time_to_lifetime_fraction.map(|t| t as f64))
            .collect()
    }

    pub fn summary(&self) -> EnsembleSummary {
        EnsembleSummary {
            average_time: self.average_time,
            sd_time: self.sd_time,
            max_time: self.max_time,
            censored_run_count: self.censored_run_count,
            lifetimes: self
                .runs
                .iter()
                .map(|r| r.time_to_lifetime_fraction)
                .collect(),
        }
    }
}

/// A validated config with its damage functions built, ready to run.
#[derive(Debug, Clone)]
pub struct CompiledScenario {
    cfg: ScenarioConfig,
    damage: Vec<(DamageFunction, AgentSelector)>,
}

impl CompiledScenario {
    /// Compile, resolving any coefficient files relative to the process'
    /// working directory.
    pub fn new(cfg: &ScenarioConfig) -> Result<Self, DamageError> {
        Self::with_base_dir(cfg, None)
    }

    /// Compile, resolving coefficient files relative to `base_dir` (normally
    /// the directory the scenario file was loaded from).
    pub fn with_base_dir(
        cfg: &ScenarioConfig,
        base_dir: Option<&Path>,
    ) -> Result<Self, DamageError> {
        let damage = cfg
            .continuous_processes
            .iter()
            .map(|spec| {
                DamageFunction::from_spec(spec, base_dir).map(|f| (f, spec.applies_to))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            damage,
        })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    /// Advance the population by one year: continuous degradation for every
    /// covered agent (floored at 0), then each adverse event in config order.
    pub fn simulate_year(
        &self,
        rng: &mut RngStream,
        pop: &mut Population,
        year: u32,
    ) -> Vec<EventOccurrence> {
        let n = pop.len();
        for (damage_fn, selector) in &self.damage {
            for idx in 0..n {
                if !selector.covers(idx, n) {
                    continue;
                }
                let condition = pop.conditions[idx];
                if condition <= 0.0 {
                    continue;
                }
                let loss = damage_fn.annual_loss(condition, year);
                pop.conditions[idx] = (condition - loss).max(0.0);
            }
        }

        let mut occurrences = Vec::new();
        for spec in &self.cfg.adverse_events {
            if event_occurs_this_year(rng, spec) {
                occurrences.push(apply_event(
                    rng,
                    pop,
                    spec,
                    year,
                    self.cfg.select_from_all_agents,
                ));
            }
        }
        occurrences
    }

    /// Execute one run: a deterministic function of `(config, run_index)`.
    pub fn simulate_run(&self, run_index: u64) -> RunResult {
        let cfg = &self.cfg;
        let mut rng = RngStream::new(cfg.master_seed, run_index);
        let mut pop = initialize_population(&mut rng, cfg);

        let stop_pct = 100.0 * cfg.lifetime_fraction;
        let mut percentage_good = Vec::with_capacity(cfg.num_years as usize + 1);
        let mut event_log = Vec::new();

        let initial_pct = pop.percentage_good(cfg.good_condition_threshold);
        percentage_good.push(initial_pct);
        let mut time_to_lifetime_fraction = if initial_pct <= stop_pct {
            Some(0)
        } else {
            None
        };

        if time_to_lifetime_fraction.is_none() {
            for year in 0..cfg.num_years {
                event_log.extend(self.simulate_year(&mut rng, &mut pop, year));
                let pct = pop.percentage_good(cfg.good_condition_threshold);
                percentage_good.push(pct);
                if pct <= stop_pct {
                    time_to_lifetime_fraction = Some(year + 1);
                    break;
                }
            }
        }

        RunResult {
            run_index,
            percentage_good,
            final_conditions: pop.conditions,
            event_log,
            time_to_lifetime_fraction,
        }
    }

    /// Execute all runs of the scenario. Runs are independent and execute in
    /// parallel; the result is identical for any degree of parallelism.
    pub fn run_ensemble(&self) -> EnsembleResult {
        let runs: Vec<RunResult> = (0..self.cfg.num_simulations as u64)
            .into_par_iter()
            .map(|run_index| self.simulate_run(run_index))
            .collect();
        EnsembleResult::from_runs(runs)
    }
}

/// Draw the initial population: `num_agents` i.i.d. truncated-normal
/// conditions, agent index ascending.
pub fn initialize_population(rng: &mut RngStream, cfg: &ScenarioConfig) -> Population {
    let init = &cfg.init;
    let conditions = (0..cfg.num_agents)
        .map(|_| {
            sample_truncated_normal(
                rng,
                init.mean,
                init.sd,
                init.lower_bound,
                init.upper_bound,
            )
            .expect("validated init spec")
        })
        .collect();
    Population::new(conditions)
}

/// Single-run convenience wrapper over [`CompiledScenario::simulate_run`].
/// Panics on an uncompilable config (`pre`: the config is valid).
pub fn simulate_run(cfg: &ScenarioConfig, run_index: u64) -> RunResult {
    CompiledScenario::new(cfg)
        .expect("valid config")
        .simulate_run(run_index)
}

/// Ensemble convenience wrapper over [`CompiledScenario::run_ensemble`].
/// Panics on an uncompilable config (`pre`: the config is valid).
pub fn run_ensemble(cfg: &ScenarioConfig) -> EnsembleResult {
    CompiledScenario::new(cfg)
        .expect("valid config")
        .run_ensemble()
}

/// Smallest index `i` with `percentage_good[i] <= 100 * fraction`, if any.
pub fn time_to_fraction(percentage_good: &[f64], fraction: f64) -> Option<usize> {
    let stop = 100.0 * fraction;
    percentage_good.iter().position(|&p| p <= stop)
}
