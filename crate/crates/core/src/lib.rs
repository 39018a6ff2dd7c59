//! Stochastic agent-based simulation of the degradation of a finite
//! collection of objects.
//!
//! A population of agents carries a condition on a 0-100 scale. Each year the
//! engine applies continuous damage functions (constant rates or cellulose
//! chain-scission kinetics) and then tests each configured adverse event by
//! sampling a Weibull time-to-event; events that fire remove condition from a
//! random subset of agents. Reaching condition 0 drops an agent out of the
//! collection. Ensembles of seeded runs yield collection-lifetime
//! distributions, ablation studies, and uncertainty summaries.
//!
//! Modules follow the pipeline: [`domain`] (types and config),
//! [`sampling`] (seeded randomness), [`damage`] (continuous degradation),
//! [`events`] (adverse events), [`engine`] (run and ensemble execution),
//! [`analysis`] (statistics over completed runs).

pub mod analysis;
pub mod damage;
pub mod domain;
pub mod engine;
pub mod events;
pub mod sampling;

pub use analysis::{
    ensemble_band, histogram, run_ablation, welch_t_test, AblationReport, AblationVariant,
    AnalysisError, BandPoint, HistogramBin, WelchTest,
};
pub use damage::{CelluloseParams, DamageError, DamageFunction};
pub use domain::{
    validate_config, AdverseEventSpec, AgentSelector, ConfigError, ContinuousProcessSpec,
    InitialConditionSpec, Population, ProcessKind, Range, SamplingPolicy, ScenarioConfig,
    TrajectoryMode, Violation, CONDITION_MAX,
};
pub use engine::{
    initialize_population, run_ensemble, simulate_run, time_to_fraction, CompiledScenario,
    EnsembleResult, EnsembleSummary, RunResult,
};
pub use events::{apply_event, event_occurs_this_year, select_affected, EventOccurrence};
pub use sampling::{
    normal_from_95ci, sample_abc_parameter, sample_truncated_normal, sample_uniform_range,
    sample_weibull, RngStream, SampleError,
};
