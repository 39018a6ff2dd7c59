//! Benchmark-only crate; see `benches/engine.rs`. Shared scenario builders
//! live here so the bench target stays small.

use decaylab::domain::{
    AdverseEventSpec, AgentSelector, ContinuousProcessSpec, InitialConditionSpec, ProcessKind,
    SamplingPolicy, ScenarioConfig, TrajectoryMode,
};

/// The four published adverse events plus a 0.1/yr linear stand-in for
/// chemistry, over `num_agents` objects.
pub fn benchmark_scenario(num_agents: u32, num_simulations: u32) -> ScenarioConfig {
    let event = |name: &str, frac: [f64; 2], loss: [f64; 2], mt: [f64; 2]| AdverseEventSpec {
        name: name.to_string(),
        fraction_affected: frac.into(),
        condition_loss: loss.into(),
        mean_time: mt.into(),
        weibull_shape: 1.0,
        mean_time_sampling: SamplingPolicy::Uniform,
        severity_sampling: SamplingPolicy::Normal,
    };
    ScenarioConfig {
        num_agents,
        num_years: 1000,
        num_simulations,
        init: InitialConditionSpec {
            mean: 75.0,
            sd: 10.0,
            lower_bound: 0.0,
            upper_bound: 100.0,
        },
        adverse_events: vec![
            event("fire", [0.2, 0.6], [100.0, 100.0], [200.0, 600.0]),
            event("theft", [0.002, 0.006], [100.0, 100.0], [5.0, 10.0]),
            event("flooding", [0.02, 0.06], [20.0, 50.0], [1.0, 5.0]),
            event("leaking", [0.02, 0.06], [0.6, 2.0], [0.02, 0.06]),
        ],
        continuous_processes: vec![ContinuousProcessSpec {
            name: "chemical degradation".to_string(),
            kind: ProcessKind::LinearRate,
            params: [("rate".to_string(), 0.1)].into_iter().collect(),
            coefficients_file: None,
            applies_to: AgentSelector::All,
            trajectory: TrajectoryMode::Shared,
        }],
        master_seed: 42,
        good_condition_threshold: 0.0,
        lifetime_fraction: 0.01,
        select_from_all_agents: false,
    }
}
