//! Test support for differential testing of the simulation engine.
//!
//! [`reference_run`] is a deliberately naive, single-function reimplementation
//! of the run semantics: flat loops, inline formulas, no damage-function or
//! event-engine code reuse. It shares only the sampler layer with the real
//! engine, because the engine's draw-order contract is expressed in sampler
//! calls; everything above that layer is written twice so the two paths can
//! be compared bit for bit.

use decaylab::domain::{
    AdverseEventSpec, AgentSelector, ContinuousProcessSpec, InitialConditionSpec, ProcessKind,
    Range, SamplingPolicy, ScenarioConfig, TrajectoryMode,
};
use decaylab::engine::RunResult;
use decaylab::events::EventOccurrence;
use decaylab::sampling::{
    sample_abc_parameter, sample_truncated_normal, sample_uniform_range, sample_weibull,
    RngStream,
};

/// Naive single-loop reference implementation of one simulation run.
///
/// Must stay independent of `decaylab::engine`, `decaylab::events` and
/// `decaylab::damage`; only the samplers are shared.
#[allow(clippy::needless_range_loop)] // indexed loops on purpose: naive style
pub fn reference_run(cfg: &ScenarioConfig, run_index: u64) -> RunResult {
    let mut rng = RngStream::new(cfg.master_seed, run_index);
    let n = cfg.num_agents as usize;

    // initialization: one truncated-normal draw per agent, ascending index
    let mut conditions: Vec<f64> = (0..n)
        .map(|_| {
            sample_truncated_normal(
                &mut rng,
                cfg.init.mean,
                cfg.init.sd,
                cfg.init.lower_bound,
                cfg.init.upper_bound,
            )
            .unwrap()
        })
        .collect();

    let pct_good = |conditions: &[f64]| -> f64 {
        let good = conditions
            .iter()
            .filter(|&&c| c > cfg.good_condition_threshold)
            .count();
        100.0 * good as f64 / conditions.len() as f64
    };

    let stop_pct = 100.0 * cfg.lifetime_fraction;
    let mut percentage_good = vec![pct_good(&conditions)];
    let mut event_log: Vec<EventOccurrence> = Vec::new();
    let mut time_to_lifetime_fraction = if percentage_good[0] <= stop_pct {
        Some(0)
    } else {
        None
    };

    let mut year = 0u32;
    while time_to_lifetime_fraction.is_none() && year < cfg.num_years {
        // continuous degradation, process by process, agent index ascending
        for proc in &cfg.continuous_processes {
            for idx in 0..n {
                let covered = match proc.applies_to {
                    AgentSelector::All => true,
                    AgentSelector::IndexRange { start, end } => {
                        idx >= start as usize && idx < end as usize
                    }
                    AgentSelector::Fraction(f) => idx < (f * n as f64).round() as usize,
                };
                if !covered || conditions[idx] <= 0.0 {
                    continue;
                }
                let c = conditions[idx];
                let loss = match proc.kind {
                    ProcessKind::LinearRate => proc.params["rate"],
                    ProcessKind::CelluloseHydrolysis => {
                        let dp0 = proc.params["DP0"];
                        let thr = proc.params["DP_threshold"];
                        let kc = proc.params["kc"];
                        let cond_of = |dp: f64| {
                            (100.0 * (dp - thr) / (dp0 - thr)).clamp(0.0, 100.0)
                        };
                        match proc.trajectory {
                            TrajectoryMode::Shared => {
                                let dp_now = 1.0 / (1.0 / dp0 + kc * year as f64);
                                let dp_next = 1.0 / (1.0 / dp0 + kc * (year + 1) as f64);
                                cond_of(dp_now) - cond_of(dp_next)
                            }
                            TrajectoryMode::PerAgent => {
                                let c = c.clamp(0.0, 100.0);
                                let dp_now = thr + c / 100.0 * (dp0 - thr);
                                let dp_next = 1.0 / (1.0 / dp_now + kc);
                                c - cond_of(dp_next)
                            }
                        }
                    }
                };
                conditions[idx] = (c - loss).max(0.0);
            }
        }

        // adverse events in config order: mean-time draw, weibull draw, then
        // on occurrence fraction draw, k selection draws, k impact draws
        for spec in &cfg.adverse_events {
            let mean_time = match spec.mean_time_sampling {
                SamplingPolicy::Uniform => sample_uniform_range(&mut rng, spec.mean_time),
                SamplingPolicy::Normal => sample_abc_parameter(
                    &mut rng,
                    spec.mean_time,
                    f64::MIN_POSITIVE,
                    f64::INFINITY,
                )
                .unwrap(),
            };
            let t = sample_weibull(&mut rng, spec.weibull_shape, mean_time).unwrap();
            if t > 1.0 {
                continue;
            }

            let fraction = match spec.severity_sampling {
                SamplingPolicy::Normal => {
                    sample_abc_parameter(&mut rng, spec.fraction_affected, 0.0, 1.0).unwrap()
                }
                SamplingPolicy::Uniform => sample_uniform_range(&mut rng, spec.fraction_affected),
            };

            let mut candidates: Vec<usize> = if cfg.select_from_all_agents {
                (0..n).collect()
            } else {
                (0..n).filter(|&i| conditions[i] > 0.0).collect()
            };
            let m = candidates.len();
            let k = ((fraction * m as f64).round() as usize).min(m);
            for i in 0..k {
                let j = rng.index_in(i, m);
                candidates.swap(i, j);
            }
            candidates.truncate(k);

            let mut total_loss = 0.0;
            let mut impact_sum = 0.0;
            for &idx in &candidates {
                let impact = match spec.severity_sampling {
                    SamplingPolicy::Normal => {
                        sample_abc_parameter(&mut rng, spec.condition_loss, 0.0, 100.0).unwrap()
                    }
                    SamplingPolicy::Uniform => {
                        sample_uniform_range(&mut rng, spec.condition_loss)
                    }
                };
                impact_sum += impact;
                let before = conditions[idx];
                let after = (before - impact).max(0.0);
                conditions[idx] = after;
                total_loss += before - after;
            }

            event_log.push(EventOccurrence {
                year,
                event_name: spec.name.clone(),
                n_affected: candidates.len(),
                total_condition_loss: total_loss,
                sampled_fraction: fraction,
                sampled_impact_mean: if candidates.is_empty() {
                    0.0
                } else {
                    impact_sum / candidates.len() as f64
                },
                affected_indices: candidates.iter().map(|&i| i as u32).collect(),
            });
        }

        let pct = pct_good(&conditions);
        percentage_good.push(pct);
        if pct <= stop_pct {
            time_to_lifetime_fraction = Some(year + 1);
        }
        year += 1;
    }

    RunResult {
        run_index,
        percentage_good,
        final_conditions: conditions,
        event_log,
        time_to_lifetime_fraction,
    }
}

/// Generate a random small scenario (at most 50 agents, 50 years, 3 adverse
/// events, 2 continuous processes) exercising selectors, sampling policies
/// and both damage kinds. Cellulose processes carry an explicit `kc` so the
/// scenario is self-contained.
pub fn random_small_config(seed: u64) -> ScenarioConfig {
    let mut g = RngStream::new(seed, u64::MAX);
    let num_agents = 1 + g.index_in(0, 50) as u32;

    let lower_bound = 10.0 * g.unit();
    let upper_bound = 80.0 + 20.0 * g.unit();
    let mean = lower_bound + (upper_bound - lower_bound) * g.unit();

    let mut adverse_events = Vec::new();
    for i in 0..g.index_in(0, 4) {
        let f_a = g.unit();
        let f_b = g.unit();
        let fraction_affected = if g.index_in(0, 5) == 0 {
            Range::new(f_a, f_a)
        } else {
            Range::new(f_a.min(f_b), f_a.max(f_b))
        };
        let l_a = 100.0 * g.unit();
        let l_b = 100.0 * g.unit();
        let condition_loss = if g.index_in(0, 5) == 0 {
            Range::new(100.0, 100.0)
        } else {
            Range::new(l_a.min(l_b), l_a.max(l_b))
        };
        let mt_lo = 0.05 + 5.0 * g.unit();
        let mean_time = Range::new(mt_lo, mt_lo + 10.0 * g.unit());
        adverse_events.push(AdverseEventSpec {
            name: format!("event_{i}"),
            fraction_affected,
            condition_loss,
            mean_time,
            weibull_shape: [1.0, 1.0, 0.7, 1.6][g.index_in(0, 4)],
            mean_time_sampling: if g.index_in(0, 3) == 0 {
                SamplingPolicy::Normal
            } else {
                SamplingPolicy::Uniform
            },
            severity_sampling: if g.index_in(0, 3) == 0 {
                SamplingPolicy::Uniform
            } else {
                SamplingPolicy::Normal
            },
        });
    }

    let mut continuous_processes = Vec::new();
    for i in 0..g.index_in(0, 3) {
        let applies_to = match g.index_in(0, 3) {
            0 => AgentSelector::All,
            1 => {
                let start = g.index_in(0, num_agents as usize) as u32;
                let end = start + g.index_in(0, (num_agents - start) as usize + 1) as u32;
                AgentSelector::IndexRange { start, end }
            }
            _ => AgentSelector::Fraction(g.unit()),
        };
        let spec = if g.index_in(0, 2) == 0 {
            ContinuousProcessSpec {
                name: format!("linear_{i}"),
                kind: ProcessKind::LinearRate,
                params: [("rate".to_string(), 1.5 * g.unit())].into_iter().collect(),
                coefficients_file: None,
                applies_to,
                trajectory: TrajectoryMode::Shared,
            }
        } else {
            let dp0 = 600.0 + 600.0 * g.unit();
            let threshold = 100.0 + 300.0 * g.unit();
            ContinuousProcessSpec {
                name: format!("cellulose_{i}"),
                kind: ProcessKind::CelluloseHydrolysis,
                params: [
                    ("DP0".to_string(), dp0),
                    ("DP_threshold".to_string(), threshold),
                    ("kc".to_string(), 1e-4 * 10f64.powf(2.0 * g.unit())),
                ]
                .into_iter()
                .collect(),
                coefficients_file: None,
                applies_to,
                trajectory: if g.index_in(0, 2) == 0 {
                    TrajectoryMode::Shared
                } else {
                    TrajectoryMode::PerAgent
                },
            }
        };
        continuous_processes.push(spec);
    }

    ScenarioConfig {
        num_agents,
        num_years: g.index_in(0, 51) as u32,
        num_simulations: 1 + g.index_in(0, 3) as u32,
        init: InitialConditionSpec {
            mean,
            sd: 15.0 * g.unit(),
            lower_bound,
            upper_bound,
        },
        adverse_events,
        continuous_processes,
        master_seed: seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(17),
        good_condition_threshold: if g.index_in(0, 4) == 0 { 5.0 } else { 0.0 },
        lifetime_fraction: if g.index_in(0, 4) == 0 { 0.05 } else { 0.01 },
        select_from_all_agents: g.index_in(0, 10) == 0,
    }
}
