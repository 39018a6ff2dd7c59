//! Adverse-event engine: yearly occurrence tests via Weibull time-to-event
//! sampling, affected-subset selection, impact application, and event logging.
//!
//! The operations here assume a spec that passed [`crate::domain::validate_config`];
//! with a validated spec none of the underlying samplers can fail.

use crate::domain::{AdverseEventSpec, Population, SamplingPolicy, CONDITION_MAX};
use crate::sampling::{
    sample_abc_parameter, sample_uniform_range, sample_weibull, RngStream,
};

/// One adverse-event occurrence, recorded for run inspection and the per-run
/// event log.
#[derive(Debug, Clone, PartialEq)]
pub struct EventOccurrence {
    pub year: u32,
    pub event_name: String,
    pub n_affected: usize,
    /// Realized condition units removed, after flooring agents at 0.
    pub total_condition_loss: f64,
    pub sampled_fraction: f64,
    /// Mean of the drawn per-agent impacts (0 when nothing was affected).
    pub sampled_impact_mean: f64,
    pub affected_indices: Vec<u32>,
}

/// Header of the per-run event log CSV.
pub const EVENT_LOG_HEADER: &str = "year,event_name,n_affected,total_condition_loss";

/// Render an event log as CSV (LF line endings, `.` decimal separator).
pub fn event_log_csv(log: &[EventOccurrence]) -> String {
    let mut out = String::from(EVENT_LOG_HEADER);
    out.push('\n');
    for occ in log {
        out.push_str(&format!(
            "{},{},{},{}\n",
            occ.year, occ.event_name, occ.n_affected, occ.total_condition_loss
        ));
    }
    out
}

/// Decide whether `spec` fires this year: draw the mean time from its range,
/// sample a Weibull time-to-event with that scale, and fire when the sampled
/// time is at most one year.
pub fn event_occurs_this_year(rng: &mut RngStream, spec: &AdverseEventSpec) -> bool {
    let mean_time = match spec.mean_time_sampling {
        SamplingPolicy::Uniform => sample_uniform_range(rng, spec.mean_time),
        SamplingPolicy::Normal => {
            sample_abc_parameter(rng, spec.mean_time, f64::MIN_POSITIVE, f64::INFINITY)
                .expect("validated mean_time range")
        }
    };
    let time_until_event = sample_weibull(rng, spec.weibull_shape, mean_time)
        .expect("validated weibull parameters");
    time_until_event <= 1.0
}

/// Pick the affected subset: `round(fraction * eligible)` distinct agents,
/// uniformly without replacement, by partial Fisher-Yates over the eligible
/// indices in ascending order (one integer draw per selected agent).
///
/// Eligible agents are those with condition > 0 unless `from_all` is set.
pub fn select_affected(
    rng: &mut RngStream,
    pop: &Population,
    fraction: f64,
    from_all: bool,
) -> Vec<usize> {
    debug_assert!((0.0..=1.0).contains(&fraction), "fraction {fraction}");
    let mut candidates: Vec<usize> = if from_all {
        (0..pop.len()).collect()
    } else {
        pop.alive_indices()
    };
    let n = candidates.len();
    // round half away from zero
    let k = ((fraction * n as f64).round() as usize).min(n);
    for i in 0..k {
        let j = rng.index_in(i, n);
        candidates.swap(i, j);
    }
    candidates.truncate(k);
    candidates
}

/// Apply one occurrence of `spec`: draw the affected fraction, select the
/// subset, then independently draw an impact per affected agent and subtract
/// it, flooring conditions at 0. Impacts are applied in selection order.
pub fn apply_event(
    rng: &mut RngStream,
    pop: &mut Population,
    spec: &AdverseEventSpec,
    year: u32,
    from_all: bool,
) -> EventOccurrence {
    let fraction = match spec.severity_sampling {
        SamplingPolicy::Normal => sample_abc_parameter(rng, spec.fraction_affected, 0.0, 1.0)
            .expect("validated fraction range"),
        SamplingPolicy::Uniform => sample_uniform_range(rng, spec.fraction_affected),
    };
    let affected = select_affected(rng, pop, fraction, from_all);

    let mut total_loss = 0.0;
    let mut impact_sum = 0.0;
    for &idx in &affected {
        let impact = match spec.severity_sampling {
            SamplingPolicy::Normal => {
                sample_abc_parameter(rng, spec.condition_loss, 0.0, CONDITION_MAX)
                    .expect("validated condition_loss range")
            }
            SamplingPolicy::Uniform => sample_uniform_range(rng, spec.condition_loss),
        };
        impact_sum += impact;
        let before = pop.conditions[idx];
        let after = (before - impact).max(0.0);
        pop.conditions[idx] = after;
        total_loss += before - after;
    }

    EventOccurrence {
        year,
        event_name: spec.name.clone(),
        n_affected: affected.len(),
        total_condition_loss: total_loss,
        sampled_fraction: fraction,
        sampled_impact_mean: if affected.is_empty() {
            0.0
        } else {
            impact_sum / affected.len() as f64
        },
        affected_indices: affected.iter().map(|&i| i as u32).collect(),
    }
}
