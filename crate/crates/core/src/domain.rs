//! Core data types and the scenario configuration model shared by all
//! other modules.
//!
//! Everything here is plain data: construction never fails, and
//! [`validate_config`] reports invariant violations as values instead of
//! aborting, so a CLI can show the full list at once.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Upper end of the condition scale. Agents live on `[0, CONDITION_MAX]`.
pub const CONDITION_MAX: f64 = 100.0;

/// Closed interval `[lo, hi]` expressing an uncertain input quantity.
///
/// Serialized as a two-element array (`[0.2, 0.6]`). Parsing is permissive;
/// ordering and finiteness are checked by [`validate_config`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

impl From<[f64; 2]> for Range {
    fn from(v: [f64; 2]) -> Self {
        Self { lo: v[0], hi: v[1] }
    }
}

impl From<Range> for [f64; 2] {
    fn from(r: Range) -> Self {
        [r.lo, r.hi]
    }
}

/// Initial condition distribution: truncated normal on `[lower_bound, upper_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialConditionSpec {
    pub mean: f64,
    pub sd: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

/// How an uncertain range is turned into a concrete draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingPolicy {
    /// Uniform draw over the range.
    Uniform,
    /// Normal draw with the range read as a 95% confidence interval,
    /// truncated to the quantity's physical bounds.
    Normal,
}

fn default_weibull_shape() -> f64 {
    1.0
}

fn uniform_policy() -> SamplingPolicy {
    SamplingPolicy::Uniform
}

fn normal_policy() -> SamplingPolicy {
    SamplingPolicy::Normal
}

/// One adverse-event risk, characterised by the three uncertain quantities of
/// the ABC framework: fraction of the collection affected, condition loss per
/// affected object, and mean time between occurrences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdverseEventSpec {
    pub name: String,
    /// Fraction of agents hit per occurrence, dimensionless in `[0, 1]`.
    pub fraction_affected: Range,
    /// Condition units removed per affected agent, in `[0, 100]`.
    pub condition_loss: Range,
    /// Mean time between occurrences in years, strictly positive.
    pub mean_time: Range,
    /// Weibull shape parameter k; 1 gives a constant hazard rate.
    #[serde(default = "default_weibull_shape")]
    pub weibull_shape: f64,
    /// Policy for drawing the per-year mean time from `mean_time`.
    #[serde(default = "uniform_policy")]
    pub mean_time_sampling: SamplingPolicy,
    /// Policy for drawing fraction and impact values.
    #[serde(default = "normal_policy")]
    pub severity_sampling: SamplingPolicy,
}

/// Which continuous degradation model a process uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    /// Constant condition loss per year (`rate` param).
    LinearRate,
    /// Chain-scission kinetics driven by T, RH, pH and a coefficient table
    /// (or an explicit `kc` param).
    CelluloseHydrolysis,
}

/// Subset of agents a continuous process applies to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AgentSelector {
    #[default]
    All,
    /// Half-open index window `[start, end)`.
    IndexRange { start: u32, end: u32 },
    /// First `round(fraction * num_agents)` agents.
    Fraction(f64),
}

impl AgentSelector {
    /// Whether agent `index` (of `num_agents`) is covered by this selector.
    pub fn covers(&self, index: usize, num_agents: usize) -> bool {
        match *self {
            AgentSelector::All => true,
            AgentSelector::IndexRange { start, end } => {
                index >= start as usize && index < end as usize
            }
            AgentSelector::Fraction(f) => {
                let n = (f * num_agents as f64).round() as usize;
                index < n
            }
        }
    }
}

/// Whether the cellulose trajectory is shared by all covered agents or
/// re-derived from each agent's current condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMode {
    #[default]
    Shared,
    PerAgent,
}

/// A continuous degradation process and the parameters of its damage model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousProcessSpec {
    pub name: String,
    pub kind: ProcessKind,
    /// Model parameters by name (`rate`; or `T`, `RH`, `pH`, `DP0`,
    /// `DP_threshold`, optional `kc`).
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Optional coefficient table file, resolved relative to the scenario
    /// file. Inline `params` entries take precedence over file entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients_file: Option<PathBuf>,
    #[serde(default)]
    pub applies_to: AgentSelector,
    /// Cellulose only; ignored for linear processes.
    #[serde(default)]
    pub trajectory: TrajectoryMode,
}

fn default_lifetime_fraction() -> f64 {
    0.01
}

/// Full description of one simulation experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub num_agents: u32,
    pub num_years: u32,
    pub num_simulations: u32,
    pub init: InitialConditionSpec,
    #[serde(default)]
    pub adverse_events: Vec<AdverseEventSpec>,
    #[serde(default)]
    pub continuous_processes: Vec<ContinuousProcessSpec>,
    pub master_seed: u64,
    /// An agent counts as "in good condition" while its condition is
    /// strictly above this value.
    #[serde(default)]
    pub good_condition_threshold: f64,
    /// The collection lifetime is the first year the good fraction drops to
    /// this value or below.
    #[serde(default = "default_lifetime_fraction")]
    pub lifetime_fraction: f64,
    /// Let adverse events hit agents that are already at condition 0
    /// (sensitivity checks only; default keeps fall-off semantics).
    #[serde(default)]
    pub select_from_all_agents: bool,
}

/// One invariant violation found by [`validate_config`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Dotted path to the offending field, e.g. `adverse_events[0].mean_time.lo`.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Errors from reading a scenario file. Invariant violations are not errors;
/// they come from [`validate_config`].
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path} as TOML or JSON: {detail}")]
    Parse { path: PathBuf, detail: String },
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Load a scenario from a `.toml` or `.json` file; unknown extensions are
    /// tried as TOML first, then JSON.
    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let parse_err = |detail: String| ConfigError::Parse {
            path: path.to_path_buf(),
            detail,
        };
        match ext.as_str() {
            "json" => Self::from_json_str(&text).map_err(|e| parse_err(e.to_string())),
            "toml" => Self::from_toml_str(&text).map_err(|e| parse_err(e.to_string())),
            _ => Self::from_toml_str(&text).or_else(|toml_err| {
                Self::from_json_str(&text).map_err(|json_err| {
                    parse_err(format!("toml: {toml_err}; json: {json_err}"))
                })
            }),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes to TOML")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes to JSON")
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_config(self)
    }
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    fn require(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.push(path, message);
        }
    }

    fn check_range(&mut self, path: &str, r: Range) {
        self.require(
            r.lo.is_finite() && r.hi.is_finite(),
            path,
            "both endpoints must be finite",
        );
        self.require(
            !(r.lo.is_finite() && r.hi.is_finite()) || r.lo <= r.hi,
            path,
            format!("lo must be <= hi (got [{}, {}])", r.lo, r.hi),
        );
    }
}

/// Check every invariant of a structurally well-formed config and return the
/// full list of violations; an empty list means the config is valid. Never
/// panics.
pub fn validate_config(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut c = Checker {
        violations: Vec::new(),
    };

    c.require(cfg.num_agents >= 1, "num_agents", "must be >= 1");
    c.require(cfg.num_simulations >= 1, "num_simulations", "must be >= 1");

    let init = &cfg.init;
    c.require(
        init.mean.is_finite() && init.sd.is_finite(),
        "init",
        "mean and sd must be finite",
    );
    c.require(init.sd >= 0.0, "init.sd", "must be >= 0");
    c.require(
        init.lower_bound >= 0.0,
        "init.lower_bound",
        "must be >= 0",
    );
    c.require(
        init.upper_bound <= CONDITION_MAX,
        "init.upper_bound",
        format!("must be <= {CONDITION_MAX}"),
    );
    c.require(
        init.lower_bound < init.upper_bound,
        "init.lower_bound",
        format!(
            "must be < upper_bound (got {} >= {})",
            init.lower_bound, init.upper_bound
        ),
    );
    if init.lower_bound < init.upper_bound {
        c.require(
            init.mean >= init.lower_bound && init.mean <= init.upper_bound,
            "init.mean",
            "must lie within [lower_bound, upper_bound]",
        );
    }

    let mut seen_names = BTreeSet::new();
    for (i, ev) in cfg.adverse_events.iter().enumerate() {
        let at = |field: &str| format!("adverse_events[{i}].{field}");
        c.require(!ev.name.is_empty(), at("name"), "must be non-empty");
        if !seen_names.insert(ev.name.clone()) {
            c.push(at("name"), format!("duplicate process name {:?}", ev.name));
        }
        c.check_range(&at("fraction_affected"), ev.fraction_affected);
        c.require(
            ev.fraction_affected.lo >= 0.0 && ev.fraction_affected.hi <= 1.0,
            at("fraction_affected"),
            "must lie within [0, 1]",
        );
        c.check_range(&at("condition_loss"), ev.condition_loss);
        c.require(
            ev.condition_loss.lo >= 0.0 && ev.condition_loss.hi <= CONDITION_MAX,
            at("condition_loss"),
            format!("must lie within [0, {CONDITION_MAX}]"),
        );
        c.check_range(&at("mean_time"), ev.mean_time);
        c.require(ev.mean_time.lo > 0.0, at("mean_time.lo"), "must be > 0");
        c.require(
            ev.weibull_shape.is_finite() && ev.weibull_shape > 0.0,
            at("weibull_shape"),
            "must be > 0",
        );
    }

    for (i, p) in cfg.continuous_processes.iter().enumerate() {
        let at = |field: &str| format!("continuous_processes[{i}].{field}");
        c.require(!p.name.is_empty(), at("name"), "must be non-empty");
        if !seen_names.insert(p.name.clone()) {
            c.push(at("name"), format!("duplicate process name {:?}", p.name));
        }
        for (key, value) in &p.params {
            c.require(
                value.is_finite(),
                at(&format!("params.{key}")),
                "must be finite",
            );
        }
        match p.kind {
            ProcessKind::LinearRate => match p.params.get("rate") {
                None => c.push(at("params.rate"), "linear_rate requires a `rate` param"),
                Some(&rate) => c.require(rate >= 0.0, at("params.rate"), "must be >= 0"),
            },
            ProcessKind::CelluloseHydrolysis => {
                let dp0 = p.params.get("DP0").copied();
                let thr = p.params.get("DP_threshold").copied();
                match (dp0, thr) {
                    (Some(dp0), Some(thr)) => {
                        c.require(
                            dp0 > thr && thr > 0.0,
                            at("params.DP0"),
                            format!("requires DP0 > DP_threshold > 0 (got {dp0}, {thr})"),
                        );
                    }
                    _ => c.push(
                        at("params"),
                        "cellulose_hydrolysis requires DP0 and DP_threshold params",
                    ),
                }
                if let Some(&rh) = p.params.get("RH") {
                    c.require(
                        (0.0..=100.0).contains(&rh),
                        at("params.RH"),
                        "must lie within [0, 100]",
                    );
                }
                if let Some(&kc) = p.params.get("kc") {
                    c.require(kc >= 0.0, at("params.kc"), "must be >= 0");
                } else {
                    let has_env = ["T", "RH", "pH"]
                        .iter()
                        .all(|k| p.params.contains_key(*k));
                    c.require(
                        has_env,
                        at("params"),
                        "requires either `kc` or all of T, RH, pH",
                    );
                }
            }
        }
        match p.applies_to {
            AgentSelector::Fraction(f) => c.require(
                (0.0..=1.0).contains(&f),
                at("applies_to.fraction"),
                "must lie within [0, 1]",
            ),
            AgentSelector::IndexRange { start, end } => {
                c.require(
                    start <= end,
                    at("applies_to.index_range"),
                    "start must be <= end",
                );
                c.require(
                    end <= cfg.num_agents,
                    at("applies_to.index_range.end"),
                    format!("must be <= num_agents ({})", cfg.num_agents),
                );
            }
            AgentSelector::All => {}
        }
    }

    c.require(
        cfg.good_condition_threshold.is_finite()
            && (0.0..CONDITION_MAX).contains(&cfg.good_condition_threshold),
        "good_condition_threshold",
        format!("must lie within [0, {CONDITION_MAX})"),
    );
    c.require(
        cfg.lifetime_fraction.is_finite()
            && cfg.lifetime_fraction > 0.0
            && cfg.lifetime_fraction <= 1.0,
        "lifetime_fraction",
        "must lie within (0, 1]",
    );

    c.violations
}

/// Per-object condition vector on the `[0, 100]` scale. Owned by exactly one
/// simulation run at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub conditions: Vec<f64>,
}

impl Population {
    pub fn new(conditions: Vec<f64>) -> Self {
        Self { conditions }
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    /// Indices of agents that have not fallen off (condition strictly > 0).
    pub fn alive_indices(&self) -> Vec<usize> {
        self.conditions
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn alive_count(&self) -> usize {
        self.conditions.iter().filter(|&&c| c > 0.0).count()
    }

    /// Percentage of agents with condition strictly above `threshold`.
    pub fn percentage_good(&self, threshold: f64) -> f64 {
        if self.conditions.is_empty() {
            return 0.0;
        }
        let good = self.conditions.iter().filter(|&&c| c > threshold).count();
        100.0 * good as f64 / self.conditions.len() as f64
    }

    /// Sum of all conditions; nonincreasing over a run.
    pub fn total_condition(&self) -> f64 {
        self.conditions.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table_event(name: &str, frac: [f64; 2], loss: [f64; 2], mt: [f64; 2]) -> AdverseEventSpec {
        AdverseEventSpec {
            name: name.to_string(),
            fraction_affected: frac.into(),
            condition_loss: loss.into(),
            mean_time: mt.into(),
            weibull_shape: 1.0,
            mean_time_sampling: SamplingPolicy::Uniform,
            severity_sampling: SamplingPolicy::Normal,
        }
    }

    fn base_config() -> ScenarioConfig {
        ScenarioConfig {
            num_agents: 100,
            num_years: 50,
            num_simulations: 2,
            init: InitialConditionSpec {
                mean: 75.0,
                sd: 10.0,
                lower_bound: 0.0,
                upper_bound: 100.0,
            },
            adverse_events: vec![table_event(
                "fire",
                [0.2, 0.6],
                [100.0, 100.0],
                [200.0, 600.0],
            )],
            continuous_processes: vec![],
            master_seed: 42,
            good_condition_threshold: 0.0,
            lifetime_fraction: 0.01,
            select_from_all_agents: false,
        }
    }

    #[test]
    fn table_row_config_is_valid() {
        assert_eq!(validate_config(&base_config()), vec![]);
    }

    #[test]
    fn zero_mean_time_lower_bound_is_reported() {
        let mut cfg = base_config();
        cfg.adverse_events[0].mean_time = Range::new(0.0, 5.0);
        let violations = validate_config(&cfg);
        assert!(
            violations
                .iter()
                .any(|v| v.path.ends_with("mean_time.lo") && v.message.contains("> 0")),
            "expected a mean_time.lo violation, got {violations:?}"
        );
    }

    #[test]
    fn inverted_init_bounds_are_reported() {
        let mut cfg = base_config();
        cfg.init.lower_bound = 50.0;
        cfg.init.upper_bound = 40.0;
        let violations = validate_config(&cfg);
        assert!(
            violations.iter().any(|v| v.path == "init.lower_bound"),
            "expected a bounds-ordering violation, got {violations:?}"
        );
    }

    #[test]
    fn duplicate_names_across_event_and_process_are_reported() {
        let mut cfg = base_config();
        cfg.continuous_processes.push(ContinuousProcessSpec {
            name: "fire".to_string(),
            kind: ProcessKind::LinearRate,
            params: [("rate".to_string(), 0.1)].into_iter().collect(),
            coefficients_file: None,
            applies_to: AgentSelector::All,
            trajectory: TrajectoryMode::Shared,
        });
        let violations = validate_config(&cfg);
        assert!(violations.iter().any(|v| v.message.contains("duplicate")));
    }

    #[test]
    fn validation_is_total_on_hostile_values() {
        let mut cfg = base_config();
        cfg.num_agents = 0;
        cfg.init.mean = f64::NAN;
        cfg.init.sd = -1.0;
        cfg.adverse_events[0].fraction_affected = Range::new(f64::INFINITY, -1.0);
        cfg.lifetime_fraction = 0.0;
        let violations = validate_config(&cfg);
        assert!(violations.len() >= 4);
    }

    #[test]
    fn toml_round_trip_is_identity() {
        let cfg = base_config();
        let text = cfg.to_toml_string();
        let parsed = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(parsed, cfg);
        assert_eq!(
            ScenarioConfig::from_toml_str(&parsed.to_toml_string()).unwrap(),
            parsed
        );
    }

    #[test]
    fn json_round_trip_is_identity() {
        let cfg = base_config();
        let parsed = ScenarioConfig::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn defaults_fill_in_on_parse() {
        let text = r#"
            num_agents = 10
            num_years = 5
            num_simulations = 1
            master_seed = 7

            [init]
            mean = 75.0
            sd = 10.0
            lower_bound = 0.0
            upper_bound = 100.0

            [[adverse_events]]
            name = "leak"
            fraction_affected = [0.02, 0.06]
            condition_loss = [0.6, 2.0]
            mean_time = [0.02, 0.06]
        "#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.good_condition_threshold, 0.0);
        assert_eq!(cfg.lifetime_fraction, 0.01);
        assert_eq!(cfg.adverse_events[0].weibull_shape, 1.0);
        assert_eq!(
            cfg.adverse_events[0].mean_time_sampling,
            SamplingPolicy::Uniform
        );
        assert_eq!(
            cfg.adverse_events[0].severity_sampling,
            SamplingPolicy::Normal
        );
        assert!(!cfg.select_from_all_agents);
    }

    #[test]
    fn selector_covers() {
        assert!(AgentSelector::All.covers(7, 10));
        let r = AgentSelector::IndexRange { start: 2, end: 5 };
        assert!(!r.covers(1, 10) && r.covers(2, 10) && r.covers(4, 10) && !r.covers(5, 10));
        // round-half-away-from-zero: 0.5 of 3 agents covers 2
        let f = AgentSelector::Fraction(0.5);
        assert!(f.covers(0, 3) && f.covers(1, 3) && !f.covers(2, 3));
    }

    #[test]
    fn percentage_good_uses_strict_comparison() {
        let pop = Population::new(vec![0.0, 0.0, 50.0, 100.0]);
        assert_eq!(pop.percentage_good(0.0), 50.0);
        assert_eq!(pop.percentage_good(50.0), 25.0);
        assert_eq!(pop.alive_count(), 2);
        assert_eq!(pop.alive_indices(), vec![2, 3]);
    }
}
