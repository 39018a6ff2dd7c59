//! Continuous degradation: pluggable damage functions converting
//! environmental parameters to a per-year condition decrement.
//!
//! Two models are built in. `linear_rate` removes a constant number of
//! condition units per year. `cellulose_hydrolysis` follows chain-scission
//! kinetics `1/DP_t - 1/DP_0 = kc * t`, with the rate constant `kc` either
//! given directly or derived from temperature, relative humidity and pH
//! through an Arrhenius-type dose-response whose coefficients are
//! config-supplied (see [`rate_constant_from_environment`]). Condition is the
//! linear rescaling of DP that reaches 0 at `DP_threshold` and 100 at `DP0`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::domain::{ContinuousProcessSpec, ProcessKind, TrajectoryMode, CONDITION_MAX};

/// Molar gas constant in J/(mol K).
pub const GAS_CONSTANT: f64 = 8.314_462_618;

#[derive(Debug, thiserror::Error)]
pub enum DamageError {
    #[error("process {process:?}: missing param `{key}`")]
    MissingParam { process: String, key: String },
    #[error("process {process:?}: {detail}")]
    InvalidParam { process: String, detail: String },
    #[error("process {process:?}: cannot read coefficients file {path}: {source}")]
    CoefficientsIo {
        process: String,
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("process {process:?}: cannot parse coefficients file {path}: {detail}")]
    CoefficientsParse {
        process: String,
        path: PathBuf,
        detail: String,
    },
}

/// Parameters of the cellulose hydrolysis model, with the derived (or
/// explicitly supplied) rate constant `kc` in 1/(DP year).
#[derive(Debug, Clone, PartialEq)]
pub struct CelluloseParams {
    pub dp0: f64,
    pub dp_threshold: f64,
    kc: f64,
}

impl CelluloseParams {
    /// Build directly from a rate constant, bypassing the dose-response.
    pub fn with_rate_constant(dp0: f64, dp_threshold: f64, kc: f64) -> Result<Self, DamageError> {
        let invalid = |detail: String| DamageError::InvalidParam {
            process: "cellulose".to_string(),
            detail,
        };
        if !(dp0 > dp_threshold && dp_threshold > 0.0) {
            return Err(invalid(format!(
                "requires DP0 > DP_threshold > 0 (got {dp0}, {dp_threshold})"
            )));
        }
        if !kc.is_finite() || kc < 0.0 {
            return Err(invalid(format!("rate constant must be >= 0, got {kc}")));
        }
        Ok(Self {
            dp0,
            dp_threshold,
            kc,
        })
    }

    pub fn rate_constant(&self) -> f64 {
        self.kc
    }
}

/// Arrhenius-type dose-response for the hydrolysis rate constant:
///
/// ```text
/// kc = exp( ln_pre_exp
///           + acid_exp * ln(10^-pH)
///           + rh_exp   * ln(RH / 100)
///           - activation_energy / (R * (T + 273.15)) )
/// ```
///
/// with `T` in deg C, `RH` in percent, `activation_energy` in J/mol. The four
/// coefficients come from the config (inline params or a coefficients file);
/// no kinetic constants are hard-coded. `RH = 0` yields `kc = 0`.
pub fn rate_constant_from_environment(
    temperature_c: f64,
    relative_humidity: f64,
    ph: f64,
    coefficients: &BTreeMap<String, f64>,
) -> Result<f64, DamageError> {
    let get = |key: &str| {
        coefficients
            .get(key)
            .copied()
            .ok_or_else(|| DamageError::MissingParam {
                process: "cellulose".to_string(),
                key: key.to_string(),
            })
    };
    let ln_pre_exp = get("ln_pre_exp")?;
    let activation_energy = get("activation_energy")?;
    let acid_exp = get("acid_exp")?;
    let rh_exp = get("rh_exp")?;

    let t_kelvin = temperature_c + 273.15;
    if t_kelvin <= 0.0 {
        return Err(DamageError::InvalidParam {
            process: "cellulose".to_string(),
            detail: format!("temperature {temperature_c} C is below absolute zero"),
        });
    }
    let ln_h_plus = -ph * std::f64::consts::LN_10;
    let ln_rh = (relative_humidity / 100.0).ln();
    let kc = (ln_pre_exp + acid_exp * ln_h_plus + rh_exp * ln_rh
        - activation_energy / (GAS_CONSTANT * t_kelvin))
        .exp();
    if kc.is_nan() {
        return Err(DamageError::InvalidParam {
            process: "cellulose".to_string(),
            detail: "rate constant evaluates to NaN".to_string(),
        });
    }
    Ok(kc)
}

/// Degree of polymerisation after `t` years: `1 / (1/DP0 + kc t)`.
/// Monotonically nonincreasing in `t`.
pub fn cellulose_dp_at(params: &CelluloseParams, t: f64) -> f64 {
    1.0 / (1.0 / params.dp0 + params.kc * t)
}

/// Linear DP-to-condition rescaling, clamped to `[0, 100]`: `DP_threshold`
/// maps to 0 and `DP0` maps to 100.
pub fn condition_from_dp(params: &CelluloseParams, dp: f64) -> f64 {
    (CONDITION_MAX * (dp - params.dp_threshold) / (params.dp0 - params.dp_threshold))
        .clamp(0.0, CONDITION_MAX)
}

/// Inverse of [`condition_from_dp`] on the unclamped segment.
fn dp_from_condition(params: &CelluloseParams, condition: f64) -> f64 {
    params.dp_threshold
        + condition / CONDITION_MAX * (params.dp0 - params.dp_threshold)
}

/// A constructed damage function: pure, immutable, safe to share across runs.
#[derive(Debug, Clone, PartialEq)]
pub enum DamageFunction {
    Linear { rate: f64 },
    /// One DP trajectory indexed by calendar year, shared by all covered agents.
    CelluloseShared(CelluloseParams),
    /// DP re-derived from each agent's current condition before stepping one year.
    CellulosePerAgent(CelluloseParams),
}

impl DamageFunction {
    /// Build from a spec, loading `coefficients_file` (if any) relative to
    /// `base_dir`. Inline params override file entries; an explicit `kc`
    /// param overrides the dose-response entirely.
    pub fn from_spec(
        spec: &ContinuousProcessSpec,
        base_dir: Option<&Path>,
    ) -> Result<Self, DamageError> {
        let missing = |key: &str| DamageError::MissingParam {
            process: spec.name.clone(),
            key: key.to_string(),
        };
        match spec.kind {
            ProcessKind::LinearRate => {
                let rate = *spec.params.get("rate").ok_or_else(|| missing("rate"))?;
                if !rate.is_finite() || rate < 0.0 {
                    return Err(DamageError::InvalidParam {
                        process: spec.name.clone(),
                        detail: format!("rate must be >= 0, got {rate}"),
                    });
                }
                Ok(DamageFunction::Linear { rate })
            }
            ProcessKind::CelluloseHydrolysis => {
                let mut params = spec.params.clone();
                if let Some(file) = &spec.coefficients_file {
                    let resolved = match base_dir {
                        Some(dir) if file.is_relative() => dir.join(file),
                        _ => file.clone(),
                    };
                    for (key, value) in load_coefficients(&spec.name, &resolved)? {
                        params.entry(key).or_insert(value);
                    }
                }
                let dp0 = *params.get("DP0").ok_or_else(|| missing("DP0"))?;
                let threshold = *params
                    .get("DP_threshold")
                    .ok_or_else(|| missing("DP_threshold"))?;
                let kc = match params.get("kc") {
                    Some(&kc) => kc,
                    None => {
                        let t = *params.get("T").ok_or_else(|| missing("T"))?;
                        let rh = *params.get("RH").ok_or_else(|| missing("RH"))?;
                        let ph = *params.get("pH").ok_or_else(|| missing("pH"))?;
                        rate_constant_from_environment(t, rh, ph, &params)?
                    }
                };
                let cellulose = CelluloseParams::with_rate_constant(dp0, threshold, kc)
                    .map_err(|e| match e {
                        DamageError::InvalidParam { detail, .. } => DamageError::InvalidParam {
                            process: spec.name.clone(),
                            detail,
                        },
                        other => other,
                    })?;
                Ok(match spec.trajectory {
                    TrajectoryMode::Shared => DamageFunction::CelluloseShared(cellulose),
                    TrajectoryMode::PerAgent => DamageFunction::CellulosePerAgent(cellulose),
                })
            }
        }
    }

    /// Condition units lost by an agent at `condition` during year `year`.
    /// Always >= 0; the caller clamps the agent at 0.
    pub fn annual_loss(&self, condition: f64, year: u32) -> f64 {
        match self {
            DamageFunction::Linear { rate } => *rate,
            DamageFunction::CelluloseShared(p) => {
                let now = condition_from_dp(p, cellulose_dp_at(p, year as f64));
                let next = condition_from_dp(p, cellulose_dp_at(p, (year + 1) as f64));
                now - next
            }
            DamageFunction::CellulosePerAgent(p) => {
                let dp_now = dp_from_condition(p, condition.clamp(0.0, CONDITION_MAX));
                let dp_next = 1.0 / (1.0 / dp_now + p.kc);
                condition.clamp(0.0, CONDITION_MAX) - condition_from_dp(p, dp_next)
            }
        }
    }
}

fn load_coefficients(
    process: &str,
    path: &Path,
) -> Result<BTreeMap<String, f64>, DamageError> {
    let text = std::fs::read_to_string(path).map_err(|source| DamageError::CoefficientsIo {
        process: process.to_string(),
        path: path.to_path_buf(),
        source,
    })?;
    let is_json = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed: Result<BTreeMap<String, f64>, String> = if is_json {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|detail| DamageError::CoefficientsParse {
        process: process.to_string(),
        path: path.to_path_buf(),
        detail,
    })
}
