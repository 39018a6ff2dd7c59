//! Ablation studies, significance testing, histograms, and ensemble
//! envelopes over completed simulation results.

use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::damage::DamageError;
use crate::domain::ScenarioConfig;
use crate::engine::{CompiledScenario, EnsembleResult, EnsembleSummary, RunResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need at least 2 values per sample, got {a} and {b}")]
    InsufficientData { a: usize, b: usize },
    #[error("ablation needs at least one degradation process")]
    NothingToAblate,
}

/// Result of a two-sided Welch two-sample t-test.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchTest {
    pub t_statistic: f64,
    /// Welch-Satterthwaite degrees of freedom.
    pub degrees_of_freedom: f64,
    pub p_value: f64,
    /// Set when both samples had zero variance and the p-value is the
    /// 0-or-1 convention rather than a computed tail probability.
    pub degenerate: bool,
}

fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Two-sided Welch's t-test for a difference in means of two independent
/// samples with unequal variances.
///
/// Conventions for degenerate inputs: both samples constant with equal means
/// gives p = 1; both constant with different means gives p = 0. Either case
/// sets `degenerate`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTest, AnalysisError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalysisError::InsufficientData {
            a: a.len(),
            b: b.len(),
        });
    }
    let (mean_a, var_a) = mean_and_variance(a);
    let (mean_b, var_b) = mean_and_variance(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);

    if var_a == 0.0 && var_b == 0.0 {
        let equal = mean_a == mean_b;
        return Ok(WelchTest {
            t_statistic: if equal { 0.0 } else { f64::INFINITY * (mean_a - mean_b).signum() },
            degrees_of_freedom: na + nb - 2.0,
            p_value: if equal { 1.0 } else { 0.0 },
            degenerate: true,
        });
    }

    let se_sq = var_a / na + var_b / nb;
    let t = (mean_a - mean_b) / se_sq.sqrt();
    let df = se_sq.powi(2)
        / ((var_a / na).powi(2) / (na - 1.0) + (var_b / nb).powi(2) / (nb - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    Ok(WelchTest {
        t_statistic: t,
        degrees_of_freedom: df,
        p_value: p,
        degenerate: false,
    })
}

/// One half-open histogram bin `[start, start + width)`; the final bin is
/// closed at the upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub start: f64,
    pub count: u64,
}

/// Bin `values` over `[lo, hi]` with the given width. Values outside the
/// bounds are dropped, so the counts sum to the number of in-range values.
pub fn histogram(values: &[f64], bin_width: f64, lo: f64, hi: f64) -> Vec<HistogramBin> {
    assert!(bin_width > 0.0, "bin_width must be > 0");
    assert!(lo < hi, "lo must be < hi");
    let n_bins = ((hi - lo) / bin_width).ceil() as usize;
    let mut bins: Vec<HistogramBin> = (0..n_bins)
        .map(|i| HistogramBin {
            start: lo + i as f64 * bin_width,
            count: 0,
        })
        .collect();
    for &v in values {
        if v < lo || v > hi || v.is_nan() {
            continue;
        }
        let idx = (((v - lo) / bin_width) as usize).min(n_bins - 1);
        bins[idx].count += 1;
    }
    bins
}

/// Histogram as CSV (`bin_start,count`).
pub fn histogram_csv(bins: &[HistogramBin]) -> String {
    let mut out = String::from("bin_start,count\n");
    for b in bins {
        out.push_str(&format!("{},{}\n", b.start, b.count));
    }
    out
}

/// Per-year envelope of `percentage_good` across runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPoint {
    pub year: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Per-year (min, mean, max) of `percentage_good` across runs. Runs that
/// stopped early are extended with their terminal value.
pub fn ensemble_band(runs: &[RunResult]) -> Vec<BandPoint> {
    assert!(!runs.is_empty(), "ensemble_band needs at least one run");
    let horizon = runs
        .iter()
        .map(|r| r.percentage_good.len())
        .max()
        .unwrap_or(0);
    (0..horizon)
        .map(|year| {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            let mut sum = 0.0;
            for run in runs {
                let pct = run
                    .percentage_good
                    .get(year)
                    .or_else(|| run.percentage_good.last())
                    .copied()
                    .unwrap_or(0.0);
                min = min.min(pct);
                max = max.max(pct);
                sum += pct;
            }
            BandPoint {
                year,
                min,
                mean: sum / runs.len() as f64,
                max,
            }
        })
        .collect()
}

/// One ablation variant: the ensemble with a single process removed.
#[derive(Debug, Clone)]
pub struct AblationVariant {
    pub removed_process_name: String,
    pub ensemble: EnsembleResult,
    /// Welch p-value of the lifetime difference against the baseline; absent
    /// when either side has fewer than two uncensored runs.
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// Baseline ensemble plus one variant per degradation process.
#[derive(Debug, Clone)]
pub struct AblationReport {
    pub baseline: EnsembleResult,
    pub variants: Vec<AblationVariant>,
    pub alpha: f64,
}

#[derive(Serialize)]
struct AblationVariantJson {
    removed_process_name: String,
    summary: EnsembleSummary,
    p_value: Option<f64>,
    significant: bool,
}

#[derive(Serialize)]
struct AblationReportJson {
    alpha: f64,
    baseline: EnsembleSummary,
    variants: Vec<AblationVariantJson>,
}

impl AblationReport {
    pub fn to_json_string(&self) -> String {
        let doc = AblationReportJson {
            alpha: self.alpha,
            baseline: self.baseline.summary(),
            variants: self
                .variants
                .iter()
                .map(|v| AblationVariantJson {
                    removed_process_name: v.removed_process_name.clone(),
                    summary: v.ensemble.summary(),
                    p_value: v.p_value,
                    significant: v.significant,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("report serializes")
    }

    /// Plain-text table: condition, collection lifetime, standard deviation
    /// of lifetime, max lifetime; significant rows are starred.
    pub fn render_table(&self) -> String {
        fn cells(ens: &EnsembleResult) -> (String, String, String) {
            let avg = ens
                .average_time
                .map(|t| format!("{t:.1}"))
                .unwrap_or_else(|| "n/a".to_string());
            let sd = ens
                .sd_time
                .map(|s| format!("{s:.2}"))
                .unwrap_or_else(|| "n/a".to_string());
            let mut max = ens
                .max_time
                .map(|m| m.to_string())
                .unwrap_or_else(|| "n/a".to_string());
            if ens.censored_run_count > 0 {
                max.push_str(&format!(" ({} censored)", ens.censored_run_count));
            }
            (avg, sd, max)
        }

        let mut rows: Vec<[String; 4]> = Vec::new();
        let (avg, sd, max) = cells(&self.baseline);
        rows.push(["All degradation processes".to_string(), avg, sd, max]);
        for v in &self.variants {
            let star = if v.significant { "*" } else { "" };
            let (avg, sd, max) = cells(&v.ensemble);
            rows.push([
                format!("Without {}{}", v.removed_process_name, star),
                avg,
                sd,
                max,
            ]);
        }

        let header = [
            "Condition".to_string(),
            "Collection Lifetime".to_string(),
            "Standard Deviation of Lifetime".to_string(),
            "Max Lifetime".to_string(),
        ];
        let mut widths = [0usize; 4];
        for row in std::iter::once(&header).chain(rows.iter()) {
            for (w, cell) in widths.iter_mut().zip(row.iter()) {
                *w = (*w).max(cell.len());
            }
        }
        let render_row = |row: &[String; 4]| {
            let mut line = String::new();
            for (i, (cell, w)) in row.iter().zip(widths.iter()).enumerate() {
                if i > 0 {
                    line.push_str("  ");
                }
                line.push_str(&format!("{cell:<w$}"));
            }
            line.trim_end().to_string()
        };

        let mut out = render_row(&header);
        out.push('\n');
        out.push_str(&"-".repeat(widths.iter().sum::<usize>() + 6));
        out.push('\n');
        for row in &rows {
            out.push_str(&render_row(row));
            out.push('\n');
        }
        out.push_str(&format!(
            "* statistically significant difference vs the baseline (Welch's t-test, alpha = {})\n",
            self.alpha
        ));
        out
    }
}

/// Run the baseline ensemble, then one variant per degradation process with
/// that process removed (adverse events first, then continuous processes, in
/// config order). Variants reuse the baseline master seed, so comparisons
/// share their random numbers. Censored runs are excluded from the t-tests.
pub fn run_ablation(
    cfg: &ScenarioConfig,
    alpha: f64,
    base_dir: Option<&Path>,
) -> Result<AblationReport, DamageError> {
    let baseline = CompiledScenario::with_base_dir(cfg, base_dir)?.run_ensemble();
    let baseline_lifetimes = baseline.uncensored_lifetimes();

    let mut variant_configs: Vec<(String, ScenarioConfig)> = Vec::new();
    for i in 0..cfg.adverse_events.len() {
        let mut variant = cfg.clone();
        let removed = variant.adverse_events.remove(i);
        variant_configs.push((removed.name, variant));
    }
    for i in 0..cfg.continuous_processes.len() {
        let mut variant = cfg.clone();
        let removed = variant.continuous_processes.remove(i);
        variant_configs.push((removed.name, variant));
    }

    let mut variants = Vec::with_capacity(variant_configs.len());
    for (name, variant_cfg) in variant_configs {
        let ensemble = CompiledScenario::with_base_dir(&variant_cfg, base_dir)?.run_ensemble();
        let variant_lifetimes = ensemble.uncensored_lifetimes();
        let p_value = welch_t_test(&baseline_lifetimes, &variant_lifetimes)
            .ok()
            .map(|t| t.p_value);
        let significant = p_value.is_some_and(|p| p < alpha);
        variants.push(AblationVariant {
            removed_process_name: name,
            ensemble,
            p_value,
            significant,
        });
    }

    Ok(AblationReport {
        baseline,
        variants,
        alpha,
    })
}
