//! All randomness: per-run deterministic streams, truncated normal, Weibull,
//! uniform-range, and the 95%-CI range-to-normal conversion.
//!
//! The stream algorithm is pinned for reproducibility: ChaCha8 keyed with
//! `master_seed` through `seed_from_u64`, with the ChaCha stream counter set
//! to `run_index`. Distinct run indices give independent streams without any
//! sequential dependence, so runs can execute in parallel and still reproduce
//! bit for bit. Changing the generator breaks golden outputs.

use rand::distr::OpenClosed01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::domain::Range;

/// Two-sided z for a 95% confidence interval.
pub const Z_95: f64 = 1.959_964;

/// Rejection-sampling attempts before the truncated normal falls back to
/// inverse-CDF sampling (guards narrow truncation windows).
pub const REJECTION_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("truncation window is empty: lo {lo} >= hi {hi}")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("standard deviation must be >= 0, got {0}")]
    NegativeSd(f64),
    #[error("weibull shape must be > 0, got {0}")]
    NonPositiveShape(f64),
    #[error("weibull scale must be > 0, got {0}")]
    NonPositiveScale(f64),
    #[error("parameter must not be NaN")]
    NanParameter,
}

/// Deterministic random stream for one simulation run.
///
/// Identical `(master_seed, run_index)` pairs yield identical sample
/// sequences; distinct run indices yield independent streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, run_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(run_index);
        Self { rng }
    }

    /// Uniform draw on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random()
    }

    /// Uniform draw on `(0, 1]`, safe under `ln`.
    pub fn unit_open_closed(&mut self) -> f64 {
        self.rng.sample(OpenClosed01)
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer draw in `[lo, hi)`.
    pub fn index_in(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..hi)
    }
}

/// Draw from normal(mean, sd) conditioned on `[lo, hi]`.
///
/// `lo`/`hi` may be infinite (one-sided truncation). Rejection sampling with
/// a cap of [`REJECTION_CAP`] iterations, then inverse-CDF fallback. For
/// `sd == 0` the (clamped) mean is returned without consuming a draw.
pub fn sample_truncated_normal(
    rng: &mut RngStream,
    mean: f64,
    sd: f64,
    lo: f64,
    hi: f64,
) -> Result<f64, SampleError> {
    if mean.is_nan() || sd.is_nan() || lo.is_nan() || hi.is_nan() {
        return Err(SampleError::NanParameter);
    }
    if sd < 0.0 {
        return Err(SampleError::NegativeSd(sd));
    }
    if lo >= hi {
        return Err(SampleError::EmptyWindow { lo, hi });
    }
    if sd == 0.0 {
        return Ok(mean.clamp(lo, hi));
    }

    for _ in 0..REJECTION_CAP {
        let x = mean + sd * rng.standard_normal();
        if x >= lo && x <= hi {
            return Ok(x);
        }
    }

    // Window too far in a tail for rejection; invert the conditional CDF.
    let normal = Normal::new(mean, sd).expect("finite mean, positive sd");
    let p_lo = if lo == f64::NEG_INFINITY { 0.0 } else { normal.cdf(lo) };
    let p_hi = if hi == f64::INFINITY { 1.0 } else { normal.cdf(hi) };
    let p = (p_lo + rng.unit() * (p_hi - p_lo))
        .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    Ok(normal.inverse_cdf(p).clamp(lo, hi))
}

/// Inverse-transform map from a uniform draw `u` in `(0, 1]` to
/// Weibull(shape, scale): `scale * (-ln u)^(1/shape)`.
pub fn weibull_from_uniform(u: f64, shape: f64, scale: f64) -> f64 {
    scale * (-u.ln()).powf(1.0 / shape)
}

/// Draw from Weibull(shape, scale) by inverse transform.
pub fn sample_weibull(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64, SampleError> {
    if !shape.is_finite() || shape <= 0.0 {
        return Err(SampleError::NonPositiveShape(shape));
    }
    if !scale.is_finite() || scale <= 0.0 {
        return Err(SampleError::NonPositiveScale(scale));
    }
    Ok(weibull_from_uniform(rng.unit_open_closed(), shape, scale))
}

/// Uniform draw on `[r.lo, r.hi]`; a degenerate range returns `r.lo` without
/// consuming a draw.
pub fn sample_uniform_range(rng: &mut RngStream, r: Range) -> f64 {
    debug_assert!(r.lo <= r.hi, "invalid range [{}, {}]", r.lo, r.hi);
    if r.is_degenerate() {
        return r.lo;
    }
    r.lo + rng.unit() * r.width()
}

/// Read a range as a 95% confidence interval of a normal distribution:
/// mean is the midpoint, sd is the half-width divided by [`Z_95`].
pub fn normal_from_95ci(r: Range) -> (f64, f64) {
    (r.midpoint(), r.width() / (2.0 * Z_95))
}

/// Draw an uncertain model parameter: normal from the 95%-CI reading of `r`,
/// truncated to the quantity's physical bounds `[clamp_lo, clamp_hi]`.
pub fn sample_abc_parameter(
    rng: &mut RngStream,
    r: Range,
    clamp_lo: f64,
    clamp_hi: f64,
) -> Result<f64, SampleError> {
    let (mean, sd) = normal_from_95ci(r);
    sample_truncated_normal(rng, mean, sd, clamp_lo, clamp_hi)
}
