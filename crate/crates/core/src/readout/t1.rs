use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::trace::ReadoutTrace;
use crate::error::{Error, Result};

/// Uncensored dwell segments required for an estimate.
pub const MIN_DWELLS: usize = 20;
const CONFIDENCE: f64 = 0.95;
const KMEANS_ITERATIONS: usize = 100;
/// Minimum centroid gap, in within-level standard deviations, for two levels.
const MIN_SEPARATION: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct T1Estimate {
    pub t1_s: f64,
    /// 95% interval.
    pub ci_low_s: f64,
    pub ci_high_s: f64,
    pub dwell_count: usize,
    pub mean_dwell_s: f64,
    /// Level separating the two states in the differential.
    pub threshold: f64,
}

/// Two-level split of the differential.
struct Split {
    threshold: f64,
    /// Centroid gap over the larger within-cluster standard deviation.
    separation: f64,
}

/// Midpoint between the two 1-D k-means centroids.
fn two_means_threshold(values: &[f64]) -> Split {
    let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..KMEANS_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let (mut s_lo, mut n_lo, mut s_hi, mut n_hi) = (0.0, 0usize, 0.0, 0usize);
        for &v in values {
            if v > mid {
                s_hi += v;
                n_hi += 1;
            } else {
                s_lo += v;
                n_lo += 1;
            }
        }
        if n_lo == 0 || n_hi == 0 {
            break;
        }
        let (new_lo, new_hi) = (s_lo / n_lo as f64, s_hi / n_hi as f64);
        if new_lo == lo && new_hi == hi {
            break;
        }
        lo = new_lo;
        hi = new_hi;
    }
    let threshold = 0.5 * (lo + hi);
    let spread = |keep: &dyn Fn(f64) -> bool, centre: f64| {
        let (s, n) = values
            .iter()
            .filter(|v| keep(**v))
            .fold((0.0, 0usize), |(s, n), v| (s + (v - centre).powi(2), n + 1));
        if n > 1 {
            (s / (n - 1) as f64).sqrt()
        } else {
            0.0
        }
    };
    let width = spread(&|v| v <= threshold, lo).max(spread(&|v| v > threshold, hi));
    Split {
        threshold,
        separation: if width > 0.0 { (hi - lo) / width } else { f64::INFINITY },
    }
}

/// Lengths in shots of the runs of a binary record, censored ends removed.
fn interior_dwells(states: &[bool]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut length = 1;
    for w in states.windows(2) {
        if w[0] == w[1] {
            length += 1;
        } else {
            runs.push(length);
            length = 1;
        }
    }
    runs.push(length);
    if runs.len() <= 2 {
        return Vec::new();
    }
    runs[1..runs.len() - 1].to_vec()
}

/// Mean per-shot dwell time D to T1 for a per-shot flip probability
/// p = 1 − exp(−dt/T1) with geometric dwell lengths of mean dt/p.
fn t1_from_mean_dwell(mean_dwell_s: f64, dt: f64) -> f64 {
    -dt / (-dt / mean_dwell_s).ln_1p()
}

/// Thresholds the differential, collects uncensored dwell times and fits an
/// exponential by maximum likelihood. The interval uses the χ²(2n) law of a
/// sum of n exponential dwells.
pub fn estimate_t1(trace: &ReadoutTrace) -> Result<T1Estimate> {
    if trace.is_empty() {
        return Err(Error::InvalidArgument("empty trace".into()));
    }
    let dt = trace.shot_duration_s;
    let split = two_means_threshold(&trace.differential);
    let threshold = split.threshold;
    let states: Vec<bool> = trace.differential.iter().map(|&v| v > threshold).collect();
    let dwells = if split.separation >= MIN_SEPARATION {
        interior_dwells(&states)
    } else {
        Vec::new()
    };
    let n = dwells.len();
    if n < MIN_DWELLS {
        let shots_per_dwell = if n > 0 {
            dwells.iter().sum::<usize>() as f64 / n as f64
        } else {
            trace.len() as f64
        };
        let required_shots = ((MIN_DWELLS + 2) as f64 * shots_per_dwell).ceil() as usize;
        return Err(Error::TooFewJumps {
            found: n,
            required: MIN_DWELLS,
            hint: format!(
                "the trace has {} shots; at the observed dwell rate at least {} shots are needed",
                trace.len(),
                required_shots.max(trace.len() + 1)
            ),
        });
    }
    let mean_shots = dwells.iter().sum::<usize>() as f64 / n as f64;
    if mean_shots <= 1.0 {
        return Err(Error::Unidentifiable(
            "every dwell lasts a single shot; T1 is below the shot resolution".into(),
        ));
    }
    let mean_dwell_s = mean_shots * dt;
    let chi = ChiSquared::new(2.0 * n as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let alpha = 1.0 - CONFIDENCE;
    let total = 2.0 * n as f64 * mean_dwell_s;
    let mean_low = (total / chi.inverse_cdf(1.0 - alpha / 2.0)).max(dt * (1.0 + 1e-12));
    let mean_high = total / chi.inverse_cdf(alpha / 2.0);
    Ok(T1Estimate {
        t1_s: t1_from_mean_dwell(mean_dwell_s, dt),
        ci_low_s: t1_from_mean_dwell(mean_low, dt),
        ci_high_s: t1_from_mean_dwell(mean_high, dt),
        dwell_count: n,
        mean_dwell_s,
        threshold,
    })
}
