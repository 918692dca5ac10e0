use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::DataSeries;
use crate::error::{Error, Result};

/// Search floor as a multiple of the last sample time.
pub const SEARCH_FLOOR_FACTOR: f64 = 1e-3;
/// Search ceiling as a multiple of the last sample time.
pub const SEARCH_CEILING_FACTOR: f64 = 1e6;
const LOG_TOLERANCE: f64 = 1.01;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundResult {
    /// Every T below this value is rejected at `confidence`.
    pub t_lower_s: f64,
    pub stretch_n_assumed: f64,
    pub confidence: f64,
    /// Even the search ceiling is rejected; the true bound is larger.
    pub exceeds_ceiling: bool,
    pub critical_chi2: f64,
    pub dof: usize,
}

/// χ² of A·exp(−(t/T)^n) with A at its weighted least-squares value.
/// `t_decay = ∞` gives the flat model.
pub fn chi2_profiled(data: &DataSeries, t_decay: f64, n: f64) -> f64 {
    let f: Vec<f64> = data
        .t
        .iter()
        .map(|&t| {
            if t_decay.is_infinite() {
                1.0
            } else {
                (-(t / t_decay).powf(n)).exp()
            }
        })
        .collect();
    let (num, den) = f
        .iter()
        .zip(&data.y)
        .zip(&data.sigma)
        .fold((0.0, 0.0), |(a, b), ((fi, yi), si)| {
            (a + yi * fi / (si * si), b + fi * fi / (si * si))
        });
    let amp = if den > 0.0 { num / den } else { 0.0 };
    f.iter()
        .zip(&data.y)
        .zip(&data.sigma)
        .map(|((fi, yi), si)| ((yi - amp * fi) / si).powi(2))
        .sum()
}

/// Largest decay time rejected by a χ² goodness-of-fit test at `confidence`,
/// with n fixed and the amplitude profiled. Bisects in log T to 1%.
pub fn coherence_lower_bound(data: &DataSeries, n_assumed: f64, confidence: f64) -> Result<BoundResult> {
    data.validate()?;
    if data.len() < 2 {
        return Err(Error::InvalidArgument("need at least 2 points".into()));
    }
    if !(n_assumed > 0.0) {
        return Err(Error::InvalidArgument(format!("n must be > 0, got {n_assumed}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let t_max = data.t.iter().copied().fold(0.0, f64::max);
    if !(t_max > 0.0) {
        return Err(Error::InvalidArgument("need a sample at t > 0".into()));
    }
    let dof = data.len() - 1;
    let critical = ChiSquared::new(dof as f64)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .inverse_cdf(confidence);
    let flat = chi2_profiled(data, f64::INFINITY, n_assumed);
    if flat > critical {
        return Err(Error::ResolvableDecay { chi2: flat, critical });
    }
    let rejected = |t: f64| chi2_profiled(data, t, n_assumed) > critical;
    let result = |t_lower_s: f64, exceeds_ceiling: bool| BoundResult {
        t_lower_s,
        stretch_n_assumed: n_assumed,
        confidence,
        exceeds_ceiling,
        critical_chi2: critical,
        dof,
    };
    let (mut lo, mut hi) = (t_max * SEARCH_FLOOR_FACTOR, t_max * SEARCH_CEILING_FACTOR);
    if rejected(hi) {
        return Ok(result(hi, true));
    }
    if !rejected(lo) {
        return Err(Error::Unidentifiable(format!(
            "no decay time above {lo:.3e} s is rejected; the data cannot bound T"
        )));
    }
    while hi / lo > LOG_TOLERANCE {
        let mid = (lo * hi).sqrt();
        if rejected(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(result(lo, false))
}
