use serde::Serialize;

use crate::error::{Error, Result};

/// A measured value with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }

    fn relative(&self) -> f64 {
        self.sigma / self.value
    }
}

/// Comparison of T2*(a)/T2*(b) with sqrt(T1(a)/T1(b)).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub lhs: Measured,
    pub rhs: Measured,
    /// |lhs − rhs| / rhs.
    pub relative_difference: f64,
    /// (lhs − rhs) / combined σ; 0 when both sides are exact and equal.
    pub z_score: f64,
    /// |z| ≤ 2.
    pub agrees: bool,
}

/// Propagates first-order uncertainties through both ratios.
pub fn ratio_scaling_check(t2s: (Measured, Measured), t1: (Measured, Measured)) -> Result<RatioReport> {
    for m in [t2s.0, t2s.1, t1.0, t1.1] {
        if !(m.value > 0.0 && m.sigma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "values must be positive with non-negative sigma, got {} ± {}",
                m.value, m.sigma
            )));
        }
    }
    let lhs_v = t2s.0.value / t2s.1.value;
    let lhs = Measured::new(lhs_v, lhs_v * t2s.0.relative().hypot(t2s.1.relative()));
    let rhs_v = (t1.0.value / t1.1.value).sqrt();
    let rhs = Measured::new(rhs_v, 0.5 * rhs_v * t1.0.relative().hypot(t1.1.relative()));
    let diff = lhs.value - rhs.value;
    let combined = lhs.sigma.hypot(rhs.sigma);
    let z_score = if combined > 0.0 {
        diff / combined
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    };
    Ok(RatioReport {
        lhs,
        rhs,
        relative_difference: diff.abs() / rhs.value,
        z_score,
        agrees: z_score.abs() <= 2.0,
    })
}
