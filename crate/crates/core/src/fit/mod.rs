//! Decay-curve analysis: stretched exponentials, damped oscillations, the
//! χ² lower bound on a coherence time and the T2*/T1 scaling check.

mod bound;
mod lm;
mod oscillation;
mod ratio;
mod report;
mod stretched;

pub use bound::{chi2_profiled, coherence_lower_bound, BoundResult, SEARCH_CEILING_FACTOR, SEARCH_FLOOR_FACTOR};
pub use lm::{levenberg_marquardt, LmResult};
pub use oscillation::{fit_oscillation, windowed_frequencies, OscillationFit, WindowFrequency};
pub use ratio::{ratio_scaling_check, Measured, RatioReport};
pub use report::{FitReport, ReportRow};
pub use stretched::{fit_stretched_exp, DecayFit, StretchedOptions, MULTI_START_N};

use crate::error::{Error, Result};

/// Samples y(t) with 1σ uncertainties.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries {
    pub t: Vec<f64>,
    pub y: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl DataSeries {
    pub fn new(t: Vec<f64>, y: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let d = Self { t, y, sigma };
        d.validate()?;
        Ok(d)
    }

    /// Equal uncertainty on every point.
    pub fn uniform(t: Vec<f64>, y: Vec<f64>, sigma: f64) -> Result<Self> {
        let n = t.len();
        Self::new(t, y, vec![sigma; n])
    }

    pub fn validate(&self) -> Result<()> {
        if self.t.len() != self.y.len() || self.t.len() != self.sigma.len() {
            return Err(Error::InvalidArgument(format!(
                "t, y and sigma lengths differ ({}, {}, {})",
                self.t.len(),
                self.y.len(),
                self.sigma.len()
            )));
        }
        if self.sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::InvalidArgument("every sigma must be > 0".into()));
        }
        if self.t.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("t and y must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> DataSeries {
        DataSeries {
            t: self.t[range.clone()].to_vec(),
            y: self.y[range.clone()].to_vec(),
            sigma: self.sigma[range].to_vec(),
        }
    }
}

/// Trailing rolling mean; the first w−1 entries average what is available.
pub fn rolling_mean(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    for i in 0..values.len() {
        sum += values[i];
        if i >= w {
            sum -= values[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}
