use serde::Serialize;

use super::lm::levenberg_marquardt;
use super::report::FitReport;
use super::DataSeries;
use crate::error::{Error, Result};

/// Starting stretch exponents when n is free.
pub const MULTI_START_N: [f64; 5] = [0.5, 1.0, 1.5, 2.0, 3.0];
const N_RANGE: (f64, f64) = (0.05, 4.0);
const MIN_POINTS: usize = 6;
const FLAT_RATIO: f64 = 0.8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StretchedOptions {
    pub fix_n: Option<f64>,
    pub baseline: bool,
}

/// A·exp(−(t/T)^n) + B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub t_decay_s: f64,
    pub stretch_n: f64,
    pub baseline: Option<f64>,
    pub sigma_amplitude: f64,
    pub sigma_t_decay_s: f64,
    /// Zero when n was fixed.
    pub sigma_stretch_n: f64,
    pub sigma_baseline: Option<f64>,
    /// Covariance in the fitted parameters (A, ln T, [n], [B]).
    pub covariance: Vec<Vec<f64>>,
    pub chi2: f64,
    pub dof: usize,
}

impl DecayFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.amplitude * (-(t / self.t_decay_s).powf(self.stretch_n)).exp() + self.baseline.unwrap_or(0.0)
    }

    pub fn report(&self) -> FitReport {
        let mut r = FitReport::default();
        r.push("amplitude", self.amplitude, self.sigma_amplitude, "1");
        r.push("T", self.t_decay_s, self.sigma_t_decay_s, "s");
        r.push("stretch_n", self.stretch_n, self.sigma_stretch_n, "1");
        if let (Some(b), Some(s)) = (self.baseline, self.sigma_baseline) {
            r.push("baseline", b, s, "1");
        }
        r.push("chi2", self.chi2, 0.0, "1");
        r.push("dof", self.dof as f64, 0.0, "1");
        r
    }
}

fn initial_t(data: &DataSeries, a0: f64, b0: f64) -> f64 {
    let target = b0 + (a0 - b0) / std::f64::consts::E;
    for k in 1..data.len() {
        if data.y[k] < target && data.y[k - 1] >= target {
            let frac = (data.y[k - 1] - target) / (data.y[k - 1] - data.y[k]);
            return data.t[k - 1] + frac * (data.t[k] - data.t[k - 1]);
        }
    }
    2.0 * data.t.iter().copied().fold(0.0, f64::max)
}

/// Least-squares stretched-exponential fit. With n free, every start in
/// [`MULTI_START_N`] is tried and the lowest χ² wins.
pub fn fit_stretched_exp(data: &DataSeries, options: &StretchedOptions) -> Result<DecayFit> {
    data.validate()?;
    if data.len() < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_POINTS} points, got {}",
            data.len()
        )));
    }
    if let Some(n) = options.fix_n {
        if !(n > 0.0 && n <= N_RANGE.1) {
            return Err(Error::InvalidArgument(format!("fixed n must lie in (0, 4], got {n}")));
        }
    }
    let first = (0..data.len())
        .min_by(|&a, &b| data.t[a].total_cmp(&data.t[b]))
        .unwrap();
    let a0 = data.y[first];
    let y_min = data.y.iter().copied().fold(f64::INFINITY, f64::min);
    if options.fix_n.is_none() && !(a0 > 0.0 && y_min / a0 <= FLAT_RATIO) {
        return Err(Error::Unidentifiable(
            "data does not decay over the sampled window; bound it with coherence_lower_bound".into(),
        ));
    }
    let b0 = if options.baseline { y_min.min(0.0) } else { 0.0 };
    let t0 = initial_t(data, a0, b0).max(1e-300);

    let free_n = options.fix_n.is_none();
    // parameter layout: A, ln T, [n], [B]
    let n_index = free_n.then_some(2);
    let b_index = options.baseline.then_some(2 + free_n as usize);
    let fixed_n = options.fix_n.unwrap_or(1.0);
    let model = |p: &[f64], t: f64| {
        let n = n_index.map_or(fixed_n, |i| p[i]);
        let b = b_index.map_or(0.0, |i| p[i]);
        p[0] * (-(t / p[1].exp()).powf(n)).exp() + b
    };
    let project = |p: &mut [f64]| {
        if let Some(i) = n_index {
            p[i] = p[i].clamp(N_RANGE.0, N_RANGE.1);
        }
    };
    let starts: Vec<f64> = if free_n { MULTI_START_N.to_vec() } else { vec![fixed_n] };
    let mut best: Option<super::lm::LmResult> = None;
    for n_start in starts {
        let mut p0 = vec![a0 - b0, t0.ln()];
        if free_n {
            p0.push(n_start);
        }
        if options.baseline {
            p0.push(b0);
        }
        let r = levenberg_marquardt(&model, &data.t, &data.y, &data.sigma, &p0, project);
        if best.as_ref().is_none_or(|b| r.chi2 < b.chi2) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    let p = &best.params;
    let cov = &best.covariance;
    let t_decay = p[1].exp();
    let k = p.len();
    Ok(DecayFit {
        amplitude: p[0],
        t_decay_s: t_decay,
        stretch_n: n_index.map_or(fixed_n, |i| p[i]),
        baseline: b_index.map(|i| p[i]),
        sigma_amplitude: cov[(0, 0)].sqrt(),
        sigma_t_decay_s: t_decay * cov[(1, 1)].sqrt(),
        sigma_stretch_n: n_index.map_or(0.0, |i| cov[(i, i)].sqrt()),
        sigma_baseline: b_index.map(|i| cov[(i, i)].sqrt()),
        covariance: (0..k).map(|i| (0..k).map(|j| cov[(i, j)]).collect()).collect(),
        chi2: best.chi2,
        dof: data.len().saturating_sub(k),
    })
}
