use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::lm::{levenberg_marquardt, LmResult};
use super::report::FitReport;
use super::stretched::DecayFit;
use super::DataSeries;
use crate::error::{Error, Result};

const OVERSAMPLING: usize = 8;
const MAX_CYCLES_PER_SAMPLE: f64 = 0.25;
const ENVELOPE_STARTS_N: [f64; 2] = [1.0, 2.0];
const ENVELOPE_STARTS_T: [f64; 3] = [0.3, 1.0, 3.0];
const Z95: f64 = 1.959_963_984_540_054;
const MIN_POINTS: usize = 8;

/// A·exp(−(t/T)^n)·cos(2πft + φ) + c.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationFit {
    pub frequency_hz: f64,
    pub sigma_frequency_hz: f64,
    /// 95% interval on the frequency.
    pub frequency_ci_hz: (f64, f64),
    pub phase_rad: f64,
    pub sigma_phase_rad: f64,
    pub offset: f64,
    pub sigma_offset: f64,
    /// Envelope amplitude, decay time and stretch exponent; no baseline.
    pub envelope: DecayFit,
    pub chi2: f64,
    pub dof: usize,
}

impl OscillationFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.envelope.evaluate(t) * (2.0 * PI * self.frequency_hz * t + self.phase_rad).cos() + self.offset
    }

    pub fn report(&self) -> FitReport {
        let mut r = self.envelope.report();
        r.rows.retain(|row| row.parameter != "chi2" && row.parameter != "dof");
        r.push("frequency", self.frequency_hz, self.sigma_frequency_hz, "Hz");
        r.push("frequency_ci95_low", self.frequency_ci_hz.0, 0.0, "Hz");
        r.push("frequency_ci95_high", self.frequency_ci_hz.1, 0.0, "Hz");
        r.push("phase", self.phase_rad, self.sigma_phase_rad, "rad");
        r.push("offset", self.offset, self.sigma_offset, "1");
        r.push("chi2", self.chi2, 0.0, "1");
        r.push("dof", self.dof as f64, 0.0, "1");
        r
    }
}

fn median_spacing(t: &[f64]) -> f64 {
    let mut sorted = t.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut gaps: Vec<f64> = sorted.windows(2).map(|w| w[1] - w[0]).filter(|g| *g > 0.0).collect();
    if gaps.is_empty() {
        return 0.0;
    }
    gaps.sort_by(f64::total_cmp);
    gaps[gaps.len() / 2]
}

fn dft(t: &[f64], y: &[f64], f: f64) -> Complex64 {
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| yi * Complex64::from_polar(1.0, -2.0 * PI * f * ti))
        .sum()
}

/// Strongest spectral peak of the mean-removed data on an oversampled grid
/// up to the Nyquist frequency of the median spacing.
fn spectral_peak(t: &[f64], y: &[f64], dt: f64) -> (f64, Complex64) {
    let span = t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t.iter().copied().fold(f64::INFINITY, f64::min);
    let df = 1.0 / (OVERSAMPLING as f64 * span);
    let nyquist = 0.5 / dt;
    let steps = (nyquist / df).floor() as usize;
    (1..=steps)
        .map(|k| {
            let f = k as f64 * df;
            (f, dft(t, y, f))
        })
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .unwrap_or((0.0, Complex64::new(0.0, 0.0)))
}

/// Damped-sinusoid least squares seeded from the discrete spectrum peak.
pub fn fit_oscillation(data: &DataSeries) -> Result<OscillationFit> {
    data.validate()?;
    if data.len() < MIN_POINTS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_POINTS} points, got {}",
            data.len()
        )));
    }
    let dt = median_spacing(&data.t);
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument("sample times must be distinct".into()));
    }
    let mean = data.y.iter().sum::<f64>() / data.len() as f64;
    let centred: Vec<f64> = data.y.iter().map(|y| y - mean).collect();
    let spread = centred.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let noise = data.sigma.iter().copied().fold(f64::INFINITY, f64::min);
    if !(spread > 0.0) {
        return Err(Error::Unidentifiable("data has no oscillating component".into()));
    }
    let (f0, peak) = spectral_peak(&data.t, &centred, dt);
    let undersampled = |f: f64| {
        Error::Undersampled(format!(
            "{f:.4e} Hz needs a spacing below {:.4e} s (4 points per period), median spacing is {dt:.4e} s",
            MAX_CYCLES_PER_SAMPLE / f
        ))
    };
    if f0 * dt > MAX_CYCLES_PER_SAMPLE {
        return Err(undersampled(f0));
    }
    let phi0 = peak.arg();
    let t_min = data.t.iter().copied().fold(f64::INFINITY, f64::min);
    let span = data.t.iter().copied().fold(f64::NEG_INFINITY, f64::max) - t_min;

    // parameters: A, ln T, n, f, φ, c
    let model =
        |p: &[f64], t: f64| p[0] * (-(t / p[1].exp()).powf(p[2])).exp() * (2.0 * PI * p[3] * t + p[4]).cos() + p[5];
    let project = |p: &mut [f64]| {
        p[2] = p[2].clamp(0.05, 4.0);
        p[3] = p[3].abs();
    };
    let mut best: Option<LmResult> = None;
    for &n0 in &ENVELOPE_STARTS_N {
        for &scale in &ENVELOPE_STARTS_T {
            let t0 = (scale * span).max(dt);
            let p0 = [spread, t0.ln(), n0, f0, phi0, mean];
            let r = levenberg_marquardt(&model, &data.t, &data.y, &data.sigma, &p0, project);
            if best.as_ref().is_none_or(|b| r.chi2 < b.chi2) {
                best = Some(r);
            }
        }
    }
    let best = best.expect("at least one start");
    let mut p = best.params.clone();
    let cov = &best.covariance;
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[4] += PI;
    }
    p[4] = (p[4] + PI).rem_euclid(2.0 * PI) - PI;
    let sigma = |i: usize| cov[(i, i)].sqrt();
    if !(p[0] > 3.0 * sigma(0)) && !(p[0] > 3.0 * noise) {
        return Err(Error::Unidentifiable(format!(
            "fitted amplitude {:.3e} is indistinguishable from zero",
            p[0]
        )));
    }
    if p[3] * dt > MAX_CYCLES_PER_SAMPLE {
        return Err(undersampled(p[3]));
    }
    let dof = data.len().saturating_sub(p.len());
    let t_decay = p[1].exp();
    let envelope = DecayFit {
        amplitude: p[0],
        t_decay_s: t_decay,
        stretch_n: p[2],
        baseline: None,
        sigma_amplitude: sigma(0),
        sigma_t_decay_s: t_decay * sigma(1),
        sigma_stretch_n: sigma(2),
        sigma_baseline: None,
        covariance: (0..3).map(|i| (0..3).map(|j| cov[(i, j)]).collect()).collect(),
        chi2: best.chi2,
        dof,
    };
    let sf = sigma(3);
    Ok(OscillationFit {
        frequency_hz: p[3],
        sigma_frequency_hz: sf,
        frequency_ci_hz: (p[3] - Z95 * sf, p[3] + Z95 * sf),
        phase_rad: p[4],
        sigma_phase_rad: sigma(4),
        offset: p[5],
        sigma_offset: sigma(5),
        envelope,
        chi2: best.chi2,
        dof,
    })
}

/// Frequency fitted within one window of a trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowFrequency {
    pub t_start_s: f64,
    pub t_end_s: f64,
    pub frequency_hz: f64,
    pub sigma_frequency_hz: f64,
}

/// Fits consecutive windows of `window` points advanced by `step` points.
pub fn windowed_frequencies(data: &DataSeries, window: usize, step: usize) -> Result<Vec<WindowFrequency>> {
    data.validate()?;
    if window < MIN_POINTS || step == 0 {
        return Err(Error::InvalidArgument(format!(
            "window must hold at least {MIN_POINTS} points and step must be ≥ 1"
        )));
    }
    let mut out = Vec::new();
    let mut start = 0;
    while start + window <= data.len() {
        let part = data.slice(start..start + window);
        let fit = fit_oscillation(&part)?;
        out.push(WindowFrequency {
            t_start_s: part.t[0],
            t_end_s: part.t[window - 1],
            frequency_hz: fit.frequency_hz,
            sigma_frequency_hz: fit.sigma_frequency_hz,
        });
        start += step;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn ramsey(freq: impl Fn(f64) -> f64, t2: f64, n: usize, dt: f64, noise: f64, seed: u64) -> DataSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise).unwrap();
        let t: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        let y = t
            .iter()
            .map(|&x| {
                0.5 + 0.5 * (-(x / t2).powi(2)).exp() * (2.0 * PI * freq(x) * x + 0.3).cos() + normal.sample(&mut rng)
            })
            .collect();
        DataSeries::uniform(t, y, noise).unwrap()
    }

    #[test]
    fn recovers_frequency_and_envelope() {
        let d = ramsey(|_| 10e3, 320e-6, 400, 2e-6, 0.01, 1);
        let f = fit_oscillation(&d).unwrap();
        assert!((f.frequency_hz / 10e3 - 1.0).abs() < 0.02, "{}", f.frequency_hz);
        assert!(
            (f.envelope.t_decay_s / 320e-6 - 1.0).abs() < 0.02,
            "{}",
            f.envelope.t_decay_s
        );
        assert!((f.envelope.stretch_n - 2.0).abs() < 0.1);
        assert!(f.frequency_ci_hz.0 < 10e3 && 10e3 < f.frequency_ci_hz.1);
        assert!((f.phase_rad - 0.3).abs() < 0.05);
        assert!(f.report().to_text().contains("frequency"));
    }

    #[test]
    fn undersampled_rejected() {
        let d = ramsey(|_| 10e3, 1.0, 100, 30e-6, 0.01, 2);
        assert!(matches!(fit_oscillation(&d), Err(Error::Undersampled(_))));
    }

    #[test]
    fn zero_amplitude_rejected() {
        let t: Vec<f64> = (0..50).map(|k| k as f64 * 1e-6).collect();
        let d = DataSeries::uniform(t, vec![0.5; 50], 0.01).unwrap();
        assert!(matches!(fit_oscillation(&d), Err(Error::Unidentifiable(_))));
    }

    #[test]
    fn windows_detect_shift() {
        let d = ramsey(|t| if t < 400e-6 { 10e3 } else { 10.5e3 }, 1.0, 400, 2e-6, 0.01, 3);
        let w = windowed_frequencies(&d, 200, 200).unwrap();
        assert_eq!(w.len(), 2);
        assert!((w[0].frequency_hz - 10e3).abs() < 5.0 * w[0].sigma_frequency_hz.max(1.0));
        let shift = w[1].frequency_hz - w[0].frequency_hz;
        let combined = w[0].sigma_frequency_hz.hypot(w[1].sigma_frequency_hz);
        assert!(shift > 5.0 * combined, "{shift} vs {combined}");
    }
}
