use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::filter::{integrate_panel, FilterFunction, FilterSequence};
use super::psd::NoisePsd;
use crate::cce::CoherenceCurve;
use crate::error::{Error, Result};
use crate::spin::C64;

pub const DEFAULT_CUTOFF_LOW_HZ: f64 = 1e-3;
pub const DEFAULT_CUTOFF_HIGH_HZ: f64 = 1e9;
/// 1/f spectra are cut off at 1/(ONE_OVER_F_SPAN · t_max) unless set explicitly.
pub const ONE_OVER_F_SPAN: f64 = 100.0;

const LOG_PANELS_PER_DECADE: f64 = 8.0;
const MIN_OSCILLATORY_SPAN: f64 = 2000.0;

/// Integration limits in linear frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiOptions {
    /// `None` selects 1e-3 Hz, or 1/(100·t_max) for a 1/f spectrum.
    pub cutoff_low_hz: Option<f64>,
    pub cutoff_high_hz: f64,
}

impl Default for ChiOptions {
    fn default() -> Self {
        Self {
            cutoff_low_hz: None,
            cutoff_high_hz: DEFAULT_CUTOFF_HIGH_HZ,
        }
    }
}

impl ChiOptions {
    pub fn low_cutoff_for(&self, psd: &NoisePsd, t_max: f64) -> f64 {
        match (self.cutoff_low_hz, psd) {
            (Some(f), _) => f,
            (None, NoisePsd::OneOverF { .. }) if t_max > 0.0 => 1.0 / (ONE_OVER_F_SPAN * t_max),
            (None, _) => DEFAULT_CUTOFF_LOW_HZ,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiResult {
    pub chi: f64,
    /// The integral diverges as the low cutoff goes to zero; the value
    /// depends on `cutoff_low_hz`.
    pub infrared_divergent: bool,
    pub cutoff_low_hz: f64,
    pub cutoff_high_hz: f64,
}

pub fn infrared_divergent(filter: &FilterFunction, psd: &NoisePsd) -> bool {
    // integrand ∝ ω^(2p − 2 − α) near zero
    2.0 * filter.low_frequency_order() as f64 <= 1.0 + psd.infrared_exponent()
}

fn log_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let (la, lb) = (a.ln(), b.ln());
    let panels = ((lb - la) / std::f64::consts::LN_10 * LOG_PANELS_PER_DECADE)
        .ceil()
        .max(1.0) as usize;
    let width = (lb - la) / panels as f64;
    let g = |u: f64| {
        let z = u.exp();
        f(z) * z
    };
    (0..panels)
        .map(|k| integrate_panel(&g, la + k as f64 * width, la + (k + 1) as f64 * width))
        .sum()
}

fn linear_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, width: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let panels = ((b - a) / width).ceil() as usize;
    let w = (b - a) / panels as f64;
    (0..panels)
        .map(|k| integrate_panel(f, a + k as f64 * w, a + (k + 1) as f64 * w))
        .sum()
}

/// χ(t) = (1/π) ∫ S(ω) F(ωt)/ω² dω between the cutoffs, integrated in z = ωt:
/// log panels below z = 1, Gauss–Legendre panels of width π across the
/// oscillatory range, and the oscillation-averaged filter beyond it.
pub fn chi_with_filter(
    filter: &FilterFunction,
    psd: &NoisePsd,
    t: f64,
    low_hz: f64,
    high_hz: f64,
) -> Result<ChiResult> {
    psd.validate()?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be >= 0, got {t}")));
    }
    if !(low_hz > 0.0 && high_hz > low_hz) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < low cutoff < high cutoff, got {low_hz}, {high_hz}"
        )));
    }
    let divergent = infrared_divergent(filter, psd);
    let result = |chi| ChiResult {
        chi,
        infrared_divergent: divergent,
        cutoff_low_hz: low_hz,
        cutoff_high_hz: high_hz,
    };
    if t == 0.0 {
        return Ok(result(0.0));
    }
    let (z_lo, z_hi) = (2.0 * PI * low_hz * t, 2.0 * PI * high_hz * t);
    let span = MIN_OSCILLATORY_SPAN.max(20.0 * PI * (filter.pulse_count() + 1) as f64);
    let exact = |z: f64| psd.density(z / t) * filter.filter(z) / (z * z);
    let mean_f = 0.5 * filter.mean_g();
    let averaged = |z: f64| psd.density(z / t) * mean_f / (z * z);

    let knee = z_hi.min(1.0);
    let mut total = log_panels(&exact, z_lo, knee);
    let osc_end = z_hi.min(span);
    total += linear_panels(&exact, knee.max(z_lo), osc_end, PI);
    total += log_panels(&averaged, osc_end.max(z_lo), z_hi);
    Ok(result(total * t / PI))
}

pub fn chi(sequence: FilterSequence, psd: &NoisePsd, t: f64, options: &ChiOptions) -> Result<ChiResult> {
    let low = options.low_cutoff_for(psd, t);
    chi_with_filter(&FilterFunction::of(sequence), psd, t, low, options.cutoff_high_hz)
}

/// L = exp(−χ) on the given grid.
pub fn coherence_from_chi(times: &[f64], chi: &[f64]) -> Result<CoherenceCurve> {
    if let Some(c) = chi.iter().find(|c| !(**c >= 0.0)) {
        return Err(Error::InvalidArgument(format!("chi must be >= 0, got {c}")));
    }
    CoherenceCurve::new(times.to_vec(), chi.iter().map(|c| C64::new((-c).exp(), 0.0)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurve {
    pub curve: CoherenceCurve,
    pub chi: Vec<f64>,
    pub infrared_divergent: bool,
    pub cutoff_low_hz: f64,
    pub cutoff_high_hz: f64,
}

/// χ and L over a time grid with one common cutoff pair.
pub fn noise_curve(filter: &FilterFunction, psd: &NoisePsd, times: &[f64], options: &ChiOptions) -> Result<NoiseCurve> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let low = options.low_cutoff_for(psd, t_max);
    let results: Vec<ChiResult> = times
        .iter()
        .map(|&t| chi_with_filter(filter, psd, t, low, options.cutoff_high_hz))
        .collect::<Result<_>>()?;
    let chi: Vec<f64> = results.iter().map(|r| r.chi).collect();
    Ok(NoiseCurve {
        curve: coherence_from_chi(times, &chi)?,
        chi,
        infrared_divergent: infrared_divergent(filter, psd),
        cutoff_low_hz: low,
        cutoff_high_hz: options.cutoff_high_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn white_ramsey_is_linear() {
        let psd = NoisePsd::White { s0: 2e4 };
        for t in [1e-6, 1e-4, 1e-2] {
            let r = chi(FilterSequence::Ramsey, &psd, t, &ChiOptions::default()).unwrap();
            // the spectrum beyond the high cutoff is excluded: ∫ S₀·⟨F⟩/(πω²) = S₀/(π ω_hi)
            let tail = 2e4 / (PI * 2.0 * PI * DEFAULT_CUTOFF_HIGH_HZ);
            assert!(rel(r.chi, 2e4 * t / 2.0 - tail) < 1e-4, "t={t}: {}", r.chi);
            assert!(!r.infrared_divergent);
        }
    }

    #[test]
    fn ornstein_uhlenbeck_closed_forms() {
        let (var, tc) = (1e8, 1e-4);
        let psd = NoisePsd::Lorentzian {
            variance: var,
            tau_c_s: tc,
        };
        for x in [0.01, 0.3, 1.0, 5.0, 50.0] {
            let t = x * tc;
            let ramsey = var * tc * tc * (x - 1.0 + (-x).exp());
            let hahn = var * tc * tc * (x - 3.0 + 4.0 * (-x / 2.0).exp() - (-x).exp());
            let r = chi(FilterSequence::Ramsey, &psd, t, &ChiOptions::default())
                .unwrap()
                .chi;
            let h = chi(FilterSequence::Hahn, &psd, t, &ChiOptions::default()).unwrap().chi;
            assert!(rel(r, ramsey) < 1e-4, "x={x}: {r} vs {ramsey}");
            assert!(rel(h, hahn) < 1e-4, "x={x}: {h} vs {hahn}");
        }
    }

    #[test]
    fn one_over_f_hahn_is_quadratic() {
        let psd = NoisePsd::OneOverF { amplitude: 1e6 };
        for t in [1e-5, 1e-3, 1e-1] {
            let h = chi(FilterSequence::Hahn, &psd, t, &ChiOptions::default()).unwrap();
            let oracle = 1e6 * t * t * std::f64::consts::LN_2 / (2.0 * PI);
            assert!(rel(h.chi, oracle) < 1e-3, "t={t}: {} vs {oracle}", h.chi);
            assert!(!h.infrared_divergent);
        }
        let r = chi(FilterSequence::Ramsey, &psd, 1e-3, &ChiOptions::default()).unwrap();
        assert!(r.infrared_divergent);
        assert_eq!(r.cutoff_low_hz, 1.0 / (100.0 * 1e-3));
    }

    #[test]
    fn monotone_and_decoupling_helps() {
        let psds = [
            NoisePsd::White { s0: 1e3 },
            NoisePsd::Lorentzian {
                variance: 1e8,
                tau_c_s: 1e-4,
            },
            NoisePsd::OneOverF { amplitude: 1e6 },
        ];
        let times: Vec<f64> = (1..=30).map(|k| k as f64 * 2e-5).collect();
        for psd in &psds {
            for seq in [
                FilterSequence::Ramsey,
                FilterSequence::Hahn,
                FilterSequence::Cpmg { pulses: 8 },
            ] {
                let c = noise_curve(&FilterFunction::of(seq), psd, &times, &ChiOptions::default()).unwrap();
                assert!(c.chi.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)), "{psd:?} {seq:?}");
            }
            for &t in &times {
                let h = chi(FilterSequence::Hahn, psd, t, &ChiOptions::default()).unwrap().chi;
                let c = chi(FilterSequence::Cpmg { pulses: 16 }, psd, t, &ChiOptions::default())
                    .unwrap()
                    .chi;
                assert!(c <= h * (1.0 + 1e-4), "{psd:?} t={t}: {c} > {h}");
            }
        }
    }

    #[test]
    fn coherence_from_chi_values() {
        let c = coherence_from_chi(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(c.values[0].re, 1.0);
        assert!((c.values[1].re - (-1.0f64).exp()).abs() < 1e-15);
        assert!(coherence_from_chi(&[0.0], &[-0.5]).is_err());
    }
}
