use statrs::distribution::{ContinuousCDF, Normal};

use super::pulse::{PulseSequence, Target};
use crate::cce::CoherenceCurve;
use crate::error::{Error, Result};
use crate::spin::{CentralSpinModel, C64};

/// Coherence averaged over a static Gaussian detuning of standard deviation
/// `sigma_hz` (per unit m), using `samples` deterministic quantile nodes.
pub fn quasi_static_ensemble(
    central: &CentralSpinModel,
    sequence: &PulseSequence,
    sigma_hz: f64,
    samples: usize,
    times: &[f64],
) -> Result<CoherenceCurve> {
    if !(sigma_hz >= 0.0) || samples == 0 {
        return Err(Error::InvalidArgument("need sigma >= 0 and at least one sample".into()));
    }
    let schedule = sequence.schedule(Target::Electron)?;
    let (a, b) = sequence.subspace.map_or(central.levels(), |s| s.levels());
    let delta_m = a - b;
    let normal = Normal::new(0.0, 1.0).map_err(|e| Error::Numerical(e.to_string()))?;
    let nodes: Vec<f64> = (0..samples)
        .map(|k| sigma_hz * normal.inverse_cdf((k as f64 + 0.5) / samples as f64))
        .collect();
    let values = times
        .iter()
        .map(|&t| {
            let s = schedule.signed_time(t);
            let sum: C64 = nodes
                .iter()
                .map(|d| {
                    C64::from_polar(
                        1.0,
                        -2.0 * std::f64::consts::PI * (sequence.detuning_hz + d) * delta_m * s,
                    )
                })
                .sum();
            sum / samples as f64
        })
        .collect();
    CoherenceCurve::new(times.to_vec(), values)
}
