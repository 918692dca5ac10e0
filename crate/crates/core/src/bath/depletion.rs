use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sample::Bath;
use crate::error::{Error, Result};

// Stream offset so depletion draws never coincide with sampling draws.
const DEPLETION_STREAM: u64 = 0x6465_706c_6574_696f;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DepletionMode {
    /// 0 below punch-through, 1 at/above full depletion, linear in between.
    Step,
    /// Logistic centred between the two voltages, pinned to 0 and 1 at the ends.
    Logistic,
}

/// Bias-dependent probability that a paramagnetic spin is ionized to S = 0.
/// Voltages are magnitudes; the bias sign is ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepletionModel {
    pub punch_through_volt: f64,
    pub full_depletion_volt: f64,
    pub mode: DepletionMode,
    pub logistic_width_volt: f64,
}

impl Default for DepletionModel {
    fn default() -> Self {
        Self {
            punch_through_volt: 40.0,
            full_depletion_volt: 60.0,
            mode: DepletionMode::Step,
            logistic_width_volt: 5.0,
        }
    }
}

impl DepletionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.punch_through_volt >= 0.0 && self.full_depletion_volt >= self.punch_through_volt) {
            return Err(Error::InvalidArgument(format!(
                "need full_depletion ({}) >= punch_through ({}) >= 0",
                self.full_depletion_volt, self.punch_through_volt
            )));
        }
        if self.mode == DepletionMode::Logistic && !(self.logistic_width_volt > 0.0) {
            return Err(Error::InvalidArgument("logistic width must be > 0".into()));
        }
        Ok(())
    }

    /// Probability of depleting a paramagnetic spin at this bias.
    pub fn probability(&self, bias_volt: f64) -> f64 {
        let v = bias_volt.abs();
        let (lo, hi) = (self.punch_through_volt, self.full_depletion_volt);
        if v < lo {
            return 0.0;
        }
        if v >= hi {
            return 1.0;
        }
        match self.mode {
            DepletionMode::Step => (v - lo) / (hi - lo),
            DepletionMode::Logistic => {
                let mid = 0.5 * (lo + hi);
                let w = self.logistic_width_volt;
                let sig = |x: f64| 1.0 / (1.0 + (-(x - mid) / w).exp());
                (sig(v) - sig(lo)) / (sig(hi) - sig(lo))
            }
        }
    }
}

/// Flags paramagnetic spins inactive at the model probability for this bias.
///
/// Each spin owns one uniform draw derived from the bath seed, so the
/// depleted set only grows with |bias|. Positions, species and couplings are
/// untouched; nuclear spins are never affected.
pub fn apply_depletion(bath: &Bath, bias_volt: f64, model: &DepletionModel) -> Result<Bath> {
    model.validate()?;
    let p = model.probability(bias_volt);
    let mut rng = ChaCha8Rng::seed_from_u64(bath.seed ^ DEPLETION_STREAM);
    let mut out = bath.clone();
    for spin in &mut out.spins {
        let u: f64 = rng.random();
        if spin.paramagnetic && u < p {
            spin.active = false;
        }
    }
    Ok(out)
}
