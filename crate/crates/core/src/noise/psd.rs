use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-sided power spectral density of the frequency noise δω(t), as a
/// function of angular frequency ω (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum NoisePsd {
    /// S(ω) = S₀.
    White { s0: f64 },
    /// Ornstein–Uhlenbeck: S(ω) = 2Δ²τ_c / (1 + ω²τ_c²).
    Lorentzian { variance: f64, tau_c_s: f64 },
    /// S(ω) = A / |ω|.
    OneOverF { amplitude: f64 },
}

impl NoisePsd {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoisePsd::White { s0 } => s0 >= 0.0,
            NoisePsd::Lorentzian { variance, tau_c_s } => variance >= 0.0 && tau_c_s > 0.0,
            NoisePsd::OneOverF { amplitude } => amplitude >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid noise spectrum {self:?}")))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoisePsd::White { .. } => "white",
            NoisePsd::Lorentzian { .. } => "lorentzian",
            NoisePsd::OneOverF { .. } => "one_over_f",
        }
    }

    pub fn density(&self, omega: f64) -> f64 {
        match *self {
            NoisePsd::White { s0 } => s0,
            NoisePsd::Lorentzian { variance, tau_c_s } => 2.0 * variance * tau_c_s / (1.0 + (omega * tau_c_s).powi(2)),
            NoisePsd::OneOverF { amplitude } => amplitude / omega.abs(),
        }
    }

    /// α in S ∝ ω^(−α) as ω → 0.
    pub fn infrared_exponent(&self) -> f64 {
        match self {
            NoisePsd::OneOverF { .. } => 1.0,
            _ => 0.0,
        }
    }
}
