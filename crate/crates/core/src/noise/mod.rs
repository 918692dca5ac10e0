//! Classical-noise dephasing through filter functions, and the dilute
//! dipolar-bath rate model.
//!
//! Spectra are two-sided densities of the angular frequency noise, so
//! χ(t) = (1/π)∫₀^∞ S(ω) F(ωt)/ω² dω and L = exp(−χ).

mod chi;
mod filter;
mod psd;
mod rates;

pub use chi::{
    chi, chi_with_filter, coherence_from_chi, infrared_divergent, noise_curve, ChiOptions, ChiResult, NoiseCurve,
    DEFAULT_CUTOFF_HIGH_HZ, DEFAULT_CUTOFF_LOW_HZ, ONE_OVER_F_SPAN,
};
pub use filter::{FilterFunction, FilterSequence};
pub use psd::NoisePsd;
pub use rates::{dilute_dipolar_rates, DiluteRates};
