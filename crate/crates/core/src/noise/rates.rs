use serde::Serialize;

use crate::error::{Error, Result};

/// Dilute dipolar bath: 1/T2* = c1·n and 1/T1 = c2·n².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiluteRates {
    pub t2_star_s: f64,
    pub t1_s: f64,
    /// Zero density: both times are infinite.
    pub unbounded: bool,
}

pub fn dilute_dipolar_rates(density_per_cm3: f64, c1: f64, c2: f64) -> Result<DiluteRates> {
    if !(density_per_cm3 >= 0.0) || !(c1 > 0.0) || !(c2 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need density >= 0 and c1, c2 > 0 (got {density_per_cm3}, {c1}, {c2})"
        )));
    }
    if density_per_cm3 == 0.0 {
        return Ok(DiluteRates {
            t2_star_s: f64::INFINITY,
            t1_s: f64::INFINITY,
            unbounded: true,
        });
    }
    Ok(DiluteRates {
        t2_star_s: 1.0 / (c1 * density_per_cm3),
        t1_s: 1.0 / (c2 * density_per_cm3 * density_per_cm3),
        unbounded: false,
    })
}
