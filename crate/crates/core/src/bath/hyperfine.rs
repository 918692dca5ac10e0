use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// μ0/4π, T·m/A.
pub const MU0_OVER_4PI: f64 = 1e-7;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Point-dipole formula is refused below this separation (defect-site overlap).
pub const MIN_SEPARATION_ANGSTROM: f64 = 0.5;

/// 3×3 coupling tensor in Hz, H = S·A·I with z along the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperfineTensor {
    pub matrix: Matrix3<f64>,
}

impl HyperfineTensor {
    pub fn new(matrix: Matrix3<f64>) -> Self {
        Self { matrix }
    }

    pub fn zero() -> Self {
        Self::new(Matrix3::zeros())
    }

    /// Secular (zz) component.
    pub fn a_parallel(&self) -> f64 {
        self.matrix[(2, 2)]
    }

    /// Pseudo-secular magnitude sqrt(A_zx² + A_zy²).
    pub fn a_perp(&self) -> f64 {
        self.matrix[(2, 0)].hypot(self.matrix[(2, 1)])
    }

    /// Row z of the tensor: (A_zx, A_zy, A_zz).
    pub fn z_row(&self) -> [f64; 3] {
        [self.matrix[(2, 0)], self.matrix[(2, 1)], self.matrix[(2, 2)]]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    pub fn is_symmetric(&self, rtol: f64) -> bool {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        (self.matrix - self.matrix.transpose()).amax() <= rtol * scale
    }
}

/// Dipolar coupling prefactor (μ0/4π)·h·γ1·γ2 in Hz·Å³ for linear γ in Hz/T.
pub fn dipolar_prefactor(gamma_1: f64, gamma_2: f64) -> f64 {
    MU0_OVER_4PI * PLANCK * gamma_1 * gamma_2 * 1e30
}

/// A_ij = (μ0/4π)·h·γ1·γ2·(3 r_i r_j / r² − δ_ij) / r³, r in Å, result in Hz.
pub fn point_dipole_hyperfine(r: &Vector3<f64>, gamma_1: f64, gamma_2: f64) -> Result<HyperfineTensor> {
    let d = r.norm();
    if !(d > MIN_SEPARATION_ANGSTROM) {
        return Err(Error::BelowCutoff {
            distance: d,
            cutoff: MIN_SEPARATION_ANGSTROM,
        });
    }
    let n = r / d;
    let k = dipolar_prefactor(gamma_1, gamma_2) / (d * d * d);
    let m = Matrix3::from_fn(|i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        k * (3.0 * n[i] * n[j] - delta)
    });
    Ok(HyperfineTensor::new(m))
}

/// Position (in the xz-plane) whose point-dipole tensor has the requested
/// A_zz and |A_zx|. Used to inject a register with a measured coupling.
pub fn position_for_coupling(a_parallel: f64, a_perp: f64, gamma_1: f64, gamma_2: f64) -> Result<Vector3<f64>> {
    let k = dipolar_prefactor(gamma_1, gamma_2);
    if a_parallel == 0.0 || k == 0.0 {
        return Err(Error::InvalidArgument(
            "need nonzero a_parallel and gyromagnetic ratios".into(),
        ));
    }
    // A_zz = k(3c²−1)/r³, A_zx = 3k·s·c/r³; the ratio fixes θ.
    let target = a_perp.abs() / a_parallel.abs();
    let geom = a_parallel / k; // (3c²−1)/r³, sign selects the cone branch
    let ratio = |c: f64| 3.0 * (1.0 - c * c).sqrt() * c / (3.0 * c * c - 1.0).abs();
    let (mut lo, mut hi) = if geom > 0.0 {
        // 3c² > 1: ratio falls from ∞ at c = 1/√3 to 0 at c = 1
        (1.0 / 3f64.sqrt() + 1e-15, 1.0)
    } else {
        // 3c² < 1: ratio rises from 0 at c = 0 to ∞ at c = 1/√3
        (0.0, 1.0 / 3f64.sqrt() - 1e-15)
    };
    let decreasing = geom > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let too_big = ratio(mid) > target;
        if too_big == decreasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = 0.5 * (lo + hi);
    let r = ((3.0 * c * c - 1.0) / geom).cbrt();
    let s = (1.0 - c * c).sqrt();
    Ok(Vector3::new(r * s, 0.0, r * c))
}
