use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bath::{Bath, BathSpin};
use crate::cce::{cce_total, exact_coherence, CceOptions};
use crate::error::Result;
use crate::noise::{chi, dilute_dipolar_rates, ChiOptions, FilterSequence, NoisePsd, DEFAULT_CUTOFF_HIGH_HZ};
use crate::sequences::StandardSequence;
use crate::spin::{CentralSpinModel, QubitSubspace, SpinSpecies, GAMMA_ELECTRON};

/// Field used by every oracle, tesla.
pub const ORACLE_FIELD_T: f64 = 0.0232;
const SHELL_ANGSTROM: (f64, f64) = (4.0, 12.0);
const MIN_SPACING_ANGSTROM: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub check: String,
    /// Deviation from the reference; passes when ≤ tolerance.
    pub value: f64,
    pub tolerance: f64,
}

impl OracleRow {
    pub fn pass(&self) -> bool {
        self.value <= self.tolerance
    }
}

/// `n_spins` 29Si/13C nuclei placed uniformly in a shell around the defect.
pub fn random_nuclear_bath(seed: u64, n_spins: usize) -> Result<Bath> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins: Vec<BathSpin> = Vec::with_capacity(n_spins);
    while spins.len() < n_spins {
        let p = Vector3::new(
            rng.random_range(-SHELL_ANGSTROM.1..SHELL_ANGSTROM.1),
            rng.random_range(-SHELL_ANGSTROM.1..SHELL_ANGSTROM.1),
            rng.random_range(-SHELL_ANGSTROM.1..SHELL_ANGSTROM.1),
        );
        let r = p.norm();
        if !(SHELL_ANGSTROM.0..=SHELL_ANGSTROM.1).contains(&r)
            || spins.iter().any(|s| (s.position - p).norm() < MIN_SPACING_ANGSTROM)
        {
            continue;
        }
        let species = if rng.random_bool(0.5) {
            SpinSpecies::si29()
        } else {
            SpinSpecies::c13()
        };
        spins.push(BathSpin::at(p, species, false, GAMMA_ELECTRON)?);
    }
    Ok(Bath::new(spins, seed))
}

/// Pair cutoff large enough that every pair of a small bath is included.
pub fn all_pairs() -> CceOptions {
    CceOptions {
        pair_cutoff_angstrom: 1e3,
        ..CceOptions::default()
    }
}

pub fn oracle_sequences() -> [StandardSequence; 3] {
    [
        StandardSequence::Ramsey { detuning_hz: 0.0 },
        StandardSequence::Hahn,
        StandardSequence::Xy8 { blocks: 2 },
    ]
}

/// Time grid of the cluster oracles, seconds.
pub fn oracle_times() -> Vec<f64> {
    (0..60).map(|k| k as f64 * 10e-6).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Cluster expansion against exact evolution, plus closed-form noise and
/// echo checks.
pub fn run_oracles(seed: u64, random_baths: usize) -> Result<Vec<OracleRow>> {
    let central = CentralSpinModel::new(ORACLE_FIELD_T, QubitSubspace::Sq0Minus1)?;
    let times = oracle_times();
    let mut rows = Vec::new();
    for k in 0..random_baths {
        let n_spins = 2 + k % 3;
        let bath = random_nuclear_bath(seed.wrapping_add(k as u64), n_spins)?;
        for kind in oracle_sequences() {
            let seq = kind.build(1.0)?;
            let cce = cce_total(&bath, &central, &seq, &all_pairs(), &times)?;
            let exact = exact_coherence(&bath, &central, &seq, &times)?;
            rows.push(OracleRow {
                check: format!("cce_vs_exact_bath{k}_{n_spins}spins_{}", seq.name),
                value: cce.max_abs_difference(&exact),
                tolerance: if n_spins == 2 { 1e-9 } else { 0.02 },
            });
        }
    }

    let mut spin = BathSpin::at(Vector3::new(0.0, 0.0, 10.0), SpinSpecies::si29(), false, GAMMA_ELECTRON)?;
    spin.hyperfine.matrix.fill(0.0);
    spin.hyperfine.matrix[(2, 2)] = -8.1e3;
    let single = Bath::new(vec![spin], seed);
    let hahn = StandardSequence::Hahn.build(1.0)?;
    let echo_times: Vec<f64> = (1..=100).map(|k| k as f64 * 7e-6).collect();
    let echo = cce_total(&single, &central, &hahn, &CceOptions::default(), &echo_times)?;
    rows.push(OracleRow {
        check: "hahn_refocuses_static_shift".into(),
        value: echo.abs().iter().map(|l| 1.0 - l).fold(0.0, f64::max),
        tolerance: 1e-9,
    });

    let s0 = 2e4;
    let white = NoisePsd::White { s0 };
    let tail = s0 / (PI * 2.0 * PI * DEFAULT_CUTOFF_HIGH_HZ);
    let worst_white = [1e-6, 1e-4, 1e-2]
        .iter()
        .map(|&t| {
            Ok(rel(
                chi(FilterSequence::Ramsey, &white, t, &ChiOptions::default())?.chi,
                s0 * t / 2.0 - tail,
            ))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push(OracleRow {
        check: "white_ramsey_closed_form".into(),
        value: worst_white,
        tolerance: 1e-4,
    });

    let (var, tc): (f64, f64) = (1e8, 1e-4);
    let ou = NoisePsd::Lorentzian {
        variance: var,
        tau_c_s: tc,
    };
    let worst_ou = [0.01, 0.3, 1.0, 5.0, 50.0]
        .iter()
        .map(|&x: &f64| {
            let expected = var * tc * tc * (x - 3.0 + 4.0 * (-x / 2.0).exp() - (-x).exp());
            Ok(rel(
                chi(FilterSequence::Hahn, &ou, x * tc, &ChiOptions::default())?.chi,
                expected,
            ))
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    rows.push(OracleRow {
        check: "lorentzian_hahn_closed_form".into(),
        value: worst_ou,
        tolerance: 1e-4,
    });

    let (n, c1, c2) = (3e15, 2.5e-13, 4.0e-30);
    let (a, b) = (dilute_dipolar_rates(n, c1, c2)?, dilute_dipolar_rates(2.0 * n, c1, c2)?);
    let lhs = a.t2_star_s / b.t2_star_s;
    let rhs = (a.t1_s / b.t1_s).sqrt();
    rows.push(OracleRow {
        check: "dilute_rate_scaling".into(),
        value: rel(lhs, rhs),
        tolerance: 1e-14,
    });
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_bath_respects_geometry() {
        let bath = random_nuclear_bath(4, 4).unwrap();
        assert_eq!(bath.len(), 4);
        for (i, s) in bath.spins.iter().enumerate() {
            let r = s.position.norm();
            assert!((SHELL_ANGSTROM.0..=SHELL_ANGSTROM.1).contains(&r));
            for t in &bath.spins[i + 1..] {
                assert!((s.position - t.position).norm() >= MIN_SPACING_ANGSTROM);
            }
        }
        assert_eq!(
            random_nuclear_bath(4, 4).unwrap().spins[0].position,
            bath.spins[0].position
        );
    }

    #[test]
    fn oracles_pass() {
        let rows = run_oracles(0, 6).unwrap();
        for r in &rows {
            assert!(r.pass(), "{r:?}");
        }
    }
}
