use rayon::prelude::*;

use super::clusters::{build_clusters_with, CceOptions};
use super::curve::CoherenceCurve;
use super::hamiltonian::{conditional_hamiltonians_for, ClusterMember, ConditionalPair};
use crate::bath::Bath;
use crate::error::{Error, Result};
use crate::sequences::{PulseSequence, Schedule, Target};
use crate::spin::{CentralSpinModel, Operator, Propagator, C64};

/// Divided contributions whose denominator is smaller than this are set to 1.
pub const CLAMP_THRESHOLD: f64 = 1e-8;
/// Largest bath Hilbert dimension accepted by [`exact_coherence`].
pub const EXACT_DIMENSION_LIMIT: usize = 256;

fn check_times(times: &[f64]) -> Result<()> {
    match times.iter().find(|t| !(**t >= 0.0)) {
        Some(t) => Err(Error::InvalidArgument(format!("times must be >= 0, got {t}"))),
        None => Ok(()),
    }
}

/// L(t) = Tr[U_b† U_a]/d where branch a starts under H_a and every π pulse
/// of the schedule swaps the two conditional Hamiltonians.
pub fn schedule_coherence(pair: &ConditionalPair, schedule: &Schedule, times: &[f64]) -> Result<Vec<C64>> {
    check_times(times)?;
    let (pa, pb) = (Propagator::new(&pair.a), Propagator::new(&pair.b));
    let dim = pair.dim();
    let out = times
        .iter()
        .map(|&t| {
            let intervals = schedule.scaled(t);
            // decoupling trains reuse a couple of distinct durations
            let mut cache: Vec<(f64, Operator, Operator)> = Vec::new();
            let mut ua = Operator::identity(dim, dim);
            let mut ub = Operator::identity(dim, dim);
            for (k, &d) in intervals.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let idx = match cache.iter().position(|(c, _, _)| *c == d) {
                    Some(i) => i,
                    None => {
                        cache.push((d, pa.at(d), pb.at(d)));
                        cache.len() - 1
                    }
                };
                let (_, stepa, stepb) = &cache[idx];
                if k % 2 == 0 {
                    ua = stepa * ua;
                    ub = stepb * ub;
                } else {
                    ua = stepb * ua;
                    ub = stepa * ub;
                }
            }
            let tr: C64 = ub.iter().zip(ua.iter()).map(|(b, a)| b.conj() * a).sum();
            tr / dim as f64
        })
        .collect();
    Ok(out)
}

/// Cluster coherence under an electron-pulse sequence.
pub fn cluster_coherence(pair: &ConditionalPair, sequence: &PulseSequence, times: &[f64]) -> Result<Vec<C64>> {
    schedule_coherence(pair, &sequence.schedule(Target::Electron)?, times)
}

/// exp(−i2π·δ·Δm·∫y dt) from the sequence's static detuning.
pub(crate) fn detuning_factors(detuning_hz: f64, delta_m: f64, schedule: &Schedule, times: &[f64]) -> Vec<C64> {
    times
        .iter()
        .map(|&t| {
            let phase = -2.0 * std::f64::consts::PI * detuning_hz * delta_m * schedule.signed_time(t);
            C64::from_polar(1.0, phase)
        })
        .collect()
}

/// Product over clusters with singularity clamping, accumulated in cluster
/// index order so the result does not depend on the worker count.
pub(crate) fn cce_product(
    members: &[ClusterMember<'_>],
    levels: (f64, f64),
    field_t: f64,
    schedule: &Schedule,
    pairs: &[(usize, usize)],
    times: &[f64],
) -> Result<(Vec<C64>, usize)> {
    let single = |k: usize| -> Result<Vec<C64>> {
        let pair = conditional_hamiltonians_for(levels, field_t, &members[k..=k])?;
        schedule_coherence(&pair, schedule, times)
    };
    let singles: Vec<Vec<C64>> = (0..members.len()).into_par_iter().map(single).collect::<Result<_>>()?;
    let divided: Vec<(Vec<C64>, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let both = [members[i].clone(), members[j].clone()];
            let pair = conditional_hamiltonians_for(levels, field_t, &both)?;
            let joint = schedule_coherence(&pair, schedule, times)?;
            let mut clamps = 0;
            let values = joint
                .iter()
                .enumerate()
                .map(|(t, &l)| {
                    let denom = singles[i][t] * singles[j][t];
                    if denom.norm() < CLAMP_THRESHOLD {
                        clamps += 1;
                        C64::new(1.0, 0.0)
                    } else {
                        l / denom
                    }
                })
                .collect();
            Ok((values, clamps))
        })
        .collect::<Result<_>>()?;

    let mut total = vec![C64::new(1.0, 0.0); times.len()];
    let mut clamps = 0;
    for s in &singles {
        for (acc, v) in total.iter_mut().zip(s) {
            *acc *= v;
        }
    }
    for (d, c) in &divided {
        clamps += c;
        for (acc, v) in total.iter_mut().zip(d) {
            *acc *= v;
        }
    }
    Ok((total, clamps))
}

fn effective_central(central: &CentralSpinModel, sequence: &PulseSequence) -> CentralSpinModel {
    match sequence.subspace {
        Some(s) => central.with_subspace(s),
        None => central.clone(),
    }
}

/// Cluster-correlation expansion of the central-spin coherence.
pub fn cce_total(
    bath: &Bath,
    central: &CentralSpinModel,
    sequence: &PulseSequence,
    options: &CceOptions,
    times: &[f64],
) -> Result<CoherenceCurve> {
    check_times(times)?;
    let central = effective_central(central, sequence);
    let schedule = sequence.schedule(Target::Electron)?;
    let clusters = build_clusters_with(bath, options)?;
    let active = bath.active_indices();
    let members: Vec<ClusterMember<'_>> = active
        .iter()
        .map(|&i| ClusterMember::electron_coupled(&bath.spins[i]))
        .collect();
    let slot = |bath_index: usize| active.binary_search(&bath_index).expect("cluster members are active");
    let pairs: Vec<(usize, usize)> = clusters
        .iter()
        .filter(|c| c.len() == 2)
        .map(|c| (slot(c.members[0]), slot(c.members[1])))
        .collect();
    let levels = central.levels();
    let (mut values, clamps) = cce_product(&members, levels, central.magnetic_field_t, &schedule, &pairs, times)?;
    let detune = detuning_factors(sequence.detuning_hz, levels.0 - levels.1, &schedule, times);
    for (v, d) in values.iter_mut().zip(detune) {
        *v *= d;
    }
    let mut curve = CoherenceCurve::new(times.to_vec(), values)?;
    curve.clamp_count = clamps;
    Ok(curve)
}

/// Full conditional evolution of every active bath spin at once.
pub fn exact_coherence(
    bath: &Bath,
    central: &CentralSpinModel,
    sequence: &PulseSequence,
    times: &[f64],
) -> Result<CoherenceCurve> {
    check_times(times)?;
    let central = effective_central(central, sequence);
    let schedule = sequence.schedule(Target::Electron)?;
    let members: Vec<ClusterMember<'_>> = bath
        .active_indices()
        .into_iter()
        .map(|i| ClusterMember::electron_coupled(&bath.spins[i]))
        .collect();
    let dim: usize = members.iter().map(|m| m.spin.species.spin.dim()).product();
    if dim > EXACT_DIMENSION_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim,
            limit: EXACT_DIMENSION_LIMIT,
        });
    }
    let levels = central.levels();
    let mut values = if members.is_empty() {
        vec![C64::new(1.0, 0.0); times.len()]
    } else {
        let pair = conditional_hamiltonians_for(levels, central.magnetic_field_t, &members)?;
        schedule_coherence(&pair, &schedule, times)?
    };
    let detune = detuning_factors(sequence.detuning_hz, levels.0 - levels.1, &schedule, times);
    for (v, d) in values.iter_mut().zip(detune) {
        *v *= d;
    }
    CoherenceCurve::new(times.to_vec(), values)
}
