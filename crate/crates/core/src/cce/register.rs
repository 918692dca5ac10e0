use super::clusters::{build_clusters_with, CceOptions};
use super::coherence::{cce_product, detuning_factors};
use super::curve::CoherenceCurve;
use super::hamiltonian::ClusterMember;
use crate::bath::{point_dipole_hyperfine, Bath};
use crate::error::{Error, Result};
use crate::sequences::{PulseSequence, Target};
use crate::spin::Spin;

/// Coherence of one bath nucleus promoted to the central role.
///
/// The electron sits in level `m_s` for the whole sequence, so every other
/// bath spin n carries a static shift m_s·A_zz,n. The register couples to the
/// bath through the nuclear point-dipole tensor and its own flip-flops with
/// the bath are neglected (pure dephasing of the register).
pub fn nuclear_register_coherence(
    register: usize,
    m_s: f64,
    bath: &Bath,
    field_t: f64,
    sequence: &PulseSequence,
    options: &CceOptions,
    times: &[f64],
) -> Result<CoherenceCurve> {
    let reg = bath
        .spins
        .get(register)
        .ok_or_else(|| Error::InvalidArgument(format!("register index {register} out of range")))?;
    if reg.paramagnetic || reg.species.spin != Spin::Half {
        return Err(Error::InvalidArgument("register must be a spin-1/2 nucleus".into()));
    }
    let schedule = sequence.schedule(Target::Register)?;

    let mut rest = bath.clone();
    rest.spins[register].active = false;
    let clusters = build_clusters_with(&rest, options)?;
    let active = rest.active_indices();
    let members: Vec<ClusterMember<'_>> = active
        .iter()
        .map(|&i| {
            let s = &bath.spins[i];
            let coupling = point_dipole_hyperfine(
                &(s.position - reg.position),
                reg.species.gyromagnetic_ratio,
                s.species.gyromagnetic_ratio,
            )?
            .z_row();
            Ok(ClusterMember {
                spin: s,
                coupling,
                offset_hz: m_s * s.hyperfine.a_parallel(),
            })
        })
        .collect::<Result<_>>()?;
    let slot = |i: usize| active.binary_search(&i).expect("cluster members are active");
    let pairs: Vec<(usize, usize)> = clusters
        .iter()
        .filter(|c| c.len() == 2)
        .map(|c| (slot(c.members[0]), slot(c.members[1])))
        .collect();

    let levels = (0.5, -0.5);
    let (mut values, clamps) = if members.is_empty() {
        (vec![crate::spin::C64::new(1.0, 0.0); times.len()], 0)
    } else {
        cce_product(&members, levels, field_t, &schedule, &pairs, times)?
    };
    for (v, d) in values
        .iter_mut()
        .zip(detuning_factors(sequence.detuning_hz, 1.0, &schedule, times))
    {
        *v *= d;
    }
    let mut curve = CoherenceCurve::new(times.to_vec(), values)?;
    curve.clamp_count = clamps;
    Ok(curve)
}
