use crate::bath::{point_dipole_hyperfine, BathSpin};
use crate::error::{Error, Result};
use crate::spin::{identity, kron, CentralSpinModel, HermitianOperator, Operator, SpinOperators};

/// Bath Hamiltonians conditioned on the two levels of the central qubit.
#[derive(Debug, Clone)]
pub struct ConditionalPair {
    pub a: HermitianOperator,
    pub b: HermitianOperator,
}

impl ConditionalPair {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }
}

/// One bath spin as seen from a particular central spin.
#[derive(Debug, Clone)]
pub struct ClusterMember<'a> {
    pub spin: &'a BathSpin,
    /// (A_zx, A_zy, A_zz) coupling to the central spin, Hz.
    pub coupling: [f64; 3],
    /// Static frequency shift added to the spin's Zeeman term, Hz.
    pub offset_hz: f64,
}

impl<'a> ClusterMember<'a> {
    pub fn electron_coupled(spin: &'a BathSpin) -> Self {
        Self {
            spin,
            coupling: spin.hyperfine.z_row(),
            offset_hz: 0.0,
        }
    }
}

fn embed(op: &Operator, position: usize, dims: &[usize]) -> Operator {
    dims.iter().enumerate().fold(identity(1), |acc, (k, &d)| {
        if k == position {
            kron(&acc, op)
        } else {
            kron(&acc, &identity(d))
        }
    })
}

fn same_species(a: &BathSpin, b: &BathSpin) -> bool {
    a.species.name == b.species.name
        && (a.species.gyromagnetic_ratio - b.species.gyromagnetic_ratio).abs()
            <= 1e-9 * a.species.gyromagnetic_ratio.abs()
}

/// H_m = Σ_n [(γ_n B + δ_n + m A_zz) I_z + m A_zx I_x + m A_zy I_y] + Σ_{n<n'} D_nn'
/// for m ∈ `levels`. D keeps I_zI_z for every pair and adds the flip-flop
/// term only between like spins (secular dipolar coupling).
pub fn conditional_hamiltonians_for(
    levels: (f64, f64),
    field_t: f64,
    members: &[ClusterMember<'_>],
) -> Result<ConditionalPair> {
    if members.is_empty() {
        return Err(Error::InvalidArgument("cluster must be nonempty".into()));
    }
    let dims: Vec<usize> = members.iter().map(|m| m.spin.species.spin.dim()).collect();
    let total: usize = dims.iter().product();
    let ops: Vec<SpinOperators> = members
        .iter()
        .map(|m| crate::spin::spin_operators(m.spin.species.spin.value()))
        .collect::<Result<_>>()?;
    let embedded: Vec<[Operator; 3]> = ops
        .iter()
        .enumerate()
        .map(|(k, o)| {
            [
                embed(o.x.matrix(), k, &dims),
                embed(o.y.matrix(), k, &dims),
                embed(o.z.matrix(), k, &dims),
            ]
        })
        .collect();

    let mut common = HermitianOperator::zeros(total);
    for (k, m) in members.iter().enumerate() {
        let larmor = m.spin.species.gyromagnetic_ratio * field_t + m.offset_hz;
        common.add_scaled(&embedded[k][2], larmor);
    }
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let (si, sj) = (members[i].spin, members[j].spin);
            let d = point_dipole_hyperfine(
                &(si.position - sj.position),
                si.species.gyromagnetic_ratio,
                sj.species.gyromagnetic_ratio,
            )?
            .matrix;
            let zz = &embedded[i][2] * &embedded[j][2];
            common.add_scaled(&zz, d[(2, 2)]);
            if same_species(si, sj) {
                let flip = &embedded[i][0] * &embedded[j][0] + &embedded[i][1] * &embedded[j][1];
                common.add_scaled(&flip, 0.5 * (d[(0, 0)] + d[(1, 1)]));
            }
        }
    }

    let conditioned = |m: f64| {
        let mut h = common.clone();
        if m != 0.0 {
            for (k, member) in members.iter().enumerate() {
                let [zx, zy, zz] = member.coupling;
                h.add_scaled(&embedded[k][0], m * zx);
                h.add_scaled(&embedded[k][1], m * zy);
                h.add_scaled(&embedded[k][2], m * zz);
            }
        }
        h
    };
    Ok(ConditionalPair {
        a: conditioned(levels.0),
        b: conditioned(levels.1),
    })
}

/// Conditional bath Hamiltonians for the two qubit levels of the electron.
pub fn conditional_hamiltonians(central: &CentralSpinModel, spins: &[&BathSpin]) -> Result<ConditionalPair> {
    let members: Vec<ClusterMember<'_>> = spins.iter().map(|s| ClusterMember::electron_coupled(s)).collect();
    conditional_hamiltonians_for(central.levels(), central.magnetic_field_t, &members)
}
