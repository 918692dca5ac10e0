use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::pulse::{Pulse, PulseSequence, SequenceElement, Target};
use super::register::RegisterModel;
use super::standard::{StandardSequence, XY8_PATTERN};
use crate::error::{Error, Result};
use crate::spin::{identity, kron, max_abs, propagate, CentralSpinModel, HermitianOperator, Operator, Propagator, C64};

const UNITARITY_TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn pauli() -> [Operator; 3] {
    [
        Operator::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        Operator::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        Operator::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ]
}

/// exp(−iθ/2 (cos φ σ_x + sin φ σ_y)).
fn rotation(angle: f64, phase: f64) -> Operator {
    let [sx, sy, _] = pauli();
    let gen = sx * c(phase.cos(), 0.0) + sy * c(phase.sin(), 0.0);
    identity(2) * c((angle / 2.0).cos(), 0.0) - gen * c(0.0, (angle / 2.0).sin())
}

fn projector(level: usize) -> Operator {
    let mut p = Operator::zeros(2, 2);
    p[(level, level)] = c(1.0, 0.0);
    p
}

/// Two-level electron pseudospin ⊗ spin-1/2 register, electron first.
/// Basis index 0 of the electron is the first qubit level.
#[derive(Debug, Clone)]
pub struct JointModel {
    pub levels: (f64, f64),
    pub register: RegisterModel,
    /// Electron detuning per unit m, Hz.
    pub detuning_hz: f64,
    propagator: Propagator,
}

impl JointModel {
    pub fn new(levels: (f64, f64), register: RegisterModel, detuning_hz: f64) -> Self {
        let [sx, sy, sz] = pauli();
        let mut h = HermitianOperator::zeros(4);
        for (idx, m) in [levels.0, levels.1].into_iter().enumerate() {
            let [hx, hy, hz] = register.conditional_field(m);
            let block = (&sx * c(hx / 2.0, 0.0)) + (&sy * c(hy / 2.0, 0.0)) + (&sz * c(hz / 2.0, 0.0));
            h.add_scaled(&kron(&projector(idx), &block), 1.0);
            h.add_scaled(&kron(&projector(idx), &identity(2)), detuning_hz * m);
        }
        Self {
            levels,
            register,
            detuning_hz,
            propagator: Propagator::new(&h),
        }
    }

    pub fn for_sequence(central: &CentralSpinModel, register: RegisterModel, sequence: &PulseSequence) -> Self {
        let levels = sequence.subspace.map_or(central.levels(), |s| s.levels());
        Self::new(levels, register, sequence.detuning_hz)
    }

    pub fn free(&self, duration_s: f64) -> Operator {
        self.propagator.at(duration_s)
    }

    pub fn pulse(&self, p: &Pulse) -> Result<Operator> {
        let r = rotation(p.angle_rad, p.axis.phase());
        match (p.target, p.conditional) {
            (Target::Electron, None) => Ok(kron(&r, &identity(2))),
            (Target::Electron, Some(_)) => Err(Error::UnsupportedPulse {
                sequence: "joint".into(),
                reason: "electron pulses cannot be conditional".into(),
            }),
            (Target::Register, None) => Ok(kron(&identity(2), &r)),
            (Target::Register, Some(m)) => {
                let m = m as f64;
                let idx = if m == self.levels.0 {
                    0
                } else if m == self.levels.1 {
                    1
                } else {
                    return Err(Error::UnsupportedPulse {
                        sequence: "joint".into(),
                        reason: format!("condition m_s = {m} is outside the qubit levels"),
                    });
                };
                Ok(kron(&projector(idx), &r) + kron(&projector(1 - idx), &identity(2)))
            }
        }
    }

    /// Time-ordered product of every element of the sequence.
    pub fn unitary(&self, sequence: &PulseSequence) -> Result<Operator> {
        sequence.validate()?;
        let mut u = identity(4);
        for el in &sequence.elements {
            let step = match el {
                SequenceElement::Pulse(p) => self.pulse(p)?,
                SequenceElement::Free { duration_s } => self.free(*duration_s),
            };
            u = step * u;
        }
        let dev = max_abs(&(u.adjoint() * &u - identity(4)));
        if dev > UNITARITY_TOL {
            return Err(Error::Numerical(format!(
                "sequence unitary deviates from unitarity by {dev:.3e}"
            )));
        }
        Ok(u)
    }
}

/// Density matrix of electron level `e` ⊗ maximally mixed register.
fn electron_state_mixed_register(e: usize) -> Operator {
    kron(&projector(e), &(identity(2) * c(0.5, 0.0)))
}

fn electron_population(rho: &Operator, level: usize) -> f64 {
    (kron(&projector(level), &identity(2)) * rho).trace().re
}

/// Population of the first qubit level after XY8-N with the register
/// initially mixed, for each half-spacing in `taus`.
pub fn xy8_spectroscopy(
    central: &CentralSpinModel,
    register: &RegisterModel,
    n_blocks: usize,
    taus: &[f64],
) -> Result<Vec<f64>> {
    xy8_spectroscopy_with_error(central, register, n_blocks, taus, 0.0)
}

/// As [`xy8_spectroscopy`] with every pulse angle scaled by (1 + `angle_error`).
pub fn xy8_spectroscopy_with_error(
    central: &CentralSpinModel,
    register: &RegisterModel,
    n_blocks: usize,
    taus: &[f64],
    angle_error: f64,
) -> Result<Vec<f64>> {
    if let Some(t) = taus.iter().find(|t| !(**t > 0.0)) {
        return Err(Error::InvalidArgument(format!("tau must be > 0, got {t}")));
    }
    let model = JointModel::new(central.levels(), *register, 0.0);
    let rho0 = electron_state_mixed_register(0);
    taus.par_iter()
        .map(|&tau| {
            let seq = StandardSequence::Xy8 { blocks: n_blocks }
                .build(tau)?
                .with_angle_error(angle_error);
            let u = model.unitary(&seq)?;
            Ok(electron_population(&(&u * &rho0 * u.adjoint()), 0))
        })
        .collect()
}

/// Axis and angle of a 2×2 special unitary V = cos(φ/2) − i sin(φ/2) n·σ.
pub fn su2_axis_angle(v: &Operator) -> ([f64; 3], f64) {
    let det = v[(0, 0)] * v[(1, 1)] - v[(0, 1)] * v[(1, 0)];
    let v = v / det.sqrt();
    let half_cos = (0.5 * (v[(0, 0)] + v[(1, 1)]).re).clamp(-1.0, 1.0);
    let nx = -(v[(0, 1)] + v[(1, 0)]).im;
    let ny = (v[(1, 0)] - v[(0, 1)]).re;
    let nz = -(v[(0, 0)] - v[(1, 1)]).im;
    let s = (nx * nx + ny * ny + nz * nz).sqrt();
    let phi = 2.0 * s.atan2(2.0 * half_cos);
    if s == 0.0 {
        ([0.0, 0.0, 1.0], 0.0)
    } else {
        ([nx / s, ny / s, nz / s], phi)
    }
}

/// Per-unit (τ − π − 2τ − π − τ) register rotations for the electron
/// starting in each qubit level: ((n̂_0, n̂_1), φ).
pub fn unit_rotations(levels: (f64, f64), register: &RegisterModel, tau: f64) -> Result<([[f64; 3]; 2], f64)> {
    let [sx, sy, sz] = pauli();
    let h = |m: f64| -> Result<HermitianOperator> {
        let [hx, hy, hz] = register.conditional_field(m);
        HermitianOperator::new(
            sx.clone() * c(hx / 2.0, 0.0) + sy.clone() * c(hy / 2.0, 0.0) + sz.clone() * c(hz / 2.0, 0.0),
        )
    };
    let (h0, h1) = (h(levels.0)?, h(levels.1)?);
    let v0 = propagate(&h0, tau)? * propagate(&h1, 2.0 * tau)? * propagate(&h0, tau)?;
    let v1 = propagate(&h1, tau)? * propagate(&h0, 2.0 * tau)? * propagate(&h1, tau)?;
    let (n0, phi) = su2_axis_angle(&v0);
    let (n1, _) = su2_axis_angle(&v1);
    Ok(([n0, n1], phi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    /// Electron-conditional register rotation from an XY8 train.
    Crot,
    /// π/2_x · CROT · π/2_y with the electron heralded in the first level.
    Init,
    /// π/2_x · CROT · π/2_y mapping the register onto the electron population.
    Readout,
    /// CROT with the electron held in the first level (Rabi-type driving).
    RabiBlock,
}

#[derive(Debug, Clone)]
pub struct GateResult {
    /// Joint electron ⊗ register unitary.
    pub unitary: Operator,
    /// Crot/RabiBlock: (1 − n̂_0·n̂_1)/2. Init: (1 + |r|)/2 of the heralded
    /// register. Readout: (1 + contrast)/2.
    pub fidelity: f64,
    pub axis_overlap: f64,
    pub unit_angle: f64,
    /// Set when n̂_0·n̂_1 > −0.9 (τ away from a resonance).
    pub low_fidelity: bool,
}

/// Register POVM element for finding the electron in its first level after
/// `u`, with the electron starting there: M = ⟨0|U†(Π_0 ⊗ 1)U|0⟩.
pub fn readout_operator(u: &Operator) -> Operator {
    let e0 = kron(
        &Operator::from_row_slice(2, 1, &[c(1.0, 0.0), c(0.0, 0.0)]),
        &identity(2),
    );
    let pi0 = kron(&projector(0), &identity(2));
    e0.adjoint() * u.adjoint() * pi0 * u * e0
}

fn crot_sequence(tau: f64, n_blocks: usize) -> PulseSequence {
    let axes: Vec<_> = (0..n_blocks).flat_map(|_| XY8_PATTERN).collect();
    let mut elements = vec![PulseSequence::free(tau)];
    for (i, &axis) in axes.iter().enumerate() {
        elements.push(SequenceElement::Pulse(Pulse::electron(axis, PI)));
        elements.push(PulseSequence::free(if i + 1 == axes.len() { tau } else { 2.0 * tau }));
    }
    PulseSequence::new(format!("crot-{n_blocks}"), elements)
}

fn bloch_length(rho: &Operator) -> f64 {
    let [sx, sy, sz] = pauli();
    let r: Vec<f64> = [sx, sy, sz].iter().map(|s| (s * rho).trace().re).collect();
    (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt()
}

pub fn nuclear_gate(
    central: &CentralSpinModel,
    register: &RegisterModel,
    kind: GateKind,
    tau: f64,
    n_blocks: usize,
) -> Result<GateResult> {
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("tau must be > 0, got {tau}")));
    }
    let levels = central.levels();
    let ([n0, n1], phi) = unit_rotations(levels, register, tau)?;
    let overlap = n0[0] * n1[0] + n0[1] * n1[1] + n0[2] * n1[2];
    let model = JointModel::new(levels, *register, 0.0);
    let unitary = if n_blocks == 0 {
        identity(4)
    } else {
        let mut seq = crot_sequence(tau, n_blocks);
        if matches!(kind, GateKind::Init | GateKind::Readout) {
            seq.elements
                .insert(0, SequenceElement::Pulse(Pulse::electron(super::Axis::X, PI / 2.0)));
            seq.elements
                .push(SequenceElement::Pulse(Pulse::electron(super::Axis::Y, PI / 2.0)));
        }
        model.unitary(&seq)?
    };
    let fidelity = match kind {
        GateKind::Crot | GateKind::RabiBlock => 0.5 * (1.0 - overlap),
        GateKind::Readout => {
            let m = readout_operator(&unitary);
            let eig = m.symmetric_eigen().eigenvalues;
            0.5 * (1.0 + (eig[0] - eig[1]).abs())
        }
        GateKind::Init => {
            let rho = &unitary * electron_state_mixed_register(0) * unitary.adjoint();
            let pi0 = kron(&projector(0), &identity(2));
            let heralded = &pi0 * rho * &pi0;
            let p0 = heralded.trace().re;
            let reg = Operator::from_fn(2, 2, |i, j| heralded[(i, j)] / p0);
            0.5 * (1.0 + bloch_length(&reg))
        }
    };
    Ok(GateResult {
        unitary,
        fidelity,
        axis_overlap: overlap,
        unit_angle: phi,
        low_fidelity: overlap > -0.9,
    })
}

/// Register ⟨σ_z⟩ after `n_blocks` Rabi blocks from |↑⟩ with the electron
/// in its first level.
pub fn rabi_sigma_z(central: &CentralSpinModel, register: &RegisterModel, tau: f64, n_blocks: usize) -> Result<f64> {
    let g = nuclear_gate(central, register, GateKind::RabiBlock, tau, n_blocks)?;
    let mut psi = Operator::zeros(4, 1);
    psi[(0, 0)] = c(1.0, 0.0);
    let out = &g.unitary * psi;
    Ok(out[(0, 0)].norm_sqr() - out[(1, 0)].norm_sqr() + out[(2, 0)].norm_sqr() - out[(3, 0)].norm_sqr())
}

/// Readout-minus-unpolarized contrast of a heralded init followed by a readout,
/// both built from `n_blocks` XY8 blocks at half-spacing `tau`.
pub fn init_readout_contrast(
    central: &CentralSpinModel,
    register: &RegisterModel,
    tau: f64,
    n_blocks: usize,
) -> Result<f64> {
    let g = nuclear_gate(central, register, GateKind::Readout, tau, n_blocks)?;
    let rho = &g.unitary * electron_state_mixed_register(0) * g.unitary.adjoint();
    let pi0 = kron(&projector(0), &identity(2));
    let heralded = &pi0 * rho * &pi0;
    let p0 = heralded.trace().re;
    if p0 <= 0.0 {
        return Ok(0.0);
    }
    let reg = Operator::from_fn(2, 2, |i, j| heralded[(i, j)] / p0);
    let m = readout_operator(&g.unitary);
    Ok((&m * reg).trace().re - 0.5 * m.trace().re)
}
