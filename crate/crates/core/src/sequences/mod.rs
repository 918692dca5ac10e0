//! Pulse sequences and their exact simulation on the electron ⊗ register space.

mod ensemble;
mod joint;
mod pulse;
mod register;
mod standard;

pub use ensemble::quasi_static_ensemble;
pub use joint::{
    init_readout_contrast, nuclear_gate, rabi_sigma_z, readout_operator, su2_axis_angle, unit_rotations,
    xy8_spectroscopy, xy8_spectroscopy_with_error, GateKind, GateResult, JointModel,
};
pub use pulse::{Axis, Pulse, PulseSequence, Schedule, SequenceElement, Target};
pub use register::{implied_field, resonance_taus, RegisterModel};
pub use standard::{StandardSequence, XY8_PATTERN};
