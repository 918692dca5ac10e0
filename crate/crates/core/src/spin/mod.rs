//! Spin operator algebra, species tables and unitary propagation.
//!
//! Frequencies are linear (Hz) and times are in seconds everywhere; the only
//! place a factor of 2π enters is [`propagate`].

mod operator;
mod species;

pub use operator::{
    commutator, identity, kron, max_abs, propagate, spin_operators, HermitianOperator, Operator, Propagator,
    SpinOperators,
};
pub use species::{
    zeeman_frequency, CentralSpinModel, QubitSubspace, Spin, SpinSpecies, GAMMA_C13, GAMMA_ELECTRON, GAMMA_SI29,
};

pub type C64 = num_complex::Complex64;
