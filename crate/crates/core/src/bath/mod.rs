//! 4H-SiC host lattice, random isotope and impurity baths, point-dipole
//! couplings and the bias-dependent depletion filter.

mod depletion;
mod hyperfine;
mod io;
mod lattice;
mod sample;

pub use depletion::{apply_depletion, DepletionMode, DepletionModel};
pub use hyperfine::{
    dipolar_prefactor, point_dipole_hyperfine, position_for_coupling, HyperfineTensor, MIN_SEPARATION_ANGSTROM,
    MU0_OVER_4PI, PLANCK,
};
pub use io::{bath_to_string, read_bath, write_bath, BATH_COLUMNS, BATH_HEADER};
pub use lattice::{generate_lattice, Element, LatticeConstants, LatticeSite};
pub use sample::{sample_bath, Bath, BathConfig, BathSpin};
