//! Simulation and analysis of a central defect spin and a weakly coupled
//! nuclear register embedded in an electrically depletable spin bath.

// negated comparisons reject NaN inputs
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod cce;
pub mod cli;
pub mod error;
pub mod fit;
pub mod noise;
pub mod readout;
pub mod sequences;
pub mod spin;

pub use error::{Error, Result};
