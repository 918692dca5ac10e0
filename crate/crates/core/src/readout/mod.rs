//! Repetitive QND readout of the nuclear register: telegraph state flips,
//! photon-count statistics, threshold optimisation and T1 extraction.

mod t1;
mod threshold;
mod trace;

pub use t1::{estimate_t1, T1Estimate, MIN_DWELLS};
pub use threshold::{
    histograms, optimal_threshold, poisson_histogram, CountHistogram, ThresholdResult, HISTOGRAM_HEADER,
};
pub use trace::{
    simulate_many, simulate_qnd_trace, CountStatistics, ReadoutParams, ReadoutTrace, DEFAULT_WINDOW, TRACE_HEADER,
};
