//! Cluster-correlation expansion of central-spin coherence, with an exact
//! oracle for small baths.

mod clusters;
mod coherence;
mod curve;
mod hamiltonian;
mod register;

pub use clusters::{build_clusters, build_clusters_with, CceOptions, Cluster};
pub use coherence::{
    cce_total, cluster_coherence, exact_coherence, schedule_coherence, CLAMP_THRESHOLD, EXACT_DIMENSION_LIMIT,
};
pub use curve::{CoherenceCurve, CURVE_HEADER};
pub use hamiltonian::{conditional_hamiltonians, conditional_hamiltonians_for, ClusterMember, ConditionalPair};
pub use register::nuclear_register_coherence;
