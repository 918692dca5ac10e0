use serde::{Deserialize, Serialize};

use crate::bath::Bath;
use crate::error::{Error, Result};

/// A set of distinct, active bath indices, sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cluster {
    pub members: Vec<usize>,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Truncation settings for the cluster expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CceOptions {
    pub order: usize,
    /// Largest separation of a nuclear pair, Å.
    pub pair_cutoff_angstrom: f64,
    /// Largest separation of a pair with at least one paramagnetic member, Å.
    pub paramagnetic_pair_cutoff_angstrom: f64,
}

impl Default for CceOptions {
    fn default() -> Self {
        Self {
            order: 2,
            pair_cutoff_angstrom: 10.0,
            paramagnetic_pair_cutoff_angstrom: 200.0,
        }
    }
}

impl CceOptions {
    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.order) {
            return Err(Error::InvalidArgument(format!(
                "CCE order must be 1 or 2, got {}",
                self.order
            )));
        }
        if !(self.pair_cutoff_angstrom >= 0.0) || !(self.paramagnetic_pair_cutoff_angstrom >= 0.0) {
            return Err(Error::InvalidArgument("pair cutoffs must be >= 0".into()));
        }
        Ok(())
    }
}

/// All active singletons, then (for order 2) all active pairs closer than
/// the cutoff, in lexicographic index order.
pub fn build_clusters(bath: &Bath, order: usize, pair_cutoff_angstrom: f64) -> Result<Vec<Cluster>> {
    build_clusters_with(
        bath,
        &CceOptions {
            order,
            pair_cutoff_angstrom,
            paramagnetic_pair_cutoff_angstrom: pair_cutoff_angstrom,
        },
    )
}

pub fn build_clusters_with(bath: &Bath, options: &CceOptions) -> Result<Vec<Cluster>> {
    options.validate()?;
    let active = bath.active_indices();
    let mut out: Vec<Cluster> = active.iter().map(|&i| Cluster { members: vec![i] }).collect();
    if options.order == 2 {
        for (k, &i) in active.iter().enumerate() {
            for &j in &active[k + 1..] {
                let (si, sj) = (&bath.spins[i], &bath.spins[j]);
                let cutoff = if si.paramagnetic || sj.paramagnetic {
                    options.paramagnetic_pair_cutoff_angstrom
                } else {
                    options.pair_cutoff_angstrom
                };
                if (si.position - sj.position).norm() <= cutoff {
                    out.push(Cluster { members: vec![i, j] });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathSpin;
    use crate::spin::{SpinSpecies, GAMMA_ELECTRON};
    use nalgebra::Vector3;

    fn line_bath(n: usize) -> Bath {
        let spins = (0..n)
            .map(|k| {
                BathSpin::at(
                    Vector3::new(0.0, 0.0, 5.0 + 3.0 * k as f64),
                    SpinSpecies::si29(),
                    false,
                    GAMMA_ELECTRON,
                )
                .unwrap()
            })
            .collect();
        Bath::new(spins, 0)
    }

    #[test]
    fn counts() {
        let b = line_bath(6);
        assert_eq!(build_clusters(&b, 1, f64::INFINITY).unwrap().len(), 6);
        assert_eq!(build_clusters(&b, 2, f64::INFINITY).unwrap().len(), 6 + 15);
        assert_eq!(build_clusters(&b, 2, 0.0).unwrap().len(), 6);
        // nearest neighbours only
        assert_eq!(build_clusters(&b, 2, 3.5).unwrap().len(), 6 + 5);
    }

    #[test]
    fn inactive_spins_skipped() {
        let mut b = line_bath(4);
        b.spins[1].active = false;
        let c = build_clusters(&b, 2, f64::INFINITY).unwrap();
        assert_eq!(c.len(), 3 + 3);
        assert!(c.iter().all(|c| !c.members.contains(&1)));
    }

    #[test]
    fn invalid_order_rejected() {
        assert!(build_clusters(&line_bath(2), 3, 1.0).is_err());
        assert!(build_clusters(&line_bath(2), 0, 1.0).is_err());
    }
}
