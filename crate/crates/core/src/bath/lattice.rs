use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Element {
    Si,
    C,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeSite {
    /// Å, relative to the defect origin.
    pub position: Vector3<f64>,
    pub element: Element,
}

/// Hexagonal 4H-SiC cell parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeConstants {
    pub a_angstrom: f64,
    pub c_angstrom: f64,
    /// C displacement above its Si partner, in units of c.
    pub bond_fraction: f64,
}

impl Default for LatticeConstants {
    fn default() -> Self {
        Self {
            a_angstrom: 3.079,
            c_angstrom: 10.08,
            bond_fraction: 3.0 / 16.0,
        }
    }
}

impl LatticeConstants {
    pub fn cell_volume(&self) -> f64 {
        self.a_angstrom * self.a_angstrom * self.c_angstrom * (60f64.to_radians()).sin()
    }

    /// Si sites per cm³.
    pub fn si_number_density_per_cm3(&self) -> f64 {
        4.0 / self.cell_volume() * 1e24
    }
}

// ABCB stacking; fractional (a1, a2, c) coordinates of the four Si atoms.
const SI_BASIS: [[f64; 3]; 4] = [
    [0.0, 0.0, 0.0],
    [1.0 / 3.0, 2.0 / 3.0, 0.25],
    [2.0 / 3.0, 1.0 / 3.0, 0.5],
    [1.0 / 3.0, 2.0 / 3.0, 0.75],
];

/// Replicates the 8-atom 4H-SiC cell `extent` times and recenters on the Si
/// site closest to the supercell centroid, which becomes the defect origin.
pub fn generate_lattice(extent: [usize; 3], constants: &LatticeConstants) -> Result<Vec<LatticeSite>> {
    if extent.contains(&0) {
        return Err(Error::InvalidArgument(format!(
            "lattice extent must be >= 1 in every direction, got {extent:?}"
        )));
    }
    let a = constants.a_angstrom;
    let c = constants.c_angstrom;
    let a1 = Vector3::new(a, 0.0, 0.0);
    let a2 = Vector3::new(-0.5 * a, 0.5 * 3f64.sqrt() * a, 0.0);
    let a3 = Vector3::new(0.0, 0.0, c);

    let mut sites = Vec::with_capacity(8 * extent[0] * extent[1] * extent[2]);
    for i in 0..extent[0] {
        for j in 0..extent[1] {
            for k in 0..extent[2] {
                let origin = a1 * i as f64 + a2 * j as f64 + a3 * k as f64;
                for frac in SI_BASIS {
                    let si = origin + a1 * frac[0] + a2 * frac[1] + a3 * frac[2];
                    let carbon = si + a3 * constants.bond_fraction;
                    sites.push(LatticeSite {
                        position: si,
                        element: Element::Si,
                    });
                    sites.push(LatticeSite {
                        position: carbon,
                        element: Element::C,
                    });
                }
            }
        }
    }

    let centroid = sites.iter().map(|s| s.position).sum::<Vector3<f64>>() / sites.len() as f64;
    let origin = sites
        .iter()
        .filter(|s| s.element == Element::Si)
        .map(|s| s.position)
        .min_by(|p, q| (p - centroid).norm().partial_cmp(&(q - centroid).norm()).unwrap())
        .unwrap();
    for s in &mut sites {
        s.position -= origin;
    }
    Ok(sites)
}
