use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::hyperfine::{point_dipole_hyperfine, position_for_coupling, HyperfineTensor};
use super::lattice::{Element, LatticeSite};
use crate::error::{Error, Result};
use crate::spin::{SpinSpecies, GAMMA_ELECTRON};

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpin {
    /// Å, relative to the central spin.
    pub position: Vector3<f64>,
    pub species: SpinSpecies,
    /// Coupling to the central spin, Hz.
    pub hyperfine: HyperfineTensor,
    pub paramagnetic: bool,
    pub active: bool,
}

impl BathSpin {
    /// Nuclear or paramagnetic spin at `position` with a point-dipole coupling
    /// to a central spin of gyromagnetic ratio `central_gamma`.
    pub fn at(position: Vector3<f64>, species: SpinSpecies, paramagnetic: bool, central_gamma: f64) -> Result<Self> {
        let hyperfine = point_dipole_hyperfine(&position, central_gamma, species.gyromagnetic_ratio)?;
        Ok(Self {
            position,
            species,
            hyperfine,
            paramagnetic,
            active: true,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathConfig {
    pub si29_abundance: f64,
    pub c13_abundance: f64,
    pub impurity_density_per_cm3: f64,
    pub bath_radius_angstrom: f64,
    pub exclusion_radius_angstrom: f64,
    pub impurity_species: SpinSpecies,
    pub central_gamma_hz_per_t: f64,
    pub rng_seed: u64,
}

impl Default for BathConfig {
    fn default() -> Self {
        Self {
            si29_abundance: 0.0468,
            c13_abundance: 0.0107,
            impurity_density_per_cm3: 0.0,
            bath_radius_angstrom: 50.0,
            exclusion_radius_angstrom: 3.0,
            impurity_species: SpinSpecies::electron(),
            central_gamma_hz_per_t: GAMMA_ELECTRON,
            rng_seed: 0,
        }
    }
}

impl BathConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, p) in [
            ("si29_abundance", self.si29_abundance),
            ("c13_abundance", self.c13_abundance),
        ] {
            if !(0.0..=1.0).contains(&p) {
                problems.push(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.impurity_density_per_cm3 >= 0.0) {
            problems.push(format!(
                "impurity density must be >= 0, got {}",
                self.impurity_density_per_cm3
            ));
        }
        if !(self.bath_radius_angstrom > 0.0) {
            problems.push(format!("bath radius must be > 0, got {}", self.bath_radius_angstrom));
        }
        if !(self.exclusion_radius_angstrom >= 0.0) || self.exclusion_radius_angstrom >= self.bath_radius_angstrom {
            problems.push(format!(
                "exclusion radius must lie in [0, bath radius), got {}",
                self.exclusion_radius_angstrom
            ));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }
}

/// An immutable set of bath spins plus the seed its randomness derives from.
#[derive(Debug, Clone, PartialEq)]
pub struct Bath {
    pub spins: Vec<BathSpin>,
    pub seed: u64,
}

impl Bath {
    pub fn new(spins: Vec<BathSpin>, seed: u64) -> Self {
        Self { spins, seed }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.spins.len()).filter(|&i| self.spins[i].active).collect()
    }

    pub fn nuclear_count(&self) -> usize {
        self.spins.iter().filter(|s| !s.paramagnetic).count()
    }

    pub fn paramagnetic_count(&self) -> usize {
        self.spins.iter().filter(|s| s.paramagnetic).count()
    }

    pub fn active_paramagnetic_count(&self) -> usize {
        self.spins.iter().filter(|s| s.paramagnetic && s.active).count()
    }

    /// Copy with every paramagnetic spin removed.
    pub fn without_paramagnetic(&self) -> Bath {
        Bath::new(
            self.spins.iter().filter(|s| !s.paramagnetic).cloned().collect(),
            self.seed,
        )
    }

    /// Appends a nucleus placed so its point-dipole coupling equals
    /// (`a_parallel`, `a_perp`); returns its index.
    pub fn inject_register(
        &mut self,
        species: SpinSpecies,
        a_parallel: f64,
        a_perp: f64,
        central_gamma: f64,
    ) -> Result<usize> {
        let position = position_for_coupling(a_parallel, a_perp, central_gamma, species.gyromagnetic_ratio)?;
        // a lattice nucleus sitting on the same spot is replaced
        self.spins.retain(|s| (s.position - position).norm() > 1.0);
        self.spins.push(BathSpin::at(position, species, false, central_gamma)?);
        Ok(self.spins.len() - 1)
    }
}

/// Random isotope occupation of lattice sites plus uniformly placed
/// paramagnetic impurities; fully determined by `config.rng_seed`.
pub fn sample_bath(sites: &[LatticeSite], config: &BathConfig) -> Result<Bath> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let r_max = config.bath_radius_angstrom;
    let r_ex = config.exclusion_radius_angstrom;
    let mut spins = Vec::new();

    let si29 = SpinSpecies::si29();
    let c13 = SpinSpecies::c13();
    for site in sites {
        // one draw per site keeps the occupation of a site independent of radius settings
        let u: f64 = rng.random();
        let d = site.position.norm();
        if d <= r_ex || d > r_max {
            continue;
        }
        let (p, species) = match site.element {
            Element::Si => (config.si29_abundance, &si29),
            Element::C => (config.c13_abundance, &c13),
        };
        if u < p {
            spins.push(BathSpin::at(
                site.position,
                species.clone(),
                false,
                config.central_gamma_hz_per_t,
            )?);
        }
    }

    let shell_volume = 4.0 / 3.0 * PI * (r_max.powi(3) - r_ex.powi(3));
    let expected = config.impurity_density_per_cm3 * 1e-24 * shell_volume;
    let count = if expected > 0.0 {
        Poisson::new(expected)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    for _ in 0..count {
        let u: f64 = rng.random();
        let r = (r_ex.powi(3) + u * (r_max.powi(3) - r_ex.powi(3))).cbrt();
        let cos_theta: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let sin_theta = (1.0 - cos_theta * cos_theta).sqrt();
        let position = Vector3::new(r * sin_theta * phi.cos(), r * sin_theta * phi.sin(), r * cos_theta);
        spins.push(BathSpin::at(
            position,
            config.impurity_species.clone(),
            true,
            config.central_gamma_hz_per_t,
        )?);
    }
    Ok(Bath::new(spins, config.rng_seed))
}
