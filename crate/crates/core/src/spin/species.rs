use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Free-electron gyromagnetic ratio magnitude, Hz/T (g ≈ 2.0023).
pub const GAMMA_ELECTRON: f64 = 28.024e9;
/// ²⁹Si, Hz/T. Negative: the nuclear moment is antiparallel to the spin.
pub const GAMMA_SI29: f64 = -8.465e6;
/// ¹³C, Hz/T.
pub const GAMMA_C13: f64 = 10.705e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Spin {
    Half,
    One,
    ThreeHalves,
}

impl Spin {
    pub fn from_f64(s: f64) -> Result<Self> {
        match (2.0 * s).round() as i64 {
            1 if (s - 0.5).abs() < 1e-12 => Ok(Spin::Half),
            2 if (s - 1.0).abs() < 1e-12 => Ok(Spin::One),
            3 if (s - 1.5).abs() < 1e-12 => Ok(Spin::ThreeHalves),
            _ => Err(Error::UnsupportedSpin(s)),
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Spin::Half => 0.5,
            Spin::One => 1.0,
            Spin::ThreeHalves => 1.5,
        }
    }

    /// Hilbert-space dimension 2s+1.
    pub fn dim(self) -> usize {
        match self {
            Spin::Half => 2,
            Spin::One => 3,
            Spin::ThreeHalves => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinSpecies {
    pub name: String,
    pub spin: Spin,
    /// Linear-frequency convention, Hz/T.
    pub gyromagnetic_ratio: f64,
}

impl SpinSpecies {
    pub fn new(name: impl Into<String>, spin: Spin, gyromagnetic_ratio: f64) -> Result<Self> {
        if !gyromagnetic_ratio.is_finite() || gyromagnetic_ratio == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gyromagnetic ratio must be finite and nonzero, got {gyromagnetic_ratio}"
            )));
        }
        Ok(Self {
            name: name.into(),
            spin,
            gyromagnetic_ratio,
        })
    }

    /// The S = 1 central defect spin.
    pub fn divacancy() -> Self {
        Self::new("VV0", Spin::One, GAMMA_ELECTRON).unwrap()
    }

    /// Paramagnetic impurity modeled as a free spin-1/2 electron (N⁰-like).
    pub fn electron() -> Self {
        Self::new("e", Spin::Half, GAMMA_ELECTRON).unwrap()
    }

    /// S = 3/2 paramagnetic impurity (V_C⁻-like).
    pub fn carbon_vacancy() -> Self {
        Self::new("VC", Spin::ThreeHalves, GAMMA_ELECTRON).unwrap()
    }

    pub fn si29() -> Self {
        Self::new("29Si", Spin::Half, GAMMA_SI29).unwrap()
    }

    pub fn c13() -> Self {
        Self::new("13C", Spin::Half, GAMMA_C13).unwrap()
    }

    /// Looks up one of the built-in species by its serialized name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "VV0" => Ok(Self::divacancy()),
            "e" => Ok(Self::electron()),
            "VC" => Ok(Self::carbon_vacancy()),
            "29Si" => Ok(Self::si29()),
            "13C" => Ok(Self::c13()),
            other => Err(Error::Parse(format!("unknown spin species `{other}`"))),
        }
    }
}

/// Signed Larmor frequency γ·B in Hz.
pub fn zeeman_frequency(species: &SpinSpecies, field_tesla: f64) -> f64 {
    species.gyromagnetic_ratio * field_tesla
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QubitSubspace {
    /// Single-quantum qubit on m_s = 0 and m_s = −1.
    Sq0Minus1,
    /// Double-quantum qubit on m_s = +1 and m_s = −1.
    DqPlus1Minus1,
}

impl QubitSubspace {
    /// Projections (m_a, m_b) of the two levels spanning the qubit.
    pub fn levels(self) -> (f64, f64) {
        match self {
            QubitSubspace::Sq0Minus1 => (0.0, -1.0),
            QubitSubspace::DqPlus1Minus1 => (1.0, -1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralSpinModel {
    pub species: SpinSpecies,
    /// Enters level selection only; a global phase inside the pseudospin.
    pub zero_field_splitting_hz: f64,
    /// Field along the c-axis (z), tesla.
    pub magnetic_field_t: f64,
    pub qubit_subspace: QubitSubspace,
}

impl CentralSpinModel {
    /// Default zero-field splitting, Hz. A configuration value, not a measured one.
    pub const DEFAULT_D_HZ: f64 = 1.336e9;

    pub fn new(magnetic_field_t: f64, qubit_subspace: QubitSubspace) -> Result<Self> {
        if !(magnetic_field_t >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "magnetic field must be >= 0, got {magnetic_field_t}"
            )));
        }
        Ok(Self {
            species: SpinSpecies::divacancy(),
            zero_field_splitting_hz: Self::DEFAULT_D_HZ,
            magnetic_field_t,
            qubit_subspace,
        })
    }

    pub fn with_subspace(&self, qubit_subspace: QubitSubspace) -> Self {
        Self {
            qubit_subspace,
            ..self.clone()
        }
    }

    pub fn levels(&self) -> (f64, f64) {
        self.qubit_subspace.levels()
    }

    /// Energy of level m_s in Hz, D·m_s² + γ·B·m_s.
    pub fn level_energy(&self, m_s: f64) -> f64 {
        self.zero_field_splitting_hz * m_s * m_s + zeeman_frequency(&self.species, self.magnetic_field_t) * m_s
    }

    /// Transition frequency between the two qubit levels, Hz.
    pub fn qubit_frequency(&self) -> f64 {
        let (a, b) = self.levels();
        (self.level_energy(a) - self.level_energy(b)).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si29_zeeman_at_232_gauss() {
        let f = zeeman_frequency(&SpinSpecies::si29(), 23.2e-3);
        assert!((f - (-196.388e3)).abs() < 1.0, "{f}");
    }

    #[test]
    fn electron_zeeman_at_232_gauss() {
        let f = zeeman_frequency(&SpinSpecies::electron(), 23.2e-3);
        assert!((f - 650.16e6).abs() < 0.01e6, "{f}");
    }

    #[test]
    fn zero_field_gives_zero() {
        for s in [SpinSpecies::si29(), SpinSpecies::c13(), SpinSpecies::electron()] {
            assert_eq!(zeeman_frequency(&s, 0.0), 0.0);
        }
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(Spin::from_f64(0.5).unwrap(), Spin::Half);
        assert_eq!(Spin::from_f64(1.5).unwrap().dim(), 4);
        assert!(Spin::from_f64(2.0).is_err());
        assert!(Spin::from_f64(0.7).is_err());
    }

    #[test]
    fn subspace_levels() {
        assert_eq!(QubitSubspace::Sq0Minus1.levels(), (0.0, -1.0));
        assert_eq!(QubitSubspace::DqPlus1Minus1.levels(), (1.0, -1.0));
        assert!(CentralSpinModel::new(-1.0, QubitSubspace::Sq0Minus1).is_err());
    }

    #[test]
    fn zero_gamma_rejected() {
        assert!(SpinSpecies::new("x", Spin::Half, 0.0).is_err());
        assert!(SpinSpecies::new("x", Spin::Half, f64::NAN).is_err());
    }
}
