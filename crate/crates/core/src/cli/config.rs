use serde::{Deserialize, Serialize};

use crate::bath::{BathConfig, DepletionMode, DepletionModel, LatticeConstants};
use crate::cce::CceOptions;
use crate::error::{Error, Result};
use crate::noise::{ChiOptions, FilterSequence, NoisePsd};
use crate::readout::{CountStatistics, ReadoutParams};
use crate::sequences::StandardSequence;
use crate::spin::{CentralSpinModel, QubitSubspace, SpinSpecies};

/// Typed view of a configuration file. Sections absent from the file are
/// `None`; keys absent from a present section take their schema default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
    pub central: Option<CentralSection>,
    pub lattice: Option<LatticeSection>,
    pub bath: Option<BathSection>,
    pub depletion: Option<DepletionSection>,
    pub cce: Option<CceSection>,
    pub sequence: Option<SequenceSection>,
    pub times: Option<TimesSection>,
    pub register: Option<RegisterSection>,
    pub spectroscopy: Option<SpectroscopySection>,
    pub noise: Option<NoiseSection>,
    pub readout: Option<ReadoutSection>,
    pub fit: Option<FitSection>,
    pub bias_scan: Option<BiasScanSection>,
    pub oracle_check: Option<OracleCheckSection>,
}

fn default_output_dir() -> String {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config deserializes")
    }
}

macro_rules! section {
    ($name:ident { $($field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $(pub $field: $ty),*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { $($field: $default),* }
            }
        }
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Ramsey,
    Hahn,
    DqRamsey,
    Cpmg,
    Xy8,
    NuclearRamsey,
    NuclearHahn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegisterSpecies {
    Si29,
    C13,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Xy8Spectroscopy,
    QuasiStaticEnsemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    White,
    Lorentzian,
    OneOverF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Ramsey,
    Hahn,
    Cpmg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Stretched,
    Oscillation,
    Bound,
}

section!(CentralSection {
    magnetic_field_t: f64 = f64::NAN,
    zero_field_splitting_hz: f64 = CentralSpinModel::DEFAULT_D_HZ,
    qubit_subspace: QubitSubspace = QubitSubspace::Sq0Minus1,
});

section!(LatticeSection {
    extent_cells: [usize; 3] = [8, 8, 3],
    a_angstrom: f64 = LatticeConstants::default().a_angstrom,
    c_angstrom: f64 = LatticeConstants::default().c_angstrom,
});

section!(BathSection {
    si29_abundance_fraction: f64 = BathConfig::default().si29_abundance,
    c13_abundance_fraction: f64 = BathConfig::default().c13_abundance,
    impurity_density_per_cm3: f64 = BathConfig::default().impurity_density_per_cm3,
    bath_radius_angstrom: f64 = BathConfig::default().bath_radius_angstrom,
    exclusion_radius_angstrom: f64 = BathConfig::default().exclusion_radius_angstrom,
});

section!(DepletionSection {
    punch_through_v: f64 = DepletionModel::default().punch_through_volt,
    full_depletion_v: f64 = DepletionModel::default().full_depletion_volt,
    mode: DepletionMode = DepletionModel::default().mode,
    logistic_width_v: f64 = DepletionModel::default().logistic_width_volt,
    bias_v: f64 = 0.0,
});

section!(CceSection {
    order: usize = CceOptions::default().order,
    pair_cutoff_angstrom: f64 = CceOptions::default().pair_cutoff_angstrom,
    paramagnetic_pair_cutoff_angstrom: f64 = CceOptions::default().paramagnetic_pair_cutoff_angstrom,
    empirical_decay_time_s: Option<f64> = None,
});

section!(SequenceSection {
    kind: SequenceKind = SequenceKind::Ramsey,
    detuning_hz: f64 = 0.0,
    xy8_blocks: usize = 1,
    cpmg_pulses: usize = 1,
    electron_m_s: i8 = 0,
});

section!(TimesSection {
    t_max_s: f64 = f64::NAN,
    t_min_s: f64 = 0.0,
    points: usize = 101,
    spacing: Spacing = Spacing::Linear,
});

section!(RegisterSection {
    a_parallel_hz: f64 = f64::NAN,
    a_perp_hz: f64 = f64::NAN,
    species: RegisterSpecies = RegisterSpecies::Si29,
});

section!(SpectroscopySection {
    experiment: Experiment = Experiment::Xy8Spectroscopy,
    xy8_blocks: usize = 4,
    tau_min_s: f64 = 1.0e-6,
    tau_max_s: f64 = 6.0e-6,
    tau_step_s: f64 = 5.0e-9,
    resonance_orders: usize = 3,
    angle_error_fraction: f64 = 0.0,
    ensemble_sigma_hz: f64 = 1000.0,
    ensemble_samples: usize = 400,
});

section!(NoiseSection {
    model: NoiseModel = NoiseModel::White,
    s0_rad_per_s: f64 = 0.0,
    variance_rad2_per_s2: f64 = 0.0,
    tau_c_s: f64 = 1.0e-3,
    amplitude_rad2_per_s2: f64 = 0.0,
    filter: FilterKind = FilterKind::Hahn,
    cpmg_pulses: usize = 1,
    cutoff_low_hz: Option<f64> = ChiOptions::default().cutoff_low_hz,
    cutoff_high_hz: f64 = ChiOptions::default().cutoff_high_hz,
});

section!(ReadoutSection {
    rate_up_hz: f64 = f64::NAN,
    rate_down_hz: f64 = f64::NAN,
    shot_duration_s: f64 = f64::NAN,
    nuclear_t1_s: f64 = f64::NAN,
    n_shots: usize = 0,
    window: usize = crate::readout::DEFAULT_WINDOW,
    statistics: CountStatistics = CountStatistics::Poisson,
});

section!(FitSection {
    data_path: String = String::new(),
    model: FitModel = FitModel::Stretched,
    fix_stretch_n: Option<f64> = None,
    baseline: bool = false,
    stretch_n_assumed: f64 = 1.0,
    confidence_fraction: f64 = 0.99,
    sigma_default: f64 = 0.0,
    window_points: usize = 0,
    window_step_points: usize = 0,
});

section!(BiasScanSection {
    bias_v: Vec<f64> = Vec::new(),
    ramsey_t_max_s: f64 = f64::NAN,
    hahn_t_max_s: f64 = f64::NAN,
    points: usize = 101,
});

section!(OracleCheckSection {
    random_baths: usize = 10,
});

impl RunConfig {
    /// Parses and validates `text` for `command`, listing every problem at once.
    pub fn parse(text: &str, command: &str) -> Result<Self> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        let errors = super::schema::validate(&table, command);
        if !errors.is_empty() {
            return Err(Error::Config(errors));
        }
        let config: RunConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(vec![e.to_string()]))?;
        config.check_ranges()?;
        Ok(config)
    }

    fn check_ranges(&self) -> Result<()> {
        let mut errors = Vec::new();
        let mut need = |ok: bool, msg: &str| {
            if !ok {
                errors.push(msg.to_string());
            }
        };
        if let Some(c) = &self.central {
            need(c.magnetic_field_t >= 0.0, "central.magnetic_field_t: must be >= 0");
        }
        if let Some(t) = self.cce.as_ref().and_then(|c| c.empirical_decay_time_s) {
            need(t > 0.0, "cce.empirical_decay_time_s: must be > 0");
        }
        if let Some(t) = &self.times {
            need(t.t_max_s > 0.0, "times.t_max_s: must be > 0");
            need(
                t.t_min_s >= 0.0 && t.t_min_s < t.t_max_s,
                "times.t_min_s: must lie in [0, t_max_s)",
            );
            need(t.points >= 2, "times.points: must be >= 2");
            need(
                t.spacing == Spacing::Linear || t.t_min_s > 0.0,
                "times.t_min_s: must be > 0 for log spacing",
            );
        }
        if let Some(s) = &self.spectroscopy {
            need(
                s.tau_min_s > 0.0 && s.tau_max_s > s.tau_min_s,
                "spectroscopy.tau_max_s: need 0 < tau_min_s < tau_max_s",
            );
            need(s.tau_step_s > 0.0, "spectroscopy.tau_step_s: must be > 0");
        }
        if let Some(r) = &self.readout {
            need(r.n_shots >= 1, "readout.n_shots: must be >= 1");
        }
        if let Some(b) = &self.bias_scan {
            need(!b.bias_v.is_empty(), "bias_scan.bias_v: must be nonempty");
            need(
                b.ramsey_t_max_s > 0.0 && b.hahn_t_max_s > 0.0,
                "bias_scan: t_max values must be > 0",
            );
            need(b.points >= 2, "bias_scan.points: must be >= 2");
        }
        if let Some(s) = &self.sequence {
            need(
                [-1, 0, 1].contains(&s.electron_m_s),
                "sequence.electron_m_s: must be -1, 0 or 1",
            );
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }

    pub fn central_model(&self) -> Result<CentralSpinModel> {
        let c = self.central.clone().unwrap_or_default();
        let mut model = CentralSpinModel::new(c.magnetic_field_t, c.qubit_subspace)?;
        model.zero_field_splitting_hz = c.zero_field_splitting_hz;
        Ok(model)
    }

    pub fn lattice_constants(&self) -> (LatticeConstants, [usize; 3]) {
        let l = self.lattice.clone().unwrap_or_default();
        (
            LatticeConstants {
                a_angstrom: l.a_angstrom,
                c_angstrom: l.c_angstrom,
                ..LatticeConstants::default()
            },
            l.extent_cells,
        )
    }

    pub fn bath_config(&self) -> BathConfig {
        let b = self.bath.clone().unwrap_or_default();
        BathConfig {
            si29_abundance: b.si29_abundance_fraction,
            c13_abundance: b.c13_abundance_fraction,
            impurity_density_per_cm3: b.impurity_density_per_cm3,
            bath_radius_angstrom: b.bath_radius_angstrom,
            exclusion_radius_angstrom: b.exclusion_radius_angstrom,
            rng_seed: self.seed,
            ..BathConfig::default()
        }
    }

    pub fn depletion_model(&self) -> (DepletionModel, f64) {
        let d = self.depletion.clone().unwrap_or_default();
        (
            DepletionModel {
                punch_through_volt: d.punch_through_v,
                full_depletion_volt: d.full_depletion_v,
                mode: d.mode,
                logistic_width_volt: d.logistic_width_v,
            },
            d.bias_v,
        )
    }

    pub fn cce_options(&self) -> CceOptions {
        let c = self.cce.clone().unwrap_or_default();
        CceOptions {
            order: c.order,
            pair_cutoff_angstrom: c.pair_cutoff_angstrom,
            paramagnetic_pair_cutoff_angstrom: c.paramagnetic_pair_cutoff_angstrom,
        }
    }

    pub fn time_grid(&self) -> Vec<f64> {
        let t = self.times.clone().unwrap_or_default();
        grid(t.t_min_s, t.t_max_s, t.points, t.spacing)
    }

    pub fn readout_params(&self) -> Result<(ReadoutParams, usize)> {
        let r = self.readout.clone().unwrap_or_default();
        let params = ReadoutParams {
            window: r.window,
            statistics: r.statistics,
            ..ReadoutParams::new(
                r.rate_up_hz,
                r.rate_down_hz,
                r.shot_duration_s,
                r.nuclear_t1_s,
                self.seed,
            )
        };
        params.validate()?;
        Ok((params, r.n_shots))
    }

    pub fn noise_psd(&self) -> (NoisePsd, FilterSequence, ChiOptions) {
        let n = self.noise.clone().unwrap_or_default();
        let psd = match n.model {
            NoiseModel::White => NoisePsd::White { s0: n.s0_rad_per_s },
            NoiseModel::Lorentzian => NoisePsd::Lorentzian {
                variance: n.variance_rad2_per_s2,
                tau_c_s: n.tau_c_s,
            },
            NoiseModel::OneOverF => NoisePsd::OneOverF {
                amplitude: n.amplitude_rad2_per_s2,
            },
        };
        let filter = match n.filter {
            FilterKind::Ramsey => FilterSequence::Ramsey,
            FilterKind::Hahn => FilterSequence::Hahn,
            FilterKind::Cpmg => FilterSequence::Cpmg { pulses: n.cpmg_pulses },
        };
        let options = ChiOptions {
            cutoff_low_hz: n.cutoff_low_hz,
            cutoff_high_hz: n.cutoff_high_hz,
        };
        (psd, filter, options)
    }
}

impl SequenceSection {
    pub fn standard(&self) -> StandardSequence {
        match self.kind {
            SequenceKind::Ramsey => StandardSequence::Ramsey {
                detuning_hz: self.detuning_hz,
            },
            SequenceKind::Hahn => StandardSequence::Hahn,
            SequenceKind::DqRamsey => StandardSequence::DqRamsey {
                detuning_hz: self.detuning_hz,
            },
            SequenceKind::Cpmg => StandardSequence::Cpmg {
                pulses: self.cpmg_pulses,
            },
            SequenceKind::Xy8 => StandardSequence::Xy8 {
                blocks: self.xy8_blocks,
            },
            SequenceKind::NuclearRamsey => StandardSequence::NuclearRamsey { m_s: self.electron_m_s },
            SequenceKind::NuclearHahn => StandardSequence::NuclearHahn { m_s: self.electron_m_s },
        }
    }

    pub fn is_nuclear(&self) -> bool {
        matches!(self.kind, SequenceKind::NuclearRamsey | SequenceKind::NuclearHahn)
    }
}

impl RegisterSpecies {
    pub fn species(self) -> SpinSpecies {
        match self {
            RegisterSpecies::Si29 => SpinSpecies::si29(),
            RegisterSpecies::C13 => SpinSpecies::c13(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RegisterSpecies::Si29 => "si29",
            RegisterSpecies::C13 => "c13",
        }
    }
}

/// `points` values from `lo` to `hi` inclusive.
pub fn grid(lo: f64, hi: f64, points: usize, spacing: Spacing) -> Vec<f64> {
    let last = (points.max(2) - 1) as f64;
    (0..points)
        .map(|k| {
            let f = k as f64 / last;
            match spacing {
                Spacing::Linear => lo + (hi - lo) * f,
                Spacing::Log => (lo.ln() + (hi.ln() - lo.ln()) * f).exp(),
            }
        })
        .collect()
}
