use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::QubitSubspace;

const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Electron,
    Register,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// Azimuthal phase of the rotation axis in the equatorial plane.
    pub fn phase(self) -> f64 {
        match self {
            Axis::X => 0.0,
            Axis::Y => 0.5 * PI,
        }
    }
}

/// Instantaneous ideal rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub target: Target,
    pub axis: Axis,
    pub angle_rad: f64,
    /// Electron level (m_s) the rotation is conditioned on, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<i8>,
}

impl Pulse {
    pub fn electron(axis: Axis, angle_rad: f64) -> Self {
        Self {
            target: Target::Electron,
            axis,
            angle_rad,
            conditional: None,
        }
    }

    pub fn register(axis: Axis, angle_rad: f64) -> Self {
        Self {
            target: Target::Register,
            axis,
            angle_rad,
            conditional: None,
        }
    }

    pub fn is_pi(&self) -> bool {
        (self.angle_rad - PI).abs() < ANGLE_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceElement {
    Pulse(Pulse),
    Free { duration_s: f64 },
}

/// Ordered pulses and free-evolution intervals.
///
/// Engines that produce curves treat a sequence as a template: its free
/// intervals are rescaled so they sum to each requested total time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub name: String,
    pub elements: Vec<SequenceElement>,
    /// Static detuning of the central spin per unit Δm, Hz. A double-quantum
    /// qubit therefore accrues phase at twice this rate.
    #[serde(default)]
    pub detuning_hz: f64,
    /// Overrides the central model's qubit subspace (DQ sequences).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<QubitSubspace>,
    /// Electron level held during register sequences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub electron_state: Option<i8>,
}

/// Free-evolution schedule seen by the central qubit: consecutive intervals
/// separated by population-swapping π pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub intervals: Vec<f64>,
}

impl Schedule {
    pub fn total(&self) -> f64 {
        self.intervals.iter().sum()
    }

    pub fn pi_count(&self) -> usize {
        self.intervals.len() - 1
    }

    /// Interval durations rescaled to a total of `t`.
    pub fn scaled(&self, t: f64) -> Vec<f64> {
        let total = self.total();
        if total == 0.0 {
            return vec![0.0; self.intervals.len()];
        }
        self.intervals.iter().map(|d| d * t / total).collect()
    }

    /// Boundaries of the ±1 switching function as fractions of the total.
    pub fn switch_fractions(&self) -> Vec<f64> {
        let total = self.total();
        let mut acc = 0.0;
        let mut out = vec![0.0];
        for d in &self.intervals {
            acc += d;
            out.push(if total > 0.0 { acc / total } else { 0.0 });
        }
        if let Some(last) = out.last_mut() {
            *last = 1.0;
        }
        out
    }

    /// ∫ y(t') dt' over a schedule of total `t` with y = +1 on the first interval.
    pub fn signed_time(&self, t: f64) -> f64 {
        self.scaled(t)
            .iter()
            .enumerate()
            .map(|(k, d)| if k % 2 == 0 { *d } else { -*d })
            .sum()
    }
}

impl PulseSequence {
    pub fn new(name: impl Into<String>, elements: Vec<SequenceElement>) -> Self {
        Self {
            name: name.into(),
            elements,
            detuning_hz: 0.0,
            subspace: None,
            electron_state: None,
        }
    }

    pub fn free(duration_s: f64) -> SequenceElement {
        SequenceElement::Free { duration_s }
    }

    pub fn validate(&self) -> Result<()> {
        for el in &self.elements {
            match el {
                SequenceElement::Free { duration_s } if !(*duration_s >= 0.0) => {
                    return Err(Error::InvalidArgument(format!(
                        "sequence `{}`: free duration must be >= 0, got {duration_s}",
                        self.name
                    )))
                }
                SequenceElement::Pulse(p) if !(p.angle_rad > 0.0 && p.angle_rad <= 2.0 * PI + ANGLE_TOL) => {
                    return Err(Error::InvalidArgument(format!(
                        "sequence `{}`: pulse angle must lie in (0, 2π], got {}",
                        self.name, p.angle_rad
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }

    pub fn total_free_time(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| match e {
                SequenceElement::Free { duration_s } => *duration_s,
                SequenceElement::Pulse(_) => 0.0,
            })
            .sum()
    }

    pub fn pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.elements.iter().filter_map(|e| match e {
            SequenceElement::Pulse(p) => Some(p),
            SequenceElement::Free { .. } => None,
        })
    }

    /// Same shape with free intervals rescaled to sum to `t`.
    pub fn scaled_to(&self, t: f64) -> PulseSequence {
        let total = self.total_free_time();
        let factor = if total > 0.0 { t / total } else { 0.0 };
        let mut out = self.clone();
        for el in &mut out.elements {
            if let SequenceElement::Free { duration_s } = el {
                *duration_s *= factor;
            }
        }
        out
    }

    /// Copy with every π-class pulse angle multiplied by (1 + `fraction`).
    pub fn with_angle_error(&self, fraction: f64) -> PulseSequence {
        let mut out = self.clone();
        for el in &mut out.elements {
            if let SequenceElement::Pulse(p) = el {
                p.angle_rad *= 1.0 + fraction;
            }
        }
        out
    }

    /// Reduces the sequence to the free-evolution schedule of the central
    /// qubit addressed by `role`.
    ///
    /// Pulses on `role` before the first or after the last free interval are
    /// preparation and readout and are skipped; interior pulses must be
    /// unconditional π rotations. Pulses on any other target are rejected.
    pub fn schedule(&self, role: Target) -> Result<Schedule> {
        self.validate()?;
        let reject = |reason: String| Error::UnsupportedPulse {
            sequence: self.name.clone(),
            reason,
        };
        let first_free = self
            .elements
            .iter()
            .position(|e| matches!(e, SequenceElement::Free { .. }));
        let last_free = self
            .elements
            .iter()
            .rposition(|e| matches!(e, SequenceElement::Free { .. }));

        let mut intervals = vec![0.0];
        for (i, el) in self.elements.iter().enumerate() {
            match el {
                SequenceElement::Free { duration_s } => *intervals.last_mut().unwrap() += duration_s,
                SequenceElement::Pulse(p) => {
                    if p.target != role {
                        return Err(reject(format!(
                            "{:?}-targeted pulse in a {:?}-coherence engine",
                            p.target, role
                        )));
                    }
                    if p.conditional.is_some() {
                        return Err(reject("conditional pulses are not supported here".into()));
                    }
                    let interior = match (first_free, last_free) {
                        (Some(f), Some(l)) => i > f && i < l,
                        _ => false,
                    };
                    if !interior {
                        continue;
                    }
                    if !p.is_pi() {
                        return Err(reject(format!(
                            "interior pulse of angle {} rad; only π pulses are allowed",
                            p.angle_rad
                        )));
                    }
                    intervals.push(0.0);
                }
            }
        }
        Ok(Schedule { intervals })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let seq: PulseSequence = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        seq.validate()?;
        Ok(seq)
    }
}
