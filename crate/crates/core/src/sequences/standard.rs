use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::pulse::{Axis, Pulse, PulseSequence, SequenceElement};
use crate::error::{Error, Result};
use crate::spin::QubitSubspace;

/// XY8 phase pattern.
pub const XY8_PATTERN: [Axis; 8] = [Axis::X, Axis::Y, Axis::X, Axis::Y, Axis::Y, Axis::X, Axis::Y, Axis::X];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StandardSequence {
    Ramsey {
        detuning_hz: f64,
    },
    Hahn,
    DqRamsey {
        detuning_hz: f64,
    },
    NuclearRamsey {
        m_s: i8,
    },
    NuclearHahn {
        m_s: i8,
    },
    /// `blocks` repetitions of the 8-pulse XY8 unit.
    Xy8 {
        blocks: usize,
    },
    Cpmg {
        pulses: usize,
    },
}

fn e(axis: Axis, angle: f64) -> SequenceElement {
    SequenceElement::Pulse(Pulse::electron(axis, angle))
}

fn n(axis: Axis, angle: f64) -> SequenceElement {
    SequenceElement::Pulse(Pulse::register(axis, angle))
}

/// τ − π − 2τ − π − … − π − τ with the given π-pulse axes.
fn decoupling_train(axes: &[Axis], tau: f64) -> Vec<SequenceElement> {
    let mut out = vec![e(Axis::X, PI / 2.0), PulseSequence::free(tau)];
    for (i, &axis) in axes.iter().enumerate() {
        out.push(e(axis, PI));
        let gap = if i + 1 == axes.len() { tau } else { 2.0 * tau };
        out.push(PulseSequence::free(gap));
    }
    // even trains and odd y-trains close with −x (3π/2); an odd x-train with +x
    let close = if axes.len() % 2 == 1 && axes.iter().all(|&a| a == Axis::X) {
        0.5 * PI
    } else {
        1.5 * PI
    };
    out.push(e(Axis::X, close));
    out
}

impl StandardSequence {
    pub fn name(&self) -> &'static str {
        match self {
            StandardSequence::Ramsey { .. } => "ramsey",
            StandardSequence::Hahn => "hahn",
            StandardSequence::DqRamsey { .. } => "dq_ramsey",
            StandardSequence::NuclearRamsey { .. } => "nuclear_ramsey",
            StandardSequence::NuclearHahn { .. } => "nuclear_hahn",
            StandardSequence::Xy8 { .. } => "xy8",
            StandardSequence::Cpmg { .. } => "cpmg",
        }
    }

    /// Builds the sequence. `tau` is the Ramsey delay, the Hahn half-echo
    /// time, or the decoupling half-spacing (pulses are 2τ apart).
    pub fn build(&self, tau: f64) -> Result<PulseSequence> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be >= 0, got {tau}")));
        }
        let seq = match *self {
            StandardSequence::Ramsey { detuning_hz } | StandardSequence::DqRamsey { detuning_hz } => {
                let mut s = PulseSequence::new(
                    self.name(),
                    vec![e(Axis::X, PI / 2.0), PulseSequence::free(tau), e(Axis::X, 1.5 * PI)],
                );
                s.detuning_hz = detuning_hz;
                if matches!(self, StandardSequence::DqRamsey { .. }) {
                    // the (+1, −1) superposition is prepared as a subspace selection
                    s.subspace = Some(QubitSubspace::DqPlus1Minus1);
                }
                s
            }
            StandardSequence::Hahn => PulseSequence::new(self.name(), decoupling_train(&[Axis::X], tau)),
            StandardSequence::Cpmg { pulses } => {
                PulseSequence::new(self.name(), decoupling_train(&vec![Axis::Y; pulses.max(1)], tau))
            }
            StandardSequence::Xy8 { blocks } => {
                let axes: Vec<Axis> = (0..blocks.max(1)).flat_map(|_| XY8_PATTERN).collect();
                PulseSequence::new(format!("xy8-{}", blocks.max(1)), decoupling_train(&axes, tau))
            }
            StandardSequence::NuclearRamsey { m_s } => {
                let mut s = PulseSequence::new(
                    self.name(),
                    vec![n(Axis::X, PI / 2.0), PulseSequence::free(tau), n(Axis::X, 1.5 * PI)],
                );
                s.electron_state = Some(m_s);
                s
            }
            StandardSequence::NuclearHahn { m_s } => {
                let mut s = PulseSequence::new(
                    self.name(),
                    vec![
                        n(Axis::X, PI / 2.0),
                        PulseSequence::free(tau),
                        n(Axis::X, PI),
                        PulseSequence::free(tau),
                        n(Axis::X, PI / 2.0),
                    ],
                );
                s.electron_state = Some(m_s);
                s
            }
        };
        Ok(seq)
    }
}
