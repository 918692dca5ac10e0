use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sequences::Schedule;

/// Sequences with a closed-form switching function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSequence {
    Ramsey,
    Hahn,
    Cpmg { pulses: usize },
}

/// G(z) = |Σ_j c_j e^{i z η_j}|², where η_j are the switching times of the
/// ±1 modulation as fractions of the total time. The filter function is
/// F(z) = G(z)/2, so Ramsey has F = 2 sin²(z/2).
#[derive(Debug, Clone, PartialEq)]
pub struct FilterFunction {
    pub eta: Vec<f64>,
    pub coeff: Vec<f64>,
}

impl FilterFunction {
    /// From interior switch fractions 0 < η_1 < … < η_n < 1.
    pub fn from_switches(switches: &[f64]) -> Result<Self> {
        let mut eta = vec![0.0];
        eta.extend_from_slice(switches);
        eta.push(1.0);
        if eta.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidArgument(
                "switch fractions must be sorted within [0, 1]".into(),
            ));
        }
        let n = switches.len();
        let coeff = (0..=n + 1)
            .map(|j| {
                if j == 0 {
                    -1.0
                } else if j == n + 1 {
                    if n.is_multiple_of(2) {
                        1.0
                    } else {
                        -1.0
                    }
                } else if j % 2 == 1 {
                    2.0
                } else {
                    -2.0
                }
            })
            .collect();
        Ok(Self { eta, coeff })
    }

    pub fn from_schedule(schedule: &Schedule) -> Result<Self> {
        let f = schedule.switch_fractions();
        Self::from_switches(&f[1..f.len() - 1])
    }

    pub fn of(kind: FilterSequence) -> Self {
        let switches: Vec<f64> = match kind {
            FilterSequence::Ramsey => vec![],
            FilterSequence::Hahn => vec![0.5],
            FilterSequence::Cpmg { pulses } => (1..=pulses).map(|j| (2 * j - 1) as f64 / (2 * pulses) as f64).collect(),
        };
        Self::from_switches(&switches).expect("closed-form switches are sorted")
    }

    pub fn pulse_count(&self) -> usize {
        self.eta.len() - 2
    }

    pub fn g(&self, z: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (c, e) in self.coeff.iter().zip(&self.eta) {
            let (s, co) = (z * e).sin_cos();
            re += c * co;
            im += c * s;
        }
        re * re + im * im
    }

    pub fn filter(&self, z: f64) -> f64 {
        0.5 * self.g(z)
    }

    /// Average of G over its oscillations, Σ c_j².
    pub fn mean_g(&self) -> f64 {
        self.coeff.iter().map(|c| c * c).sum()
    }

    /// Lowest power p with G(z) ∝ z^(2p) near z = 0.
    pub fn low_frequency_order(&self) -> u32 {
        let first: f64 = self.coeff.iter().zip(&self.eta).map(|(c, e)| c * e).sum();
        if first.abs() > 1e-12 {
            1
        } else {
            2
        }
    }
}

const GL_ORDER: usize = 16;

/// Gauss–Legendre nodes and weights on [−1, 1].
pub(crate) fn gauss_legendre() -> &'static [(f64, f64); GL_ORDER] {
    static NODES: OnceLock<[(f64, f64); GL_ORDER]> = OnceLock::new();
    NODES.get_or_init(|| {
        let n = GL_ORDER;
        let mut out = [(0.0, 0.0); GL_ORDER];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            *slot = (x, 2.0 / ((1.0 - x * x) * dp * dp));
        }
        out
    })
}

pub(crate) fn integrate_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre().iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}
