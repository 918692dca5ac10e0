use std::io::Write;

use serde::Serialize;
use statrs::distribution::{Discrete, Poisson};

use super::trace::ReadoutTrace;
use crate::error::{Error, Result};

pub const HISTOGRAM_HEADER: &str = "count_value_per_shot,frequency_up_fraction,frequency_down_fraction";
const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Count histograms conditioned on the register state, indexed by count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountHistogram {
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl CountHistogram {
    fn normalised(v: &[f64], len: usize) -> Vec<f64> {
        let total: f64 = v.iter().sum();
        (0..len).map(|k| v.get(k).copied().unwrap_or(0.0) / total).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let len = self.up.len().max(self.down.len());
        let (up, down) = (Self::normalised(&self.up, len), Self::normalised(&self.down, len));
        writeln!(w, "{HISTOGRAM_HEADER}")?;
        for k in 0..len {
            writeln!(w, "{k},{:.10e},{:.10e}", up[k], down[k])?;
        }
        Ok(())
    }
}

/// Histograms of a trace's counts split by the hidden state.
pub fn histograms(trace: &ReadoutTrace) -> CountHistogram {
    let len = trace.counts.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut h = CountHistogram {
        up: vec![0.0; len],
        down: vec![0.0; len],
    };
    for (&s, &c) in trace.hidden_state.iter().zip(&trace.counts) {
        let bin = if s > 0 { &mut h.up } else { &mut h.down };
        bin[c as usize] += 1.0;
    }
    h
}

/// Poisson probabilities for counts 0..=max_count at the given mean.
pub fn poisson_histogram(mean: f64, max_count: u64) -> Result<Vec<f64>> {
    if mean == 0.0 {
        let mut v = vec![0.0; max_count as usize + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    let p = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((0..=max_count).map(|k| p.pmf(k)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    /// Counts ≥ threshold are assigned to the bright state.
    pub threshold: u64,
    /// Whether |↑⟩ is the bright state.
    pub up_is_bright: bool,
    /// Mean of the two correct-assignment probabilities.
    pub fidelity: f64,
    /// The two histograms coincide; no threshold separates them.
    pub degenerate: bool,
}

/// Exhaustive search over every integer threshold in both orientations.
pub fn optimal_threshold(histogram: &CountHistogram) -> Result<ThresholdResult> {
    let sum_up: f64 = histogram.up.iter().sum();
    let sum_down: f64 = histogram.down.iter().sum();
    let valid = |v: &[f64]| v.iter().all(|x| *x >= 0.0 && x.is_finite());
    if !(sum_up > 0.0 && sum_down > 0.0) || !valid(&histogram.up) || !valid(&histogram.down) {
        return Err(Error::InvalidArgument(
            "both conditional histograms must be nonempty with non-negative weights".into(),
        ));
    }
    let len = histogram.up.len().max(histogram.down.len());
    let up = CountHistogram::normalised(&histogram.up, len);
    let down = CountHistogram::normalised(&histogram.down, len);
    if up.iter().zip(&down).all(|(a, b)| (a - b).abs() <= DEGENERACY_TOLERANCE) {
        return Ok(ThresholdResult {
            threshold: 0,
            up_is_bright: true,
            fidelity: 0.5,
            degenerate: true,
        });
    }
    // F(k) = ½[P_up(≥k) + P_down(<k)]; the reversed orientation scores 1 − F(k)
    let mut up_at_least = 1.0;
    let mut down_below = 0.0;
    let mut best = ThresholdResult {
        threshold: 0,
        up_is_bright: true,
        fidelity: 0.5,
        degenerate: false,
    };
    for k in 0..=len {
        let f = 0.5 * (up_at_least + down_below);
        for (fidelity, up_is_bright) in [(f, true), (1.0 - f, false)] {
            if fidelity > best.fidelity + 1e-15 {
                best = ThresholdResult {
                    threshold: k as u64,
                    up_is_bright,
                    fidelity,
                    degenerate: false,
                };
            }
        }
        if k < len {
            up_at_least -= up[k];
            down_below += down[k];
        }
    }
    best.fidelity = best.fidelity.clamp(0.5, 1.0);
    Ok(best)
}
