use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::rolling_mean;

pub const DEFAULT_WINDOW: usize = 5;
pub const TRACE_HEADER: &str = "shot_index,hidden_state,counts_per_shot,differential_counts_per_shot";

/// Photon-count law per shot.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountStatistics {
    #[default]
    Poisson,
    /// Normal with variance equal to the mean, rounded and floored at zero.
    Gaussian,
    /// Counts equal the rounded mean.
    Noiseless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutParams {
    /// Count rate with the register in |↑⟩, counts/s.
    pub rate_up_hz: f64,
    pub rate_down_hz: f64,
    pub shot_duration_s: f64,
    /// Infinite disables flips.
    pub nuclear_t1_s: f64,
    pub rng_seed: u64,
    pub window: usize,
    pub statistics: CountStatistics,
}

impl ReadoutParams {
    pub fn new(rate_up_hz: f64, rate_down_hz: f64, shot_duration_s: f64, nuclear_t1_s: f64, rng_seed: u64) -> Self {
        Self {
            rate_up_hz,
            rate_down_hz,
            shot_duration_s,
            nuclear_t1_s,
            rng_seed,
            window: DEFAULT_WINDOW,
            statistics: CountStatistics::Poisson,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.rate_up_hz >= 0.0 && self.rate_up_hz.is_finite())
            || !(self.rate_down_hz >= 0.0 && self.rate_down_hz.is_finite())
        {
            problems.push("rates must be finite and >= 0");
        }
        if !(self.shot_duration_s > 0.0 && self.shot_duration_s.is_finite()) {
            problems.push("shot duration must be > 0");
        }
        if !(self.nuclear_t1_s > 0.0) {
            problems.push("T1 must be > 0");
        }
        if self.window == 0 {
            problems.push("window must be >= 1");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }

    /// 1 − exp(−shot_duration/T1).
    pub fn flip_probability(&self) -> f64 {
        -(-self.shot_duration_s / self.nuclear_t1_s).exp_m1()
    }
}

/// One simulated readout record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadoutTrace {
    /// +1 for |↑⟩, −1 for |↓⟩.
    pub hidden_state: Vec<i8>,
    pub counts: Vec<u64>,
    /// Trailing rolling mean of the counts minus the trace mean.
    pub differential: Vec<f64>,
    pub window: usize,
    pub shot_duration_s: f64,
}

impl ReadoutTrace {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn flips(&self) -> usize {
        self.hidden_state.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Shifted differential of an arbitrary count record.
    pub fn differential_of(counts: &[u64], window: usize) -> Vec<f64> {
        if counts.is_empty() {
            return Vec::new();
        }
        let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        rolling_mean(&values, window).into_iter().map(|v| v - mean).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{:.10e}",
                i, self.hidden_state[i], self.counts[i], self.differential[i]
            )?;
        }
        Ok(())
    }
}

enum Sampler {
    Poisson(Option<Poisson<f64>>),
    Gaussian(f64, Option<Normal<f64>>),
    Fixed(u64),
}

impl Sampler {
    fn new(stats: CountStatistics, mean: f64) -> Self {
        match stats {
            CountStatistics::Poisson => {
                Sampler::Poisson((mean > 0.0).then(|| Poisson::new(mean).expect("positive mean")))
            }
            CountStatistics::Gaussian => Sampler::Gaussian(
                mean,
                (mean > 0.0).then(|| Normal::new(mean, mean.sqrt()).expect("positive sigma")),
            ),
            CountStatistics::Noiseless => Sampler::Fixed(mean.round() as u64),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Sampler::Poisson(Some(p)) => p.sample(rng) as u64,
            Sampler::Poisson(None) => 0,
            Sampler::Gaussian(_, Some(n)) => n.sample(rng).round().max(0.0) as u64,
            Sampler::Gaussian(mean, None) => mean.round() as u64,
            Sampler::Fixed(c) => *c,
        }
    }
}

/// Symmetric telegraph process sampled once per shot; the initial state is
/// drawn uniformly.
pub fn simulate_qnd_trace(params: &ReadoutParams, n_shots: usize) -> Result<ReadoutTrace> {
    params.validate()?;
    if n_shots == 0 {
        return Err(Error::InvalidArgument("need at least one shot".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let p_flip = params.flip_probability();
    let up = Sampler::new(params.statistics, params.rate_up_hz * params.shot_duration_s);
    let down = Sampler::new(params.statistics, params.rate_down_hz * params.shot_duration_s);
    let mut state: i8 = if rng.random::<bool>() { 1 } else { -1 };
    let mut hidden_state = Vec::with_capacity(n_shots);
    let mut counts = Vec::with_capacity(n_shots);
    for shot in 0..n_shots {
        if shot > 0 && rng.random::<f64>() < p_flip {
            state = -state;
        }
        hidden_state.push(state);
        counts.push(if state > 0 {
            up.draw(&mut rng)
        } else {
            down.draw(&mut rng)
        });
    }
    let differential = ReadoutTrace::differential_of(&counts, params.window);
    Ok(ReadoutTrace {
        hidden_state,
        counts,
        differential,
        window: params.window,
        shot_duration_s: params.shot_duration_s,
    })
}

/// Independent traces for each seed, in seed order.
pub fn simulate_many(params: &ReadoutParams, n_shots: usize, seeds: &[u64]) -> Result<Vec<ReadoutTrace>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let p = ReadoutParams {
                rng_seed: seed,
                ..params.clone()
            };
            simulate_qnd_trace(&p, n_shots)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_t1_never_flips() {
        let p = ReadoutParams::new(14.0, 2.0, 1.0, f64::INFINITY, 3);
        let t = simulate_qnd_trace(&p, 5000).unwrap();
        assert_eq!(t.flips(), 0);
        assert!(t.hidden_state.iter().all(|&s| s == t.hidden_state[0]));
    }

    #[test]
    fn flip_count_statistics() {
        // flips ~ Binomial(n−1, p); the sum over seeds is tested against 3σ
        let p = ReadoutParams::new(14.0, 2.0, 1.0, 50.0, 0);
        let seeds: Vec<u64> = (0..500).collect();
        let traces = simulate_many(&p, 1000, &seeds).unwrap();
        let total: usize = traces.iter().map(|t| t.flips()).sum();
        let q = p.flip_probability();
        let n = 999.0 * 500.0;
        let mean = n * q;
        let sd = (n * q * (1.0 - q)).sqrt();
        assert!((total as f64 - mean).abs() < 3.0 * sd, "{total} vs {mean} ± {sd}");
        // ≈ n_shots·dt/T1 to first order
        assert!((mean / 500.0 - 1000.0 / 50.0).abs() / 20.0 < 0.02);
    }

    #[test]
    fn noiseless_differential_is_two_valued() {
        let mut p = ReadoutParams::new(14.0, 2.0, 1.0, 30.0, 11);
        p.statistics = CountStatistics::Noiseless;
        let t = simulate_qnd_trace(&p, 2000).unwrap();
        assert!(t.flips() > 10);
        let settled: Vec<(i8, f64)> = (p.window..t.len())
            .filter(|&i| {
                t.hidden_state[i + 1 - p.window..=i]
                    .iter()
                    .all(|&s| s == t.hidden_state[i])
            })
            .map(|i| (t.hidden_state[i], t.differential[i]))
            .collect();
        let hi: Vec<f64> = settled.iter().filter(|s| s.0 > 0).map(|s| s.1).collect();
        let lo: Vec<f64> = settled.iter().filter(|s| s.0 < 0).map(|s| s.1).collect();
        assert!(hi.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9));
        assert!(lo.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9));
        assert!((hi[0] - lo[0] - 12.0).abs() < 1e-9);
    }

    #[test]
    fn reproducible_from_seed() {
        let p = ReadoutParams::new(14.0, 2.0, 1.0, 30.0, 5);
        assert_eq!(
            simulate_qnd_trace(&p, 300).unwrap(),
            simulate_qnd_trace(&p, 300).unwrap()
        );
        let mut out = Vec::new();
        simulate_qnd_trace(&p, 3).unwrap().write_csv(&mut out).unwrap();
        assert!(String::from_utf8(out).unwrap().starts_with(TRACE_HEADER));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(simulate_qnd_trace(&ReadoutParams::new(-1.0, 2.0, 1.0, 1.0, 0), 10).is_err());
        assert!(simulate_qnd_trace(&ReadoutParams::new(1.0, 2.0, 0.0, 1.0, 0), 10).is_err());
        assert!(simulate_qnd_trace(&ReadoutParams::new(1.0, 2.0, 1.0, 1.0, 0), 0).is_err());
    }
}
