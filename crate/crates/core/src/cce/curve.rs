use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::spin::C64;

pub const CURVE_HEADER: &str = "t_seconds,Re_L,Im_L,abs_L";

/// Complex coherence L(t) on a caller-supplied time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    /// Divided cluster contributions clamped to 1 (near-zero denominators).
    pub clamp_count: usize,
}

impl CoherenceCurve {
    pub fn new(times: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidArgument(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        Ok(Self {
            times,
            values,
            clamp_count: 0,
        })
    }

    pub fn ones(times: &[f64]) -> Self {
        Self {
            times: times.to_vec(),
            values: vec![C64::new(1.0, 0.0); times.len()],
            clamp_count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    /// First time |L| falls below 1/e, linearly interpolated; `None` if it never does.
    pub fn one_over_e_time(&self) -> Option<f64> {
        let target = (-1.0f64).exp();
        let a = self.abs();
        for k in 1..a.len() {
            if a[k] < target && a[k - 1] >= target {
                let (t0, t1) = (self.times[k - 1], self.times[k]);
                let frac = (a[k - 1] - target) / (a[k - 1] - a[k]);
                return Some(t0 + frac * (t1 - t0));
            }
        }
        None
    }

    pub fn max_abs_difference(&self, other: &CoherenceCurve) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{CURVE_HEADER}")?;
        for (t, v) in self.times.iter().zip(&self.values) {
            writeln!(out, "{},{},{},{}", t, v.re, v.im, v.norm())?;
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}
