use std::f64::consts::PI;
use std::ops::Add;

use nalgebra::{DMatrix, DVector};

use super::species::Spin;
use super::C64;
use crate::error::{Error, Result};

pub type Operator = DMatrix<C64>;

const HERMITIAN_RTOL: f64 = 1e-12;

/// Square complex matrix in Hz that equals its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(Operator);

impl HermitianOperator {
    pub fn new(m: Operator) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = max_abs(&m).max(1.0);
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > HERMITIAN_RTOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self(m))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Operator::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Operator {
        &self.0
    }

    pub fn into_matrix(self) -> Operator {
        self.0
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(&self.0 * C64::new(factor, 0.0))
    }

    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    /// Adds `coeff · op` in place.
    pub fn add_scaled(&mut self, op: &Operator, coeff: f64) {
        self.0 += op * C64::new(coeff, 0.0);
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;

    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 + &rhs.0)
    }
}

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub z: HermitianOperator,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.z.dim()
    }

    /// S² = Sx² + Sy² + Sz².
    pub fn total_squared(&self) -> Operator {
        let (x, y, z) = (self.x.matrix(), self.y.matrix(), self.z.matrix());
        x * x + y * y + z * z
    }
}

/// Angular-momentum matrices in the |s, m⟩ basis ordered m = s, s−1, …, −s.
pub fn spin_operators(s: f64) -> Result<SpinOperators> {
    let spin = Spin::from_f64(s)?;
    Ok(spin_operators_for(spin))
}

pub(crate) fn spin_operators_for(spin: Spin) -> SpinOperators {
    let s = spin.value();
    let dim = spin.dim();
    let m = |i: usize| s - i as f64;

    let mut plus = Operator::zeros(dim, dim);
    for i in 1..dim {
        // ⟨m+1| S+ |m⟩ with m = m(i)
        let mi = m(i);
        plus[(i - 1, i)] = C64::new((s * (s + 1.0) - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let minus = plus.adjoint();
    let x = (&plus + &minus) * C64::new(0.5, 0.0);
    let y = (&plus - &minus) * C64::new(0.0, -0.5);
    let z = Operator::from_diagonal(&DVector::from_fn(dim, |i, _| C64::new(m(i), 0.0)));

    SpinOperators {
        x: HermitianOperator(x),
        y: HermitianOperator(y),
        z: HermitianOperator(z),
    }
}

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn commutator(a: &Operator, b: &Operator) -> Operator {
    a * b - b * a
}

pub fn max_abs(m: &Operator) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral form of a Hermitian generator, reusable across many times.
#[derive(Debug, Clone)]
pub struct Propagator {
    eigenvalues: Vec<f64>,
    eigenvectors: Operator,
    eigenvectors_adj: Operator,
}

impl Propagator {
    pub fn new(h: &HermitianOperator) -> Self {
        let eig = h.matrix().clone().symmetric_eigen();
        let eigenvectors = eig.eigenvectors;
        Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors_adj: eigenvectors.adjoint(),
            eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// exp(−i·2π·H·t).
    pub fn at(&self, t: f64) -> Operator {
        let dim = self.dim();
        let mut scaled = self.eigenvectors.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let phase = C64::from_polar(1.0, -2.0 * PI * lambda * t);
            for i in 0..dim {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * &self.eigenvectors_adj
    }
}

/// exp(−i·2π·H·t) for H in Hz and t in seconds.
pub fn propagate(h: &HermitianOperator, t: f64) -> Result<Operator> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "propagation time must be >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(identity(h.dim()));
    }
    Ok(Propagator::new(h).at(t))
}
