//! Single d-level particles: preparation in the computational or Fourier
//! basis, Born-rule measurement with collapse, and the Fourier pair.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (normalization, round trips).
pub const TOLERANCE: f64 = 1e-10;

/// Odd dimension `d >= 3` of a qudit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::DimensionTooSmall(d));
        }
        if d.is_multiple_of(2) {
            return Err(Error::EvenDimension(d));
        }
        Ok(Dimension(d))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Largest admissible private digit, `(d - 1) / 2`.
    #[inline]
    pub fn h(self) -> usize {
        (self.0 - 1) / 2
    }

    pub(crate) fn check_index(self, index: usize) -> Result<()> {
        if index < self.0 {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, d: self.0 })
        }
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(d: usize) -> Result<Self> {
        Dimension::new(d)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The two conjugate measurement bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// T1: `{|0>, ..., |d-1>}`.
    #[serde(rename = "T1")]
    Computational,
    /// T2: `{F|0>, ..., F|d-1>}`.
    #[serde(rename = "T2")]
    Fourier,
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Basis::Computational => f.write_str("T1"),
            Basis::Fourier => f.write_str("T2"),
        }
    }
}

/// `e^{2 pi i t delta / d} / sqrt(d)`, the `delta`-th amplitude of `F|t>`.
///
/// The exponent is reduced mod d before conversion to floating point so
/// large products do not lose phase precision.
#[inline]
pub fn fourier_amplitude(d: usize, t: usize, delta: usize) -> Complex64 {
    let k = (t * delta) % d;
    Complex64::from_polar(1.0 / (d as f64).sqrt(), 2.0 * PI * k as f64 / d as f64)
}

/// Pure state of one qudit.
#[derive(Debug, Clone, PartialEq)]
pub struct QuditState {
    dim: Dimension,
    amplitudes: Vec<Complex64>,
}

/// Result of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub value: usize,
    pub post_state: QuditState,
}

impl QuditState {
    /// Builds a state from raw amplitudes, rejecting vectors that are not
    /// unit-norm within [`TOLERANCE`].
    pub fn from_amplitudes(dim: Dimension, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != dim.get() {
            return Err(Error::DimensionMismatch {
                left: dim.get(),
                right: amplitudes.len(),
            });
        }
        let state = QuditState { dim, amplitudes };
        state.check_normalized()?;
        Ok(state)
    }

    /// `|index>` in T1, or `F|index>` in T2.
    pub fn prepare(dim: Dimension, basis: Basis, index: usize) -> Result<Self> {
        dim.check_index(index)?;
        Ok(Self::basis_vector(dim, basis, index))
    }

    pub(crate) fn basis_vector(dim: Dimension, basis: Basis, index: usize) -> Self {
        let d = dim.get();
        let amplitudes = match basis {
            Basis::Computational => {
                let mut v = vec![Complex64::new(0.0, 0.0); d];
                v[index] = Complex64::new(1.0, 0.0);
                v
            }
            Basis::Fourier => (0..d)
                .map(|delta| fourier_amplitude(d, index, delta))
                .collect(),
        };
        QuditState { dim, amplitudes }
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > TOLERANCE {
            Err(Error::NotNormalized(n))
        } else {
            Ok(())
        }
    }

    /// `<basis_value | self>`.
    pub fn overlap_with_basis(&self, basis: Basis, value: usize) -> Complex64 {
        match basis {
            Basis::Computational => self.amplitudes[value],
            Basis::Fourier => {
                let d = self.dim.get();
                self.amplitudes
                    .iter()
                    .enumerate()
                    .map(|(delta, a)| fourier_amplitude(d, value, delta).conj() * a)
                    .sum()
            }
        }
    }

    /// Exact Born-rule probability of reading `value` in `basis`.
    pub fn outcome_probability(&self, basis: Basis, value: usize) -> Result<f64> {
        self.dim.check_index(value)?;
        self.check_normalized()?;
        Ok(self.overlap_with_basis(basis, value).norm_sqr())
    }

    /// Probabilities of every outcome in `basis`.
    pub fn distribution(&self, basis: Basis) -> Vec<f64> {
        (0..self.dim.get())
            .map(|k| self.overlap_with_basis(basis, k).norm_sqr())
            .collect()
    }

    /// Samples an outcome and collapses onto the matching basis vector.
    ///
    /// The post-measurement state is rebuilt from scratch rather than
    /// renormalized, so repeated measurement never accumulates drift.
    pub fn measure<R: Rng + ?Sized>(
        &self,
        basis: Basis,
        rng: &mut R,
    ) -> Result<MeasurementOutcome> {
        self.check_normalized()?;
        let value = sample_index(&self.distribution(basis), rng);
        Ok(MeasurementOutcome {
            value,
            post_state: Self::basis_vector(self.dim, basis, value),
        })
    }

    pub fn inner(&self, other: &QuditState) -> Result<Complex64> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim.get(),
                right: other.dim.get(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<a|b>|^2`.
    pub fn fidelity(&self, other: &QuditState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Equality up to global phase: fidelity at least `1 - tol`.
    pub fn approx_eq(&self, other: &QuditState, tol: f64) -> Result<bool> {
        Ok(self.fidelity(other)? >= 1.0 - tol)
    }

    /// Multiplies every amplitude by `e^{i phi}`.
    pub fn with_global_phase(&self, phi: f64) -> QuditState {
        let phase = Complex64::from_polar(1.0, phi);
        QuditState {
            dim: self.dim,
            amplitudes: self.amplitudes.iter().map(|a| a * phase).collect(),
        }
    }
}

/// See [`QuditState::approx_eq`].
pub fn states_equal(a: &QuditState, b: &QuditState, tol: f64) -> Result<bool> {
    a.approx_eq(b, tol)
}

/// Coefficients `c_alpha = e^{-2 pi i alpha delta / d} / sqrt(d)` with
/// `|delta> = sum_alpha c_alpha F|alpha>`.
pub fn inverse_fourier_expand(dim: Dimension, delta: usize) -> Result<Vec<Complex64>> {
    dim.check_index(delta)?;
    let d = dim.get();
    Ok((0..d)
        .map(|alpha| fourier_amplitude(d, alpha, delta).conj())
        .collect())
}

/// Recombines coefficients over a basis into computational amplitudes.
pub fn recombine(dim: Dimension, basis: Basis, coefficients: &[Complex64]) -> Result<QuditState> {
    if coefficients.len() != dim.get() {
        return Err(Error::DimensionMismatch {
            left: dim.get(),
            right: coefficients.len(),
        });
    }
    let d = dim.get();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); d];
    for (k, c) in coefficients.iter().enumerate() {
        let v = QuditState::basis_vector(dim, basis, k);
        for (acc, a) in amplitudes.iter_mut().zip(v.amplitudes()) {
            *acc += c * a;
        }
    }
    QuditState::from_amplitudes(dim, amplitudes)
}

/// Inverse-CDF sampling from a discrete distribution.
///
/// Falls back to the last index with positive weight if rounding leaves the
/// cumulative sum short of the uniform draw.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1)
}
