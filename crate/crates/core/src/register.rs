//! Particle-plus-probe pure states.
//!
//! The wire object of the protocol is a [`Register`]: the transmitted qudit,
//! optionally entangled with an eavesdropper's probe. Honest parties only
//! ever touch the particle factor. Without a probe the probe dimension is 1
//! and a register is just a qudit.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qudit::{fourier_amplitude, sample_index, Basis, Dimension, QuditState};

/// Tolerance for norm preservation through probe unitaries.
pub const JOINT_TOLERANCE: f64 = 1e-9;

/// Amplitudes indexed `particle * probe_dim + probe`.
#[derive(Debug, Clone, PartialEq)]
pub struct Register {
    dim: Dimension,
    probe_dim: usize,
    amplitudes: Vec<Complex64>,
}

impl From<QuditState> for Register {
    fn from(state: QuditState) -> Self {
        Register {
            dim: state.dim(),
            probe_dim: 1,
            amplitudes: state.amplitudes().to_vec(),
        }
    }
}

impl Register {
    pub fn prepare(dim: Dimension, basis: Basis, index: usize) -> Result<Self> {
        QuditState::prepare(dim, basis, index).map(Register::from)
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn probe_dim(&self) -> usize {
        self.probe_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Tensors a probe state onto a register that does not have one yet.
    pub fn attach_probe(&self, probe: &[Complex64]) -> Result<Register> {
        if self.probe_dim != 1 {
            return Err(Error::InvalidAttack(
                "register already carries a probe".into(),
            ));
        }
        let pn: f64 = probe.iter().map(|a| a.norm_sqr()).sum();
        if (pn - 1.0).abs() > JOINT_TOLERANCE {
            return Err(Error::NotNormalized(pn));
        }
        let e = probe.len();
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len() * e);
        for a in &self.amplitudes {
            amplitudes.extend(probe.iter().map(|p| a * p));
        }
        Ok(Register {
            dim: self.dim,
            probe_dim: e,
            amplitudes,
        })
    }

    /// Applies a unitary on the full joint space.
    pub fn apply(&self, op: &DMatrix<Complex64>) -> Result<Register> {
        let n = self.amplitudes.len();
        if op.nrows() != n || op.ncols() != n {
            return Err(Error::OperatorShape {
                rows: op.nrows(),
                cols: op.ncols(),
                expected: n,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (col, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (row, o) in out.iter_mut().enumerate() {
                *o += op[(row, col)] * a;
            }
        }
        let reg = Register {
            dim: self.dim,
            probe_dim: self.probe_dim,
            amplitudes: out,
        };
        let norm = reg.norm_sqr();
        if (norm - 1.0).abs() > JOINT_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(reg)
    }

    /// Unnormalized probe vector left after projecting the particle onto
    /// `basis_value` of `basis`.
    pub fn project_particle(&self, basis: Basis, value: usize) -> Vec<Complex64> {
        let d = self.dim.get();
        let e = self.probe_dim;
        match basis {
            Basis::Computational => self.amplitudes[value * e..(value + 1) * e].to_vec(),
            Basis::Fourier => {
                let mut probe = vec![Complex64::new(0.0, 0.0); e];
                for delta in 0..d {
                    let w = fourier_amplitude(d, value, delta).conj();
                    for (p, a) in probe
                        .iter_mut()
                        .zip(&self.amplitudes[delta * e..(delta + 1) * e])
                    {
                        *p += w * a;
                    }
                }
                probe
            }
        }
    }

    /// Marginal outcome distribution of a particle measurement.
    pub fn particle_distribution(&self, basis: Basis) -> Vec<f64> {
        (0..self.dim.get())
            .map(|k| {
                self.project_particle(basis, k)
                    .iter()
                    .map(|a| a.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Measures the particle factor, collapsing the joint state onto
    /// `|basis_k> (x) probe_k / ||probe_k||`.
    pub fn measure_particle<R: Rng + ?Sized>(
        &self,
        basis: Basis,
        rng: &mut R,
    ) -> Result<(usize, Register)> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > JOINT_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        let value = sample_index(&self.particle_distribution(basis), rng);
        Ok((value, self.collapse(basis, value)))
    }

    /// Post-measurement register for a given outcome.
    pub(crate) fn collapse(&self, basis: Basis, value: usize) -> Register {
        let e = self.probe_dim;
        if e == 1 {
            return Register::from(QuditState::basis_vector(self.dim, basis, value));
        }
        let mut probe = self.project_particle(basis, value);
        let n = probe.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for p in probe.iter_mut() {
            *p /= n;
        }
        let particle = QuditState::basis_vector(self.dim, basis, value);
        let mut amplitudes = Vec::with_capacity(self.amplitudes.len());
        for a in particle.amplitudes() {
            amplitudes.extend(probe.iter().map(|p| a * p));
        }
        Register {
            dim: self.dim,
            probe_dim: e,
            amplitudes,
        }
    }

    /// The particle factor, if the register is a product state.
    pub fn particle(&self) -> Option<QuditState> {
        if self.probe_dim == 1 {
            return QuditState::from_amplitudes(self.dim, self.amplitudes.clone()).ok();
        }
        None
    }
}

/// Largest entry of `U^dagger U - I`.
pub fn unitarity_defect(op: &DMatrix<Complex64>) -> f64 {
    if op.nrows() != op.ncols() {
        return f64::INFINITY;
    }
    let prod = op.adjoint() * op;
    let id = DMatrix::<Complex64>::identity(op.nrows(), op.ncols());
    (prod - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
