//! Seed derivation.
//!
//! Every random choice in a run comes from one 64-bit seed. Each
//! (purpose, attempt, user, position) tuple gets its own ChaCha8 stream:
//! the generator is keyed from the seed and the tuple is packed into the
//! 64-bit ChaCha stream id as
//!
//! ```text
//! bits 63..56  purpose
//! bits 55..48  attempt (retry counter)
//! bits 47..32  user (0-based)
//! bits 31..0   position (1-based particle position, or trial number)
//! ```
//!
//! Because honest parties draw from their own streams, installing an
//! eavesdropper never shifts the randomness of TP1, the users or TP2.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    /// TP1's basis and index for a particle.
    Preparation = 1,
    /// P_n's REFLECT/MEASURE bit.
    UserMode = 2,
    /// P_n's measurement outcome.
    UserMeasurement = 3,
    /// TP2's REFLECT/MEASURE bit.
    Tp2Mode = 4,
    /// TP2's measurement outcome.
    Tp2Measurement = 5,
    /// TP1's final measurement.
    Tp1Measurement = 6,
    /// Choice of the Step-5 check subset for one user.
    Partition = 7,
    /// Eavesdropper actions on one particle.
    Eavesdropper = 8,
    /// Private inputs and keys generated by front ends.
    Inputs = 9,
    /// Per-trial seeds of Monte Carlo experiments.
    Trial = 10,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    seed: u64,
}

impl Substreams {
    pub fn new(seed: u64) -> Self {
        Substreams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, purpose: Purpose, attempt: u32, user: usize, position: usize) -> SimRng {
        let id = (purpose as u64) << 56
            | (u64::from(attempt) & 0xff) << 48
            | (user as u64 & 0xffff) << 32
            | (position as u64 & 0xffff_ffff);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    /// Seed for the `trial`-th independent run of an experiment.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.stream(Purpose::Trial, 0, 0, trial).next_u64()
    }
}
