//! Qudit efficiency η = θ / (σ + μ).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocol::{Payload, Transcript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    /// Qudits transmitted.
    pub sigma: u64,
    /// Classical symbols consumed.
    pub mu: u64,
    /// Length of the compared private input.
    pub theta: u64,
}

impl EfficiencyInput {
    pub fn new(sigma: u64, mu: u64, theta: u64) -> Result<Self> {
        if sigma + mu == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(EfficiencyInput { sigma, mu, theta })
    }
}

pub fn efficiency(input: EfficiencyInput) -> Result<f64> {
    let denom = input.sigma + input.mu;
    if denom == 0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(input.theta as f64 / denom as f64)
}

/// Which classical traffic counts towards μ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountingConvention {
    /// σ = 16NL, μ = NL (the c_n messages only), θ = L. Security-check
    /// traffic is left out.
    NeglectChecks,
    /// Everything in the event log: every transmitted qudit over all
    /// attempts, plus one symbol per announced mode bit, T2 position,
    /// Case-3/4 declaration, Step-5 position and value, and c digit.
    CountEverything,
}

impl CountingConvention {
    pub const ALL: [CountingConvention; 2] = [
        CountingConvention::NeglectChecks,
        CountingConvention::CountEverything,
    ];
}

impl fmt::Display for CountingConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountingConvention::NeglectChecks => f.write_str("neglect-checks"),
            CountingConvention::CountEverything => f.write_str("count-everything"),
        }
    }
}

/// Resource counts of a completed run.
pub fn count_resources(
    transcript: &Transcript,
    convention: CountingConvention,
) -> Result<EfficiencyInput> {
    if transcript.outcome.report.is_none() {
        return Err(Error::IncompleteTranscript);
    }
    let cfg = &transcript.config;
    let per_attempt = (cfg.users * cfg.sequence_len()) as u64;
    let theta = cfg.length as u64;
    match convention {
        CountingConvention::NeglectChecks => {
            EfficiencyInput::new(per_attempt, (cfg.users * cfg.length) as u64, theta)
        }
        CountingConvention::CountEverything => {
            let mu = transcript
                .events
                .iter()
                .map(|e| match &e.payload {
                    Payload::FourierPositions { positions }
                    | Payload::CheckPositions { positions } => positions.len(),
                    Payload::ModeBits { bits } => bits.len(),
                    Payload::Declaration { .. } => 1,
                    Payload::CheckValues { values } => values.len(),
                    Payload::Ciphertext { c } => c.len(),
                    _ => 0,
                } as u64)
                .sum();
            EfficiencyInput::new(
                per_attempt * u64::from(transcript.outcome.attempts),
                mu,
                theta,
            )
        }
    }
}
