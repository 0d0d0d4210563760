use std::fmt;

use serde::{Deserialize, Serialize};

use crate::comparison::RelationMatrix;
use crate::error::{Error, Result};
use crate::qudit::{Basis, Dimension};

/// Parameters of one protocol execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub d: Dimension,
    /// Number of classical users N.
    pub users: usize,
    /// Comparison length L.
    pub length: usize,
    /// Each user's sequence holds `seq_multiplier * L` particles.
    pub seq_multiplier: usize,
    pub seed: u64,
    /// Probability that TP1 prepares a particle in T2.
    pub t2_prep_probability: f64,
    /// Reruns of Steps 1-5 after a Case-8 shortfall.
    pub max_retries: u32,
}

impl ProtocolConfig {
    pub const DEFAULT_MULTIPLIER: usize = 16;

    pub fn new(d: Dimension, users: usize, length: usize, seed: u64) -> Result<Self> {
        let cfg = ProtocolConfig {
            d,
            users,
            length,
            seq_multiplier: Self::DEFAULT_MULTIPLIER,
            seed,
            t2_prep_probability: 0.5,
            max_retries: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_multiplier(mut self, m: usize) -> Result<Self> {
        self.seq_multiplier = m;
        self.validate()?;
        Ok(self)
    }

    pub fn with_retries(mut self, r: u32) -> Result<Self> {
        self.max_retries = r;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_t2_probability(mut self, p: f64) -> Result<Self> {
        self.t2_prep_probability = p;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users < 2 {
            return Err(Error::TooFewUsers(self.users));
        }
        if self.users > 0xffff {
            return Err(Error::InvalidConfig(format!(
                "at most 65535 users, got {}",
                self.users
            )));
        }
        if self.length == 0 {
            return Err(Error::InvalidConfig(
                "comparison length must be at least 1".into(),
            ));
        }
        if self.seq_multiplier == 0 {
            return Err(Error::InvalidConfig(
                "sequence multiplier must be at least 1".into(),
            ));
        }
        if self.sequence_len() > u32::MAX as usize {
            return Err(Error::InvalidConfig("sequence too long".into()));
        }
        if !(self.t2_prep_probability > 0.0 && self.t2_prep_probability < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "T2 preparation probability must lie in (0, 1), got {}",
                self.t2_prep_probability
            )));
        }
        if self.max_retries > 255 {
            return Err(Error::InvalidConfig("at most 255 retries".into()));
        }
        Ok(())
    }

    pub fn sequence_len(&self) -> usize {
        self.seq_multiplier * self.length
    }
}

/// A classical party's per-particle choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeBit {
    /// Bit 0: send the particle back untouched.
    Reflect,
    /// Bit 1: measure in T1, resend the state found.
    Measure,
}

impl ModeBit {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            ModeBit::Measure
        } else {
            ModeBit::Reflect
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            ModeBit::Reflect => 0,
            ModeBit::Measure => 1,
        }
    }
}

impl fmt::Display for ModeBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModeBit::Reflect => f.write_str("REFLECT"),
            ModeBit::Measure => f.write_str("MEASURE"),
        }
    }
}

/// The eight combinations of preparation basis and mode bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Case {
    Case1 = 1,
    Case2,
    Case3,
    Case4,
    Case5,
    Case6,
    Case7,
    Case8,
}

impl Case {
    pub const ALL: [Case; 8] = [
        Case::Case1,
        Case::Case2,
        Case::Case3,
        Case::Case4,
        Case::Case5,
        Case::Case6,
        Case::Case7,
        Case::Case8,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// `(preparation basis, r, v)` of this case.
    pub fn scenario(self) -> (Basis, ModeBit, ModeBit) {
        use Basis::*;
        use ModeBit::*;
        match self {
            Case::Case1 => (Computational, Reflect, Reflect),
            Case::Case2 => (Fourier, Reflect, Reflect),
            Case::Case3 => (Computational, Measure, Reflect),
            Case::Case4 => (Computational, Reflect, Measure),
            Case::Case5 => (Fourier, Reflect, Measure),
            Case::Case6 => (Fourier, Measure, Reflect),
            Case::Case7 => (Fourier, Measure, Measure),
            Case::Case8 => (Computational, Measure, Measure),
        }
    }

    /// Basis TP1 measures the returned particle in; `None` when ignored.
    pub fn tp1_basis(self) -> Option<Basis> {
        match self {
            Case::Case2 => Some(Basis::Fourier),
            Case::Case5 | Case::Case6 | Case::Case7 => None,
            _ => Some(Basis::Computational),
        }
    }

    pub fn is_ignored(self) -> bool {
        self.tp1_basis().is_none()
    }

    /// Which security check inspects particles of this case.
    pub fn check_step(self) -> CheckStep {
        match self {
            Case::Case1 | Case::Case2 | Case::Case3 | Case::Case4 => CheckStep::Step4,
            Case::Case8 => CheckStep::Step5,
            _ => CheckStep::Ignored,
        }
    }
}

impl From<Case> for u8 {
    fn from(c: Case) -> u8 {
        c.number()
    }
}

impl TryFrom<u8> for Case {
    type Error = String;
    fn try_from(n: u8) -> std::result::Result<Self, String> {
        Case::ALL
            .get((n as usize).wrapping_sub(1))
            .copied()
            .ok_or_else(|| format!("case must be 1..=8, got {n}"))
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Case{}", self.number())
    }
}

/// Table 1 lookup.
pub fn classify_case(prep_basis: Basis, r: ModeBit, v: ModeBit) -> Case {
    use Basis::*;
    use ModeBit::*;
    match (prep_basis, r, v) {
        (Computational, Reflect, Reflect) => Case::Case1,
        (Fourier, Reflect, Reflect) => Case::Case2,
        (Computational, Measure, Reflect) => Case::Case3,
        (Computational, Reflect, Measure) => Case::Case4,
        (Fourier, Reflect, Measure) => Case::Case5,
        (Fourier, Measure, Reflect) => Case::Case6,
        (Fourier, Measure, Measure) => Case::Case7,
        (Computational, Measure, Measure) => Case::Case8,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CheckStep {
    Step4,
    Step5,
    Ignored,
}

impl fmt::Display for CheckStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CheckStep::Step4 => f.write_str("step4"),
            CheckStep::Step5 => f.write_str("step5"),
            CheckStep::Ignored => f.write_str("ignored"),
        }
    }
}

/// What a particle was used for once the announcements are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CheckRole {
    Step4Check,
    Step5Check,
    Comparison,
    Ignored,
    /// Case-8 particle not drawn for checking or comparison, or the run
    /// stopped before the Case-8 split.
    Unassigned,
}

/// Lifecycle of one position of `S_n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticleRecord {
    /// 1-based.
    pub position: usize,
    pub prep_basis: Basis,
    pub prep_index: usize,
    pub r: ModeBit,
    pub v: ModeBit,
    pub case: Case,
    pub user_measurement: Option<usize>,
    pub tp2_measurement: Option<usize>,
    pub tp1_final_measurement: Option<usize>,
    pub check_role: CheckRole,
    /// Whether the installed attack targeted this particle.
    pub attacked: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    AbortedStep4Eavesdrop,
    AbortedInsufficientCase8,
    AbortedStep5ErrorRate,
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RunStatus::Completed => "completed",
            RunStatus::AbortedStep4Eavesdrop => "aborted: eavesdropping detected in step 4",
            RunStatus::AbortedInsufficientCase8 => "suspended: fewer than 2L Case-8 particles",
            RunStatus::AbortedStep5ErrorRate => "aborted: nonzero error rate in step 5",
        };
        f.write_str(s)
    }
}

/// Per-index relation matrices published by TP1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub indices: Vec<RelationMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawOutcome")]
pub struct RunOutcome {
    pub status: RunStatus,
    /// Number of executions of Steps 1-5, including retries.
    pub attempts: u32,
    pub report: Option<ComparisonReport>,
}

#[derive(Deserialize)]
struct RawOutcome {
    status: RunStatus,
    attempts: u32,
    report: Option<ComparisonReport>,
}

impl TryFrom<RawOutcome> for RunOutcome {
    type Error = String;
    fn try_from(raw: RawOutcome) -> std::result::Result<Self, String> {
        if (raw.status == RunStatus::Completed) != raw.report.is_some() {
            return Err("report must be present exactly when the run completed".into());
        }
        Ok(RunOutcome {
            status: raw.status,
            attempts: raw.attempts,
            report: raw.report,
        })
    }
}

impl RunOutcome {
    pub fn aborted(status: RunStatus, attempts: u32) -> Self {
        debug_assert_ne!(status, RunStatus::Completed);
        RunOutcome {
            status,
            attempts,
            report: None,
        }
    }

    pub fn completed(report: ComparisonReport, attempts: u32) -> Self {
        RunOutcome {
            status: RunStatus::Completed,
            attempts,
            report: Some(report),
        }
    }
}
