//! The JSON document written by the command-line front end.

use serde::{Deserialize, Serialize};

use crate::adversary::DetectionStats;
use crate::analysis::{count_resources, efficiency, CountingConvention, EfficiencyInput};
use crate::error::Result;
use crate::protocol::{ProtocolConfig, RunOutcome, Transcript};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyEntry {
    pub convention: CountingConvention,
    #[serde(flatten)]
    pub input: EfficiencyInput,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub config: ProtocolConfig,
    pub attack: String,
    pub outcome: RunOutcome,
    /// Human-readable ordering per index, when the relations form a chain.
    pub orderings: Vec<Option<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection: Option<DetectionStats>,
    /// Empty unless the run completed.
    pub efficiency: Vec<EfficiencyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl RunReport {
    pub fn from_transcript(transcript: &Transcript, attack: &str) -> Result<Self> {
        let orderings = transcript
            .outcome
            .report
            .as_ref()
            .map(|r| r.indices.iter().map(|m| m.ordering_string()).collect())
            .unwrap_or_default();
        let mut eff = Vec::new();
        if transcript.outcome.report.is_some() {
            for convention in CountingConvention::ALL {
                let input = count_resources(transcript, convention)?;
                eff.push(EfficiencyEntry {
                    convention,
                    input,
                    eta: efficiency(input)?,
                });
            }
        }
        Ok(RunReport {
            schema: SCHEMA_VERSION,
            config: transcript.config.clone(),
            attack: attack.to_string(),
            outcome: transcript.outcome.clone(),
            orderings,
            detection: None,
            efficiency: eff,
            timing: None,
        })
    }

    pub fn with_detection(mut self, stats: DetectionStats) -> Self {
        self.detection = Some(stats);
        self
    }

    pub fn with_timing(mut self, elapsed_ms: f64) -> Self {
        self.timing = Some(Timing { elapsed_ms });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
