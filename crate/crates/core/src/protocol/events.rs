//! Event log of a run. Serialized one JSON object per line.

use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::types::{ModeBit, RunStatus};
use crate::adversary::ChannelSegment;
use crate::comparison::RelationMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Actor {
    Tp1,
    Tp2,
    /// 1-based user label.
    User(usize),
    Eve,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Tp1 => f.write_str("TP1"),
            Actor::Tp2 => f.write_str("TP2"),
            Actor::User(n) => write!(f, "P{n}"),
            Actor::Eve => f.write_str("Eve"),
        }
    }
}

impl Serialize for Actor {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Actor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        match s.as_str() {
            "TP1" => Ok(Actor::Tp1),
            "TP2" => Ok(Actor::Tp2),
            "Eve" => Ok(Actor::Eve),
            other => other
                .strip_prefix('P')
                .and_then(|n| n.parse().ok())
                .map(Actor::User)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown actor {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    /// A particle leaves the actor.
    Send {
        to: Actor,
    },
    /// A particle arrives at the actor.
    Receive {
        from: Actor,
    },
    /// Eve acts on a particle in transit.
    Intercept {
        segment: ChannelSegment,
    },
    /// TP1 publishes which positions were prepared in T2.
    FourierPositions {
        positions: Vec<usize>,
    },
    /// r_n (by P_n) or v_n (by TP2).
    ModeBits {
        bits: Vec<ModeBit>,
    },
    /// State regenerated for a Case-3 (P_n) or Case-4 (TP2) particle.
    Declaration {
        value: usize,
    },
    Step4Verdict {
        passed: bool,
        failures: Vec<usize>,
    },
    Case8Count {
        count: usize,
        required: usize,
    },
    CheckPositions {
        positions: Vec<usize>,
    },
    CheckValues {
        values: Vec<usize>,
    },
    Step5Verdict {
        passed: bool,
    },
    /// c_n on the authenticated public channel.
    Ciphertext {
        c: Vec<usize>,
    },
    Results {
        indices: Vec<RelationMatrix>,
    },
    Retry {
        next_attempt: u32,
    },
    Outcome {
        status: RunStatus,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub attempt: u32,
    pub step: u8,
    pub actor: Actor,
    /// 1-based user whose sequence this concerns.
    pub user: Option<usize>,
    /// 1-based particle position.
    pub position: Option<usize>,
    pub payload: Payload,
}

/// Writes events as line-delimited JSON.
pub fn write_event_lines<W: Write>(events: &[Event], mut out: W) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses line-delimited JSON events, skipping blank lines.
pub fn read_event_lines(text: &str) -> Result<Vec<Event>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}
