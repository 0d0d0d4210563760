//! Outside eavesdroppers spliced into the three quantum channel segments.
//!
//! Each particle makes the round trip TP1 -> P_n -> TP2 -> TP1. An
//! [`AttackStrategy`] decides what Eve does to a particle on each leg;
//! [`apply_attack`] is the hook the protocol engine calls for every leg.

mod closed_form;
mod monte_carlo;
mod probe;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qudit::{Basis, Dimension};
use crate::register::Register;

pub use closed_form::closed_form_detection;
pub use monte_carlo::{
    monte_carlo_detection, wilson_interval, DetectionCell, DetectionRow, DetectionStats,
};
pub use probe::{
    probe_attack_evaluate, CaseEvaluation, ConditionalProbe, ProbeAttack, ProbeEvaluation,
    ProbeFamily, ProbePlacement,
};

/// One leg of the round trip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ChannelSegment {
    /// S_n, TP1 to P_n.
    #[serde(rename = "tp1-pn")]
    Tp1ToUser,
    /// S'_n, P_n to TP2.
    #[serde(rename = "pn-tp2")]
    UserToTp2,
    /// S''_n, TP2 back to TP1.
    #[serde(rename = "tp2-tp1")]
    Tp2ToTp1,
}

impl ChannelSegment {
    pub const ALL: [ChannelSegment; 3] = [
        ChannelSegment::Tp1ToUser,
        ChannelSegment::UserToTp2,
        ChannelSegment::Tp2ToTp1,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ChannelSegment::Tp1ToUser => "tp1-pn",
            ChannelSegment::UserToTp2 => "pn-tp2",
            ChannelSegment::Tp2ToTp1 => "tp2-tp1",
        }
    }
}

impl fmt::Display for ChannelSegment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ChannelSegment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ChannelSegment::ALL
            .into_iter()
            .find(|seg| seg.label() == s)
            .ok_or_else(|| {
                Error::InvalidAttack(format!(
                    "unknown segment '{s}' (expected tp1-pn, pn-tp2 or tp2-tp1)"
                ))
            })
    }
}

/// The three intercept-resend variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterceptVariant {
    /// Fake to P_n, genuine swapped back on S'_n.
    V1,
    /// Fake to P_n, genuine swapped back on S''_n.
    V2,
    /// Fake to TP2 on S'_n, genuine swapped back on S''_n.
    V3,
}

impl InterceptVariant {
    /// `(segment where the genuine particle is taken, segment where it is returned)`.
    pub fn segments(self) -> (ChannelSegment, ChannelSegment) {
        use ChannelSegment::*;
        match self {
            InterceptVariant::V1 => (Tp1ToUser, UserToTp2),
            InterceptVariant::V2 => (Tp1ToUser, Tp2ToTp1),
            InterceptVariant::V3 => (UserToTp2, Tp2ToTp1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttackKind {
    NoAttack,
    InterceptResend(InterceptVariant),
    /// Measure in T1 on one segment and forward the collapsed state.
    MeasureResend(ChannelSegment),
    EntangleMeasureProbe(Box<ProbeAttack>),
}

/// Serializable description of an attack, parsed from labels such as
/// `none`, `ir-v1`, `mr:pn-tp2`, `probe:shift`, `probe:fshift=0.4@ac`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum AttackSpec {
    None,
    InterceptResend(InterceptVariant),
    MeasureResend(ChannelSegment),
    Probe {
        family: ProbeFamily,
        placement: ProbePlacement,
    },
}

impl AttackSpec {
    /// Instantiates the attack for dimension `d`.
    pub fn build(&self, d: Dimension) -> Result<AttackStrategy> {
        let kind = match self {
            AttackSpec::None => AttackKind::NoAttack,
            AttackSpec::InterceptResend(v) => AttackKind::InterceptResend(*v),
            AttackSpec::MeasureResend(s) => AttackKind::MeasureResend(*s),
            AttackSpec::Probe { family, placement } => AttackKind::EntangleMeasureProbe(Box::new(
                family.build(d)?.with_placement(*placement),
            )),
        };
        Ok(AttackStrategy::new(kind).with_label(self.to_string()))
    }
}

impl fmt::Display for AttackSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttackSpec::None => f.write_str("none"),
            AttackSpec::InterceptResend(v) => write!(f, "ir-{}", format!("{v:?}").to_lowercase()),
            AttackSpec::MeasureResend(s) => write!(f, "mr:{s}"),
            AttackSpec::Probe { family, placement } => {
                write!(f, "probe:{family}")?;
                if *placement != ProbePlacement::default() {
                    write!(f, "@{placement}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for AttackSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "none" => return Ok(AttackSpec::None),
            "ir-v1" => return Ok(AttackSpec::InterceptResend(InterceptVariant::V1)),
            "ir-v2" => return Ok(AttackSpec::InterceptResend(InterceptVariant::V2)),
            "ir-v3" => return Ok(AttackSpec::InterceptResend(InterceptVariant::V3)),
            _ => {}
        }
        if let Some(seg) = s.strip_prefix("mr:") {
            return Ok(AttackSpec::MeasureResend(seg.parse()?));
        }
        if let Some(rest) = s.strip_prefix("probe:") {
            let (fam, placement) = match rest.split_once('@') {
                Some((fam, pl)) => (fam, pl.parse()?),
                None => (rest, ProbePlacement::default()),
            };
            return Ok(AttackSpec::Probe {
                family: fam.parse()?,
                placement,
            });
        }
        Err(Error::InvalidAttack(format!(
            "unknown attack '{s}' (expected none, ir-v1, ir-v2, ir-v3, mr:<segment> or probe:<family>[@<placement>])"
        )))
    }
}

impl From<AttackSpec> for String {
    fn from(a: AttackSpec) -> String {
        a.to_string()
    }
}

impl TryFrom<String> for AttackSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// An attack together with the particles it targets.
#[derive(Debug, Clone, PartialEq)]
pub struct AttackStrategy {
    pub kind: AttackKind,
    /// Display label, e.g. `ir-v2`.
    pub label: String,
    /// 1-based positions; `None` targets every position.
    pub target_positions: Option<BTreeSet<usize>>,
    /// 1-based users; `None` targets every user.
    pub target_users: Option<BTreeSet<usize>>,
}

impl AttackStrategy {
    pub fn new(kind: AttackKind) -> Self {
        let label = match &kind {
            AttackKind::NoAttack => "none".to_string(),
            AttackKind::InterceptResend(v) => AttackSpec::InterceptResend(*v).to_string(),
            AttackKind::MeasureResend(s) => AttackSpec::MeasureResend(*s).to_string(),
            AttackKind::EntangleMeasureProbe(p) => format!("probe@{}", p.placement),
        };
        AttackStrategy {
            kind,
            label,
            target_positions: None,
            target_users: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn none() -> Self {
        Self::new(AttackKind::NoAttack)
    }

    pub fn at_positions<I: IntoIterator<Item = usize>>(mut self, positions: I) -> Self {
        self.target_positions = Some(positions.into_iter().collect());
        self
    }

    pub fn on_users<I: IntoIterator<Item = usize>>(mut self, users: I) -> Self {
        self.target_users = Some(users.into_iter().collect());
        self
    }

    pub fn is_active(&self) -> bool {
        self.kind != AttackKind::NoAttack
    }

    pub fn targets(&self, user: usize, position: usize) -> bool {
        self.is_active()
            && self
                .target_positions
                .as_ref()
                .is_none_or(|s| s.contains(&position))
            && self.target_users.as_ref().is_none_or(|s| s.contains(&user))
    }

    /// Whether Eve touches a targeted particle on `segment`.
    pub fn acts_on(&self, segment: ChannelSegment) -> bool {
        match &self.kind {
            AttackKind::NoAttack => false,
            AttackKind::InterceptResend(v) => {
                let (a, b) = v.segments();
                segment == a || segment == b
            }
            AttackKind::MeasureResend(s) => *s == segment,
            AttackKind::EntangleMeasureProbe(p) => {
                let (a, b) = p.placement.segments();
                segment == a || segment == b
            }
        }
    }
}

/// The quantum channel as seen by the protocol: honest transport with an
/// optional eavesdropper.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStack {
    pub strategy: AttackStrategy,
}

impl ChannelStack {
    pub fn honest() -> Self {
        ChannelStack {
            strategy: AttackStrategy::none(),
        }
    }

    pub fn new(strategy: AttackStrategy) -> Self {
        ChannelStack { strategy }
    }
}

impl Default for ChannelStack {
    fn default() -> Self {
        Self::honest()
    }
}

/// Genuine particles Eve is holding for a later swap-back, keyed by
/// (user, position). Confined to a single run.
#[derive(Debug, Default)]
pub struct EveMemory {
    held: HashMap<(usize, usize), Register>,
}

impl EveMemory {
    pub fn is_empty(&self) -> bool {
        self.held.is_empty()
    }
}

/// Eve's action on one particle in transit. Untargeted particles and
/// untouched segments pass through unchanged.
pub fn apply_attack<R: Rng + ?Sized>(
    strategy: &AttackStrategy,
    segment: ChannelSegment,
    user: usize,
    position: usize,
    state: Register,
    memory: &mut EveMemory,
    rng: &mut R,
) -> Result<Register> {
    if !strategy.targets(user, position) {
        return Ok(state);
    }
    match &strategy.kind {
        AttackKind::NoAttack => Ok(state),
        AttackKind::InterceptResend(v) => {
            let (take, give_back) = v.segments();
            if segment == take {
                let d = state.dim();
                memory.held.insert((user, position), state);
                let fake = rng.random_range(0..d.get());
                Register::prepare(d, Basis::Computational, fake)
            } else if segment == give_back {
                memory.held.remove(&(user, position)).ok_or_else(|| {
                    Error::InvalidAttack(format!(
                        "swap-back for user {user} position {position} with no stored particle"
                    ))
                })
            } else {
                Ok(state)
            }
        }
        AttackKind::MeasureResend(s) if *s == segment => {
            Ok(state.measure_particle(Basis::Computational, rng)?.1)
        }
        AttackKind::MeasureResend(_) => Ok(state),
        AttackKind::EntangleMeasureProbe(p) => {
            let (first, second) = p.placement.segments();
            if segment == first {
                state.attach_probe(&p.initial_probe)?.apply(&p.entangle)
            } else if segment == second {
                state.apply(&p.follow_up)
            } else {
                Ok(state)
            }
        }
    }
}
