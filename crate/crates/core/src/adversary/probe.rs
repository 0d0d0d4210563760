//! Entangle-measure attacks: Eve couples a probe to the travelling particle
//! with one unitary on the way out and a second unitary later on the
//! round trip, then keeps the probe.
//!
//! [`probe_attack_evaluate`] follows every measurement branch of a particle's
//! lifecycle exactly on the particle (x) probe space. For each checked case
//! it reports the probability that TP1's check fails, and it collects
//! Eve's final probe state conditioned on every combination of measurement
//! results. An attack that never causes a check failure must leave the
//! probe in the same state on every branch, so Eve learns nothing about the
//! measurement values.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ChannelSegment;
use crate::error::{Error, Result};
use crate::protocol::{Case, ModeBit};
use crate::qudit::{Basis, Dimension, TOLERANCE};
use crate::register::{unitarity_defect, Register};

/// Fidelity threshold for calling two probe states equal.
pub const PROBE_EQUALITY_TOLERANCE: f64 = 1e-9;

/// Where the two unitaries act.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProbePlacement {
    entangle_on: ChannelSegment,
    follow_up_on: ChannelSegment,
}

impl ProbePlacement {
    pub fn new(entangle_on: ChannelSegment, follow_up_on: ChannelSegment) -> Result<Self> {
        if entangle_on >= follow_up_on {
            return Err(Error::InvalidAttack(
                "the follow-up unitary must act on a later segment than the entangling one".into(),
            ));
        }
        Ok(ProbePlacement {
            entangle_on,
            follow_up_on,
        })
    }

    pub fn segments(self) -> (ChannelSegment, ChannelSegment) {
        (self.entangle_on, self.follow_up_on)
    }
}

impl Default for ProbePlacement {
    /// Entangle on TP1 -> P_n, follow up on P_n -> TP2.
    fn default() -> Self {
        ProbePlacement {
            entangle_on: ChannelSegment::Tp1ToUser,
            follow_up_on: ChannelSegment::UserToTp2,
        }
    }
}

fn segment_letter(s: ChannelSegment) -> char {
    match s {
        ChannelSegment::Tp1ToUser => 'a',
        ChannelSegment::UserToTp2 => 'b',
        ChannelSegment::Tp2ToTp1 => 'c',
    }
}

impl fmt::Display for ProbePlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}",
            segment_letter(self.entangle_on),
            segment_letter(self.follow_up_on)
        )
    }
}

impl FromStr for ProbePlacement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        use ChannelSegment::*;
        match s {
            "ab" => ProbePlacement::new(Tp1ToUser, UserToTp2),
            "ac" => ProbePlacement::new(Tp1ToUser, Tp2ToTp1),
            "bc" => ProbePlacement::new(UserToTp2, Tp2ToTp1),
            other => Err(Error::InvalidAttack(format!(
                "unknown probe placement '{other}' (expected ab, ac or bc)"
            ))),
        }
    }
}

/// Built-in probe families, all with a d-level probe starting in `|0>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ProbeFamily {
    /// Both unitaries are the identity.
    Identity,
    /// `|t>|e> -> |t>|e + t>`, follow-up identity.
    ControlledShift,
    /// Controlled shift on the way out, its inverse on the way back.
    ShiftUndo,
    /// `|t>|e> -> |t> X^(theta t)|e>` with the fractional power taken in
    /// the shift's eigenbasis: identity at 0, controlled shift at 1.
    FractionalShift(f64),
}

impl fmt::Display for ProbeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbeFamily::Identity => f.write_str("identity"),
            ProbeFamily::ControlledShift => f.write_str("shift"),
            ProbeFamily::ShiftUndo => f.write_str("shift-undo"),
            ProbeFamily::FractionalShift(theta) => write!(f, "fshift={theta}"),
        }
    }
}

impl FromStr for ProbeFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ProbeFamily::Identity),
            "shift" => Ok(ProbeFamily::ControlledShift),
            "shift-undo" => Ok(ProbeFamily::ShiftUndo),
            _ => {
                let theta = s
                    .strip_prefix("fshift=")
                    .and_then(|t| t.parse::<f64>().ok())
                    .filter(|t| t.is_finite())
                    .ok_or_else(|| {
                        Error::InvalidAttack(format!(
                            "unknown probe family '{s}' (expected identity, shift, shift-undo or fshift=<theta>)"
                        ))
                    })?;
                Ok(ProbeFamily::FractionalShift(theta))
            }
        }
    }
}

impl ProbeFamily {
    pub fn build(self, dim: Dimension) -> Result<ProbeAttack> {
        let d = dim.get();
        let n = d * d;
        let id = DMatrix::<Complex64>::identity(n, n);
        let (entangle, follow_up) = match self {
            ProbeFamily::Identity => (id.clone(), id),
            ProbeFamily::ControlledShift => (fractional_controlled_shift(d, 1.0), id),
            ProbeFamily::ShiftUndo => {
                let u = fractional_controlled_shift(d, 1.0);
                let back = u.adjoint();
                (u, back)
            }
            ProbeFamily::FractionalShift(theta) => (fractional_controlled_shift(d, theta), id),
        };
        let mut initial = vec![Complex64::new(0.0, 0.0); d];
        initial[0] = Complex64::new(1.0, 0.0);
        ProbeAttack::new(dim, d, entangle, follow_up, initial)
    }
}

/// `sum_t |t><t| (x) V_t(theta)`, `V_t(theta) = sum_k e^{2 pi i k t theta / d} |f_k><f_k|`
/// where `|f_k>` are the eigenvectors of the cyclic shift on the probe.
fn fractional_controlled_shift(d: usize, theta: f64) -> DMatrix<Complex64> {
    let n = d * d;
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    let inv = 1.0 / d as f64;
    // <i|f_k> = e^{-2 pi i i k / d} / sqrt(d)
    let f = |i: usize, k: usize| {
        Complex64::from_polar(inv.sqrt(), -2.0 * PI * ((i * k) % d) as f64 / d as f64)
    };
    for t in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut z = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    let phase = Complex64::from_polar(
                        1.0,
                        2.0 * PI * k as f64 * t as f64 * theta / d as f64,
                    );
                    z += f(i, k) * phase * f(j, k).conj();
                }
                u[(t * d + i, t * d + j)] = z;
            }
        }
    }
    u
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeAttack {
    pub dim: Dimension,
    pub probe_dim: usize,
    /// Applied first (U_E).
    pub entangle: DMatrix<Complex64>,
    /// Applied second (U_F).
    pub follow_up: DMatrix<Complex64>,
    pub initial_probe: Vec<Complex64>,
    pub placement: ProbePlacement,
}

impl ProbeAttack {
    pub fn new(
        dim: Dimension,
        probe_dim: usize,
        entangle: DMatrix<Complex64>,
        follow_up: DMatrix<Complex64>,
        initial_probe: Vec<Complex64>,
    ) -> Result<Self> {
        if probe_dim < 2 {
            return Err(Error::InvalidAttack(
                "probe dimension must be at least 2".into(),
            ));
        }
        let n = dim.get() * probe_dim;
        for op in [&entangle, &follow_up] {
            if op.nrows() != n || op.ncols() != n {
                return Err(Error::OperatorShape {
                    rows: op.nrows(),
                    cols: op.ncols(),
                    expected: n,
                });
            }
            let defect = unitarity_defect(op);
            if defect > TOLERANCE {
                return Err(Error::NotUnitary(defect));
            }
        }
        if initial_probe.len() != probe_dim {
            return Err(Error::DimensionMismatch {
                left: probe_dim,
                right: initial_probe.len(),
            });
        }
        let norm: f64 = initial_probe.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(ProbeAttack {
            dim,
            probe_dim,
            entangle,
            follow_up,
            initial_probe,
            placement: ProbePlacement::default(),
        })
    }

    pub fn with_placement(mut self, placement: ProbePlacement) -> Self {
        self.placement = placement;
        self
    }

    fn on_segment(&self, segment: ChannelSegment, reg: &Register) -> Result<Register> {
        if segment == self.placement.entangle_on {
            reg.attach_probe(&self.initial_probe)?.apply(&self.entangle)
        } else if segment == self.placement.follow_up_on {
            reg.apply(&self.follow_up)
        } else {
            Ok(reg.clone())
        }
    }
}

/// Check-failure probability for one case, averaged over the prepared index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseEvaluation {
    pub case: Case,
    /// Probability that the particle fails the check it is subject to,
    /// given that it is inspected.
    pub failure: f64,
}

/// Eve's probe after every party has measured, on one branch.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalProbe {
    pub case: Case,
    pub prep_index: usize,
    pub user: Option<usize>,
    pub tp2: Option<usize>,
    pub tp1: usize,
    /// Probability of this branch given the case and prepared index.
    pub probability: f64,
    pub state: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeEvaluation {
    pub cases: Vec<CaseEvaluation>,
    pub probes: Vec<ConditionalProbe>,
    /// Smallest `|<a|b>|^2` over all pairs of conditional probe states.
    pub min_probe_fidelity: f64,
    /// Largest deviation from unit norm seen on any branch.
    pub max_norm_defect: f64,
}

impl ProbeEvaluation {
    pub fn failure(&self, case: Case) -> Option<f64> {
        self.cases
            .iter()
            .find(|c| c.case == case)
            .map(|c| c.failure)
    }

    /// Sum of failure probabilities over Cases 1-4 and 8.
    pub fn total_failure(&self) -> f64 {
        self.cases.iter().map(|c| c.failure).sum()
    }

    /// Whether every conditional probe state is the same up to phase.
    pub fn probes_independent(&self) -> bool {
        self.min_probe_fidelity >= 1.0 - PROBE_EQUALITY_TOLERANCE
    }
}

struct Branch {
    prob: f64,
    reg: Register,
    user: Option<usize>,
    tp2: Option<usize>,
    tp1: Option<usize>,
}

const BRANCH_CUTOFF: f64 = 1e-14;

fn split(
    branches: Vec<Branch>,
    basis: Basis,
    mut record: impl FnMut(&mut Branch, usize),
) -> Vec<Branch> {
    let mut out = Vec::new();
    for b in branches {
        for (k, p) in b.reg.particle_distribution(basis).into_iter().enumerate() {
            if p * b.prob <= BRANCH_CUTOFF {
                continue;
            }
            let mut nb = Branch {
                prob: b.prob * p,
                reg: b.reg.collapse(basis, k),
                user: b.user,
                tp2: b.tp2,
                tp1: b.tp1,
            };
            record(&mut nb, k);
            out.push(nb);
        }
    }
    out
}

fn eve(
    attack: &ProbeAttack,
    segment: ChannelSegment,
    branches: Vec<Branch>,
    defect: &mut f64,
) -> Result<Vec<Branch>> {
    branches
        .into_iter()
        .map(|mut b| {
            b.reg = attack.on_segment(segment, &b.reg)?;
            *defect = defect.max((b.reg.norm_sqr() - 1.0).abs());
            Ok(b)
        })
        .collect()
}

fn passes(case: Case, t: usize, b: &Branch) -> bool {
    let tp1 = b.tp1 == Some(t);
    match case {
        Case::Case1 | Case::Case2 => tp1,
        Case::Case3 => tp1 && b.user == Some(t),
        Case::Case4 => tp1 && b.tp2 == Some(t),
        Case::Case8 => tp1 && b.user == Some(t) && b.tp2 == Some(t),
        _ => true,
    }
}

/// Exact per-case check-failure probabilities and conditional probe states.
pub fn probe_attack_evaluate(attack: &ProbeAttack, dim: Dimension) -> Result<ProbeEvaluation> {
    if attack.dim != dim {
        return Err(Error::DimensionMismatch {
            left: dim.get(),
            right: attack.dim.get(),
        });
    }
    for op in [&attack.entangle, &attack.follow_up] {
        let defect = unitarity_defect(op);
        if defect > TOLERANCE {
            return Err(Error::NotUnitary(defect));
        }
    }
    let d = dim.get();
    let mut cases = Vec::new();
    let mut probes = Vec::new();
    let mut max_norm_defect: f64 = 0.0;
    for case in Case::ALL.into_iter().filter(|c| !c.is_ignored()) {
        let (basis, r, v) = case.scenario();
        let tp1_basis = case.tp1_basis().expect("checked cases are measured");
        let mut failure = 0.0;
        for t in 0..d {
            let start = Register::prepare(dim, basis, t)?;
            let mut br = vec![Branch {
                prob: 1.0,
                reg: start,
                user: None,
                tp2: None,
                tp1: None,
            }];
            br = eve(attack, ChannelSegment::Tp1ToUser, br, &mut max_norm_defect)?;
            if r == ModeBit::Measure {
                br = split(br, Basis::Computational, |b, k| b.user = Some(k));
            }
            br = eve(attack, ChannelSegment::UserToTp2, br, &mut max_norm_defect)?;
            if v == ModeBit::Measure {
                br = split(br, Basis::Computational, |b, k| b.tp2 = Some(k));
            }
            br = eve(attack, ChannelSegment::Tp2ToTp1, br, &mut max_norm_defect)?;
            br = split(br, tp1_basis, |b, k| b.tp1 = Some(k));
            for b in &br {
                max_norm_defect = max_norm_defect.max((b.reg.norm_sqr() - 1.0).abs());
                if !passes(case, t, b) {
                    failure += b.prob;
                }
                let tp1 = b.tp1.expect("TP1 measured");
                let mut state = b.reg.project_particle(tp1_basis, tp1);
                let n = state.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                state.iter_mut().for_each(|a| *a /= n);
                probes.push(ConditionalProbe {
                    case,
                    prep_index: t,
                    user: b.user,
                    tp2: b.tp2,
                    tp1,
                    probability: b.prob,
                    state,
                });
            }
        }
        cases.push(CaseEvaluation {
            case,
            failure: failure / d as f64,
        });
    }
    let mut min_probe_fidelity: f64 = 1.0;
    for (i, a) in probes.iter().enumerate() {
        for b in &probes[i + 1..] {
            let ip: Complex64 = a
                .state
                .iter()
                .zip(&b.state)
                .map(|(x, y)| x.conj() * y)
                .sum();
            min_probe_fidelity = min_probe_fidelity.min(ip.norm_sqr());
        }
    }
    Ok(ProbeEvaluation {
        cases,
        probes,
        min_probe_fidelity,
        max_norm_defect,
    })
}
