//! Empirical per-case detection rates from full protocol runs.

use std::thread;

use serde::{Deserialize, Serialize};

use super::{
    closed_form_detection, probe_attack_evaluate, AttackKind, AttackStrategy, ChannelStack,
};
use crate::error::Result;
use crate::protocol::{
    case8_partition, random_inputs, run_protocol, Case, CheckStep, ParticleRecord, ProtocolConfig,
    Transcript,
};
use crate::qudit::Dimension;
use crate::rng::{Purpose, Substreams};

/// Wilson score interval for `successes` out of `n` at `z` standard
/// deviations. `n = 0` gives the uninformative `(0, 1)`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Tally for one case.
///
/// For Case 8 `attacked`/`detected` count only sequences with exactly 2L
/// Case-8 particles, where each one lands in the check set with probability
/// exactly 1/2. `mismatched` counts every attacked Case-8 particle whose
/// four values disagree, regardless of selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "CellRepr", from = "CellRepr")]
pub struct DetectionCell {
    pub case: Case,
    pub step: CheckStep,
    pub attacked: u64,
    pub detected: u64,
    pub mismatch_attacked: u64,
    pub mismatched: u64,
    pub reference: Option<f64>,
}

/// Serialized form; rates are derived from the counts and ignored on input.
#[derive(Serialize, Deserialize)]
struct CellRepr {
    case: Case,
    step: CheckStep,
    attacked: u64,
    detected: u64,
    rate: Option<f64>,
    stderr: Option<f64>,
    reference: Option<f64>,
    mismatch_attacked: u64,
    mismatched: u64,
    mismatch_rate: Option<f64>,
}

impl From<DetectionCell> for CellRepr {
    fn from(c: DetectionCell) -> Self {
        CellRepr {
            case: c.case,
            step: c.step,
            attacked: c.attacked,
            detected: c.detected,
            rate: c.rate(),
            stderr: c.stderr(),
            reference: c.reference,
            mismatch_attacked: c.mismatch_attacked,
            mismatched: c.mismatched,
            mismatch_rate: c.mismatch_rate(),
        }
    }
}

impl From<CellRepr> for DetectionCell {
    fn from(c: CellRepr) -> Self {
        DetectionCell {
            case: c.case,
            step: c.step,
            attacked: c.attacked,
            detected: c.detected,
            mismatch_attacked: c.mismatch_attacked,
            mismatched: c.mismatched,
            reference: c.reference,
        }
    }
}

impl DetectionCell {
    fn empty(case: Case, reference: Option<f64>) -> Self {
        DetectionCell {
            case,
            step: case.check_step(),
            attacked: 0,
            detected: 0,
            mismatch_attacked: 0,
            mismatched: 0,
            reference,
        }
    }

    pub fn rate(&self) -> Option<f64> {
        (self.attacked > 0).then(|| self.detected as f64 / self.attacked as f64)
    }

    /// Half-width of the one-sigma Wilson interval.
    pub fn stderr(&self) -> Option<f64> {
        (self.attacked > 0).then(|| {
            let (lo, hi) = wilson_interval(self.detected, self.attacked, 1.0);
            (hi - lo) / 2.0
        })
    }

    pub fn mismatch_rate(&self) -> Option<f64> {
        (self.mismatch_attacked > 0).then(|| self.mismatched as f64 / self.mismatch_attacked as f64)
    }

    /// Whether the reference lies inside the `z`-sigma Wilson interval.
    pub fn consistent(&self, z: f64) -> bool {
        match self.reference {
            Some(r) if self.attacked > 0 => {
                let (lo, hi) = wilson_interval(self.detected, self.attacked, z);
                lo - 1e-12 <= r && r <= hi + 1e-12
            }
            _ => false,
        }
    }
}

/// Flat view of one cell, as written to CSV and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub d: usize,
    pub attack: String,
    pub case: u8,
    pub step: CheckStep,
    pub attacked: u64,
    pub detected: u64,
    pub rate: Option<f64>,
    pub stderr: Option<f64>,
    pub reference: Option<f64>,
}

impl DetectionRow {
    pub const CSV_HEADER: &'static str =
        "d,attack,case,step,attacked,detected,rate,stderr,reference";

    pub fn to_csv(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.d,
            self.attack,
            self.case,
            self.step,
            self.attacked,
            self.detected,
            opt(self.rate),
            opt(self.stderr),
            opt(self.reference)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionStats {
    pub d: Dimension,
    pub attack: String,
    pub trials: u64,
    /// Runs that reached Step 7.
    pub completed: u64,
    /// One cell per case, Case 1 first.
    pub cells: Vec<DetectionCell>,
}

impl DetectionStats {
    fn empty(d: Dimension, attack: &str, references: [Option<f64>; 8]) -> Self {
        DetectionStats {
            d,
            attack: attack.to_string(),
            trials: 0,
            completed: 0,
            cells: Case::ALL
                .iter()
                .zip(references)
                .map(|(&c, r)| DetectionCell::empty(c, r))
                .collect(),
        }
    }

    pub fn cell(&self, case: Case) -> &DetectionCell {
        &self.cells[case.number() as usize - 1]
    }

    /// Adds another tally of the same attack. Order of merging does not
    /// affect the result.
    pub fn merge(&mut self, other: &DetectionStats) {
        assert_eq!(self.d, other.d);
        assert_eq!(self.attack, other.attack);
        self.trials += other.trials;
        self.completed += other.completed;
        for (a, b) in self.cells.iter_mut().zip(&other.cells) {
            a.attacked += b.attacked;
            a.detected += b.detected;
            a.mismatch_attacked += b.mismatch_attacked;
            a.mismatched += b.mismatched;
        }
    }

    pub fn rows(&self) -> Vec<DetectionRow> {
        self.cells
            .iter()
            .map(|c| DetectionRow {
                d: self.d.get(),
                attack: self.attack.clone(),
                case: c.case.number(),
                step: c.step,
                attacked: c.attacked,
                detected: c.detected,
                rate: c.rate(),
                stderr: c.stderr(),
                reference: c.reference,
            })
            .collect()
    }

    /// Tallies one finished run.
    pub fn record(&mut self, transcript: &Transcript) -> Result<()> {
        let cfg = &transcript.config;
        let streams = Substreams::new(cfg.seed);
        let attempt = transcript.outcome.attempts.saturating_sub(1);
        self.trials += 1;
        if transcript.outcome.report.is_some() {
            self.completed += 1;
        }
        for (n, recs) in transcript.records.iter().enumerate() {
            let case8: Vec<&ParticleRecord> =
                recs.iter().filter(|r| r.case == Case::Case8).collect();
            // Same draw the engine makes, so selection matches the run.
            let check = if case8.len() == 2 * cfg.length {
                let mut rng = streams.stream(Purpose::Partition, attempt, n, 0);
                Some(case8_partition(&case8, cfg.length, &mut rng)?.check)
            } else {
                None
            };
            for rec in recs.iter().filter(|r| r.attacked) {
                let cell = &mut self.cells[rec.case.number() as usize - 1];
                match rec.case.check_step() {
                    CheckStep::Step4 => {
                        cell.attacked += 1;
                        cell.detected += u64::from(!passes_step4(rec));
                    }
                    CheckStep::Step5 => {
                        let t = Some(rec.prep_index);
                        let mismatch = !(rec.user_measurement == t
                            && rec.tp2_measurement == t
                            && rec.tp1_final_measurement == t);
                        cell.mismatch_attacked += 1;
                        cell.mismatched += u64::from(mismatch);
                        if let Some(check) = &check {
                            cell.attacked += 1;
                            cell.detected += u64::from(mismatch && check.contains(&rec.position));
                        }
                    }
                    CheckStep::Ignored => cell.attacked += 1,
                }
            }
        }
        Ok(())
    }
}

/// Honest-announcement Step-4 verdict for one Case 1-4 particle.
fn passes_step4(rec: &ParticleRecord) -> bool {
    let t = Some(rec.prep_index);
    let declared_ok = match rec.case {
        Case::Case3 => rec.user_measurement == t,
        Case::Case4 => rec.tp2_measurement == t,
        _ => true,
    };
    rec.tp1_final_measurement == t && declared_ok
}

/// Reference rate per case: closed forms for intercept-resend and
/// measure-resend, the exact evaluator for probe attacks. The Case-8 value
/// includes the 1/2 selection factor.
pub(crate) fn references(strategy: &AttackStrategy, d: Dimension) -> Result<[Option<f64>; 8]> {
    let mut out = [None; 8];
    let eval = match &strategy.kind {
        AttackKind::EntangleMeasureProbe(p) => Some(probe_attack_evaluate(p, d)?),
        _ => None,
    };
    for (slot, case) in out.iter_mut().zip(Case::ALL) {
        *slot = match &eval {
            None => closed_form_detection(&strategy.kind, d, case),
            Some(_) if case.is_ignored() => Some(0.0),
            Some(e) => {
                let f = e.failure(case);
                if case == Case::Case8 {
                    f.map(|x| x / 2.0)
                } else {
                    f
                }
            }
        };
    }
    Ok(out)
}

/// Runs `trials` independent protocol executions under `strategy` and
/// tallies per-case detection. Trial `i` uses the seed derived from
/// `config.seed` and `i`, with fresh random inputs and key, so the result
/// does not depend on how trials are spread over threads.
pub fn monte_carlo_detection(
    config: &ProtocolConfig,
    strategy: &AttackStrategy,
    trials: usize,
) -> Result<DetectionStats> {
    config.validate()?;
    let refs = references(strategy, config.d)?;
    let base = DetectionStats::empty(config.d, &strategy.label, refs);
    let channel = ChannelStack::new(strategy.clone());
    let streams = Substreams::new(config.seed);
    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(trials.max(1));

    let partials: Vec<Result<DetectionStats>> = thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let (channel, base) = (&channel, &base);
                s.spawn(move || -> Result<DetectionStats> {
                    let mut stats = base.clone();
                    for trial in (w..trials).step_by(workers) {
                        let cfg = config.clone().with_seed(streams.trial_seed(trial));
                        let (inputs, key) = random_inputs(&cfg);
                        let t = run_protocol(&cfg, &inputs, &key, channel)?;
                        stats.record(&t)?;
                    }
                    Ok(stats)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut total = base;
    for p in partials {
        total.merge(&p?);
    }
    Ok(total)
}
