use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::checks::{
    case8_partition, finalize, party_turn, step4_check, step5_check, Announcements,
    CheckAnnouncements,
};
use super::events::{Actor, Event, Payload};
use super::types::{
    classify_case, Case, CheckRole, ModeBit, ParticleRecord, ProtocolConfig, RunOutcome, RunStatus,
};
use crate::adversary::{apply_attack, ChannelSegment, ChannelStack, EveMemory};
use crate::comparison::{ModDigit, PrivateDigit};
use crate::error::{Error, Result};
use crate::qudit::Basis;
use crate::register::Register;
use crate::rng::{Purpose, SimRng, Substreams};

/// Pinned choices for one particle, overriding the seeded draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForcedParticle {
    pub basis: Basis,
    pub index: usize,
    pub r: ModeBit,
    pub v: ModeBit,
}

/// Overrides applied to every attempt of a run. Used to replay worked
/// examples with known measurement values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunControls {
    forced: BTreeMap<(usize, usize), ForcedParticle>,
}

impl RunControls {
    /// Pins the particle at 1-based `position` of 1-based `user`.
    pub fn force(mut self, user: usize, position: usize, particle: ForcedParticle) -> Self {
        self.forced.insert((user, position), particle);
        self
    }
}

/// Everything that happened in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub key: Vec<usize>,
    /// Private digits per user.
    pub inputs: Vec<Vec<usize>>,
    /// Particle records of the final attempt, per user.
    pub records: Vec<Vec<ParticleRecord>>,
    /// Announced c_n per user; empty unless Step 6 was reached.
    pub ciphertexts: Vec<Vec<usize>>,
    pub outcome: RunOutcome,
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn status(&self) -> RunStatus {
        self.outcome.status
    }

    /// Re-executes the run from its recorded configuration and inputs.
    pub fn replay(&self, channel: &ChannelStack) -> Result<Transcript> {
        let d = self.config.d;
        let key = self
            .key
            .iter()
            .map(|&k| ModDigit::new(k, d))
            .collect::<Result<Vec<_>>>()?;
        let inputs = self
            .inputs
            .iter()
            .map(|p| {
                p.iter()
                    .map(|&v| PrivateDigit::new(v, d))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        run_protocol(&self.config, &inputs, &key, channel)
    }
}

/// Private inputs and a shared key drawn from the run seed.
pub fn random_inputs(config: &ProtocolConfig) -> (Vec<Vec<PrivateDigit>>, Vec<ModDigit>) {
    let d = config.d;
    let streams = Substreams::new(config.seed);
    let inputs = (0..config.users)
        .map(|n| {
            let mut rng = streams.stream(Purpose::Inputs, 0, n, 0);
            (0..config.length)
                .map(|_| PrivateDigit::new(rng.random_range(0..=d.h()), d).expect("in range"))
                .collect()
        })
        .collect();
    let mut rng = streams.stream(Purpose::Inputs, 0, config.users, 0);
    let key = (0..config.length)
        .map(|_| ModDigit::new(rng.random_range(0..d.get()), d).expect("in range"))
        .collect();
    (inputs, key)
}

/// Runs Steps 1-7.
pub fn run_protocol(
    config: &ProtocolConfig,
    inputs: &[Vec<PrivateDigit>],
    key: &[ModDigit],
    channel: &ChannelStack,
) -> Result<Transcript> {
    run_protocol_with(config, inputs, key, channel, &RunControls::default())
}

/// [`run_protocol`] with pinned particles.
pub fn run_protocol_with(
    config: &ProtocolConfig,
    inputs: &[Vec<PrivateDigit>],
    key: &[ModDigit],
    channel: &ChannelStack,
    controls: &RunControls,
) -> Result<Transcript> {
    validate_inputs(config, inputs, key)?;
    let mut run = Run {
        config,
        channel,
        controls,
        streams: Substreams::new(config.seed),
        events: Vec::new(),
        attempt: 0,
    };
    let mut attempt = 0;
    loop {
        run.attempt = attempt;
        let (records, outcome, ciphertexts) = run.attempt_once(inputs, key)?;
        let retry =
            outcome.status == RunStatus::AbortedInsufficientCase8 && attempt < config.max_retries;
        if retry {
            run.log(
                4,
                Actor::Tp1,
                None,
                None,
                Payload::Retry {
                    next_attempt: attempt + 1,
                },
            );
            attempt += 1;
            continue;
        }
        run.log(
            7,
            Actor::Tp1,
            None,
            None,
            Payload::Outcome {
                status: outcome.status,
            },
        );
        return Ok(Transcript {
            config: config.clone(),
            key: key.iter().map(|k| k.value()).collect(),
            inputs: inputs
                .iter()
                .map(|p| p.iter().map(|x| x.value()).collect())
                .collect(),
            records,
            ciphertexts,
            outcome,
            events: run.events,
        });
    }
}

fn validate_inputs(
    config: &ProtocolConfig,
    inputs: &[Vec<PrivateDigit>],
    key: &[ModDigit],
) -> Result<()> {
    config.validate()?;
    if inputs.len() != config.users {
        return Err(Error::InvalidConfig(format!(
            "{} input sequences for {} users",
            inputs.len(),
            config.users
        )));
    }
    if key.len() != config.length {
        return Err(Error::InvalidConfig(format!(
            "key has {} digits, expected L = {}",
            key.len(),
            config.length
        )));
    }
    if key.iter().any(|k| k.dim() != config.d) {
        return Err(Error::InvalidConfig(
            "key digit dimension differs from d".into(),
        ));
    }
    for (n, p) in inputs.iter().enumerate() {
        if p.len() != config.length {
            return Err(Error::InvalidConfig(format!(
                "user {} has {} private digits, expected L = {}",
                n + 1,
                p.len(),
                config.length
            )));
        }
        if p.iter().any(|x| x.dim() != config.d) {
            return Err(Error::InvalidConfig(format!(
                "user {} digit dimension differs from d",
                n + 1
            )));
        }
    }
    Ok(())
}

struct Run<'a> {
    config: &'a ProtocolConfig,
    channel: &'a ChannelStack,
    controls: &'a RunControls,
    streams: Substreams,
    events: Vec<Event>,
    attempt: u32,
}

type AttemptResult = (Vec<Vec<ParticleRecord>>, RunOutcome, Vec<Vec<usize>>);

impl Run<'_> {
    fn log(
        &mut self,
        step: u8,
        actor: Actor,
        user: Option<usize>,
        position: Option<usize>,
        payload: Payload,
    ) {
        self.events.push(Event {
            attempt: self.attempt,
            step,
            actor,
            user,
            position,
            payload,
        });
    }

    fn rng(&self, purpose: Purpose, user: usize, position: usize) -> SimRng {
        self.streams.stream(purpose, self.attempt, user, position)
    }

    fn attempt_once(
        &mut self,
        inputs: &[Vec<PrivateDigit>],
        key: &[ModDigit],
    ) -> Result<AttemptResult> {
        let cfg = self.config;
        let attempts = self.attempt + 1;

        // Steps 1-3, one user sequence at a time.
        let mut records = Vec::with_capacity(cfg.users);
        let mut returned = Vec::with_capacity(cfg.users);
        let mut memory = EveMemory::default();
        for n in 0..cfg.users {
            let (recs, regs) = self.transmit_sequence(n, &mut memory)?;
            records.push(recs);
            returned.push(regs);
        }

        // Step 4.
        let mut eavesdropped = false;
        for n in 0..cfg.users {
            let user = Some(n + 1);
            let ann = Announcements::honest(&records[n]);
            self.log(
                4,
                Actor::Tp1,
                user,
                None,
                Payload::FourierPositions {
                    positions: ann.fourier_positions.clone(),
                },
            );
            self.log(
                4,
                Actor::User(n + 1),
                user,
                None,
                Payload::ModeBits {
                    bits: ann.r.clone(),
                },
            );
            self.log(
                4,
                Actor::Tp2,
                user,
                None,
                Payload::ModeBits {
                    bits: ann.v.clone(),
                },
            );
            for (&pos, &value) in &ann.user_declarations {
                self.log(
                    4,
                    Actor::User(n + 1),
                    user,
                    Some(pos),
                    Payload::Declaration { value },
                );
            }
            for (&pos, &value) in &ann.tp2_declarations {
                self.log(
                    4,
                    Actor::Tp2,
                    user,
                    Some(pos),
                    Payload::Declaration { value },
                );
            }
            for (rec, reg) in records[n].iter_mut().zip(&returned[n]) {
                rec.check_role = match rec.case.check_step() {
                    super::types::CheckStep::Step4 => CheckRole::Step4Check,
                    super::types::CheckStep::Ignored => CheckRole::Ignored,
                    super::types::CheckStep::Step5 => CheckRole::Unassigned,
                };
                if let Some(basis) = rec.case.tp1_basis() {
                    let mut rng =
                        self.streams
                            .stream(Purpose::Tp1Measurement, self.attempt, n, rec.position);
                    rec.tp1_final_measurement = Some(reg.measure_particle(basis, &mut rng)?.0);
                }
            }
            let verdict = step4_check(n + 1, &records[n], &ann)?;
            let failures = verdict.failures();
            eavesdropped |= !failures.is_empty();
            self.log(
                4,
                Actor::Tp1,
                user,
                None,
                Payload::Step4Verdict {
                    passed: failures.is_empty(),
                    failures,
                },
            );
        }
        if eavesdropped {
            return Ok((
                records,
                RunOutcome::aborted(RunStatus::AbortedStep4Eavesdrop, attempts),
                Vec::new(),
            ));
        }

        let required = 2 * cfg.length;
        let mut short = false;
        for (n, recs) in records.iter().enumerate() {
            let count = recs.iter().filter(|r| r.case == Case::Case8).count();
            short |= count < required;
            self.log(
                4,
                Actor::Tp1,
                Some(n + 1),
                None,
                Payload::Case8Count { count, required },
            );
        }
        if short {
            return Ok((
                records,
                RunOutcome::aborted(RunStatus::AbortedInsufficientCase8, attempts),
                Vec::new(),
            ));
        }

        // Step 5.
        let mut comparison_positions = Vec::with_capacity(cfg.users);
        let mut error_free = true;
        for (n, recs) in records.iter_mut().enumerate() {
            let user = Some(n + 1);
            let case8: Vec<&ParticleRecord> =
                recs.iter().filter(|r| r.case == Case::Case8).collect();
            let mut rng = self.rng(Purpose::Partition, n, 0);
            let part = case8_partition(&case8, cfg.length, &mut rng)?;
            for rec in recs.iter_mut() {
                if part.check.contains(&rec.position) {
                    rec.check_role = CheckRole::Step5Check;
                } else if part.comparison.contains(&rec.position) {
                    rec.check_role = CheckRole::Comparison;
                }
            }
            let check: Vec<&ParticleRecord> = recs
                .iter()
                .filter(|r| r.check_role == CheckRole::Step5Check)
                .collect();
            let ann = CheckAnnouncements::honest(&check);
            let passed = step5_check(&check, &ann);
            self.log(
                5,
                Actor::Tp1,
                user,
                None,
                Payload::CheckPositions {
                    positions: part.check.clone(),
                },
            );
            self.log(
                5,
                Actor::User(n + 1),
                user,
                None,
                Payload::CheckValues {
                    values: ann.user_values.values().copied().collect(),
                },
            );
            self.log(
                5,
                Actor::Tp2,
                user,
                None,
                Payload::CheckValues {
                    values: ann.tp2_values.values().copied().collect(),
                },
            );
            self.log(5, Actor::Tp1, user, None, Payload::Step5Verdict { passed });
            error_free &= passed;
            comparison_positions.push(part.comparison);
        }
        if !error_free {
            return Ok((
                records,
                RunOutcome::aborted(RunStatus::AbortedStep5ErrorRate, attempts),
                Vec::new(),
            ));
        }

        // Steps 6-7.
        let sets: Vec<Vec<&ParticleRecord>> = records
            .iter()
            .zip(&comparison_positions)
            .map(|(recs, pos)| recs.iter().filter(|r| pos.contains(&r.position)).collect())
            .collect();
        let fin = finalize(cfg.d, &sets, key, inputs)?;
        for (n, c) in fin.ciphertexts.iter().enumerate() {
            self.log(
                6,
                Actor::User(n + 1),
                Some(n + 1),
                None,
                Payload::Ciphertext { c: c.clone() },
            );
        }
        self.log(
            7,
            Actor::Tp1,
            None,
            None,
            Payload::Results {
                indices: fin.report.indices.clone(),
            },
        );
        let ciphertexts = fin.ciphertexts;
        Ok((
            records,
            RunOutcome::completed(fin.report, attempts),
            ciphertexts,
        ))
    }

    /// Ping-pong transmission of `S_n`: particle `l + 1` leaves TP1 only
    /// after particle `l` is back.
    fn transmit_sequence(
        &mut self,
        n: usize,
        memory: &mut EveMemory,
    ) -> Result<(Vec<ParticleRecord>, Vec<Register>)> {
        let cfg = self.config;
        let d = cfg.d;
        let user = n + 1;
        let strategy = &self.channel.strategy;
        let len = cfg.sequence_len();
        let mut records = Vec::with_capacity(len);
        let mut returned = Vec::with_capacity(len);
        for pos in 1..=len {
            let (basis, index, r, v) = match self.controls.forced.get(&(user, pos)) {
                Some(f) => (f.basis, f.index, f.r, f.v),
                None => {
                    let mut prep = self.rng(Purpose::Preparation, n, pos);
                    let basis = if prep.random_bool(cfg.t2_prep_probability) {
                        Basis::Fourier
                    } else {
                        Basis::Computational
                    };
                    let index = prep.random_range(0..d.get());
                    let r = ModeBit::from_bit(self.rng(Purpose::UserMode, n, pos).random_bool(0.5));
                    let v = ModeBit::from_bit(self.rng(Purpose::Tp2Mode, n, pos).random_bool(0.5));
                    (basis, index, r, v)
                }
            };
            let attacked = strategy.targets(user, pos);
            let mut eve_rng = attacked.then(|| self.rng(Purpose::Eavesdropper, n, pos));
            let at = Some(pos);
            let mut reg = Register::prepare(d, basis, index)?;
            self.log(
                1,
                Actor::Tp1,
                Some(user),
                at,
                Payload::Send {
                    to: Actor::User(user),
                },
            );

            reg = self.transit(
                ChannelSegment::Tp1ToUser,
                1,
                user,
                pos,
                reg,
                memory,
                eve_rng.as_mut(),
            )?;
            self.log(
                2,
                Actor::User(user),
                Some(user),
                at,
                Payload::Receive { from: Actor::Tp1 },
            );
            let (user_measurement, out) =
                party_turn(reg, r, &mut self.rng(Purpose::UserMeasurement, n, pos))?;
            self.log(
                2,
                Actor::User(user),
                Some(user),
                at,
                Payload::Send { to: Actor::Tp2 },
            );

            reg = self.transit(
                ChannelSegment::UserToTp2,
                2,
                user,
                pos,
                out,
                memory,
                eve_rng.as_mut(),
            )?;
            self.log(
                3,
                Actor::Tp2,
                Some(user),
                at,
                Payload::Receive {
                    from: Actor::User(user),
                },
            );
            let (tp2_measurement, out) =
                party_turn(reg, v, &mut self.rng(Purpose::Tp2Measurement, n, pos))?;
            self.log(
                3,
                Actor::Tp2,
                Some(user),
                at,
                Payload::Send { to: Actor::Tp1 },
            );

            reg = self.transit(
                ChannelSegment::Tp2ToTp1,
                3,
                user,
                pos,
                out,
                memory,
                eve_rng.as_mut(),
            )?;
            self.log(
                3,
                Actor::Tp1,
                Some(user),
                at,
                Payload::Receive { from: Actor::Tp2 },
            );

            let case = classify_case(basis, r, v);
            records.push(ParticleRecord {
                position: pos,
                prep_basis: basis,
                prep_index: index,
                r,
                v,
                case,
                user_measurement,
                tp2_measurement,
                tp1_final_measurement: None,
                check_role: if case.is_ignored() {
                    CheckRole::Ignored
                } else {
                    CheckRole::Unassigned
                },
                attacked,
            });
            returned.push(reg);
        }
        Ok((records, returned))
    }

    #[allow(clippy::too_many_arguments)]
    fn transit(
        &mut self,
        segment: ChannelSegment,
        step: u8,
        user: usize,
        pos: usize,
        reg: Register,
        memory: &mut EveMemory,
        rng: Option<&mut SimRng>,
    ) -> Result<Register> {
        let strategy = &self.channel.strategy;
        match rng {
            Some(rng) if strategy.acts_on(segment) => {
                let out = apply_attack(strategy, segment, user, pos, reg, memory, rng)?;
                self.log(
                    step,
                    Actor::Eve,
                    Some(user),
                    Some(pos),
                    Payload::Intercept { segment },
                );
                Ok(out)
            }
            _ => Ok(reg),
        }
    }
}
