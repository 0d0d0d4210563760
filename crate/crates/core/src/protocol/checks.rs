//! Party behaviour and the security checks of Steps 4-7.

use std::borrow::Borrow;
use std::collections::BTreeMap;

use rand::Rng;

use super::types::{Case, ComparisonReport, ModeBit, ParticleRecord};
use crate::comparison::{decode_with_trace, encode, ModDigit, PrivateDigit};
use crate::error::{Error, Result};
use crate::qudit::{Basis, Dimension};
use crate::register::Register;

/// One REFLECT/MEASURE action by P_n or TP2.
///
/// Returns the recorded value (MEASURE only) and the outgoing particle.
/// Measuring collapses the particle onto `|k>`, which is exactly the fresh
/// T1 state the party resends.
pub fn party_turn<R: Rng + ?Sized>(
    incoming: Register,
    mode: ModeBit,
    rng: &mut R,
) -> Result<(Option<usize>, Register)> {
    match mode {
        ModeBit::Reflect => Ok((None, incoming)),
        ModeBit::Measure => {
            let (value, out) = incoming.measure_particle(Basis::Computational, rng)?;
            Ok((Some(value), out))
        }
    }
}

/// Public announcements of Step 4 for one user's sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Announcements {
    /// Positions TP1 prepared in T2.
    pub fourier_positions: Vec<usize>,
    /// r_n, indexed by position - 1.
    pub r: Vec<ModeBit>,
    /// v_n, indexed by position - 1.
    pub v: Vec<ModeBit>,
    /// P_n's declared regenerated states for Case-3 positions.
    pub user_declarations: BTreeMap<usize, usize>,
    /// TP2's declared regenerated states for Case-4 positions.
    pub tp2_declarations: BTreeMap<usize, usize>,
}

impl Announcements {
    /// What honest parties announce for these records.
    pub fn honest(records: &[ParticleRecord]) -> Self {
        let mut a = Announcements {
            fourier_positions: records
                .iter()
                .filter(|p| p.prep_basis == Basis::Fourier)
                .map(|p| p.position)
                .collect(),
            r: records.iter().map(|p| p.r).collect(),
            v: records.iter().map(|p| p.v).collect(),
            ..Default::default()
        };
        for p in records {
            match p.case {
                Case::Case3 => {
                    if let Some(m) = p.user_measurement {
                        a.user_declarations.insert(p.position, m);
                    }
                }
                Case::Case4 => {
                    if let Some(m) = p.tp2_measurement {
                        a.tp2_declarations.insert(p.position, m);
                    }
                }
                _ => {}
            }
        }
        a
    }
}

/// Result of TP1's Step-4 comparison for every Case 1-4 particle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step4Result {
    /// `(position, passed)` in position order.
    pub verdicts: Vec<(usize, bool)>,
}

impl Step4Result {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|&(_, ok)| ok)
    }

    pub fn failures(&self) -> Vec<usize> {
        self.verdicts
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|&(p, _)| p)
            .collect()
    }
}

/// TP1 classifies each particle from the announced bits, then compares her
/// measurement with the prepared index (and, for Cases 3 and 4, with the
/// declared regenerated state).
///
/// `records` must carry TP1's final measurements for Cases 1-4.
pub fn step4_check(
    user: usize,
    records: &[ParticleRecord],
    ann: &Announcements,
) -> Result<Step4Result> {
    let mut verdicts = Vec::new();
    for (i, p) in records.iter().enumerate() {
        let missing = || Error::MissingAnnouncement {
            user,
            position: p.position,
        };
        let r = *ann.r.get(i).ok_or_else(missing)?;
        let v = *ann.v.get(i).ok_or_else(missing)?;
        let case = super::types::classify_case(p.prep_basis, r, v);
        let declared = match case {
            Case::Case1 | Case::Case2 => None,
            Case::Case3 => Some(*ann.user_declarations.get(&p.position).ok_or_else(missing)?),
            Case::Case4 => Some(*ann.tp2_declarations.get(&p.position).ok_or_else(missing)?),
            _ => continue,
        };
        let tp1 = p.tp1_final_measurement.ok_or_else(missing)?;
        let ok = tp1 == p.prep_index && declared.is_none_or(|m| m == p.prep_index);
        verdicts.push((p.position, ok));
    }
    Ok(Step4Result { verdicts })
}

/// Check and comparison subsets of one user's Case-8 particles, as positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Case8Partition {
    pub check: Vec<usize>,
    pub comparison: Vec<usize>,
}

/// Draws a uniformly random L-subset for checking; the comparison set is
/// the lowest-position L of the remainder.
pub fn case8_partition<P, R>(case8: &[P], length: usize, rng: &mut R) -> Result<Case8Partition>
where
    P: Borrow<ParticleRecord>,
    R: Rng + ?Sized,
{
    if case8.len() < 2 * length {
        return Err(Error::InvalidConfig(format!(
            "{} Case-8 particles cannot supply 2L = {}",
            case8.len(),
            2 * length
        )));
    }
    let mut picked = rand::seq::index::sample(rng, case8.len(), length).into_vec();
    picked.sort_unstable();
    let mut check = Vec::with_capacity(length);
    let mut rest = Vec::with_capacity(case8.len() - length);
    let mut it = picked.iter().peekable();
    for (i, p) in case8.iter().enumerate() {
        if it.peek() == Some(&&i) {
            it.next();
            check.push(p.borrow().position);
        } else {
            rest.push(p.borrow().position);
        }
    }
    rest.sort_unstable();
    rest.truncate(length);
    check.sort_unstable();
    Ok(Case8Partition {
        check,
        comparison: rest,
    })
}

/// Values announced in Step 5 for the check positions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckAnnouncements {
    pub user_values: BTreeMap<usize, usize>,
    pub tp2_values: BTreeMap<usize, usize>,
}

impl CheckAnnouncements {
    pub fn honest(check_set: &[&ParticleRecord]) -> Self {
        let mut a = CheckAnnouncements::default();
        for p in check_set {
            if let Some(m) = p.user_measurement {
                a.user_values.insert(p.position, m);
            }
            if let Some(m) = p.tp2_measurement {
                a.tp2_values.insert(p.position, m);
            }
        }
        a
    }
}

/// Zero-tolerance error-rate check: prepared index, user value, TP2 value
/// and TP1's measurement must all agree on every checked particle.
pub fn step5_check(check_set: &[&ParticleRecord], ann: &CheckAnnouncements) -> bool {
    check_set.iter().all(|p| {
        case8_consistent(
            p,
            ann.user_values.get(&p.position).copied(),
            ann.tp2_values.get(&p.position).copied(),
        )
    })
}

pub(crate) fn case8_consistent(
    p: &ParticleRecord,
    user: Option<usize>,
    tp2: Option<usize>,
) -> bool {
    let t = Some(p.prep_index);
    user == t && tp2 == t && p.tp1_final_measurement == t
}

/// Result of Steps 6-7.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finalized {
    /// c_n for each user, index order.
    pub ciphertexts: Vec<Vec<usize>>,
    pub report: ComparisonReport,
}

/// Users encode their private digits with their own measurement values on
/// the comparison particles; TP1 decodes with hers and classifies.
///
/// `comparison_sets[n]` lists user n's comparison particles in position
/// order.
pub fn finalize(
    dim: Dimension,
    comparison_sets: &[Vec<&ParticleRecord>],
    key: &[ModDigit],
    inputs: &[Vec<PrivateDigit>],
) -> Result<Finalized> {
    let length = key.len();
    if comparison_sets.len() != inputs.len() {
        return Err(Error::InvalidConfig(
            "one comparison set per user required".into(),
        ));
    }
    let value = |v: Option<usize>, n: usize, p: &ParticleRecord| -> Result<ModDigit> {
        let v = v.ok_or(Error::MissingAnnouncement {
            user: n + 1,
            position: p.position,
        })?;
        ModDigit::new(v, dim)
    };
    let mut ciphertexts = vec![Vec::with_capacity(length); inputs.len()];
    let mut tp1_values = vec![Vec::with_capacity(length); inputs.len()];
    for (n, set) in comparison_sets.iter().enumerate() {
        if set.len() != length || inputs[n].len() != length {
            return Err(Error::InvalidConfig(format!(
                "user {} needs {length} comparison particles",
                n + 1
            )));
        }
        for (i, p) in set.iter().enumerate() {
            let m_user = value(p.user_measurement, n, p)?;
            ciphertexts[n].push(encode(m_user, key[i], inputs[n][i])?);
            tp1_values[n].push(value(p.tp1_final_measurement, n, p)?);
        }
    }
    let mut indices = Vec::with_capacity(length);
    for i in 0..length {
        let c: Vec<ModDigit> = ciphertexts.iter().map(|c| c[i]).collect();
        let m: Vec<ModDigit> = tp1_values.iter().map(|m| m[i]).collect();
        indices.push(decode_with_trace(&c, &m)?.relations);
    }
    Ok(Finalized {
        ciphertexts: ciphertexts
            .into_iter()
            .map(|c| c.into_iter().map(|x| x.value()).collect())
            .collect(),
        report: ComparisonReport { indices },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::types::{classify_case, CheckRole};
    use crate::qudit::QuditState;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    fn record(
        position: usize,
        basis: Basis,
        index: usize,
        r: ModeBit,
        v: ModeBit,
    ) -> ParticleRecord {
        let case = classify_case(basis, r, v);
        let m = |mode| (mode == ModeBit::Measure).then_some(index);
        ParticleRecord {
            position,
            prep_basis: basis,
            prep_index: index,
            r,
            v,
            case,
            user_measurement: m(r),
            tp2_measurement: m(v),
            tp1_final_measurement: case.tp1_basis().map(|_| index),
            check_role: if case.is_ignored() {
                CheckRole::Ignored
            } else {
                CheckRole::Unassigned
            },
            attacked: false,
        }
    }

    #[test]
    fn party_turn_measure_t1_eigenstate() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let inc = Register::prepare(dim(7), Basis::Computational, 4).unwrap();
        let (v, out) = party_turn(inc.clone(), ModeBit::Measure, &mut rng).unwrap();
        assert_eq!(v, Some(4));
        assert_eq!(out, inc);
    }

    #[test]
    fn party_turn_reflect_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let inc = Register::prepare(dim(3), Basis::Fourier, 2).unwrap();
        let (v, out) = party_turn(inc.clone(), ModeBit::Reflect, &mut rng).unwrap();
        assert_eq!(v, None);
        assert_eq!(out, inc);
    }

    #[test]
    fn party_turn_measure_fourier_state_is_uniform() {
        const N: usize = 30_000;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inc = Register::prepare(dim(3), Basis::Fourier, 0).unwrap();
        let mut counts = [0usize; 3];
        for _ in 0..N {
            let (v, out) = party_turn(inc.clone(), ModeBit::Measure, &mut rng).unwrap();
            let v = v.unwrap();
            assert_eq!(
                out.particle().unwrap(),
                QuditState::prepare(dim(3), Basis::Computational, v).unwrap()
            );
            counts[v] += 1;
        }
        let se = ((1.0 / 3.0) * (2.0 / 3.0) / N as f64).sqrt();
        for c in counts {
            assert!((c as f64 / N as f64 - 1.0 / 3.0).abs() < 3.0 * se);
        }
    }

    #[test]
    fn honest_step4_passes() {
        use Basis::*;
        use ModeBit::*;
        let recs = vec![
            record(1, Computational, 1, Reflect, Reflect),
            record(2, Fourier, 2, Reflect, Reflect),
            record(3, Computational, 0, Measure, Reflect),
            record(4, Computational, 4, Reflect, Measure),
            record(5, Fourier, 3, Measure, Measure),
        ];
        let ann = Announcements::honest(&recs);
        assert_eq!(ann.fourier_positions, vec![2, 5]);
        let res = step4_check(1, &recs, &ann).unwrap();
        assert_eq!(res.verdicts.len(), 4);
        assert!(res.passed());
    }

    #[test]
    fn wrong_declaration_fails_step4() {
        let recs = vec![record(
            1,
            Basis::Computational,
            2,
            ModeBit::Measure,
            ModeBit::Reflect,
        )];
        let mut ann = Announcements::honest(&recs);
        ann.user_declarations.insert(1, 3);
        let res = step4_check(1, &recs, &ann).unwrap();
        assert!(!res.passed());
        assert_eq!(res.failures(), vec![1]);
    }

    #[test]
    fn missing_declaration_is_an_error() {
        let recs = vec![record(
            7,
            Basis::Computational,
            2,
            ModeBit::Reflect,
            ModeBit::Measure,
        )];
        let mut ann = Announcements::honest(&recs);
        ann.tp2_declarations.clear();
        assert_eq!(
            step4_check(2, &recs, &ann),
            Err(Error::MissingAnnouncement {
                user: 2,
                position: 7
            })
        );
    }

    fn case8_records(n: usize) -> Vec<ParticleRecord> {
        (1..=n)
            .map(|i| {
                record(
                    3 * i,
                    Basis::Computational,
                    i % 5,
                    ModeBit::Measure,
                    ModeBit::Measure,
                )
            })
            .collect()
    }

    #[test]
    fn partition_exact_supply() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let recs = case8_records(6);
        let part = case8_partition(&recs, 3, &mut rng).unwrap();
        let mut all: Vec<usize> = part.check.iter().chain(&part.comparison).copied().collect();
        all.sort_unstable();
        assert_eq!(all, recs.iter().map(|r| r.position).collect::<Vec<_>>());
    }

    #[test]
    fn partition_takes_lowest_remainder() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let recs = case8_records(2 * 2 + 3);
        for _ in 0..50 {
            let part = case8_partition(&recs, 2, &mut rng).unwrap();
            let mut rest: Vec<usize> = recs
                .iter()
                .map(|r| r.position)
                .filter(|p| !part.check.contains(p))
                .collect();
            rest.sort_unstable();
            assert_eq!(part.comparison, rest[..2].to_vec());
        }
    }

    #[test]
    fn partition_rejects_short_supply() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(case8_partition(&case8_records(3), 2, &mut rng).is_err());
    }

    #[test]
    fn partition_is_uniform() {
        const TRIALS: usize = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let recs = case8_records(8);
        let mut hits = vec![0usize; recs.len()];
        for _ in 0..TRIALS {
            for pos in case8_partition(&recs, 4, &mut rng).unwrap().check {
                hits[pos / 3 - 1] += 1;
            }
        }
        let se = (0.25 / TRIALS as f64).sqrt();
        for h in hits {
            assert!((h as f64 / TRIALS as f64 - 0.5).abs() <= 3.0 * se, "{h}");
        }
    }

    #[test]
    fn step5_examples() {
        let recs = case8_records(4);
        let set: Vec<&ParticleRecord> = recs.iter().collect();
        let ann = CheckAnnouncements::honest(&set);
        assert!(step5_check(&set, &ann));
        let mut bad = ann.clone();
        let first = set[0].position;
        let wrong = (set[0].prep_index + 1) % 5;
        bad.user_values.insert(first, wrong);
        assert!(!step5_check(&set, &bad));
    }

    #[test]
    fn finalize_matches_pipeline() {
        let d = dim(19);
        let ms = [7, 2, 9, 10];
        let recs: Vec<ParticleRecord> = ms
            .iter()
            .map(|&m| {
                record(
                    1,
                    Basis::Computational,
                    m,
                    ModeBit::Measure,
                    ModeBit::Measure,
                )
            })
            .collect();
        let sets: Vec<Vec<&ParticleRecord>> = recs.iter().map(|r| vec![r]).collect();
        let key = vec![ModDigit::new(16, d).unwrap()];
        let inputs: Vec<Vec<PrivateDigit>> = [5, 3, 5, 6]
            .iter()
            .map(|&p| vec![PrivateDigit::new(p, d).unwrap()])
            .collect();
        let fin = finalize(d, &sets, &key, &inputs).unwrap();
        assert_eq!(fin.ciphertexts, vec![vec![9], vec![2], vec![11], vec![13]]);
        assert_eq!(
            fin.report.indices[0].ordering_string().unwrap(),
            "p2 < p1 = p3 < p4"
        );
    }
}
