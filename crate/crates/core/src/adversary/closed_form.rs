use super::{AttackKind, InterceptVariant};
use crate::protocol::Case;
use crate::qudit::{Basis, Dimension};

/// Analytic detection probability for one attacked particle of `case`.
///
/// Step-4 cases give the probability the particle fails TP1's comparison.
/// Case 8 gives the Step-5 figure, which already includes the 1/2 chance
/// that the particle is drawn into the check set when exactly 2L Case-8
/// particles exist. Ignored cases are never inspected, so their rate is 0.
///
/// Returns `None` for probe attacks; those are evaluated exactly by
/// [`super::probe_attack_evaluate`].
pub fn closed_form_detection(kind: &AttackKind, d: Dimension, case: Case) -> Option<f64> {
    let dd = d.get() as f64;
    let full = (dd - 1.0) / dd;
    let half = full / 2.0;
    if case.is_ignored() {
        return match kind {
            AttackKind::EntangleMeasureProbe(_) => None,
            _ => Some(0.0),
        };
    }
    match kind {
        AttackKind::NoAttack => Some(0.0),
        AttackKind::InterceptResend(variant) => {
            // Genuine T2 particles always reach TP1 unchanged in Case 2.
            if case.scenario().0 == Basis::Fourier {
                return Some(0.0);
            }
            let rate = match (variant, case) {
                (_, Case::Case1) => 0.0,
                (_, Case::Case8) => half,
                (InterceptVariant::V1, Case::Case3) => full,
                (InterceptVariant::V1, Case::Case4) => 0.0,
                (InterceptVariant::V2, Case::Case3 | Case::Case4) => full,
                (InterceptVariant::V3, Case::Case3) => 0.0,
                (InterceptVariant::V3, Case::Case4) => full,
                _ => return None,
            };
            Some(rate)
        }
        // A T1 measurement is invisible on T1 originals; on a T2 original in
        // Case 2 TP1 reads the prepared index with probability 1/d.
        AttackKind::MeasureResend(_) => Some(if case == Case::Case2 { full } else { 0.0 }),
        AttackKind::EntangleMeasureProbe(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::ChannelSegment;

    fn dim(d: usize) -> Dimension {
        Dimension::new(d).unwrap()
    }

    #[test]
    fn published_entries() {
        let v1 = AttackKind::InterceptResend(InterceptVariant::V1);
        let v2 = AttackKind::InterceptResend(InterceptVariant::V2);
        let v3 = AttackKind::InterceptResend(InterceptVariant::V3);
        assert_eq!(
            closed_form_detection(&v1, dim(19), Case::Case3),
            Some(18.0 / 19.0)
        );
        assert_eq!(
            closed_form_detection(&v1, dim(19), Case::Case8),
            Some(18.0 / 38.0)
        );
        assert_eq!(closed_form_detection(&v2, dim(5), Case::Case4), Some(0.8));
        assert_eq!(closed_form_detection(&v3, dim(5), Case::Case8), Some(0.4));
        for d in [3, 5, 19] {
            assert_eq!(closed_form_detection(&v3, dim(d), Case::Case3), Some(0.0));
            assert_eq!(closed_form_detection(&v1, dim(d), Case::Case1), Some(0.0));
            assert_eq!(closed_form_detection(&v2, dim(d), Case::Case6), Some(0.0));
        }
    }

    #[test]
    fn measure_resend_entries() {
        let mr = AttackKind::MeasureResend(ChannelSegment::Tp1ToUser);
        assert!(
            (closed_form_detection(&mr, dim(3), Case::Case2).unwrap() - 2.0 / 3.0).abs() < 1e-15
        );
        for c in [
            Case::Case1,
            Case::Case3,
            Case::Case4,
            Case::Case8,
            Case::Case7,
        ] {
            assert_eq!(closed_form_detection(&mr, dim(3), c), Some(0.0));
        }
    }

    #[test]
    fn measure_resend_case2_from_born_rule() {
        use crate::qudit::QuditState;
        // Collapse F|t> onto each |k> with prob 1/d, then TP1 reads t in T2
        // with prob |<J_t|k>|^2; detection is one minus the total.
        for d in [3, 5, 19] {
            let dm = dim(d);
            let mut pass = 0.0;
            let t = 1;
            let f = QuditState::prepare(dm, Basis::Fourier, t).unwrap();
            for k in 0..d {
                let pk = f.outcome_probability(Basis::Computational, k).unwrap();
                let z = QuditState::prepare(dm, Basis::Computational, k).unwrap();
                pass += pk * z.outcome_probability(Basis::Fourier, t).unwrap();
            }
            let mr = AttackKind::MeasureResend(ChannelSegment::UserToTp2);
            assert!(
                (closed_form_detection(&mr, dm, Case::Case2).unwrap() - (1.0 - pass)).abs() < 1e-12
            );
        }
    }
}
