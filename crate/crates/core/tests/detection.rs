use msqpc_core::adversary::{
    monte_carlo_detection, probe_attack_evaluate, AttackKind, ProbeFamily,
};
use msqpc_core::protocol::Case;
use msqpc_core::{AttackSpec, Dimension, ProtocolConfig};

fn config(d: usize) -> ProtocolConfig {
    ProtocolConfig::new(Dimension::new(d).unwrap(), 8, 1, 0xD0 + d as u64).unwrap()
}

fn run(d: usize, attack: &str, trials: usize) -> msqpc_core::DetectionStats {
    let cfg = config(d);
    let strategy = attack.parse::<AttackSpec>().unwrap().build(cfg.d).unwrap();
    monte_carlo_detection(&cfg, &strategy, trials).unwrap()
}

#[test]
fn intercept_resend_matches_closed_forms() {
    for d in [3, 5] {
        for attack in ["ir-v1", "ir-v2", "ir-v3"] {
            let stats = run(d, attack, 600);
            for cell in &stats.cells {
                assert!(cell.attacked > 100, "{attack} d={d} {:?}", cell.case);
                assert!(
                    cell.consistent(3.0),
                    "{attack} d={d} {:?}: {}/{} vs {:?}",
                    cell.case,
                    cell.detected,
                    cell.attacked,
                    cell.reference
                );
            }
        }
    }
}

#[test]
fn zero_cells_are_exactly_zero() {
    let stats = run(5, "ir-v3", 300);
    assert_eq!(stats.cell(Case::Case3).detected, 0);
    assert_eq!(stats.cell(Case::Case1).detected, 0);
    for seg in ["tp1-pn", "pn-tp2", "tp2-tp1"] {
        let stats = run(5, &format!("mr:{seg}"), 200);
        for case in [Case::Case1, Case::Case3, Case::Case4, Case::Case8] {
            assert_eq!(stats.cell(case).detected, 0, "{seg} {case:?}");
            assert_eq!(stats.cell(case).mismatched, 0, "{seg} {case:?}");
        }
        assert!(stats.cell(Case::Case2).consistent(3.0));
    }
}

#[test]
fn case8_mismatch_is_twice_the_step5_rate() {
    let stats = run(3, "ir-v1", 800);
    let c8 = stats.cell(Case::Case8);
    let mismatch = c8.mismatch_rate().unwrap();
    let se = (mismatch * (1.0 - mismatch) / c8.mismatch_attacked as f64).sqrt();
    assert!((mismatch - 2.0 / 3.0).abs() < 3.0 * se, "{mismatch}");
    assert!(c8.mismatch_attacked > c8.attacked);
}

#[test]
fn controlled_shift_case2_empirical() {
    let stats = run(3, "probe:shift", 800);
    let c2 = stats.cell(Case::Case2);
    assert!((c2.reference.unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!(c2.consistent(3.0), "{}/{}", c2.detected, c2.attacked);
    for case in [Case::Case1, Case::Case3, Case::Case4, Case::Case8] {
        assert!(stats.cell(case).consistent(3.0), "{case:?}");
    }
}

#[test]
fn identity_probe_is_invisible() {
    let stats = run(5, "probe:identity", 200);
    assert!(stats
        .cells
        .iter()
        .all(|c| c.detected == 0 && c.reference == Some(0.0)));
}

#[test]
fn merge_is_order_independent() {
    let a = run(3, "ir-v2", 40);
    let cfg = config(3).with_seed(99);
    let strategy = "ir-v2".parse::<AttackSpec>().unwrap().build(cfg.d).unwrap();
    let b = monte_carlo_detection(&cfg, &strategy, 30).unwrap();
    let mut ab = a.clone();
    ab.merge(&b);
    let mut ba = b.clone();
    ba.merge(&a);
    assert_eq!(ab, ba);
    assert_eq!(ab.trials, 70);
}

#[test]
fn fractional_family_dichotomy() {
    let d = Dimension::new(3).unwrap();
    let mut last = -1.0;
    for i in 0..10 {
        let theta = i as f64 / 9.0;
        let attack = ProbeFamily::FractionalShift(theta).build(d).unwrap();
        let eval = probe_attack_evaluate(&attack, d).unwrap();
        assert!(eval.max_norm_defect < 1e-10);
        let detected = eval.total_failure() > 1e-12;
        assert_eq!(!detected, eval.probes_independent(), "theta={theta}");
        assert_eq!(detected, i > 0, "theta={theta}");
        let c2 = eval.failure(Case::Case2).unwrap();
        assert!(c2 > last, "theta={theta}");
        last = c2;
    }
    assert!((last - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn references_follow_attack_kind() {
    let cfg = config(19);
    let strategy = "probe:shift-undo"
        .parse::<AttackSpec>()
        .unwrap()
        .build(cfg.d)
        .unwrap();
    assert!(matches!(strategy.kind, AttackKind::EntangleMeasureProbe(_)));
    assert_eq!(strategy.label, "probe:shift-undo");
    let stats = run(19, "ir-v1", 1);
    assert_eq!(stats.cell(Case::Case3).reference, Some(18.0 / 19.0));
    assert_eq!(stats.cell(Case::Case8).reference, Some(9.0 / 19.0));
}
