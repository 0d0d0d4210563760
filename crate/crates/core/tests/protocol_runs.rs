use msqpc_core::comparison::oracle_matrix;
use msqpc_core::protocol::{
    random_inputs, run_protocol, run_protocol_with, Actor, Case, ForcedParticle, ModeBit, Payload,
    RunControls,
};
use msqpc_core::rng::Substreams;
use msqpc_core::{
    AttackSpec, Basis, ChannelStack, Dimension, ModDigit, PrivateDigit, ProtocolConfig, RunStatus,
};

fn config(d: usize, users: usize, length: usize, seed: u64) -> ProtocolConfig {
    ProtocolConfig::new(Dimension::new(d).unwrap(), users, length, seed).unwrap()
}

#[test]
fn honest_runs_never_abort_on_checks() {
    for d in [3, 5, 19] {
        let streams = Substreams::new(100 + d as u64);
        for trial in 0..150 {
            let cfg = config(d, 3, 2, streams.trial_seed(trial))
                .with_retries(30)
                .unwrap();
            let (inputs, key) = random_inputs(&cfg);
            let t = run_protocol(&cfg, &inputs, &key, &ChannelStack::honest()).unwrap();
            assert_eq!(t.status(), RunStatus::Completed, "d={d} trial={trial}");
            let report = t.outcome.report.as_ref().unwrap();
            assert_eq!(report.indices.len(), 2);
            for (i, m) in report.indices.iter().enumerate() {
                let p: Vec<PrivateDigit> = inputs.iter().map(|p| p[i]).collect();
                assert_eq!(*m, oracle_matrix(&p));
            }
        }
    }
}

#[test]
fn suspension_without_retries_is_a_clean_status() {
    let mut suspended = 0;
    for seed in 0..200 {
        let cfg = config(5, 2, 1, seed);
        let (inputs, key) = random_inputs(&cfg);
        let t = run_protocol(&cfg, &inputs, &key, &ChannelStack::honest()).unwrap();
        match t.status() {
            RunStatus::Completed => assert!(t.outcome.report.is_some()),
            RunStatus::AbortedInsufficientCase8 => {
                suspended += 1;
                assert!(t.outcome.report.is_none());
                assert!(t.ciphertexts.is_empty());
            }
            other => panic!("honest run ended with {other:?}"),
        }
    }
    // P(some user short) = 1 - (1 - P(X < 2))^2 for X ~ Bin(16, 1/8), about 0.63.
    assert!((90..170).contains(&suspended), "{suspended}");
}

#[test]
fn retries_are_counted_and_logged() {
    let cfg = config(3, 2, 1, 0).with_retries(50).unwrap();
    let mut seen_retry = false;
    for seed in 0..30 {
        let cfg = cfg.clone().with_seed(seed);
        let (inputs, key) = random_inputs(&cfg);
        let t = run_protocol(&cfg, &inputs, &key, &ChannelStack::honest()).unwrap();
        let retries = t
            .events
            .iter()
            .filter(|e| matches!(e.payload, Payload::Retry { .. }))
            .count() as u32;
        assert_eq!(retries + 1, t.outcome.attempts);
        seen_retry |= retries > 0;
        assert!(t.events.iter().all(|e| e.attempt < t.outcome.attempts));
    }
    assert!(seen_retry);
}

#[test]
fn cadence_one_particle_in_flight() {
    let cfg = config(5, 3, 1, 4);
    let (inputs, key) = random_inputs(&cfg);
    let strategy = "ir-v2".parse::<AttackSpec>().unwrap().build(cfg.d).unwrap();
    let t = run_protocol(&cfg, &inputs, &key, &ChannelStack::new(strategy)).unwrap();
    let transit: Vec<_> = t
        .events
        .iter()
        .filter(|e| {
            e.step <= 3 && matches!(e.payload, Payload::Send { .. } | Payload::Receive { .. })
        })
        .collect();
    // Per particle: TP1 send, P_n receive, P_n send, TP2 receive, TP2 send, TP1 receive.
    assert_eq!(transit.len(), 3 * 16 * 6);
    for (i, chunk) in transit.chunks(6).enumerate() {
        let user = i / 16 + 1;
        let pos = i % 16 + 1;
        for e in chunk {
            assert_eq!((e.user, e.position), (Some(user), Some(pos)));
        }
        let actors: Vec<Actor> = chunk.iter().map(|e| e.actor).collect();
        assert_eq!(
            actors,
            [
                Actor::Tp1,
                Actor::User(user),
                Actor::User(user),
                Actor::Tp2,
                Actor::Tp2,
                Actor::Tp1
            ]
        );
        assert!(matches!(chunk[0].payload, Payload::Send { .. }));
        assert!(matches!(chunk[5].payload, Payload::Receive { .. }));
    }
    // Eve acts twice per particle under V2, between the matching send and receive.
    let eve = t.events.iter().filter(|e| e.actor == Actor::Eve).count();
    assert_eq!(eve, 3 * 16 * 2);
}

#[test]
fn same_seed_same_transcript_and_events() {
    let cfg = config(19, 2, 1, 7).with_retries(5).unwrap();
    let (inputs, key) = random_inputs(&cfg);
    let a = run_protocol(&cfg, &inputs, &key, &ChannelStack::honest()).unwrap();
    let b = run_protocol(&cfg, &inputs, &key, &ChannelStack::honest()).unwrap();
    let mut la = Vec::new();
    let mut lb = Vec::new();
    msqpc_core::protocol::write_event_lines(&a.events, &mut la).unwrap();
    msqpc_core::protocol::write_event_lines(&b.events, &mut lb).unwrap();
    assert_eq!(la, lb);
    let parsed = msqpc_core::protocol::read_event_lines(std::str::from_utf8(&la).unwrap()).unwrap();
    assert_eq!(parsed, a.events);
    let json = serde_json::to_string(&a).unwrap();
    assert_eq!(
        serde_json::from_str::<msqpc_core::Transcript>(&json).unwrap(),
        a
    );
}

#[test]
fn attack_does_not_shift_honest_randomness() {
    let cfg = config(7, 2, 1, 21);
    let (inputs, key) = random_inputs(&cfg);
    let honest = run_protocol(&cfg, &inputs, &key, &ChannelStack::honest()).unwrap();
    let strategy = "mr:tp1-pn"
        .parse::<AttackSpec>()
        .unwrap()
        .build(cfg.d)
        .unwrap();
    let attacked = run_protocol(&cfg, &inputs, &key, &ChannelStack::new(strategy)).unwrap();
    for (h, a) in honest
        .records
        .iter()
        .flatten()
        .zip(attacked.records.iter().flatten())
    {
        assert_eq!(
            (h.prep_basis, h.prep_index, h.r, h.v),
            (a.prep_basis, a.prep_index, a.r, a.v)
        );
    }
}

#[test]
fn golden_example_through_the_engine() {
    let d = Dimension::new(19).unwrap();
    let cfg = ProtocolConfig::new(d, 4, 1, 0).unwrap();
    let inputs: Vec<Vec<PrivateDigit>> = [5, 3, 5, 6]
        .iter()
        .map(|&p| vec![PrivateDigit::new(p, d).unwrap()])
        .collect();
    let key = vec![ModDigit::new(16, d).unwrap()];
    let mut controls = RunControls::default();
    for (n, m) in [7, 2, 9, 10].into_iter().enumerate() {
        for pos in 1..=2 {
            controls = controls.force(
                n + 1,
                pos,
                ForcedParticle {
                    basis: Basis::Computational,
                    index: m,
                    r: ModeBit::Measure,
                    v: ModeBit::Measure,
                },
            );
        }
        // Remaining positions avoid Case 8 so the comparison particle is pinned.
        for pos in 3..=16 {
            controls = controls.force(
                n + 1,
                pos,
                ForcedParticle {
                    basis: Basis::Fourier,
                    index: pos % 19,
                    r: ModeBit::Reflect,
                    v: ModeBit::Reflect,
                },
            );
        }
    }
    let t = run_protocol_with(&cfg, &inputs, &key, &ChannelStack::honest(), &controls).unwrap();
    assert_eq!(t.status(), RunStatus::Completed);
    assert_eq!(t.ciphertexts, vec![vec![9], vec![2], vec![11], vec![13]]);
    let m = &t.outcome.report.as_ref().unwrap().indices[0];
    assert_eq!(m.ordering_string().unwrap(), "p2 < p1 = p3 < p4");
    assert!(
        t.records
            .iter()
            .flatten()
            .filter(|r| r.case == Case::Case8)
            .count()
            == 8
    );
}
