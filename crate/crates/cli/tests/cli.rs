use std::process::{Command, Output};

use msqpc_core::RunReport;

fn msqpc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msqpc"))
        .args(args)
        .env_remove("MSQPC_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn example_prints_the_chain() {
    let o = msqpc(&["example"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for line in [
        "c = (9, 2, 11, 13)",
        "f = (2, 0, 2, 3)",
        "R24 = 16, y24 = -1",
        "R = (2, 0, 18, 17, 16, 18)",
        "y = (1, 0, -1, -1, -1, -1)",
        "verdict: p2 < p1 = p3 < p4",
    ] {
        assert!(
            text.lines().any(|l| l == line),
            "missing {line:?} in\n{text}"
        );
    }
}

#[test]
fn even_dimension_is_a_usage_error() {
    let o = msqpc(&["run", "--d", "6"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("h = (d-1)/2"), "{err}");
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(msqpc(&["run", "--attack", "ir-v9"]).status.code(), Some(2));
    assert_eq!(msqpc(&["attack"]).status.code(), Some(2));
    assert_eq!(msqpc(&["run", "--users", "x"]).status.code(), Some(2));
    assert_eq!(msqpc(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_config_is_a_runtime_error() {
    let o = msqpc(&["run", "--users", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_is_deterministic() {
    let args = [
        "run", "--d", "19", "--users", "2", "--length", "1", "--seed", "7",
    ];
    let a = msqpc(&args);
    let b = msqpc(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn seed_from_environment() {
    let flag = Command::new(env!("CARGO_BIN_EXE_msqpc"))
        .args(["run", "--seed", "11", "--retries", "9"])
        .output()
        .unwrap();
    let env = Command::new(env!("CARGO_BIN_EXE_msqpc"))
        .args(["run", "--retries", "9"])
        .env("MSQPC_SEED", "11")
        .output()
        .unwrap();
    assert_eq!(flag.stdout, env.stdout);
}

#[test]
fn exit_codes_follow_status() {
    let mut seen = std::collections::BTreeSet::new();
    for seed in 0..12 {
        let s = seed.to_string();
        for attack in ["none", "ir-v1"] {
            let o = msqpc(&["run", "--seed", &s, "--attack", attack]);
            let report = RunReport::from_json(&stdout(&o)).unwrap();
            let expected = match report.outcome.status {
                msqpc_core::RunStatus::Completed => 0,
                msqpc_core::RunStatus::AbortedStep4Eavesdrop => 3,
                msqpc_core::RunStatus::AbortedInsufficientCase8 => 4,
                msqpc_core::RunStatus::AbortedStep5ErrorRate => 5,
            };
            assert_eq!(o.status.code(), Some(expected));
            seen.insert(expected);
        }
    }
    assert!(
        seen.contains(&0) && seen.contains(&3) && seen.contains(&4),
        "{seen:?}"
    );
}

#[test]
fn report_round_trips_and_labels_efficiency() {
    let o = msqpc(&[
        "run",
        "--d",
        "7",
        "--users",
        "3",
        "--length",
        "2",
        "--seed",
        "5",
        "--retries",
        "50",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let report = RunReport::from_json(&text).unwrap();
    assert_eq!(report.schema, 1);
    assert_eq!(report.to_json() + "\n", text);
    assert_eq!(report.efficiency.len(), 2);
    assert!(text.contains("\"neglect-checks\"") && text.contains("\"count-everything\""));
}

#[test]
fn events_are_json_lines() {
    let dir = std::env::temp_dir().join(format!("msqpc-events-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("events.jsonl");
    let o = msqpc(&["run", "--seed", "2", "--events", path.to_str().unwrap()]);
    assert!(o.status.code().is_some());
    let text = std::fs::read_to_string(&path).unwrap();
    let events = msqpc_core::protocol::read_event_lines(&text).unwrap();
    assert_eq!(events.len(), text.lines().count());
    assert!(events.len() > 2 * 16 * 6);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn attack_report_carries_reference() {
    let o = msqpc(&[
        "attack", "--attack", "ir-v1", "--d", "5", "--trials", "2000",
    ]);
    assert!(o.status.success());
    let report = RunReport::from_json(&stdout(&o)).unwrap();
    let stats = report.detection.unwrap();
    let c3 = stats.cell(msqpc_core::protocol::Case::Case3);
    assert_eq!(c3.reference, Some(0.8));
    assert!(c3.consistent(3.0), "{}/{}", c3.detected, c3.attacked);
}

#[test]
fn sweep_writes_csv() {
    let o = msqpc(&[
        "sweep",
        "--dims",
        "3,5",
        "--attacks",
        "ir-v2,mr:pn-tp2",
        "--trials",
        "20",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("d,attack,case,step,attacked,detected,rate,stderr,reference")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 2 * 8);
    assert!(rows.iter().all(|r| r.split(',').count() == 9));
    assert!(rows[0].starts_with("3,ir-v2,1,step4,"));
}

#[test]
fn timing_is_opt_in() {
    let plain = stdout(&msqpc(&["run", "--seed", "1"]));
    assert!(!plain.contains("elapsed_ms"));
    let timed = stdout(&msqpc(&["run", "--seed", "1", "--timing"]));
    assert!(timed.contains("elapsed_ms"));
}
