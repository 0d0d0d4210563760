use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use msqpc_bench::{config, inputs, pipeline_digits};
use msqpc_core::adversary::{monte_carlo_detection, probe_attack_evaluate, ProbeFamily};
use msqpc_core::{compare_pipeline, run_protocol, AttackSpec, ChannelStack, Dimension};

fn pipeline(c: &mut Criterion) {
    let mut g = c.benchmark_group("compare_pipeline");
    for users in [4, 16, 64] {
        let (m, k, p) = pipeline_digits(19, users);
        g.bench_with_input(BenchmarkId::from_parameter(users), &users, |b, _| {
            b.iter(|| compare_pipeline(&m, k, &p).unwrap())
        });
    }
    g.finish();
}

fn honest_run(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_protocol");
    for d in [3, 19] {
        let cfg = config(d, 4, 2);
        let (p, k) = inputs(&cfg);
        let channel = ChannelStack::honest();
        g.bench_with_input(BenchmarkId::new("honest", d), &d, |b, _| {
            b.iter(|| run_protocol(&cfg, &p, &k, &channel).unwrap())
        });
    }
    let cfg = config(5, 4, 2);
    let (p, k) = inputs(&cfg);
    let probe = ChannelStack::new(
        "probe:shift"
            .parse::<AttackSpec>()
            .unwrap()
            .build(cfg.d)
            .unwrap(),
    );
    g.bench_function("probe-shift/5", |b| {
        b.iter(|| run_protocol(&cfg, &p, &k, &probe).unwrap())
    });
    g.finish();
}

fn probe_evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("probe_attack_evaluate");
    for d in [3, 5, 7] {
        let dm = Dimension::new(d).unwrap();
        let attack = ProbeFamily::ControlledShift.build(dm).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| probe_attack_evaluate(&attack, dm).unwrap())
        });
    }
    g.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let cfg = config(5, 8, 1).with_retries(0).unwrap();
    let strategy = "ir-v1".parse::<AttackSpec>().unwrap().build(cfg.d).unwrap();
    let mut g = c.benchmark_group("monte_carlo_detection");
    g.sample_size(10);
    g.bench_function("ir-v1/d5/100-trials", |b| {
        b.iter(|| monte_carlo_detection(&cfg, &strategy, 100).unwrap())
    });
    g.finish();
}

criterion_group!(benches, pipeline, honest_run, probe_evaluation, monte_carlo);
criterion_main!(benches);
