//! The four-user worked example at d = 19, run through the full engine
//! with its Case-8 measurement values pinned.

use msqpc_core::comparison::decode_with_trace;
use msqpc_core::protocol::{run_protocol_with, CheckRole, ForcedParticle, ModeBit, RunControls};
use msqpc_core::{Basis, ChannelStack, Dimension, ModDigit, PrivateDigit, ProtocolConfig};

const D: usize = 19;
const KEY: usize = 16;
const INPUTS: [usize; 4] = [5, 3, 5, 6];
const MEASURED: [usize; 4] = [7, 2, 9, 10];

fn tuple(v: &[impl std::fmt::Display]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

pub fn run() -> Result<u8, Box<dyn std::error::Error>> {
    let d = Dimension::new(D)?;
    let users = INPUTS.len();
    let cfg = ProtocolConfig::new(d, users, 1, 0)?;
    let inputs = INPUTS
        .iter()
        .map(|&p| Ok(vec![PrivateDigit::new(p, d)?]))
        .collect::<msqpc_core::Result<Vec<_>>>()?;
    let key = vec![ModDigit::new(KEY, d)?];

    // Positions 1-2 of every sequence are Case 8 with the example's
    // values; the rest are reflected T2 particles (Case 2).
    let mut controls = RunControls::default();
    for (n, &m) in MEASURED.iter().enumerate() {
        for pos in 1..=cfg.sequence_len() {
            let forced = if pos <= 2 * cfg.length {
                ForcedParticle {
                    basis: Basis::Computational,
                    index: m,
                    r: ModeBit::Measure,
                    v: ModeBit::Measure,
                }
            } else {
                ForcedParticle {
                    basis: Basis::Fourier,
                    index: pos % D,
                    r: ModeBit::Reflect,
                    v: ModeBit::Reflect,
                }
            };
            controls = controls.force(n + 1, pos, forced);
        }
    }
    let t = run_protocol_with(&cfg, &inputs, &key, &ChannelStack::honest(), &controls)?;
    let Some(report) = &t.outcome.report else {
        return Err(format!("example run ended with status {}", t.status()).into());
    };

    let c: Vec<ModDigit> = t
        .ciphertexts
        .iter()
        .map(|c| ModDigit::new(c[0], d))
        .collect::<Result<_, _>>()?;
    let m: Vec<ModDigit> = t
        .records
        .iter()
        .map(|recs| {
            let rec = recs
                .iter()
                .find(|r| r.check_role == CheckRole::Comparison)
                .expect("comparison particle");
            ModDigit::new(rec.tp1_final_measurement.expect("measured"), d)
        })
        .collect::<Result<_, _>>()?;
    let trace = decode_with_trace(&c, &m)?;
    if trace.relations != report.indices[0] {
        return Err("trace disagrees with the engine's report".into());
    }

    println!("d = {D}, h = {}, N = {users}, L = 1, k = {KEY}", d.h());
    println!("p = {}", tuple(&INPUTS));
    println!(
        "m = {}",
        tuple(&m.iter().map(|x| x.value()).collect::<Vec<_>>())
    );
    println!("c = {}", tuple(&trace.c));
    println!("f = {}", tuple(&trace.f));
    for p in &trace.pairs {
        println!(
            "R{}{} = {}, y{}{} = {}",
            p.n, p.other, p.r, p.n, p.other, p.y as i8
        );
    }
    println!(
        "R = {}",
        tuple(&trace.pairs.iter().map(|p| p.r).collect::<Vec<_>>())
    );
    println!(
        "y = {}",
        tuple(&trace.pairs.iter().map(|p| p.y as i8).collect::<Vec<_>>())
    );
    println!(
        "verdict: {}",
        report.indices[0]
            .ordering_string()
            .unwrap_or_else(|| "inconsistent".into())
    );
    Ok(0)
}
