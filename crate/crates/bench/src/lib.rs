//! Fixtures shared by the benchmarks.

use msqpc_core::protocol::random_inputs;
use msqpc_core::{Dimension, ModDigit, PrivateDigit, ProtocolConfig};

pub fn config(d: usize, users: usize, length: usize) -> ProtocolConfig {
    ProtocolConfig::new(Dimension::new(d).expect("odd d >= 3"), users, length, 1)
        .and_then(|c| c.with_retries(255))
        .expect("valid config")
}

pub fn inputs(cfg: &ProtocolConfig) -> (Vec<Vec<PrivateDigit>>, Vec<ModDigit>) {
    random_inputs(cfg)
}

/// One digit per user for `compare_pipeline`.
pub fn pipeline_digits(d: usize, users: usize) -> (Vec<ModDigit>, ModDigit, Vec<PrivateDigit>) {
    let dm = Dimension::new(d).expect("odd d >= 3");
    let m = (0..users)
        .map(|n| ModDigit::new(n * 7 % d, dm).unwrap())
        .collect();
    let p = (0..users)
        .map(|n| PrivateDigit::new(n % (dm.h() + 1), dm).unwrap())
        .collect();
    (m, ModDigit::new(d - 1, dm).unwrap(), p)
}
