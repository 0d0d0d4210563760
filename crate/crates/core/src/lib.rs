//! Simulator for multi-party semiquantum private comparison with d-level
//! single particles.
//!
//! A quantum third party TP1 sends qudits prepared in the computational
//! (T1) or Fourier (T2) basis on a round trip through a classical user
//! P_n and a classical helper TP2. Each classical party either reflects a
//! particle or measures and resends it in T1. Correlated T1 outcomes become
//! a shared one-time pad used to compare private digits modulo d.
//!
//! ```
//! use msqpc_core::{compare_pipeline, Dimension, ModDigit, PrivateDigit};
//!
//! let d = Dimension::new(19).unwrap();
//! let m: Vec<_> = [7, 2, 9, 10].iter().map(|&v| ModDigit::new(v, d).unwrap()).collect();
//! let p: Vec<_> = [5, 3, 5, 6].iter().map(|&v| PrivateDigit::new(v, d).unwrap()).collect();
//! let k = ModDigit::new(16, d).unwrap();
//! let rel = compare_pipeline(&m, k, &p).unwrap();
//! assert_eq!(rel.ordering_string().unwrap(), "p2 < p1 = p3 < p4");
//! ```

pub mod adversary;
pub mod analysis;
pub mod comparison;
pub mod error;
pub mod protocol;
pub mod qudit;
pub mod register;
pub mod report;
pub mod rng;

pub use adversary::{
    AttackKind, AttackSpec, AttackStrategy, ChannelSegment, ChannelStack, DetectionStats,
};
pub use analysis::{count_resources, efficiency, CountingConvention, EfficiencyInput};
pub use comparison::{
    compare_pipeline, compare_with_trace, direct_oracle, ComparisonTrace, ModDigit, PrivateDigit,
    Relation, RelationMatrix,
};
pub use error::{Error, Result};
pub use protocol::{run_protocol, ProtocolConfig, RunStatus, Transcript};
pub use qudit::{Basis, Dimension, QuditState};
pub use register::Register;
pub use report::RunReport;
