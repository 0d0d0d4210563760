//! The protocol state machine: preparation, the ping-pong round trip,
//! security checks and the final comparison.

mod checks;
mod engine;
mod events;
mod types;

pub use checks::{
    case8_partition, finalize, party_turn, step4_check, step5_check, Announcements, Case8Partition,
    CheckAnnouncements, Finalized, Step4Result,
};
pub use engine::{
    random_inputs, run_protocol, run_protocol_with, ForcedParticle, RunControls, Transcript,
};
pub use events::{read_event_lines, write_event_lines, Actor, Event, Payload};
pub use types::{
    classify_case, Case, CheckRole, CheckStep, ComparisonReport, ModeBit, ParticleRecord,
    ProtocolConfig, RunOutcome, RunStatus,
};
