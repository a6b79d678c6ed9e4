//! Hybrid closed loops: templated output feedback, its sample-and-hold
//! special case, and templated state feedback.

mod arc;
mod csv_out;
mod sim;

pub use arc::{ArcFlags, HybridArc, HybridState, IntegratorParams, JumpRecord, LoopVariant, Sample, Segment};
pub use csv_out::{arc_header, write_arc_csv};
pub use sim::{jump_map, simulate, simulate_sample_hold, simulate_state_feedback, JumpOutcome, MU_MAX_FACTOR};
