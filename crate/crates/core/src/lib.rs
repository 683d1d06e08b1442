//! Discovery of application-specific fused instructions for RV32 cores.
//!
//! The pipeline reads an objdump-style disassembly (plus an optional
//! execution trace), grows candidate instruction sequences inside basic
//! blocks, ranks them against a cost metric, verifies the winners against an
//! independent reference model, and emits CoreDSL plus a JSON report.

pub mod emitter;
pub mod error;
pub mod frontend;
pub mod generator;
pub mod isa;
pub mod oracle;
pub mod pipeline;
pub mod selector;
pub mod synth;

pub use error::{Error, Result};
pub use frontend::{parse_disassembly, parse_trace, ProgramModel, StaticInstr, TraceProfile};
pub use generator::{generate, CandidatePattern, GenConfig, LivenessMode};
pub use pipeline::{run_evaluate, run_generate, RunOptions, RunOutput, Source};
pub use selector::{select, sel_count, MetricKind, SelConfig};
