//! Workload helpers for the benchmarks.

use arise_core::frontend::{parse_disassembly, parse_trace, ProgramModel, TraceProfile};
use arise_core::synth::{synth_program, synth_trace, SynthOptions};

/// Program sizes (instructions) the benchmarks sweep over.
pub const SIZES: [usize; 3] = [100, 500, 2000];

/// A synthetic listing plus its aggregated trace, as text and parsed.
pub struct Workload {
    pub asm: String,
    pub trace_text: String,
    pub program: ProgramModel,
    pub trace: TraceProfile,
}

pub fn workload(instrs: usize, seed: u64) -> Workload {
    let opts = SynthOptions { m_ext: true, ..SynthOptions::new(instrs) };
    let asm = synth_program(seed, &opts);
    let program = parse_disassembly(&asm).expect("synthetic listing parses");
    let trace_text = synth_trace(&program, seed);
    let trace = parse_trace(&trace_text, &program).expect("synthetic trace parses");
    Workload { asm, trace_text, program, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn workloads_have_requested_size() {
        for n in SIZES {
            assert_eq!(workload(n, 1).program.blocks().map(|b| b.instrs.len()).sum::<usize>(), n);
        }
    }
}
