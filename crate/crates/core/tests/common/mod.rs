#![allow(dead_code)]

use std::path::PathBuf;

use arise_core::pipeline::{run_generate, RunOptions, RunOutput, Source};
use arise_core::synth::{synth_program, SynthOptions};
use arise_core::MetricKind;

pub const DEMO: &str = include_str!("../data/demo.dis");

/// Bundled corpus: (name, seed, instructions, multiply/divide enabled).
pub const CORPUS: &[(&str, u64, usize, bool)] = &[
    ("prog01", 101, 50, false),
    ("prog02", 102, 80, false),
    ("prog03", 103, 120, true),
    ("prog04", 104, 160, false),
    ("prog05", 105, 200, false),
    ("prog06", 106, 250, true),
    ("prog07", 107, 300, false),
    ("prog08", 108, 350, false),
    ("prog09", 109, 400, true),
    ("prog10", 110, 450, false),
    ("prog11", 111, 480, false),
    ("prog12", 112, 500, true),
];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data")
}

pub fn updating_golden() -> bool {
    std::env::var("ARISE_UPDATE_GOLDEN").is_ok_and(|v| v == "1")
}

pub fn corpus_text(name: &str, ext: &str) -> String {
    let path = data_dir().join("corpus").join(format!("{name}.{ext}"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn corpus_options(metric: MetricKind, m_ext: bool) -> RunOptions {
    RunOptions { metric, include_m_ext: m_ext, equivalence_trials: 200, ..RunOptions::default() }
}

pub fn run_corpus_entry(name: &str, metric: MetricKind, m_ext: bool) -> RunOutput {
    let asm = corpus_text(name, "dis");
    let trace = corpus_text(name, "trace");
    run_generate(
        Source::new(&format!("{name}.dis"), &asm),
        Some(Source::new(&format!("{name}.trace"), &trace)),
        &corpus_options(metric, m_ext),
    )
    .unwrap_or_else(|e| panic!("{name} {metric}: {e}"))
}

/// Fuzz program text for a seed, sized between 50 and 500 instructions.
pub fn fuzz_program(seed: u64) -> String {
    let instrs = 50 + (seed.wrapping_mul(7919) % 451) as usize;
    synth_program(seed, &SynthOptions { m_ext: seed.is_multiple_of(3), ..SynthOptions::new(instrs) })
}

/// Golden-file comparison, or rewrite when updating.
pub fn check_golden(rel: &str, actual: &str) -> Result<(), String> {
    let path = data_dir().join("golden").join(rel);
    if updating_golden() {
        std::fs::write(&path, actual).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        let line = expected
            .lines()
            .zip(actual.lines())
            .position(|(a, b)| a != b)
            .map_or_else(|| "length".to_string(), |i| format!("line {}", i + 1));
        Err(format!("{rel} differs from golden at {line}"))
    }
}
