mod common;

use arise_core::frontend::parse_disassembly;
use arise_core::synth::{synth_program, synth_trace, SynthOptions};
use arise_core::MetricKind;
use common::*;

/// Regenerates the corpus inputs when `ARISE_UPDATE_GOLDEN=1`; otherwise
/// checks that the checked-in inputs still parse to the advertised sizes.
#[test]
fn corpus_inputs() {
    for &(name, seed, instrs, m_ext) in CORPUS {
        let dir = data_dir().join("corpus");
        if updating_golden() {
            let text = synth_program(seed, &SynthOptions { m_ext, ..SynthOptions::new(instrs) });
            let program = parse_disassembly(&text).unwrap();
            std::fs::write(dir.join(format!("{name}.dis")), &text).unwrap();
            std::fs::write(dir.join(format!("{name}.trace")), synth_trace(&program, seed)).unwrap();
        }
        let program = parse_disassembly(&corpus_text(name, "dis")).unwrap();
        assert_eq!(program.instr_count(), instrs, "{name}");
        assert!((50..=500).contains(&program.instr_count()));
    }
}

#[test]
fn corpus_reports_match_golden() {
    let mut failures = Vec::new();
    for &(name, _, _, m_ext) in CORPUS {
        for metric in MetricKind::ALL {
            let out = run_corpus_entry(name, metric, m_ext);
            for (ext, text) in [("json", &out.report_text), ("core_desc", &out.coredsl)] {
                if let Err(e) = check_golden(&format!("{name}.{metric}.{ext}"), text) {
                    failures.push(e);
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:#?}");
}
