mod common;

use arise_core::frontend::{parse_disassembly, parse_trace, ProgramModel};
use arise_core::generator::{generalize, generate, grow_runs, GenConfig, LivenessMode, INSTR_BITS, REG_BITS};
use arise_core::isa::{base_template, eval_sem, fits, min_width, Signedness, SlotValues};
use arise_core::oracle::{recount, reference_exec, rewrite};
use arise_core::pipeline::{run_generate, RunOptions, Source};
use arise_core::selector::{scan_block, sel_count, select, MetricKind, SelConfig};
use arise_core::synth::synth_trace;
use common::fuzz_program;
use proptest::prelude::*;

const BASES: &[&str] = &[
    "add", "sub", "and", "or", "xor", "sll", "srl", "sra", "slt", "sltu", "addi", "andi", "ori", "xori", "slti",
    "sltiu", "slli", "srli", "srai", "lui", "mv", "li", "mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu",
];

fn program(seed: u64) -> ProgramModel {
    parse_disassembly(&fuzz_program(seed)).unwrap()
}

type Shape = Vec<(String, Vec<Vec<(u32, u8, u32, String, String)>>)>;

/// Everything but the original source text.
fn shape(p: &ProgramModel) -> Shape {
    p.functions
        .iter()
        .map(|f| {
            let blocks = f
                .blocks
                .iter()
                .map(|b| {
                    b.instrs
                        .iter()
                        .map(|i| (i.address, i.byte_size, i.encoding, i.mnemonic.clone(), format!("{:?}", i.operands)))
                        .collect()
                })
                .collect();
            (f.name.clone(), blocks)
        })
        .collect()
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn word() -> impl Strategy<Value = u32> {
    prop_oneof![
        Just(0u32),
        Just(1),
        Just(u32::MAX),
        Just(0x8000_0000),
        Just(0x7fff_ffff),
        0u32..64,
        any::<u32>(),
    ]
}

proptest! {
    #![proptest_config(config(512))]

    #[test]
    fn templates_agree_with_reference_alu(idx in 0..BASES.len(), a in word(), b in word(), imm in -2048i64..2048) {
        let base = BASES[idx];
        let t = base_template(base).unwrap();
        let imm = match base {
            "slli" | "srli" | "srai" => imm.rem_euclid(32),
            "lui" => imm.rem_euclid(1 << 20),
            _ => imm,
        };
        let values = SlotValues { reads: vec![a, b], imms: vec![imm as u32] };
        let uses_imm = matches!(base, "addi" | "andi" | "ori" | "xori" | "slti" | "sltiu" | "slli" | "srli" | "srai" | "lui" | "li");
        let expected = reference_exec(base, &[a, b], uses_imm.then_some(imm)).unwrap();
        prop_assert_eq!(eval_sem(&t, &values).unwrap(), expected);
    }

    #[test]
    fn min_width_is_minimal(v in -5000i64..5000) {
        let w = min_width(v, Signedness::Signed);
        prop_assert!(fits(v, w, Signedness::Signed));
        prop_assert!(w == 1 || !fits(v, w - 1, Signedness::Signed));
        if v >= 0 {
            let u = min_width(v, Signedness::Unsigned);
            prop_assert!(fits(v, u, Signedness::Unsigned));
            prop_assert!(u == 1 || !fits(v, u - 1, Signedness::Unsigned));
        }
    }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn listing_text_round_trips(seed in any::<u64>()) {
        let p = program(seed);
        let again = parse_disassembly(&p.to_text()).unwrap();
        prop_assert_eq!(shape(&again), shape(&p));
        let rebuilt = ProgramModel::from_functions(p.flatten()).unwrap();
        prop_assert_eq!(&rebuilt.functions, &p.functions);
    }

    #[test]
    fn blocks_end_only_at_control_flow(seed in any::<u64>()) {
        let p = program(seed);
        for b in p.blocks() {
            prop_assert!(!b.instrs.is_empty());
            for i in &b.instrs[..b.instrs.len() - 1] {
                prop_assert!(!i.is_control_flow());
            }
        }
    }

    #[test]
    fn candidates_respect_budget(seed in any::<u64>(), bits in 7u8..=12, lenient in any::<bool>()) {
        let p = program(seed);
        let liveness = if lenient { LivenessMode::Paper } else { LivenessMode::Strict };
        let cfg = GenConfig { opcode_bits: bits, liveness, include_m_ext: true, ..GenConfig::default() };
        for c in generate(&p, &cfg).unwrap() {
            c.check_invariants().unwrap();
            prop_assert_eq!(c.budget.total(), INSTR_BITS);
            prop_assert!(c.len() >= 2);
            for f in &c.imm_fields {
                prop_assert!(f.width >= 1 && f.width <= f.max_width);
            }
            // Padding only remains once every immediate reached its cap.
            if c.budget.padding > 0 {
                prop_assert!(c.imm_fields.iter().all(|f| f.width == f.max_width));
            }
        }
    }

    #[test]
    fn strict_runs_match_in_place(seed in any::<u64>()) {
        let p = program(seed);
        let cfg = GenConfig::default();
        for run in grow_runs(&p, &cfg).unwrap() {
            let block = p.block(run.block);
            let pat = generalize(&block.instrs[run.start..run.start + run.len], &cfg).unwrap();
            let site = arise_core::selector::match_at(block, run.start, &pat, LivenessMode::Strict, None);
            prop_assert!(site.is_some(), "{} does not match where it was grown", pat.name);
        }
    }

    #[test]
    fn wider_opcodes_never_widen_immediates(seed in any::<u64>()) {
        let p = program(seed);
        let wide = GenConfig { opcode_bits: 10, ..GenConfig::default() };
        for run in grow_runs(&p, &wide).unwrap() {
            let seq = &p.block(run.block).instrs[run.start..run.start + run.len];
            let mut prev: Option<Vec<u8>> = None;
            for bits in 7u8..=10 {
                let c = generalize(seq, &GenConfig { opcode_bits: bits, ..GenConfig::default() }).unwrap();
                let free = INSTR_BITS - bits as u32 - REG_BITS * c.reg_slot_count() as u32;
                prop_assert_eq!(c.budget.imm_bits as u32 + c.budget.padding as u32, free);
                let widths: Vec<u8> = c.imm_fields.iter().map(|f| f.width).collect();
                if let Some(prev) = &prev {
                    prop_assert!(widths.iter().zip(prev).all(|(w, p)| w <= p));
                }
                prev = Some(widths);
            }
            prop_assert!(sel_count(7) < sel_count(8) && sel_count(8) < sel_count(9) && sel_count(9) < sel_count(10));
        }
    }

    #[test]
    fn greedy_sites_never_overlap(seed in any::<u64>()) {
        let p = program(seed);
        for c in generate(&p, &GenConfig::default()).unwrap() {
            for b in p.blocks() {
                let sites = scan_block(b, &c, LivenessMode::Strict, None);
                for pair in sites.windows(2) {
                    prop_assert!(pair[0].end() <= pair[1].start);
                }
                for s in &sites {
                    prop_assert!(s.end() <= b.instrs.len());
                }
            }
        }
    }

    #[test]
    fn selection_is_bounded_and_sorted(seed in any::<u64>(), bits in 7u8..=9, m in 0usize..3) {
        let p = program(seed);
        let trace = parse_trace(&synth_trace(&p, seed), &p).unwrap();
        let cands = generate(&p, &GenConfig { opcode_bits: bits, ..GenConfig::default() }).unwrap();
        let cfg = SelConfig { opcode_bits: bits, metric: MetricKind::ALL[m], liveness: LivenessMode::Strict };
        let sel = select(&cands, &p, Some(&trace), &cfg).unwrap();
        prop_assert!(sel.len() <= sel_count(bits) as usize);
        for pair in sel.windows(2) {
            prop_assert!(pair[0].improvement >= pair[1].improvement);
        }
        prop_assert!(sel.iter().all(|s| s.improvement > 0));
    }

    #[test]
    fn dynamic_count_is_conserved(seed in any::<u64>(), m in 0usize..3) {
        let p = program(seed);
        let trace = parse_trace(&synth_trace(&p, seed), &p).unwrap();
        let cands = generate(&p, &GenConfig::default()).unwrap();
        let cfg = SelConfig { opcode_bits: 9, metric: MetricKind::ALL[m], liveness: LivenessMode::Strict };
        let sel: Vec<_> = select(&cands, &p, Some(&trace), &cfg).unwrap().into_iter().map(|s| s.pattern).collect();
        let rw = rewrite(&p, &sel, LivenessMode::Strict, Some(&trace));
        let rc = recount(&p, &rw, Some(&trace));
        let removed: u64 = rw.log.iter().map(|r| (r.site.len as u64 - 1) * r.site.exec_count).sum();
        let dc = rc.dynamic_count.unwrap();
        prop_assert_eq!(dc.after, dc.baseline - removed);
        // Replacements never overlap within a block.
        let mut spans: Vec<_> = rw.log.iter().map(|r| (r.site.block, r.site.start, r.site.end())).collect();
        spans.sort();
        for pair in spans.windows(2) {
            prop_assert!(pair[0].0 != pair[1].0 || pair[0].2 <= pair[1].1);
        }
    }

    #[test]
    fn trace_formats_agree(seed in any::<u64>()) {
        let p = program(seed);
        let agg = parse_trace(&synth_trace(&p, seed), &p).unwrap();
        let mut single = String::new();
        for (addr, n) in &agg.counts {
            for _ in 0..(*n).min(3) {
                single.push_str(&format!("{addr:x}\n"));
            }
        }
        let s = parse_trace(&single, &p).unwrap();
        for (addr, n) in &agg.counts {
            prop_assert_eq!(s.count(*addr), (*n).min(3));
        }
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn pipeline_is_deterministic(seed in any::<u64>()) {
        let asm = fuzz_program(seed);
        let p = parse_disassembly(&asm).unwrap();
        let trace = synth_trace(&p, seed);
        let opts = RunOptions { metric: MetricKind::DynamicCount, equivalence_trials: 100, include_m_ext: true, ..RunOptions::default() };
        let run = || run_generate(Source::new("a", &asm), Some(Source::new("t", &trace)), &opts).unwrap();
        let (a, b) = (run(), run());
        prop_assert_eq!(a.coredsl, b.coredsl);
        prop_assert_eq!(a.report_text, b.report_text);
    }
}
