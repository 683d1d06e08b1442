//! End-to-end runs: parse, generate, select, verify, emit.
//!
//! Everything here works on in-memory text so that the command-line front
//! end, the tests and the benchmarks share one code path.

use log::{debug, info};
use serde_json::Value;

use crate::emitter::{
    assign_opcodes, emit_coredsl, emit_report, instruction_names, CandidateRecord, ConfigEcho, EncodingLayout,
    Improvements, Pct, ReportDocument, SiteRecord, Totals, Warnings,
};
use crate::error::{Error, Result};
use crate::frontend::{parse_disassembly_named, parse_trace_named, ProgramModel, TraceProfile};
use crate::generator::{generate, CandidatePattern, GenConfig, LivenessMode};
use crate::oracle::{check_equivalence, recount, rewrite, Recount, RewrittenProgram};
use crate::selector::{score, sel_count, select, MetricKind, Scored, SelConfig, CUSTOM_BITS, CUSTOM_COUNT};

/// Loop bound used by the greedy matcher, echoed in every report.
pub const LOOP_BOUND: &str = "index + size(pattern) <= size(block)";

/// Named input text.
#[derive(Clone, Copy, Debug)]
pub struct Source<'a> {
    pub name: &'a str,
    pub text: &'a str,
}

impl<'a> Source<'a> {
    pub fn new(name: &'a str, text: &'a str) -> Self {
        Source { name, text }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub metric: MetricKind,
    pub opcode_bits: u8,
    pub liveness: LivenessMode,
    pub seed: u64,
    pub include_m_ext: bool,
    pub equivalence_trials: u32,
    pub set_name: String,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            metric: MetricKind::StaticSize,
            opcode_bits: 9,
            liveness: LivenessMode::Strict,
            seed: 0,
            include_m_ext: false,
            equivalence_trials: 1000,
            set_name: "XFused".to_string(),
        }
    }
}

impl RunOptions {
    pub fn gen_config(&self) -> GenConfig {
        GenConfig {
            opcode_bits: self.opcode_bits,
            liveness: self.liveness,
            include_m_ext: self.include_m_ext,
            ..GenConfig::default()
        }
    }

    pub fn sel_config(&self) -> SelConfig {
        SelConfig { opcode_bits: self.opcode_bits, metric: self.metric, liveness: self.liveness }
    }

    /// Checks everything that can be checked before reading any input.
    pub fn validate(&self, has_trace: bool) -> Result<()> {
        self.gen_config().validate()?;
        if self.metric.is_dynamic() && !has_trace {
            return Err(Error::Config(format!("target {} requires --trace", self.metric)));
        }
        if self.equivalence_trials == 0 {
            return Err(Error::Config("equivalence trials must be positive".into()));
        }
        Ok(())
    }
}

/// Everything a run produced.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub program: ProgramModel,
    pub trace: Option<TraceProfile>,
    pub candidates_generated: usize,
    pub selected: Vec<Scored>,
    pub layouts: Vec<EncodingLayout>,
    pub rewritten: RewrittenProgram,
    pub recount: Recount,
    pub report: ReportDocument,
    pub report_text: String,
    pub coredsl: String,
}

impl RunOutput {
    /// One line per selected instruction.
    pub fn summary_lines(&self) -> Vec<String> {
        self.report
            .selected
            .iter()
            .map(|r| {
                format!(
                    "{:>2}  {:<24} {:<36} {}/{}  {} = {} over {} match(es)",
                    r.rank,
                    r.name,
                    r.signature,
                    r.major_opcode,
                    r.minor_opcode,
                    self.report.config.metric,
                    improvement_for(&r.improvement, &self.report.config.metric),
                    r.match_count
                )
            })
            .collect()
    }

    /// The three percentage totals, `n/a` where no trace was given.
    pub fn totals_line(&self) -> String {
        let t = &self.report.totals;
        let pct = |p: &Pct| p.0.map_or("n/a".to_string(), |v| format!("{v:.2}%"));
        format!(
            "static-size {} ({} of {} bytes)  dynamic-size {}  dynamic-count {}",
            pct(&t.static_pct),
            t.static_saved,
            t.static_baseline,
            pct(&t.dynamic_size_pct),
            pct(&t.dynamic_count_pct)
        )
    }
}

fn improvement_for(i: &Improvements, metric: &str) -> String {
    let v = match metric {
        "dynamic-size" => i.dynamic_size,
        "dynamic-count" => i.dynamic_count,
        _ => Some(i.static_size),
    };
    v.map_or("n/a".to_string(), |v| v.to_string())
}

/// Parses the listing and, if given, the trace.
pub fn load(asm: Source<'_>, trace: Option<Source<'_>>) -> Result<(ProgramModel, Option<TraceProfile>)> {
    let program = parse_disassembly_named(asm.text, asm.name)?;
    let trace = trace.map(|t| parse_trace_named(t.text, &program, t.name)).transpose()?;
    info!(
        "parsed {} instructions in {} blocks ({} bytes)",
        program.instr_count(),
        program.blocks().count(),
        program.static_bytes()
    );
    Ok((program, trace))
}

/// Whether every instruction of every site slice has the same count as the
/// slice's first address.
fn uniform_counts(program: &ProgramModel, s: &Scored, trace: &TraceProfile) -> bool {
    s.sites.iter().all(|site| {
        let block = program.block(site.block);
        block.instrs[site.start..site.end()].iter().all(|i| trace.count(i.address) == site.exec_count)
    })
}

/// Checks one pattern against the oracle: the selector's improvement must
/// equal the rewrite-and-recount delta of the pattern applied alone, and the
/// fused semantics must agree with sequential interpretation. Returns
/// whether the dynamic comparison had to be skipped because the trace is
/// not uniform over some matched slice.
pub fn verify_pattern(
    program: &ProgramModel,
    trace: Option<&TraceProfile>,
    pattern: &CandidatePattern,
    mode: LivenessMode,
    trials: u32,
    seed: u64,
) -> Result<bool> {
    pattern.check_invariants()?;
    let alone = recount(program, &rewrite(program, std::slice::from_ref(pattern), mode, trace), trace);
    let mut skipped = false;
    for metric in MetricKind::ALL {
        let figure = match metric {
            MetricKind::StaticSize => Some(alone.static_size),
            MetricKind::DynamicSize => alone.dynamic_size,
            MetricKind::DynamicCount => alone.dynamic_count,
        };
        let Some(figure) = figure else { continue };
        let s = score(program, pattern, metric, mode, trace)?;
        if metric.is_dynamic() && !uniform_counts(program, &s, trace.expect("dynamic figure implies trace")) {
            skipped = true;
            continue;
        }
        if s.improvement != figure.saved() {
            return Err(Error::Invariant(format!(
                "{}: selector reports {} for {metric} but the oracle recounts {}",
                pattern.name,
                s.improvement,
                figure.saved()
            )));
        }
    }
    if let Err(cx) = check_equivalence(pattern, trials, seed) {
        return Err(Error::Invariant(format!(
            "{}: fused semantics disagree on trial {} (imms {:?}): expected {:?}, got {:?}",
            pattern.name, cx.trial, cx.imms, cx.expected, cx.got
        )));
    }
    Ok(skipped)
}

/// Parse, generate, select, verify and emit.
pub fn run_generate(asm: Source<'_>, trace: Option<Source<'_>>, opts: &RunOptions) -> Result<RunOutput> {
    opts.validate(trace.is_some())?;
    let (program, trace) = load(asm, trace)?;
    let candidates = generate(&program, &opts.gen_config())?;
    info!("generated {} candidates", candidates.len());
    for c in &candidates {
        debug!("candidate {} [{}]", c.name, c.signature());
    }
    let selected = select(&candidates, &program, trace.as_ref(), &opts.sel_config())?;
    info!("selected {} of at most {}", selected.len(), opts.sel_config().sel_count());
    finish(program, trace, candidates.len(), selected, opts, "generate")
}

/// Reads the patterns of a previous report's `selected` list.
pub fn read_selection(text: &str) -> Result<Vec<CandidatePattern>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Selection(e.to_string()))?;
    let list = value
        .get("selected")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Selection("missing `selected` list".into()))?;
    list.iter()
        .enumerate()
        .map(|(i, entry)| {
            let p = entry.get("pattern").ok_or_else(|| Error::Selection(format!("entry {i} has no pattern")))?;
            let pattern: CandidatePattern =
                serde_json::from_value(p.clone()).map_err(|e| Error::Selection(format!("entry {i}: {e}")))?;
            pattern
                .check_invariants()
                .map_err(|e| Error::Selection(format!("entry {i}: {e}")))?;
            Ok(pattern)
        })
        .collect()
}

/// Rewrites and recounts a program with a given, already ranked selection.
pub fn run_evaluate(
    asm: Source<'_>,
    trace: Option<Source<'_>>,
    selection: Source<'_>,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let patterns = read_selection(selection.text)?;
    let mut opts = opts.clone();
    if let Some(first) = patterns.first() {
        let bits = first.budget.opcode_bits;
        if patterns.iter().any(|p| p.budget.opcode_bits != bits) {
            return Err(Error::Selection("patterns disagree on opcode width".into()));
        }
        opts.opcode_bits = bits;
    }
    opts.validate(trace.is_some())?;
    let (program, trace) = load(asm, trace)?;
    let mut scored = Vec::with_capacity(patterns.len());
    for p in &patterns {
        scored.push(score(&program, p, opts.metric, opts.liveness, trace.as_ref())?);
    }
    finish(program, trace, patterns.len(), scored, &opts, "evaluate")
}

fn finish(
    program: ProgramModel,
    trace: Option<TraceProfile>,
    candidates_generated: usize,
    selected: Vec<Scored>,
    opts: &RunOptions,
    mode: &str,
) -> Result<RunOutput> {
    let patterns: Vec<CandidatePattern> = selected.iter().map(|s| s.pattern.clone()).collect();
    let layouts = assign_opcodes(&patterns, opts.opcode_bits)?;

    let mut nonuniform = 0;
    for (rank, (p, layout)) in patterns.iter().zip(&layouts).enumerate() {
        if layout.total_width() != 32 || EncodingLayout::parse(&layout.render())? != *layout {
            return Err(Error::Invariant(format!("{}: encoding does not round-trip", p.name)));
        }
        let seed = opts.seed.wrapping_add(rank as u64);
        if verify_pattern(&program, trace.as_ref(), p, opts.liveness, opts.equivalence_trials, seed)? {
            nonuniform += 1;
        }
    }
    let mut points: Vec<(u8, u32)> = layouts.iter().map(EncodingLayout::opcode_point).collect();
    points.sort_unstable();
    points.dedup();
    if points.len() != layouts.len() {
        return Err(Error::Invariant("opcode points collide".into()));
    }

    let rewritten = rewrite(&program, &patterns, opts.liveness, trace.as_ref());
    let rc = recount(&program, &rewritten, trace.as_ref());
    info!("{} replacements, static saving {} bytes", rewritten.log.len(), rc.static_size.saved());

    let names = instruction_names(&patterns);
    let mut records = Vec::with_capacity(selected.len());
    for (rank, ((s, layout), name)) in selected.iter().zip(&layouts).zip(names).enumerate() {
        let dynamic = |m: MetricKind| -> Result<Option<i64>> {
            trace
                .as_ref()
                .map(|t| score(&program, &s.pattern, m, opts.liveness, Some(t)).map(|x| x.improvement))
                .transpose()
        };
        let (major, minor) = layout.opcode_point();
        records.push(CandidateRecord {
            encoding: layout.render(),
            improvement: Improvements {
                dynamic_count: dynamic(MetricKind::DynamicCount)?,
                dynamic_size: dynamic(MetricKind::DynamicSize)?,
                static_size: score(&program, &s.pattern, MetricKind::StaticSize, opts.liveness, None)?.improvement,
            },
            major_opcode: format!("0b{major:07b}"),
            match_count: s.sites.len(),
            match_sites: s
                .sites
                .iter()
                .map(|site| SiteRecord {
                    address: format!("0x{:x}", program.block(site.block).instrs[site.start].address),
                    block: program.block_label(site.block),
                    exec_count: site.exec_count,
                    start: site.start,
                })
                .collect(),
            minor_opcode: minor,
            mnemonics: s.pattern.ops.iter().map(|o| o.exemplar.mnemonic.clone()).collect(),
            name,
            pattern: s.pattern.clone(),
            rank,
            replacements: rewritten.replacements_for(rank).count(),
            signature: s.pattern.signature(),
        });
    }

    let report = ReportDocument {
        config: ConfigEcho {
            candidates_generated,
            custom_bits: CUSTOM_BITS,
            custom_count: CUSTOM_COUNT,
            equivalence_trials: opts.equivalence_trials,
            liveness: opts.liveness.to_string(),
            loop_bound: LOOP_BOUND.to_string(),
            m_ext: opts.include_m_ext,
            metric: opts.metric.to_string(),
            mode: mode.to_string(),
            opcode_bits: opts.opcode_bits,
            sel_count: sel_count(opts.opcode_bits),
            seed: opts.seed,
            trace: trace.is_some(),
        },
        selected: records,
        totals: Totals {
            dynamic_count_baseline: rc.dynamic_count.map(|f| f.baseline),
            dynamic_count_pct: Pct(rc.dynamic_count.map(|f| f.pct())),
            dynamic_count_saved: rc.dynamic_count.map(|f| f.saved()),
            dynamic_size_baseline: rc.dynamic_size.map(|f| f.baseline),
            dynamic_size_pct: Pct(rc.dynamic_size.map(|f| f.pct())),
            dynamic_size_saved: rc.dynamic_size.map(|f| f.saved()),
            replacements: rewritten.log.len(),
            static_baseline: rc.static_size.baseline,
            static_pct: Pct(Some(rc.static_size.pct())),
            static_saved: rc.static_size.saved(),
        },
        warnings: Warnings {
            nonuniform_trace_slices: nonuniform,
            size_mismatches: program.warnings.size_mismatches,
            unknown_mnemonics: program.warnings.unknown_mnemonics,
            unmatched_trace_entries: trace.as_ref().map_or(0, |t| t.unmatched),
        },
    };
    let report_text = emit_report(&report)?;
    let pairs: Vec<(CandidatePattern, EncodingLayout)> = patterns.into_iter().zip(layouts.iter().cloned()).collect();
    let coredsl = emit_coredsl(&pairs, &opts.set_name);

    Ok(RunOutput {
        program,
        trace,
        candidates_generated,
        selected,
        layouts,
        rewritten,
        recount: rc,
        report,
        report_text,
        coredsl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = "000100e4 <demo>:
   100e4:\t00f40333\tadd\tt1,s0,a5
   100e8:\t00c307b3\tadd\ta5,t1,a2
   100ec:\t0017c593\txori\ta1,a5,0x1
   100f0:\t8d4d\tc.or\ta0,a1
   100f2:\t00a039b3\tsltu\ts3,zero,a0
   100f6:\t08050513\taddi\ta0,a0,0x80
";

    fn lenient() -> RunOptions {
        RunOptions { liveness: LivenessMode::Paper, ..RunOptions::default() }
    }

    #[test]
    fn listing_demo_report() {
        let out = run_generate(Source::new("demo.dis", LISTING), None, &lenient()).unwrap();
        let names: Vec<&str> = out.report.selected.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["XORI_OR_SLTU", "ADD_ADD"]);
        let first = &out.report.selected[0];
        assert_eq!(first.match_count, 1);
        assert_eq!(first.improvement.static_size, 6);
        assert!(out.report_text.contains("\"dynamic_size_pct\": null"));
        assert!(out.coredsl.contains("ADD_ADD {"));
        assert_eq!(out.report.totals.static_saved, 10);
    }

    #[test]
    fn dynamic_target_needs_trace() {
        let opts = RunOptions { metric: MetricKind::DynamicCount, ..lenient() };
        assert!(matches!(run_generate(Source::new("d", LISTING), None, &opts), Err(Error::Config(_))));
    }

    #[test]
    fn evaluate_round_trips_selection() {
        let out = run_generate(Source::new("demo.dis", LISTING), None, &lenient()).unwrap();
        let sel = Source::new("r.json", &out.report_text);
        let again = run_evaluate(Source::new("demo.dis", LISTING), None, sel, &lenient()).unwrap();
        assert_eq!(again.report.totals, out.report.totals);
        let strict = RunOptions::default();
        let first_only = {
            let mut v: Value = serde_json::from_str(&out.report_text).unwrap();
            v["selected"].as_array_mut().unwrap().truncate(1);
            v.to_string()
        };
        let s = run_evaluate(Source::new("demo.dis", LISTING), None, Source::new("t.json", &first_only), &strict).unwrap();
        assert_eq!(s.report.selected[0].match_count, 0);
        assert_eq!(s.report.totals.static_saved, 0);
    }

    #[test]
    fn empty_selection_reports_zero() {
        let out = run_evaluate(
            Source::new("demo.dis", LISTING),
            None,
            Source::new("e.json", r#"{"selected": []}"#),
            &RunOptions::default(),
        )
        .unwrap();
        assert!(out.report_text.contains("\"static_pct\": 0.00"));
        assert!(out.report.selected.is_empty());
    }

    #[test]
    fn malformed_selection_is_rejected() {
        let r = run_evaluate(Source::new("d", LISTING), None, Source::new("x", "[1,2]"), &RunOptions::default());
        assert!(matches!(r, Err(Error::Selection(_))));
    }
}
