//! Scoring and ranking of candidate patterns.
//!
//! Each candidate is matched greedily, left to right and without overlap,
//! inside every basic block. A match contributes the metric of the replaced
//! slice minus the metric of one fused instruction, weighted by the
//! execution count of the slice's first address for the dynamic metrics.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{BasicBlock, BlockId, ProgramModel, StaticInstr, TraceProfile};
use crate::generator::{fusable_op, single_live_out, validate_opcode_bits, CandidatePattern, LivenessMode, ValueRef};
use crate::isa::{fits, Reg};

/// Width of a RISC-V major opcode.
pub const CUSTOM_BITS: u8 = 7;
/// Number of major opcodes reserved for custom extensions.
pub const CUSTOM_COUNT: u32 = 4;
/// Size in bytes of one fused instruction.
pub const FUSED_BYTES: i64 = 4;

/// Upper bound on the number of selected instructions for an opcode width.
pub fn sel_count(opcode_bits: u8) -> u32 {
    (1u32 << (opcode_bits.saturating_sub(CUSTOM_BITS))) * CUSTOM_COUNT
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    StaticSize,
    DynamicSize,
    DynamicCount,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::StaticSize, MetricKind::DynamicSize, MetricKind::DynamicCount];

    pub fn is_dynamic(self) -> bool {
        self != MetricKind::StaticSize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::StaticSize => "static-size",
            MetricKind::DynamicSize => "dynamic-size",
            MetricKind::DynamicCount => "dynamic-count",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelConfig {
    pub opcode_bits: u8,
    pub metric: MetricKind,
    pub liveness: LivenessMode,
}

impl SelConfig {
    pub fn validate(&self) -> Result<()> {
        validate_opcode_bits(self.opcode_bits)
    }

    pub fn sel_count(&self) -> u32 {
        sel_count(self.opcode_bits)
    }
}

/// One place where a pattern matches, with its concrete bindings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSite {
    pub block: BlockId,
    pub start: usize,
    pub len: usize,
    pub rd: Reg,
    pub inputs: Vec<Reg>,
    pub imms: Vec<i64>,
    /// Trace count of the first instruction, or 1 without a trace.
    pub exec_count: u64,
}

impl MatchSite {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Concrete bindings of a structural match, before liveness is considered.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bindings {
    pub rd: Reg,
    pub inputs: Vec<Reg>,
    pub imms: Vec<i64>,
}

/// Structural match of `slice` against `pattern`: base mnemonics agree
/// positionally, every read refers to the same slot or producing op as in
/// the pattern, and immediates fit their fields.
pub fn match_slice(slice: &[StaticInstr], pattern: &CandidatePattern) -> Option<Bindings> {
    if slice.len() != pattern.len() {
        return None;
    }
    let mut producer: [Option<u8>; 32] = [None; 32];
    let mut inputs: Vec<Option<Reg>> = vec![None; pattern.inputs.len()];
    let mut imms: Vec<i64> = vec![0; pattern.imm_fields.len()];

    for (j, (instr, pop)) in slice.iter().zip(&pattern.ops).enumerate() {
        let op = fusable_op(instr, true)?;
        if op.spec.base_mnemonic != pop.mnemonic || op.srcs.len() != pop.srcs.len() {
            return None;
        }
        for (reg, vref) in op.srcs.iter().zip(&pop.srcs) {
            let current = producer[reg.index() as usize];
            match *vref {
                ValueRef::Op(d) if current == Some(d) => {}
                ValueRef::Input(k) if current.is_none() => {
                    let slot = inputs.get_mut(k as usize)?;
                    match slot {
                        Some(bound) if bound != reg => return None,
                        _ => *slot = Some(*reg),
                    }
                }
                _ => return None,
            }
        }
        match (pop.imm, op.imm) {
            (None, None) => {}
            (Some(i), Some(v)) => {
                let field = pattern.imm_fields.get(i as usize)?;
                if !fits(v, field.width, field.signedness) {
                    return None;
                }
                imms[i as usize] = v;
            }
            _ => return None,
        }
        producer[op.dest.index() as usize] = Some(j as u8);
    }
    let rd = fusable_op(slice.last()?, true)?.dest;
    Some(Bindings {
        rd,
        inputs: inputs.into_iter().collect::<Option<Vec<_>>>()?,
        imms,
    })
}

/// Matches `pattern` at `block.instrs[start..]`, applying the liveness rule.
pub fn match_at(
    block: &BasicBlock,
    start: usize,
    pattern: &CandidatePattern,
    mode: LivenessMode,
    trace: Option<&TraceProfile>,
) -> Option<MatchSite> {
    let end = start.checked_add(pattern.len())?;
    if pattern.is_empty() || end > block.instrs.len() {
        return None;
    }
    let b = match_slice(&block.instrs[start..end], pattern)?;
    if mode == LivenessMode::Strict && !single_live_out(&block.instrs, start, end) {
        return None;
    }
    let exec_count = trace.map_or(1, |t| t.count(block.instrs[start].address));
    Some(MatchSite {
        block: block.id,
        start,
        len: pattern.len(),
        rd: b.rd,
        inputs: b.inputs,
        imms: b.imms,
        exec_count,
    })
}

/// Greedy, non-overlapping left-to-right scan of one block.
pub fn scan_block(
    block: &BasicBlock,
    pattern: &CandidatePattern,
    mode: LivenessMode,
    trace: Option<&TraceProfile>,
) -> Vec<MatchSite> {
    let mut sites = Vec::new();
    let plen = pattern.len();
    if plen == 0 {
        return sites;
    }
    let mut index = 0;
    while index + plen <= block.instrs.len() {
        match match_at(block, index, pattern, mode, trace) {
            Some(site) => {
                index += plen;
                sites.push(site);
            }
            None => index += 1,
        }
    }
    sites
}

fn require_trace(metric: MetricKind, trace: Option<&TraceProfile>) -> Result<()> {
    if metric.is_dynamic() && trace.is_none() {
        return Err(Error::Config(format!("metric {metric} requires a trace")));
    }
    Ok(())
}

fn weight(count: u64, delta: i64) -> Result<i64> {
    i64::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(delta))
        .ok_or_else(|| Error::Invariant("improvement overflows 64 bits".into()))
}

/// Metric(slice) − Metric(pattern) for one site, weighted by its count.
pub fn site_delta(block: &BasicBlock, site: &MatchSite, metric: MetricKind) -> Result<i64> {
    let slice = &block.instrs[site.start..site.end()];
    let bytes: i64 = slice.iter().map(|i| i64::from(i.byte_size)).sum();
    match metric {
        MetricKind::StaticSize => Ok(bytes - FUSED_BYTES),
        MetricKind::DynamicSize => weight(site.exec_count, bytes - FUSED_BYTES),
        MetricKind::DynamicCount => weight(site.exec_count, slice.len() as i64 - 1),
    }
}

/// Improvement of `pattern` over one block.
pub fn improvement(
    block: &BasicBlock,
    pattern: &CandidatePattern,
    metric: MetricKind,
    mode: LivenessMode,
    trace: Option<&TraceProfile>,
) -> Result<i64> {
    require_trace(metric, trace)?;
    scan_block(block, pattern, mode, trace)
        .iter()
        .try_fold(0i64, |acc, s| Ok(acc + site_delta(block, s, metric)?))
}

/// A candidate with its program-wide score and match sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scored {
    pub pattern: CandidatePattern,
    pub improvement: i64,
    pub sites: Vec<MatchSite>,
}

/// Scores `pattern` over every block of `program`.
pub fn score(
    program: &ProgramModel,
    pattern: &CandidatePattern,
    metric: MetricKind,
    mode: LivenessMode,
    trace: Option<&TraceProfile>,
) -> Result<Scored> {
    require_trace(metric, trace)?;
    let mut total = 0i64;
    let mut sites = Vec::new();
    for block in program.blocks() {
        for site in scan_block(block, pattern, mode, trace) {
            total = total
                .checked_add(site_delta(block, &site, metric)?)
                .ok_or_else(|| Error::Invariant("improvement overflows 64 bits".into()))?;
            sites.push(site);
        }
    }
    Ok(Scored {
        pattern: pattern.clone(),
        improvement: total,
        sites,
    })
}

/// Scores every candidate, drops those that do not improve, and keeps the
/// best `sel_count` by descending improvement (ties keep candidate order).
pub fn select(
    cands: &[CandidatePattern],
    program: &ProgramModel,
    trace: Option<&TraceProfile>,
    cfg: &SelConfig,
) -> Result<Vec<Scored>> {
    cfg.validate()?;
    require_trace(cfg.metric, trace)?;
    let mut scored = Vec::with_capacity(cands.len());
    for c in cands {
        let s = score(program, c, cfg.metric, cfg.liveness, trace)?;
        if s.improvement > 0 {
            scored.push(s);
        }
    }
    // Stable sort keeps the deterministic candidate order among ties.
    scored.sort_by_key(|s| std::cmp::Reverse(s.improvement));
    scored.truncate(cfg.sel_count() as usize);
    Ok(scored)
}
