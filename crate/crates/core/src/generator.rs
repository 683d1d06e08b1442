//! Greedy MISO candidate generation.
//!
//! Each basic block is scanned left to right. At every start position a new,
//! empty candidate is grown over contiguous instructions. An instruction is
//! appended when it is fusable, reads a register the candidate already
//! defines (the first instruction is exempt), and the 32-bit encoding budget
//! still holds once its new register slots and immediate are accounted for.
//!
//! Growth stops when the budget would overflow, at control flow, at a
//! non-fusable instruction, at an instruction without a data-flow connection,
//! or right after an instruction that overwrites a register an earlier
//! constituent read as an external input.
//!
//! Under [`LivenessMode::Strict`] the grown run is cut back to its longest
//! prefix whose only live-out is the final destination. A candidate of at
//! least `min_ops` instructions is emitted and scanning resumes after it;
//! otherwise scanning resumes at the next instruction.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frontend::{BlockId, CanonicalOp, ProgramModel, StaticInstr};
use crate::isa::{base_template, min_width, Reg, SemExpr, Signedness};

/// Total encoding width of a generated instruction.
pub const INSTR_BITS: u32 = 32;
/// Width of one register operand field.
pub const REG_BITS: u32 = 5;
/// Width of a RISC-V major opcode.
pub const BASE_OPCODE_BITS: u8 = 7;
/// Widest opcode that still leaves room for `rd` and one input.
pub const MAX_OPCODE_BITS: u8 = 22;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LivenessMode {
    /// Intermediates must be dead after the fused sequence.
    #[default]
    Strict,
    /// The final destination is the sole output regardless of escaping
    /// intermediates. Reproduces hand-worked examples; unsound for rewriting.
    Paper,
}

impl fmt::Display for LivenessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LivenessMode::Strict => "strict",
            LivenessMode::Paper => "paper",
        })
    }
}

impl FromStr for LivenessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(LivenessMode::Strict),
            "paper" => Ok(LivenessMode::Paper),
            other => Err(Error::Config(format!("unknown liveness mode `{other}` (expected strict or paper)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenConfig {
    pub opcode_bits: u8,
    pub liveness: LivenessMode,
    pub min_ops: usize,
    pub include_m_ext: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig { opcode_bits: 9, liveness: LivenessMode::Strict, min_ops: 2, include_m_ext: false }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        validate_opcode_bits(self.opcode_bits)?;
        if self.min_ops < 2 {
            return Err(Error::Config(format!("min_ops must be at least 2, got {}", self.min_ops)));
        }
        Ok(())
    }
}

pub fn validate_opcode_bits(opcode_bits: u8) -> Result<()> {
    if !(BASE_OPCODE_BITS..=MAX_OPCODE_BITS).contains(&opcode_bits) {
        return Err(Error::Config(format!(
            "opcode bits must lie in {BASE_OPCODE_BITS}..={MAX_OPCODE_BITS}, got {opcode_bits}"
        )));
    }
    Ok(())
}

/// How the 32 encoding bits of a candidate are spent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitBudget {
    pub opcode_bits: u8,
    /// `rd` plus every input slot.
    pub reg_slots: u8,
    pub imm_bits: u8,
    /// Constant-zero bits left over once immediates are saturated.
    pub padding: u8,
}

impl BitBudget {
    pub fn reg_bits(&self) -> u32 {
        REG_BITS * self.reg_slots as u32
    }

    pub fn total(&self) -> u32 {
        self.opcode_bits as u32 + self.reg_bits() + self.imm_bits as u32 + self.padding as u32
    }
}

/// Where a constituent operand's value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueRef {
    /// Input register slot `rs{k+1}`.
    Input(u8),
    /// Result of an earlier constituent operation (an intermediate).
    Op(u8),
}

/// Concrete registers of the instruction a constituent was generalized from.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExemplarOp {
    pub mnemonic: String,
    pub dest: Reg,
    pub srcs: Vec<Reg>,
    pub imm: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatternOp {
    /// Base mnemonic (compressed prefix stripped).
    pub mnemonic: String,
    pub srcs: Vec<ValueRef>,
    /// Index into the pattern's immediate fields.
    pub imm: Option<u8>,
    pub exemplar: ExemplarOp,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImmField {
    pub width: u8,
    pub signedness: Signedness,
    /// Architectural width of the originating operand; widening stops here.
    pub max_width: u8,
}

/// A fused multiple-input, single-output instruction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidatePattern {
    pub name: String,
    pub ops: Vec<PatternOp>,
    /// Registers the input slots were generalized from, in first-read order.
    pub inputs: Vec<Reg>,
    /// Register the output slot `rd` was generalized from.
    pub output: Reg,
    pub imm_fields: Vec<ImmField>,
    pub budget: BitBudget,
    pub fused_semantics: SemExpr,
}

type KeyOp = (String, Vec<ValueRef>, Option<(u8, Signedness)>);

/// Identity of a pattern modulo immediate widths and exemplar registers.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StructureKey {
    ops: Vec<KeyOp>,
    inputs: usize,
}

impl CandidatePattern {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn reg_slot_count(&self) -> usize {
        1 + self.inputs.len()
    }

    pub fn intermediates(&self) -> usize {
        self.ops.len().saturating_sub(1)
    }

    pub fn total_imm_width(&self) -> u32 {
        self.imm_fields.iter().map(|f| f.width as u32).sum()
    }

    pub fn structure_key(&self) -> StructureKey {
        StructureKey {
            ops: self
                .ops
                .iter()
                .map(|o| {
                    let imm = o.imm.map(|i| (i, self.imm_fields[i as usize].signedness));
                    (o.mnemonic.clone(), o.srcs.clone(), imm)
                })
                .collect(),
            inputs: self.inputs.len(),
        }
    }

    pub fn imm_field_name(&self, index: usize) -> String {
        if self.imm_fields.len() == 1 {
            "imm".to_string()
        } else {
            format!("imm{index}")
        }
    }

    /// Operand signature, e.g. `rd, rs1, rs2, rs3, imm[2:0]`.
    pub fn signature(&self) -> String {
        let mut parts = vec!["rd".to_string()];
        parts.extend((1..=self.inputs.len()).map(|k| format!("rs{k}")));
        for (i, f) in self.imm_fields.iter().enumerate() {
            parts.push(format!("{}[{}:0]", self.imm_field_name(i), f.width - 1));
        }
        parts.join(", ")
    }

    /// Checks the structural invariants every emitted pattern must satisfy.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(format!("{}: {m}", self.name)));
        if self.budget.total() != INSTR_BITS {
            return fail(format!("budget sums to {} bits", self.budget.total()));
        }
        if self.budget.reg_slots as usize != self.reg_slot_count() {
            return fail("register slot count disagrees with inputs".into());
        }
        if self.budget.imm_bits as u32 != self.total_imm_width() {
            return fail("immediate bits disagree with fields".into());
        }
        let joined: Vec<&str> = self.ops.iter().map(|o| o.mnemonic.as_str()).collect();
        if self.name != joined.join("_") {
            return fail("name is not the joined mnemonics".into());
        }
        for (j, op) in self.ops.iter().enumerate() {
            for s in &op.srcs {
                match *s {
                    ValueRef::Input(k) if k as usize >= self.inputs.len() => return fail(format!("op {j} reads unbound input {k}")),
                    ValueRef::Op(d) if d as usize >= j => return fail(format!("op {j} reads a later result")),
                    _ => {}
                }
            }
            if let Some(i) = op.imm {
                if i as usize >= self.imm_fields.len() {
                    return fail(format!("op {j} names missing immediate {i}"));
                }
            }
        }
        Ok(())
    }
}

/// Three-address view of an instruction if it may join a candidate.
pub(crate) fn fusable_op(instr: &StaticInstr, include_m_ext: bool) -> Option<CanonicalOp> {
    let op = instr.canonical()?;
    (op.spec.fusable_with(include_m_ext) && !op.dest.is_zero()).then_some(op)
}

/// Whether `reg` is read at or after `from` before being redefined.
pub(crate) fn read_later(block: &[StaticInstr], from: usize, reg: Reg) -> bool {
    for instr in &block[from.min(block.len())..] {
        if instr.uses().contains(&reg) {
            return true;
        }
        if instr.def() == Some(reg) {
            return false;
        }
    }
    false
}

/// Whether the fused sequence `block[start..end]` leaves only its final
/// destination live.
pub(crate) fn single_live_out(block: &[StaticInstr], start: usize, end: usize) -> bool {
    let defs: Vec<Reg> = block[start..end].iter().filter_map(StaticInstr::def).collect();
    let Some(&output) = defs.last() else {
        return true;
    };
    let mut seen = [false; 32];
    for r in defs {
        if r == output || seen[r.index() as usize] {
            continue;
        }
        seen[r.index() as usize] = true;
        if read_later(block, end, r) {
            return false;
        }
    }
    true
}

/// Length of the run grown from `start` before liveness truncation.
fn grow(block: &[StaticInstr], start: usize, cfg: &GenConfig) -> usize {
    let mut defined = [false; 32];
    let mut external: Vec<Reg> = Vec::new();
    let mut imm_bits = 0u32;
    let mut len = 0;

    for instr in &block[start..] {
        let Some(op) = fusable_op(instr, cfg.include_m_ext) else {
            break;
        };
        if len > 0 && !op.srcs.iter().any(|r| defined[r.index() as usize]) {
            break;
        }
        let mut fresh: Vec<Reg> = Vec::new();
        for r in &op.srcs {
            if !defined[r.index() as usize] && !external.contains(r) && !fresh.contains(r) {
                fresh.push(*r);
            }
        }
        let imm_w = match (op.imm, op.spec.imm_signedness()) {
            (Some(v), Some(s)) => min_width(v, s) as u32,
            _ => 0,
        };
        let slots = 1 + external.len() + fresh.len();
        let bits = cfg.opcode_bits as u32 + REG_BITS * slots as u32 + imm_bits + imm_w;
        if bits > INSTR_BITS {
            break;
        }
        let overwrites_input = external.contains(&op.dest);
        external.extend(fresh);
        imm_bits += imm_w;
        defined[op.dest.index() as usize] = true;
        len += 1;
        if overwrites_input {
            break;
        }
    }
    len
}

/// A contiguous run chosen by the growth procedure, before generalization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RawCandidate {
    pub block: BlockId,
    pub start: usize,
    pub len: usize,
}

/// Runs the growth procedure over every block, returning the chosen runs in
/// program order.
pub fn grow_runs(program: &ProgramModel, cfg: &GenConfig) -> Result<Vec<RawCandidate>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for block in program.blocks() {
        let instrs = &block.instrs;
        let mut i = 0;
        while i < instrs.len() {
            let grown = grow(instrs, i, cfg);
            let len = match cfg.liveness {
                LivenessMode::Paper => grown,
                LivenessMode::Strict => {
                    (1..=grown).rev().find(|&k| single_live_out(instrs, i, i + k)).unwrap_or(0)
                }
            };
            if len >= cfg.min_ops {
                out.push(RawCandidate { block: block.id, start: i, len });
                i += len;
            } else {
                i += 1;
            }
        }
    }
    Ok(out)
}

/// Turns a concrete fused sequence into a pattern: registers become slots in
/// first-use order, immediates become fields of minimal width that are then
/// widened with the leftover budget.
pub fn generalize(seq: &[StaticInstr], cfg: &GenConfig) -> Result<CandidatePattern> {
    let contract = |m: String| Error::Contract(format!("cannot generalize: {m}"));
    if seq.is_empty() {
        return Err(contract("empty sequence".into()));
    }
    let mut defs: BTreeMap<Reg, u8> = BTreeMap::new();
    let mut inputs: Vec<Reg> = Vec::new();
    let mut ops = Vec::with_capacity(seq.len());
    let mut fields: Vec<ImmField> = Vec::new();

    for (j, instr) in seq.iter().enumerate() {
        let op = fusable_op(instr, cfg.include_m_ext)
            .ok_or_else(|| contract(format!("`{}` is not fusable", instr.mnemonic)))?;
        let srcs = op
            .srcs
            .iter()
            .map(|r| match defs.get(r) {
                Some(&d) => ValueRef::Op(d),
                None => {
                    let k = inputs.iter().position(|x| x == r).unwrap_or_else(|| {
                        inputs.push(*r);
                        inputs.len() - 1
                    });
                    ValueRef::Input(k as u8)
                }
            })
            .collect();
        let imm = match (op.imm, op.spec.imm) {
            (Some(v), Some(kind)) => {
                fields.push(ImmField {
                    width: min_width(v, kind.signedness),
                    signedness: kind.signedness,
                    max_width: kind.max_width,
                });
                Some((fields.len() - 1) as u8)
            }
            _ => None,
        };
        ops.push(PatternOp {
            mnemonic: op.spec.base_mnemonic.to_string(),
            srcs,
            imm,
            exemplar: ExemplarOp {
                mnemonic: instr.mnemonic.clone(),
                dest: op.dest,
                srcs: op.srcs.clone(),
                imm: op.imm,
            },
        });
        defs.insert(op.dest, j as u8);
    }

    let reg_slots = 1 + inputs.len();
    let fixed = cfg.opcode_bits as u32 + REG_BITS * reg_slots as u32;
    let min_imm: u32 = fields.iter().map(|f| f.width as u32).sum();
    if fixed + min_imm > INSTR_BITS {
        return Err(contract(format!("needs {} bits", fixed + min_imm)));
    }
    let mut leftover = INSTR_BITS - fixed - min_imm;
    for f in &mut fields {
        let grow_by = leftover.min((f.max_width - f.width) as u32);
        f.width += grow_by as u8;
        leftover -= grow_by;
    }
    let imm_bits: u32 = fields.iter().map(|f| f.width as u32).sum();

    let name = ops.iter().map(|o| o.mnemonic.as_str()).collect::<Vec<_>>().join("_");
    let fused_semantics = fuse_semantics(&ops)?;
    let output = ops.last().unwrap().exemplar.dest;
    Ok(CandidatePattern {
        name,
        ops,
        inputs,
        output,
        imm_fields: fields,
        budget: BitBudget {
            opcode_bits: cfg.opcode_bits,
            reg_slots: reg_slots as u8,
            imm_bits: imm_bits as u8,
            padding: leftover as u8,
        },
        fused_semantics,
    })
}

/// Composes the constituent templates into one expression for `rd`.
pub fn fuse_semantics(ops: &[PatternOp]) -> Result<SemExpr> {
    let mut exprs: Vec<SemExpr> = Vec::with_capacity(ops.len());
    for op in ops {
        let template = base_template(&op.mnemonic)
            .ok_or_else(|| Error::Contract(format!("no semantics for `{}`", op.mnemonic)))?;
        let expr = template.substitute(
            &|i| match op.srcs[i as usize] {
                ValueRef::Input(k) => SemExpr::Read(k),
                ValueRef::Op(d) => exprs[d as usize].clone(),
            },
            &|_| SemExpr::Imm(op.imm.unwrap_or(0)),
        );
        exprs.push(expr);
    }
    exprs.pop().ok_or_else(|| Error::Contract("empty pattern".into()))
}

/// Removes duplicates and candidates whose immediate fields are all no wider
/// than those of a structurally identical sibling, then sorts
/// deterministically.
pub fn postprocess(cands: Vec<CandidatePattern>) -> Vec<CandidatePattern> {
    let mut groups: BTreeMap<StructureKey, Vec<CandidatePattern>> = BTreeMap::new();
    for c in cands {
        let group = groups.entry(c.structure_key()).or_default();
        let widths = |p: &CandidatePattern| p.imm_fields.iter().map(|f| f.width).collect::<Vec<_>>();
        let w = widths(&c);
        if group.iter().any(|g| widths(g) == w) {
            continue;
        }
        group.push(c);
    }

    let mut out = Vec::new();
    for (_, group) in groups {
        let widths: Vec<Vec<u8>> = group.iter().map(|p| p.imm_fields.iter().map(|f| f.width).collect()).collect();
        for (i, c) in group.into_iter().enumerate() {
            let dominated = widths
                .iter()
                .enumerate()
                .any(|(j, w)| j != i && *w != widths[i] && w.iter().zip(&widths[i]).all(|(a, b)| a >= b));
            if !dominated {
                out.push(c);
            }
        }
    }
    out.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then_with(|| a.name.cmp(&b.name))
            .then_with(|| b.total_imm_width().cmp(&a.total_imm_width()))
            .then_with(|| a.structure_key().cmp(&b.structure_key()))
            .then_with(|| {
                let wa: Vec<u8> = a.imm_fields.iter().map(|f| f.width).collect();
                let wb: Vec<u8> = b.imm_fields.iter().map(|f| f.width).collect();
                wb.cmp(&wa)
            })
    });
    out
}

/// Generates the deterministic, post-processed candidate set for a program.
pub fn generate(program: &ProgramModel, cfg: &GenConfig) -> Result<Vec<CandidatePattern>> {
    let runs = grow_runs(program, cfg)?;
    let mut cands = Vec::with_capacity(runs.len());
    for r in runs {
        let block = program.block(r.block);
        cands.push(generalize(&block.instrs[r.start..r.start + r.len], cfg)?);
    }
    Ok(postprocess(cands))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_disassembly;

    fn block(body: &[&str]) -> ProgramModel {
        let mut text = String::from("00010000 <f>:\n");
        let mut addr = 0x10000u32;
        for line in body {
            let (mn, _) = line.split_once(' ').unwrap_or((line, ""));
            let enc = if mn.starts_with("c.") { "0001" } else { "00000013" };
            text.push_str(&format!("   {addr:x}:\t{enc}\t{line}\n"));
            addr += if mn.starts_with("c.") { 2 } else { 4 };
        }
        parse_disassembly(&text).unwrap()
    }

    fn names(c: &[CandidatePattern]) -> Vec<&str> {
        c.iter().map(|p| p.name.as_str()).collect()
    }

    const LISTING: &[&str] = &[
        "add t1,s0,a5",
        "add a5,t1,a2",
        "xori a1,a5,0x1",
        "c.or a0,a1",
        "sltu s3,zero,a0",
        "addi a0,a0,0x80",
    ];

    #[test]
    fn demo_listing_lenient_liveness() {
        let m = block(LISTING);
        let cfg = GenConfig { liveness: LivenessMode::Paper, ..GenConfig::default() };
        let runs = grow_runs(&m, &cfg).unwrap();
        let spans: Vec<(usize, usize)> = runs.iter().map(|r| (r.start, r.len)).collect();
        assert_eq!(spans, vec![(0, 2), (2, 3)]);

        let c = generate(&m, &cfg).unwrap();
        assert_eq!(names(&c), vec!["xori_or_sltu", "add_add"]);
        let first = &c[0];
        assert_eq!(first.budget.opcode_bits, 9);
        assert_eq!(first.budget.reg_bits(), 20);
        assert_eq!(first.budget.imm_bits, 3);
        assert_eq!(first.budget.padding, 0);
        let r = |n| Reg::parse(n).unwrap();
        assert_eq!(first.inputs, vec![r("a5"), r("a0"), r("zero")]);
        assert_eq!(first.output, r("s3"));
        assert_eq!(first.signature(), "rd, rs1, rs2, rs3, imm[2:0]");
        for p in &c {
            p.check_invariants().unwrap();
        }
    }

    #[test]
    fn listing_strict_mode_truncates_escaping_intermediate() {
        let m = block(LISTING);
        let c = generate(&m, &GenConfig::default()).unwrap();
        assert_eq!(names(&c), vec!["add_add", "xori_or"]);
    }

    #[test]
    fn single_instruction_yields_nothing() {
        let m = block(&["add a0,a1,a2"]);
        assert!(generate(&m, &GenConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn budget_truncation() {
        let m = block(&["add t0,a0,a1", "xor t1,t0,a2", "or t2,t1,a3"]);
        let c = generate(&m, &GenConfig::default()).unwrap();
        assert_eq!(names(&c), vec!["add_xor"]);
        assert_eq!(c[0].budget.reg_slots, 4);
        assert_eq!(c[0].budget.padding, 3);
    }

    #[test]
    fn immediate_widening() {
        let m = block(&["addi t0,a0,-1", "xor t1,t0,a1"]);
        let c = generate(&m, &GenConfig::default()).unwrap();
        assert_eq!(c.len(), 1);
        // 9 opcode + 15 register bits leave 8 for the immediate (cap 12 not reached).
        assert_eq!(c[0].imm_fields[0].width, 8);
        assert_eq!(c[0].budget.padding, 0);

        let cfg = GenConfig { opcode_bits: 7, ..GenConfig::default() };
        let c = generate(&m, &cfg).unwrap();
        assert_eq!(c[0].imm_fields[0].width, 10);

        let m = block(&["slli t0,a0,3", "add t1,t0,a1"]);
        let c = generate(&m, &GenConfig::default()).unwrap();
        assert_eq!(c[0].imm_fields[0].width, 5);
        assert_eq!(c[0].budget.padding, 3);
    }

    #[test]
    fn no_immediates_pad_the_rest() {
        let m = block(&["add t0,a0,a1", "xor t1,t0,a2"]);
        let c = generate(&m, &GenConfig::default()).unwrap();
        assert!(c[0].imm_fields.is_empty());
        assert_eq!(c[0].budget.padding as u32, 32 - 9 - 5 * 4);
    }

    #[test]
    fn overwrite_rule_closes_after_including() {
        let m = block(&["add t1,s0,a5", "add a5,t1,a2", "xor a3,a5,a4"]);
        let runs = grow_runs(&m, &GenConfig::default()).unwrap();
        assert_eq!(runs[0].len, 2);
    }

    #[test]
    fn read_modify_destination_does_not_close() {
        let m = block(&["xori a1,a5,1", "c.or a0,a1", "c.and a0,a1"]);
        let cfg = GenConfig { liveness: LivenessMode::Paper, ..GenConfig::default() };
        let runs = grow_runs(&m, &cfg).unwrap();
        assert_eq!(runs[0].len, 3);
    }

    #[test]
    fn zero_destination_is_never_fused() {
        let m = block(&["add t0,a0,a1", "add zero,t0,a2"]);
        assert!(generate(&m, &GenConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn m_extension_switch() {
        let m = block(&["mul t0,a0,a1", "add t1,t0,a2"]);
        assert!(generate(&m, &GenConfig::default()).unwrap().is_empty());
        let cfg = GenConfig { include_m_ext: true, ..GenConfig::default() };
        assert_eq!(names(&generate(&m, &cfg).unwrap()), vec!["mul_add"]);
    }

    #[test]
    fn unconnected_instruction_closes() {
        let m = block(&["add t0,a0,a1", "add t1,a2,a3", "add t2,t1,a4"]);
        let runs = grow_runs(&m, &GenConfig::default()).unwrap();
        let spans: Vec<(usize, usize)> = runs.iter().map(|r| (r.start, r.len)).collect();
        assert_eq!(spans, vec![(1, 2)]);
    }

    fn with_imm_width(mut p: CandidatePattern, w: u8) -> CandidatePattern {
        let delta = w as i32 - p.imm_fields[0].width as i32;
        p.imm_fields[0].width = w;
        p.budget.imm_bits = (p.budget.imm_bits as i32 + delta) as u8;
        p.budget.padding = (p.budget.padding as i32 - delta) as u8;
        p
    }

    #[test]
    fn postprocess_keeps_widest() {
        let m = block(&["addi t0,a0,3", "xor t1,t0,a1"]);
        let base = generate(&m, &GenConfig::default()).unwrap().remove(0);
        let narrow = with_imm_width(base.clone(), 4);
        let wide = with_imm_width(base, 8);
        let out = postprocess(vec![narrow, wide.clone()]);
        assert_eq!(out, vec![wide.clone()]);
        assert_eq!(postprocess(vec![wide.clone(), wide.clone()]), vec![wide.clone()]);
        assert_eq!(postprocess(vec![wide.clone()]), vec![wide]);
    }

    #[test]
    fn postprocess_keeps_reordered_ops() {
        let m = block(&["add t0,a0,a1", "xor t1,t0,a2", "ret", "xor t0,a0,a1", "add t1,t0,a2"]);
        let c = generate(&m, &GenConfig::default()).unwrap();
        assert_eq!(names(&c), vec!["add_xor", "xor_add"]);
    }

    #[test]
    fn opcode_bounds() {
        assert!(GenConfig { opcode_bits: 6, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig { opcode_bits: 23, ..GenConfig::default() }.validate().is_err());
        assert!(GenConfig { min_ops: 1, ..GenConfig::default() }.validate().is_err());
    }
}
