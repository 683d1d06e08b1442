//! Disassembly and trace ingestion.
//!
//! The disassembly reader accepts objdump-style listings:
//!
//! ```text
//! 000100e4 <demo>:
//!    100e4:   00f40333            add t1,s0,a5
//! ```
//!
//! Symbol lines open functions, instruction lines carry an address, the raw
//! encoding (4 hex digits for a 2-byte instruction, 8 for a 4-byte one), a
//! mnemonic and comma-separated operands. Section headers, the file-format
//! banner and blank lines are skipped; anything else is a parse error.
//!
//! Functions are split into basic blocks after every control-flow
//! instruction and before every statically visible branch or jump target.
//!
//! Traces come in two forms, detected from the first non-empty line: one
//! hex program counter per line, or `<hex-pc>,<decimal-count>` aggregates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isa::{lookup_op, requires_prime_regs, OpClass, OpSpec, Reg, Role, Signature};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Reg(Reg),
    Imm(i64),
    Mem { offset: i64, base: Reg },
    Target { addr: u32, symbol: Option<String> },
    /// Anything else (FP registers, CSR names, rounding modes).
    Other(String),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Reg(r) => write!(f, "{r}"),
            Operand::Imm(v) => write!(f, "{v}"),
            Operand::Mem { offset, base } => write!(f, "{offset}({base})"),
            Operand::Target { addr, symbol: Some(s) } => write!(f, "{addr:x} <{s}>"),
            Operand::Target { addr, symbol: None } => write!(f, "0x{addr:x}"),
            Operand::Other(s) => f.write_str(s),
        }
    }
}

/// One decoded assembly instruction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StaticInstr {
    pub address: u32,
    pub byte_size: u8,
    pub encoding: u32,
    pub mnemonic: String,
    pub operands: Vec<Operand>,
    pub raw_text: String,
}

/// An instruction in three-address form: the shape every fusable operation
/// is normalized to before generation and matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalOp {
    pub spec: &'static OpSpec,
    pub dest: Reg,
    pub srcs: Vec<Reg>,
    pub imm: Option<i64>,
}

impl StaticInstr {
    /// The operation spec, provided the mnemonic is known and its byte size
    /// agrees with the encoding width.
    pub fn spec(&self) -> Option<&'static OpSpec> {
        lookup_op(&self.mnemonic).filter(|s| s.byte_size == self.byte_size)
    }

    pub fn is_control_flow(&self) -> bool {
        // Size mismatches still count as control flow; only the class matters here.
        lookup_op(&self.mnemonic).is_some_and(|s| s.class.is_control_flow())
    }

    /// Three-address view of an ALU or multiply/divide instruction.
    pub fn canonical(&self) -> Option<CanonicalOp> {
        let spec = self.spec()?;
        if !matches!(spec.class, OpClass::Alu | OpClass::MulDiv) {
            return None;
        }
        let Signature::Fixed(roles) = spec.signature else {
            return None;
        };
        let mut dest = None;
        let mut srcs = Vec::with_capacity(2);
        let mut imm = None;
        for (role, op) in roles.iter().zip(&self.operands) {
            match (role, op) {
                (Role::Dest, Operand::Reg(r)) => dest = Some(*r),
                (Role::Src, Operand::Reg(r)) => srcs.push(*r),
                (Role::SrcDest, Operand::Reg(r)) => {
                    dest = Some(*r);
                    srcs.push(*r);
                }
                (Role::Imm, Operand::Imm(v)) => imm = Some(*v),
                _ => return None,
            }
        }
        Some(CanonicalOp { spec, dest: dest?, srcs, imm })
    }

    /// Registers read by this instruction. Unknown or free-form instructions
    /// are assumed to read every register operand.
    pub fn uses(&self) -> Vec<Reg> {
        let roles = match lookup_op(&self.mnemonic).map(|s| s.signature) {
            Some(Signature::Fixed(roles)) if roles.len() == self.operands.len() => Some(roles),
            _ => None,
        };
        let mut out = Vec::new();
        for (i, op) in self.operands.iter().enumerate() {
            let role = roles.map(|r| r[i]);
            match op {
                Operand::Reg(r) if role != Some(Role::Dest) => out.push(*r),
                Operand::Mem { base, .. } => out.push(*base),
                _ => {}
            }
        }
        out
    }

    /// Register written by this instruction, if statically known.
    pub fn def(&self) -> Option<Reg> {
        let Some(Signature::Fixed(roles)) = lookup_op(&self.mnemonic).map(|s| s.signature) else {
            return None;
        };
        roles.iter().zip(&self.operands).find_map(|(role, op)| match (role, op) {
            (Role::Dest | Role::SrcDest, Operand::Reg(r)) => Some(*r),
            _ => None,
        })
    }

    pub fn branch_target(&self) -> Option<u32> {
        if !self.is_control_flow() {
            return None;
        }
        self.operands.iter().rev().find_map(|op| match op {
            Operand::Target { addr, .. } => Some(*addr),
            _ => None,
        })
    }

    /// Canonical listing line, as produced by [`ProgramModel::to_text`].
    pub fn canonical_line(&self) -> String {
        let enc = if self.byte_size == 2 {
            format!("{:04x}", self.encoding)
        } else {
            format!("{:08x}", self.encoding)
        };
        let ops: Vec<String> = self.operands.iter().map(|o| o.to_string()).collect();
        if ops.is_empty() {
            format!("{:8x}:\t{enc}\t{}", self.address, self.mnemonic)
        } else {
            format!("{:8x}:\t{enc}\t{}\t{}", self.address, self.mnemonic, ops.join(","))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BlockId {
    pub function: usize,
    pub block: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub instrs: Vec<StaticInstr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Function {
    /// Empty for instructions that precede any symbol line.
    pub name: String,
    pub address: Option<u32>,
    pub blocks: Vec<BasicBlock>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InstrRef {
    pub block: BlockId,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseWarnings {
    pub unknown_mnemonics: usize,
    /// Known mnemonics whose encoding width disagrees with their size class;
    /// such instructions are kept but never fused.
    pub size_mismatches: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProgramModel {
    pub functions: Vec<Function>,
    pub addr_index: BTreeMap<u32, InstrRef>,
    pub warnings: ParseWarnings,
}

impl ProgramModel {
    /// Builds a model from raw per-function instruction lists, splitting
    /// basic blocks.
    pub fn from_functions(raw: Vec<(String, Option<u32>, Vec<StaticInstr>)>) -> Result<Self> {
        let targets: BTreeSet<u32> = raw
            .iter()
            .flat_map(|(_, _, instrs)| instrs.iter().filter_map(StaticInstr::branch_target))
            .collect();

        let mut functions = Vec::with_capacity(raw.len());
        let mut addr_index = BTreeMap::new();
        for (fi, (name, address, instrs)) in raw.into_iter().enumerate() {
            let mut blocks: Vec<BasicBlock> = Vec::new();
            let mut current: Vec<StaticInstr> = Vec::new();
            for instr in instrs {
                if !current.is_empty() && targets.contains(&instr.address) {
                    flush(&mut blocks, &mut current, fi);
                }
                if let Some(prev) = current.last() {
                    if instr.address <= prev.address {
                        return Err(Error::Contract(format!(
                            "address {:#x} does not follow {:#x} in `{name}`",
                            instr.address, prev.address
                        )));
                    }
                }
                let ends_block = instr.is_control_flow();
                current.push(instr);
                if ends_block {
                    flush(&mut blocks, &mut current, fi);
                }
            }
            flush(&mut blocks, &mut current, fi);
            for b in &blocks {
                for (index, instr) in b.instrs.iter().enumerate() {
                    let r = InstrRef { block: b.id, index };
                    if addr_index.insert(instr.address, r).is_some() {
                        return Err(Error::Contract(format!("duplicate address {:#x}", instr.address)));
                    }
                }
            }
            functions.push(Function { name, address, blocks });
        }
        Ok(ProgramModel { functions, addr_index, warnings: ParseWarnings::default() })
    }

    /// The per-function instruction lists this model was built from.
    pub fn flatten(&self) -> Vec<(String, Option<u32>, Vec<StaticInstr>)> {
        self.functions
            .iter()
            .map(|f| {
                let instrs = f.blocks.iter().flat_map(|b| b.instrs.iter().cloned()).collect();
                (f.name.clone(), f.address, instrs)
            })
            .collect()
    }

    pub fn blocks(&self) -> impl Iterator<Item = &BasicBlock> {
        self.functions.iter().flat_map(|f| f.blocks.iter())
    }

    pub fn block(&self, id: BlockId) -> &BasicBlock {
        &self.functions[id.function].blocks[id.block]
    }

    pub fn block_label(&self, id: BlockId) -> String {
        format!("{}#{}", self.functions[id.function].name, id.block)
    }

    pub fn instr(&self, r: InstrRef) -> &StaticInstr {
        &self.block(r.block).instrs[r.index]
    }

    pub fn instr_at(&self, address: u32) -> Option<&StaticInstr> {
        self.addr_index.get(&address).map(|r| self.instr(*r))
    }

    pub fn instr_count(&self) -> usize {
        self.addr_index.len()
    }

    pub fn static_bytes(&self) -> u64 {
        self.blocks().flat_map(|b| &b.instrs).map(|i| i.byte_size as u64).sum()
    }

    /// Canonical listing; reparsing it reproduces this model.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.functions {
            if let Some(addr) = f.address {
                out.push_str(&format!("{addr:08x} <{}>:\n", f.name));
            }
            for i in f.blocks.iter().flat_map(|b| &b.instrs) {
                out.push_str(&i.canonical_line());
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

fn flush(blocks: &mut Vec<BasicBlock>, current: &mut Vec<StaticInstr>, function: usize) {
    if current.is_empty() {
        return;
    }
    let id = BlockId { function, block: blocks.len() };
    blocks.push(BasicBlock { id, instrs: std::mem::take(current) });
}

fn instr_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*([0-9a-f]+):\s+([0-9a-f]{4}|[0-9a-f]{8})\s+(\S+)(\s+(.*))?$").unwrap()
    })
}

fn symbol_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([0-9a-f]+) <(.+)>:$").unwrap())
}

fn is_ignorable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty()
        || t == "..."
        || t.starts_with("Disassembly of section")
        || t.contains("file format")
}

/// Parses an objdump-style disassembly listing.
pub fn parse_disassembly(text: &str) -> Result<ProgramModel> {
    parse_disassembly_named(text, "<disassembly>")
}

pub fn parse_disassembly_named(text: &str, source_name: &str) -> Result<ProgramModel> {
    let mut raw: Vec<(String, Option<u32>, Vec<StaticInstr>)> = Vec::new();
    let mut warnings = ParseWarnings::default();

    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end())) {
        if is_ignorable(line) {
            continue;
        }
        if let Some(c) = symbol_re().captures(line) {
            let addr = u32::from_str_radix(&c[1], 16)
                .map_err(|_| Error::parse(source_name, lineno, "symbol address out of range"))?;
            raw.push((c[2].to_string(), Some(addr), Vec::new()));
            continue;
        }
        let Some(c) = instr_re().captures(line) else {
            return Err(Error::parse(source_name, lineno, format!("malformed line `{line}`")));
        };
        let address = u32::from_str_radix(&c[1], 16)
            .map_err(|_| Error::parse(source_name, lineno, "instruction address out of range"))?;
        let enc = &c[2];
        let byte_size = (enc.len() / 2) as u8;
        let encoding = u32::from_str_radix(enc, 16).expect("regex guarantees hex");
        let mnemonic = c[3].to_string();
        let operand_text = c.get(5).map_or("", |m| m.as_str());
        let operand_text = operand_text.split('#').next().unwrap_or("").trim();

        let spec = lookup_op(&mnemonic);
        match spec {
            None => warnings.unknown_mnemonics += 1,
            Some(s) if s.byte_size != byte_size && !s.class.is_control_flow() => warnings.size_mismatches += 1,
            _ => {}
        }
        let operands = parse_operands(operand_text, spec)
            .map_err(|m| Error::parse(source_name, lineno, format!("{m} in `{}`", line.trim())))?;

        if raw.is_empty() {
            raw.push((String::new(), None, Vec::new()));
        }
        raw.last_mut().unwrap().2.push(StaticInstr {
            address,
            byte_size,
            encoding,
            mnemonic,
            operands,
            raw_text: line.to_string(),
        });
    }

    let mut model = ProgramModel::from_functions(raw).map_err(|e| match e {
        Error::Contract(m) => Error::parse(source_name, 0, m),
        other => other,
    })?;
    model.warnings = warnings;
    if warnings.unknown_mnemonics > 0 {
        log::warn!("{source_name}: {} instruction(s) with unknown mnemonics kept as non-fusable", warnings.unknown_mnemonics);
    }
    if warnings.size_mismatches > 0 {
        log::warn!(
            "{source_name}: {} instruction(s) whose encoding width disagrees with the mnemonic kept as non-fusable",
            warnings.size_mismatches
        );
    }
    Ok(model)
}

/// Splits on commas outside `<...>` and `(...)`.
fn split_operands(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '<' | '(' => depth += 1,
            '>' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].trim());
    out
}

pub(crate) fn parse_int(s: &str) -> Option<i64> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let v = if let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) {
        i64::from_str_radix(hex, 16).ok()?
    } else {
        if body.is_empty() || !body.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        body.parse::<i64>().ok()?
    };
    Some(if neg { -v } else { v })
}

fn parse_target(s: &str) -> Option<Operand> {
    if let Some(open) = s.find('<') {
        let addr_txt = s[..open].trim();
        let close = s.rfind('>')?;
        let symbol = s[open + 1..close].to_string();
        let addr_txt = addr_txt.strip_prefix("0x").unwrap_or(addr_txt);
        let addr = u32::from_str_radix(addr_txt, 16).ok()?;
        return Some(Operand::Target { addr, symbol: Some(symbol) });
    }
    let hex = s.strip_prefix("0x").unwrap_or(s);
    let addr = u32::from_str_radix(hex, 16).ok()?;
    Some(Operand::Target { addr, symbol: None })
}

fn parse_mem(s: &str) -> Option<Operand> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let base = Reg::parse(inner.trim())?;
    let off_txt = s[..open].trim();
    let offset = if off_txt.is_empty() { 0 } else { parse_int(off_txt)? };
    Some(Operand::Mem { offset, base })
}

fn parse_generic(s: &str) -> Operand {
    if let Some(r) = Reg::parse(s) {
        return Operand::Reg(r);
    }
    if let Some(v) = parse_int(s) {
        return Operand::Imm(v);
    }
    if let Some(m) = parse_mem(s) {
        return m;
    }
    if s.contains('<') {
        if let Some(t) = parse_target(s) {
            return t;
        }
    }
    Operand::Other(s.to_string())
}

fn parse_operands(text: &str, spec: Option<&'static OpSpec>) -> std::result::Result<Vec<Operand>, String> {
    let parts = split_operands(text);
    let Some(spec) = spec else {
        return Ok(parts.into_iter().map(parse_generic).collect());
    };
    let roles = match spec.signature {
        Signature::Free => {
            let mut ops: Vec<Operand> = parts.iter().map(|p| parse_generic(p)).collect();
            if spec.mnemonic == "jal" {
                if let Some(last) = parts.last() {
                    if Reg::parse(last).is_none() {
                        let t = parse_target(last).ok_or_else(|| format!("bad jump target `{last}`"))?;
                        *ops.last_mut().unwrap() = t;
                    }
                }
            }
            return Ok(ops);
        }
        Signature::Fixed(roles) => roles,
    };
    if parts.len() != roles.len() {
        return Err(format!("`{}` expects {} operand(s), found {}", spec.mnemonic, roles.len(), parts.len()));
    }
    let ops = roles
        .iter()
        .zip(parts)
        .map(|(role, p)| match role {
            Role::Dest | Role::Src | Role::SrcDest => {
                Reg::parse(p).map(Operand::Reg).ok_or_else(|| format!("expected register, found `{p}`"))
            }
            Role::Imm => {
                let v = parse_int(p).ok_or_else(|| format!("expected immediate, found `{p}`"))?;
                if let Some(kind) = spec.imm {
                    if !kind.contains(v) {
                        return Err(format!("immediate {p} out of range for `{}`", spec.mnemonic));
                    }
                }
                Ok(Operand::Imm(v))
            }
            Role::Mem => parse_mem(p).ok_or_else(|| format!("expected memory operand, found `{p}`")),
            Role::Target => parse_target(p).ok_or_else(|| format!("bad branch target `{p}`")),
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    if requires_prime_regs(spec.mnemonic) {
        let prime = |r: &Reg| (8..=15).contains(&r.index());
        let ok = ops.iter().all(|o| match o {
            Operand::Reg(r) | Operand::Mem { base: r, .. } => prime(r),
            _ => true,
        });
        if !ok {
            return Err(format!("`{}` only addresses registers x8-x15", spec.mnemonic));
        }
    }
    Ok(ops)
}

/// Execution counts per static instruction address.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceProfile {
    pub counts: BTreeMap<u32, u64>,
    pub total_executed: u64,
    /// Trace entries whose address is not part of the program.
    pub unmatched: u64,
}

impl TraceProfile {
    pub fn count(&self, address: u32) -> u64 {
        self.counts.get(&address).copied().unwrap_or(0)
    }

    pub fn matched_total(&self) -> u64 {
        self.counts.values().sum()
    }
}

pub fn parse_trace(text: &str, program: &ProgramModel) -> Result<TraceProfile> {
    parse_trace_named(text, program, "<trace>")
}

pub fn parse_trace_named(text: &str, program: &ProgramModel, source_name: &str) -> Result<TraceProfile> {
    let aggregated = text.lines().map(str::trim).find(|l| !l.is_empty()).is_some_and(|l| l.contains(','));
    let mut profile = TraceProfile::default();
    let overflow = |line| Error::parse(source_name, line, "execution count overflow");

    for (lineno, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() {
            continue;
        }
        let (pc_txt, count) = if aggregated {
            let (pc, n) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(source_name, lineno, "expected `<hex-pc>,<count>`"))?;
            let n = n.trim();
            if n.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) {
                return Err(Error::parse(source_name, lineno, format!("bad count `{n}`")));
            }
            let n: u64 = n.parse().map_err(|_| overflow(lineno))?;
            (pc.trim(), n)
        } else {
            (line, 1)
        };
        let hex = pc_txt.strip_prefix("0x").unwrap_or(pc_txt);
        if hex.is_empty() || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(Error::parse(source_name, lineno, format!("non-hex program counter `{pc_txt}`")));
        }
        let pc = u32::from_str_radix(hex, 16)
            .map_err(|_| Error::parse(source_name, lineno, format!("program counter `{pc_txt}` out of range")))?;

        profile.total_executed = profile.total_executed.checked_add(count).ok_or_else(|| overflow(lineno))?;
        if program.addr_index.contains_key(&pc) {
            let slot = profile.counts.entry(pc).or_insert(0);
            *slot = slot.checked_add(count).ok_or_else(|| overflow(lineno))?;
        } else {
            profile.unmatched = profile.unmatched.checked_add(count).ok_or_else(|| overflow(lineno))?;
        }
    }
    if profile.unmatched > 0 {
        log::warn!("{source_name}: {} trace entries do not match any parsed instruction", profile.unmatched);
    }
    Ok(profile)
}
