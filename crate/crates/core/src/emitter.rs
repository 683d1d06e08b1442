//! Encoding layouts, CoreDSL output and the JSON report.
//!
//! Layouts pack fields contiguously from bit 0 upward: the 7-bit major
//! opcode, the minor opcode index, `rd`, the input slots in order, the
//! immediate fields in order, and zero padding up to bit 31. This is not the
//! standard R-type placement; it keeps every field contiguous for any slot
//! and immediate count.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Number, Value};

use crate::error::{Error, Result};
use crate::generator::{CandidatePattern, ValueRef, BASE_OPCODE_BITS, INSTR_BITS, REG_BITS};
use crate::isa::{base_template, BinOp, SemExpr, Signedness};
use crate::selector::{sel_count, CUSTOM_COUNT};

/// The four RISC-V major opcodes reserved for custom extensions.
pub const CUSTOM_MAJORS: [u8; 4] = [0b000_1011, 0b010_1011, 0b101_1011, 0b111_1011];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Major(u8),
    Minor(u32),
    Rd,
    /// Input slot, numbered from 1 as in `rs1`.
    Rs(u8),
    Imm(u8),
    Padding,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Field {
    pub kind: FieldKind,
    pub width: u8,
}

/// Fields of one fused instruction word, least significant first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingLayout {
    pub fields: Vec<Field>,
    /// Total immediate field count; decides between `imm` and `imm{i}`.
    pub imm_count: u8,
}

/// Field values extracted from an instruction word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub rd: u8,
    pub rs: Vec<u8>,
    pub imms: Vec<i64>,
}

fn imm_name(index: u8, count: u8) -> String {
    if count == 1 {
        "imm".to_string()
    } else {
        format!("imm{index}")
    }
}

fn binary(value: u32, width: u8) -> String {
    format!("0b{:0w$b}", value, w = width as usize)
}

impl EncodingLayout {
    pub fn for_pattern(pattern: &CandidatePattern, major: u8, minor: u32) -> Result<Self> {
        let minor_width = pattern.budget.opcode_bits.checked_sub(BASE_OPCODE_BITS).ok_or_else(|| {
            Error::Contract(format!("{}: opcode narrower than the major opcode", pattern.name))
        })?;
        if minor_width < 32 && u64::from(minor) >= 1u64 << minor_width {
            return Err(Error::Contract(format!("minor opcode {minor} does not fit {minor_width} bits")));
        }
        let mut fields = vec![Field { kind: FieldKind::Major(major), width: BASE_OPCODE_BITS }];
        if minor_width > 0 {
            fields.push(Field { kind: FieldKind::Minor(minor), width: minor_width });
        }
        fields.push(Field { kind: FieldKind::Rd, width: REG_BITS as u8 });
        for k in 1..=pattern.inputs.len() {
            fields.push(Field { kind: FieldKind::Rs(k as u8), width: REG_BITS as u8 });
        }
        for (i, f) in pattern.imm_fields.iter().enumerate() {
            fields.push(Field { kind: FieldKind::Imm(i as u8), width: f.width });
        }
        let used: u32 = fields.iter().map(|f| u32::from(f.width)).sum();
        if used > INSTR_BITS {
            return Err(Error::Contract(format!("{}: layout needs {used} bits", pattern.name)));
        }
        if used < INSTR_BITS {
            fields.push(Field { kind: FieldKind::Padding, width: (INSTR_BITS - used) as u8 });
        }
        Ok(EncodingLayout { fields, imm_count: pattern.imm_fields.len() as u8 })
    }

    pub fn total_width(&self) -> u32 {
        self.fields.iter().map(|f| u32::from(f.width)).sum()
    }

    /// `(major, minor)` identifying the instruction.
    pub fn opcode_point(&self) -> (u8, u32) {
        let mut point = (0, 0);
        for f in &self.fields {
            match f.kind {
                FieldKind::Major(m) => point.0 = m,
                FieldKind::Minor(m) => point.1 = m,
                _ => {}
            }
        }
        point
    }

    /// Fields with their lowest bit position.
    pub fn positioned(&self) -> impl Iterator<Item = (u32, Field)> + '_ {
        self.fields.iter().scan(0u32, |lo, f| {
            let at = *lo;
            *lo += u32::from(f.width);
            Some((at, *f))
        })
    }

    /// Most-significant-first CoreDSL encoding string.
    pub fn render(&self) -> String {
        let parts: Vec<String> = self
            .fields
            .iter()
            .rev()
            .map(|f| {
                let hi = f.width.saturating_sub(1);
                match f.kind {
                    FieldKind::Major(m) => binary(u32::from(m), f.width),
                    FieldKind::Minor(m) => binary(m, f.width),
                    FieldKind::Padding => binary(0, f.width),
                    FieldKind::Rd => format!("rd[{hi}:0]"),
                    FieldKind::Rs(k) => format!("rs{k}[{hi}:0]"),
                    FieldKind::Imm(i) => format!("{}[{hi}:0]", imm_name(i, self.imm_count)),
                }
            })
            .collect();
        parts.join(" :: ")
    }

    /// Parses a string produced by [`EncodingLayout::render`].
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Contract(format!("bad encoding `{text}`: {m}"));
        let mut fields = Vec::new();
        let mut imm_names: Vec<String> = Vec::new();
        let tokens: Vec<&str> = text.split("::").map(str::trim).collect();
        for tok in tokens.into_iter().rev() {
            if let Some(bits) = tok.strip_prefix("0b") {
                if bits.is_empty() || bits.len() > 32 || !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(bad(format!("literal `{tok}`")));
                }
                let value = u32::from_str_radix(bits, 2).map_err(|e| bad(e.to_string()))?;
                let width = bits.len() as u8;
                let kind = match fields.last().map(|f: &Field| f.kind) {
                    None => {
                        if width != BASE_OPCODE_BITS {
                            return Err(bad("major opcode must be 7 bits".into()));
                        }
                        FieldKind::Major(value as u8)
                    }
                    Some(FieldKind::Major(_)) => FieldKind::Minor(value),
                    Some(_) if value == 0 => FieldKind::Padding,
                    Some(_) => return Err(bad(format!("misplaced literal `{tok}`"))),
                };
                fields.push(Field { kind, width });
                continue;
            }
            let (name, range) = tok.split_once('[').ok_or_else(|| bad(format!("token `{tok}`")))?;
            let range = range.strip_suffix(']').ok_or_else(|| bad(format!("token `{tok}`")))?;
            let (hi, lo) = range.split_once(':').ok_or_else(|| bad(format!("range `{range}`")))?;
            let hi: u8 = hi.parse().map_err(|_| bad(format!("range `{range}`")))?;
            if lo != "0" || hi >= 32 {
                return Err(bad(format!("range `{range}`")));
            }
            let width = hi + 1;
            let kind = if name == "rd" {
                FieldKind::Rd
            } else if let Some(k) = name.strip_prefix("rs").and_then(|k| k.parse().ok()) {
                FieldKind::Rs(k)
            } else if name.starts_with("imm") {
                imm_names.push(name.to_string());
                FieldKind::Imm(imm_names.len() as u8 - 1)
            } else {
                return Err(bad(format!("field `{name}`")));
            };
            fields.push(Field { kind, width });
        }
        let imm_count = imm_names.len() as u8;
        for (i, n) in imm_names.iter().enumerate() {
            if *n != imm_name(i as u8, imm_count) {
                return Err(bad(format!("immediate `{n}` out of order")));
            }
        }
        let layout = EncodingLayout { fields, imm_count };
        if layout.total_width() != INSTR_BITS {
            return Err(bad(format!("{} bits", layout.total_width())));
        }
        Ok(layout)
    }

    /// Packs operand values into an instruction word.
    pub fn encode(&self, rd: u8, rs: &[u8], imms: &[i64]) -> u32 {
        let mut word = 0u32;
        for (lo, f) in self.positioned() {
            let v: u32 = match f.kind {
                FieldKind::Major(m) => u32::from(m),
                FieldKind::Minor(m) => m,
                FieldKind::Rd => u32::from(rd),
                FieldKind::Rs(k) => u32::from(rs.get(k as usize - 1).copied().unwrap_or(0)),
                FieldKind::Imm(i) => imms.get(i as usize).copied().unwrap_or(0) as u32,
                FieldKind::Padding => 0,
            };
            let mask = if f.width >= 32 { u32::MAX } else { (1u32 << f.width) - 1 };
            word |= (v & mask) << lo;
        }
        word
    }

    /// Extracts operand values if `word` carries this layout's opcode point
    /// and zero padding. Immediates are sign-extended per `signedness`.
    pub fn decode(&self, word: u32, signedness: &[Signedness]) -> Option<Decoded> {
        let mut out = Decoded { rd: 0, rs: Vec::new(), imms: Vec::new() };
        for (lo, f) in self.positioned() {
            let mask = if f.width >= 32 { u32::MAX } else { (1u32 << f.width) - 1 };
            let v = (word >> lo) & mask;
            match f.kind {
                FieldKind::Major(m) if v != u32::from(m) => return None,
                FieldKind::Minor(m) if v != m => return None,
                FieldKind::Padding if v != 0 => return None,
                FieldKind::Rd => out.rd = v as u8,
                FieldKind::Rs(_) => out.rs.push(v as u8),
                FieldKind::Imm(i) => {
                    let signed = signedness.get(i as usize) == Some(&Signedness::Signed);
                    let shift = 64 - u32::from(f.width);
                    let x = if signed { ((i64::from(v)) << shift) >> shift } else { i64::from(v) };
                    out.imms.push(x);
                }
                _ => {}
            }
        }
        Some(out)
    }
}

/// Assigns `(major, minor)` opcode points by rank: rank `i` gets custom
/// major `i mod 4` and minor `i div 4`.
pub fn assign_opcodes(selected: &[CandidatePattern], opcode_bits: u8) -> Result<Vec<EncodingLayout>> {
    let cap = sel_count(opcode_bits) as usize;
    if selected.len() > cap {
        return Err(Error::Contract(format!("{} patterns exceed the {cap} opcode points", selected.len())));
    }
    selected
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if p.budget.opcode_bits != opcode_bits {
                return Err(Error::Contract(format!(
                    "{} was generated for {} opcode bits, not {opcode_bits}",
                    p.name, p.budget.opcode_bits
                )));
            }
            let major = CUSTOM_MAJORS[i % CUSTOM_COUNT as usize];
            EncodingLayout::for_pattern(p, major, (i / CUSTOM_COUNT as usize) as u32)
        })
        .collect()
}

/// Upper-cased, dot-free instruction names, with `_1`, `_2`, ... appended
/// to repeats in order.
pub fn instruction_names(patterns: &[CandidatePattern]) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut taken: Vec<String> = Vec::new();
    for p in patterns {
        let base = p.name.replace('.', "").to_uppercase();
        let mut name = base.clone();
        while taken.contains(&name) {
            let n = seen.entry(base.clone()).or_insert(0);
            *n += 1;
            name = format!("{base}_{n}");
        }
        taken.push(name);
    }
    taken
}

fn render_expr(e: &SemExpr, leaf: &dyn Fn(&SemExpr) -> String) -> String {
    let (op, a, b) = match e {
        SemExpr::Bin(op, a, b) => (*op, render_expr(a, leaf), render_expr(b, leaf)),
        SemExpr::Const(c) => return c.to_string(),
        other => return leaf(other),
    };
    let s32 = |x: &str| format!("(signed<32>){x}");
    match op {
        BinOp::Add => format!("(unsigned<32>)({a} + {b})"),
        BinOp::Sub => format!("(unsigned<32>)({a} - {b})"),
        BinOp::And => format!("({a} & {b})"),
        BinOp::Or => format!("({a} | {b})"),
        BinOp::Xor => format!("({a} ^ {b})"),
        BinOp::Sll => format!("(unsigned<32>)({a} << ({b} & 31))"),
        BinOp::Srl => format!("({a} >> ({b} & 31))"),
        BinOp::Sra => format!("(unsigned<32>)({} >> ({b} & 31))", s32(&a)),
        BinOp::Slt => format!("(({} < {}) ? 1 : 0)", s32(&a), s32(&b)),
        BinOp::Sltu => format!("(({a} < {b}) ? 1 : 0)"),
        BinOp::Mul => format!("(unsigned<32>)({a} * {b})"),
        BinOp::Mulh => format!("(unsigned<32>)(((signed<64>){} * (signed<64>){}) >> 32)", s32(&a), s32(&b)),
        BinOp::Mulhsu => format!("(unsigned<32>)(((signed<64>){} * (signed<64>){b}) >> 32)", s32(&a)),
        BinOp::Mulhu => format!("(unsigned<32>)(((unsigned<64>){a} * (unsigned<64>){b}) >> 32)"),
        BinOp::Div => format!(
            "(({b} == 0) ? 0xffffffff : ({a} == 0x80000000 && {b} == 0xffffffff) ? 0x80000000 : (unsigned<32>)({} / {}))",
            s32(&a),
            s32(&b)
        ),
        BinOp::Divu => format!("(({b} == 0) ? 0xffffffff : ({a} / {b}))"),
        BinOp::Rem => format!(
            "(({b} == 0) ? {a} : ({a} == 0x80000000 && {b} == 0xffffffff) ? 0 : (unsigned<32>)({} % {}))",
            s32(&a),
            s32(&b)
        ),
        BinOp::Remu => format!("(({b} == 0) ? {a} : ({a} % {b}))"),
    }
}

fn behavior_lines(pattern: &CandidatePattern) -> Vec<String> {
    let count = pattern.imm_fields.len() as u8;
    let mut lines = Vec::with_capacity(pattern.ops.len());
    for (j, op) in pattern.ops.iter().enumerate() {
        let Some(template) = base_template(&op.mnemonic) else {
            lines.push(format!("// no semantics for {}", op.mnemonic));
            continue;
        };
        let leaf = |e: &SemExpr| match *e {
            SemExpr::Read(i) => match op.srcs.get(i as usize) {
                Some(ValueRef::Input(k)) => format!("X[rs{}]", k + 1),
                Some(ValueRef::Op(d)) => format!("t{d}"),
                None => "0".to_string(),
            },
            SemExpr::Imm(_) => match op.imm {
                Some(i) => {
                    let f = pattern.imm_fields[i as usize];
                    let name = imm_name(i, count);
                    match f.signedness {
                        Signedness::Signed => format!("(unsigned<32>)(signed<32>)(signed<{}>){name}", f.width),
                        Signedness::Unsigned => format!("(unsigned<32>){name}"),
                    }
                }
                None => "0".to_string(),
            },
            _ => unreachable!("leaf callback only sees slots"),
        };
        let expr = render_expr(&template, &leaf);
        if j + 1 == pattern.ops.len() {
            lines.push(format!("if (rd != 0) X[rd] = {expr};"));
        } else {
            lines.push(format!("unsigned<32> t{j} = {expr};"));
        }
    }
    lines
}

/// Renders one `InstructionSet` holding every pattern.
pub fn emit_coredsl(patterns: &[(CandidatePattern, EncodingLayout)], set_name: &str) -> String {
    let only: Vec<CandidatePattern> = patterns.iter().map(|(p, _)| p.clone()).collect();
    let names = instruction_names(&only);
    let mut out = String::new();
    let _ = writeln!(out, "InstructionSet {set_name} extends RV32I {{");
    let _ = writeln!(out, "    instructions {{");
    for ((p, layout), name) in patterns.iter().zip(&names) {
        let mut operands = vec!["{name(rd)}".to_string()];
        operands.extend((1..=p.inputs.len()).map(|k| format!("{{name(rs{k})}}")));
        let count = p.imm_fields.len() as u8;
        operands.extend((0..count).map(|i| format!("{{{}}}", imm_name(i, count))));
        let _ = writeln!(out, "        {name} {{");
        let _ = writeln!(out, "            encoding: {};", layout.render());
        let _ = writeln!(out, "            assembly: {{\"{}\", \"{}\"}};", p.name, operands.join(", "));
        let _ = writeln!(out, "            behavior: {{");
        for line in behavior_lines(p) {
            let _ = writeln!(out, "                {line}");
        }
        let _ = writeln!(out, "            }}");
        let _ = writeln!(out, "        }}");
    }
    let _ = writeln!(out, "    }}");
    let _ = writeln!(out, "}}");
    out
}

/// A percentage printed with exactly two decimals, or `null` when absent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pct(pub Option<f64>);

impl Serialize for Pct {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            None => s.serialize_none(),
            Some(v) => {
                let n = Number::from_str(&format!("{v:.2}")).map_err(serde::ser::Error::custom)?;
                n.serialize(s)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub candidates_generated: usize,
    pub custom_bits: u8,
    pub custom_count: u32,
    pub equivalence_trials: u32,
    pub liveness: String,
    pub loop_bound: String,
    pub m_ext: bool,
    pub metric: String,
    pub mode: String,
    pub opcode_bits: u8,
    pub sel_count: u32,
    pub seed: u64,
    pub trace: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SiteRecord {
    pub address: String,
    pub block: String,
    pub exec_count: u64,
    pub start: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Improvements {
    pub dynamic_count: Option<i64>,
    pub dynamic_size: Option<i64>,
    pub static_size: i64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub encoding: String,
    pub improvement: Improvements,
    pub major_opcode: String,
    pub match_count: usize,
    pub match_sites: Vec<SiteRecord>,
    pub minor_opcode: u32,
    pub mnemonics: Vec<String>,
    pub name: String,
    pub pattern: CandidatePattern,
    pub rank: usize,
    /// Slices this pattern claimed in the combined rewrite.
    pub replacements: usize,
    pub signature: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Totals {
    pub dynamic_count_baseline: Option<u64>,
    pub dynamic_count_pct: Pct,
    pub dynamic_count_saved: Option<i64>,
    pub dynamic_size_baseline: Option<u64>,
    pub dynamic_size_pct: Pct,
    pub dynamic_size_saved: Option<i64>,
    pub replacements: usize,
    pub static_baseline: u64,
    pub static_pct: Pct,
    pub static_saved: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Warnings {
    pub nonuniform_trace_slices: usize,
    pub size_mismatches: usize,
    pub unknown_mnemonics: usize,
    pub unmatched_trace_entries: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportDocument {
    pub config: ConfigEcho,
    pub selected: Vec<CandidateRecord>,
    pub totals: Totals,
    pub warnings: Warnings,
}

/// Serializes the report with sorted keys and two-decimal percentages.
pub fn emit_report(report: &ReportDocument) -> Result<String> {
    let value = serde_json::to_value(report).map_err(|e| Error::Invariant(format!("report serialization: {e}")))?;
    let mut out = String::new();
    write_canonical(&value, 0, &mut out);
    out.push('\n');
    Ok(out)
}

/// Pretty-prints `value` with object keys in sorted order, independent of
/// how the underlying map orders them.
fn write_canonical(value: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Object(map) if !map.is_empty() => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_canonical(&map[*k], indent + 1, out);
                out.push_str(if i + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) if !items.is_empty() => {
            out.push_str("[\n");
            for (i, v) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_canonical(v, indent + 1, out);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_disassembly;
    use crate::generator::{generate, GenConfig, LivenessMode};

    const LISTING: &str = "000100e4 <demo>:
   100e4:\t00f40333\tadd\tt1,s0,a5
   100e8:\t00c307b3\tadd\ta5,t1,a2
   100ec:\t0017c593\txori\ta1,a5,0x1
   100f0:\t8d4d\tc.or\ta0,a1
   100f2:\t00a039b3\tsltu\ts3,zero,a0
   100f6:\t08050513\taddi\ta0,a0,0x80
";

    fn patterns() -> Vec<CandidatePattern> {
        let p = parse_disassembly(LISTING).unwrap();
        let cfg = GenConfig { liveness: LivenessMode::Paper, ..GenConfig::default() };
        generate(&p, &cfg).unwrap()
    }

    fn xori_or_sltu() -> CandidatePattern {
        patterns().into_iter().find(|p| p.name == "xori_or_sltu").unwrap()
    }

    #[test]
    fn listing_encoding_string() {
        let l = EncodingLayout::for_pattern(&xori_or_sltu(), CUSTOM_MAJORS[0], 0).unwrap();
        assert_eq!(l.render(), "imm[2:0] :: rs3[4:0] :: rs2[4:0] :: rs1[4:0] :: rd[4:0] :: 0b00 :: 0b0001011");
        assert_eq!(l.total_width(), 32);
        assert_eq!(EncodingLayout::parse(&l.render()).unwrap(), l);
    }

    #[test]
    fn padding_is_a_zero_literal() {
        let add_add = patterns().into_iter().find(|p| p.name == "add_add").unwrap();
        let l = EncodingLayout::for_pattern(&add_add, CUSTOM_MAJORS[1], 3).unwrap();
        assert_eq!(l.render(), "0b000 :: rs3[4:0] :: rs2[4:0] :: rs1[4:0] :: rd[4:0] :: 0b11 :: 0b0101011");
        assert_eq!(EncodingLayout::parse(&l.render()).unwrap(), l);
    }

    #[test]
    fn opcode_assignment() {
        let p = xori_or_sltu();
        let sixteen = vec![p.clone(); 16];
        let layouts = assign_opcodes(&sixteen, 9).unwrap();
        let mut points: Vec<(u8, u32)> = layouts.iter().map(EncodingLayout::opcode_point).collect();
        assert_eq!(points[0], (CUSTOM_MAJORS[0], 0));
        assert_eq!(points[4], (CUSTOM_MAJORS[0], 1));
        assert_eq!(points[15], (CUSTOM_MAJORS[3], 3));
        points.sort();
        points.dedup();
        assert_eq!(points.len(), 16);
        assert!(matches!(assign_opcodes(&vec![p.clone(); 17], 9), Err(Error::Contract(_))));
        assert!(matches!(assign_opcodes(&[p], 8), Err(Error::Contract(_))));
    }

    #[test]
    fn encode_decode_round_trip() {
        let p = xori_or_sltu();
        let l = EncodingLayout::for_pattern(&p, CUSTOM_MAJORS[2], 2).unwrap();
        let word = l.encode(19, &[15, 10, 0], &[-3]);
        assert_eq!(word & 0x7f, u32::from(CUSTOM_MAJORS[2]));
        let d = l.decode(word, &[Signedness::Signed]).unwrap();
        assert_eq!(d, Decoded { rd: 19, rs: vec![15, 10, 0], imms: vec![-3] });
        let other = EncodingLayout::for_pattern(&p, CUSTOM_MAJORS[2], 1).unwrap();
        assert!(other.decode(word, &[Signedness::Signed]).is_none());
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(EncodingLayout::parse("rd[4:0] :: 0b0001011").is_err());
        assert!(EncodingLayout::parse("rd[4:1] :: 0b0001011").is_err());
        assert!(EncodingLayout::parse("0b1 :: rd[4:0] :: 0b00 :: 0b0001011").is_err());
    }

    #[test]
    fn coredsl_shape() {
        let ps = patterns();
        let layouts = assign_opcodes(&ps, 9).unwrap();
        let pairs: Vec<_> = ps.into_iter().zip(layouts).collect();
        let text = emit_coredsl(&pairs, "XFused");
        assert!(text.starts_with("InstructionSet XFused extends RV32I {\n    instructions {\n"));
        assert!(text.contains("        XORI_OR_SLTU {\n"));
        assert!(text.contains("        ADD_ADD {\n"));
        assert!(text.contains("unsigned<32> t0 = (X[rs1] ^ (unsigned<32>)(signed<32>)(signed<3>)imm);"));
        assert!(text.contains("unsigned<32> t1 = (X[rs2] | t0);"), "{text}");
        assert!(text.contains("if (rd != 0) X[rd] = ((X[rs3] < t1) ? 1 : 0);"), "{text}");
        assert_eq!(text, emit_coredsl(&pairs, "XFused"));
    }

    #[test]
    fn empty_coredsl() {
        assert_eq!(
            emit_coredsl(&[], "XFused"),
            "InstructionSet XFused extends RV32I {\n    instructions {\n    }\n}\n"
        );
    }

    #[test]
    fn names_are_disambiguated() {
        let p = xori_or_sltu();
        let names = instruction_names(&[p.clone(), p.clone(), p]);
        assert_eq!(names, ["XORI_OR_SLTU", "XORI_OR_SLTU_1", "XORI_OR_SLTU_2"]);
    }

    #[test]
    fn percentages_keep_two_decimals() {
        let v = serde_json::to_value(Pct(Some(1.5))).unwrap();
        assert_eq!(v.to_string(), "1.50");
        assert_eq!(serde_json::to_value(Pct(None)).unwrap(), Value::Null);
    }

    #[test]
    fn canonical_writer_sorts_keys() {
        let v: Value = serde_json::from_str(r#"{"b": [1, {"d": 2, "c": null}], "a": {}}"#).unwrap();
        let mut s = String::new();
        write_canonical(&v, 0, &mut s);
        assert_eq!(s, "{\n  \"a\": {},\n  \"b\": [\n    1,\n    {\n      \"c\": null,\n      \"d\": 2\n    }\n  ]\n}");
    }
}
