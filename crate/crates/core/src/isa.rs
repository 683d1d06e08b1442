//! RV32 instruction vocabulary.
//!
//! Every mnemonic the tool understands is described by an [`OpSpec`]: its
//! operand roles, its byte size, whether it may take part in a fused
//! instruction, and (for fusable operations) an executable semantic template
//! expressed as a [`SemExpr`] over the operation's canonical operands.
//!
//! The canonical operand form is three-address: one destination register,
//! zero or more source registers and at most one immediate. Compressed
//! encodings are normalized onto the same form, so `c.or a0,a1` reads
//! `a0, a1` and writes `a0` exactly like `or a0,a0,a1`.
//!
//! The fusable whitelist is a reconstruction of the integer ALU subset of
//! RV32IC (see [`FUSABLE_WHITELIST`]); multiply/divide operations are known
//! but only fusable when explicitly enabled.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the 32 integer registers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reg(u8);

const ABI_NAMES: [&str; 32] = [
    "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3", "a4",
    "a5", "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11", "t3", "t4",
    "t5", "t6",
];

impl Reg {
    pub const ZERO: Reg = Reg(0);

    pub fn new(index: u8) -> Option<Reg> {
        (index < 32).then_some(Reg(index))
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn abi_name(self) -> &'static str {
        ABI_NAMES[self.0 as usize]
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Accepts ABI names, the `fp` alias and architectural `xN` names.
    pub fn parse(name: &str) -> Option<Reg> {
        if name == "fp" {
            return Some(Reg(8));
        }
        if let Some(pos) = ABI_NAMES.iter().position(|n| *n == name) {
            return Some(Reg(pos as u8));
        }
        let digits = name.strip_prefix('x')?;
        if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
            return None;
        }
        digits.parse::<u8>().ok().and_then(Reg::new)
    }

    pub fn all() -> impl Iterator<Item = Reg> {
        (0..32).map(Reg)
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.abi_name())
    }
}

impl FromStr for Reg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Reg::parse(s).ok_or_else(|| format!("unknown register `{s}`"))
    }
}

impl Serialize for Reg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.abi_name())
    }
}

impl<'de> Deserialize<'de> for Reg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Reg::parse(&name).ok_or_else(|| serde::de::Error::custom(format!("unknown register `{name}`")))
    }
}

/// Binary operators available in semantic templates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinOp {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Sll,
    Srl,
    Sra,
    Slt,
    Sltu,
    Mul,
    Mulh,
    Mulhsu,
    Mulhu,
    Div,
    Divu,
    Rem,
    Remu,
}

impl BinOp {
    pub fn apply(self, a: u32, b: u32) -> u32 {
        match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::And => a & b,
            BinOp::Or => a | b,
            BinOp::Xor => a ^ b,
            BinOp::Sll => a << (b & 0x1f),
            BinOp::Srl => a >> (b & 0x1f),
            BinOp::Sra => ((a as i32) >> (b & 0x1f)) as u32,
            BinOp::Slt => ((a as i32) < (b as i32)) as u32,
            BinOp::Sltu => (a < b) as u32,
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::Mulh => ((a as i32 as i64).wrapping_mul(b as i32 as i64) >> 32) as u32,
            BinOp::Mulhsu => ((a as i32 as i64).wrapping_mul(b as i64) >> 32) as u32,
            BinOp::Mulhu => ((a as u64 * b as u64) >> 32) as u32,
            BinOp::Div => {
                if b == 0 {
                    u32::MAX
                } else {
                    (a as i32).wrapping_div(b as i32) as u32
                }
            }
            BinOp::Divu => a.checked_div(b).unwrap_or(u32::MAX),
            BinOp::Rem => {
                if b == 0 {
                    a
                } else {
                    (a as i32).wrapping_rem(b as i32) as u32
                }
            }
            BinOp::Remu => a.checked_rem(b).unwrap_or(a),
        }
    }
}

/// Expression tree over operand slots, evaluated on 32-bit two's-complement
/// values with wrapping arithmetic.
///
/// In an operation template, `Read(i)` is the i-th canonical source register
/// and `Imm(0)` the immediate. In a fused pattern, `Read(k)` is input slot
/// `rs{k+1}` and `Imm(j)` the j-th immediate field.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemExpr {
    Read(u8),
    Imm(u8),
    Const(u32),
    Bin(BinOp, Box<SemExpr>, Box<SemExpr>),
}

impl SemExpr {
    pub fn bin(op: BinOp, lhs: SemExpr, rhs: SemExpr) -> SemExpr {
        SemExpr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// Replaces every `Read`/`Imm` leaf through the given maps.
    pub fn substitute(
        &self,
        read: &dyn Fn(u8) -> SemExpr,
        imm: &dyn Fn(u8) -> SemExpr,
    ) -> SemExpr {
        match self {
            SemExpr::Read(i) => read(*i),
            SemExpr::Imm(i) => imm(*i),
            SemExpr::Const(c) => SemExpr::Const(*c),
            SemExpr::Bin(op, a, b) => SemExpr::bin(*op, a.substitute(read, imm), b.substitute(read, imm)),
        }
    }

    /// Visits every node, parents before children.
    pub fn walk(&self, f: &mut dyn FnMut(&SemExpr)) {
        f(self);
        if let SemExpr::Bin(_, a, b) = self {
            a.walk(f);
            b.walk(f);
        }
    }
}

/// Values bound to the slots of a [`SemExpr`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotValues {
    pub reads: Vec<u32>,
    pub imms: Vec<u32>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SemError {
    #[error("read slot {0} is not bound")]
    UnboundRead(u8),
    #[error("immediate slot {0} is not bound")]
    UnboundImm(u8),
}

/// Evaluates a template under the given slot bindings.
pub fn eval_sem(expr: &SemExpr, values: &SlotValues) -> Result<u32, SemError> {
    match expr {
        SemExpr::Read(i) => values.reads.get(*i as usize).copied().ok_or(SemError::UnboundRead(*i)),
        SemExpr::Imm(i) => values.imms.get(*i as usize).copied().ok_or(SemError::UnboundImm(*i)),
        SemExpr::Const(c) => Ok(*c),
        SemExpr::Bin(op, a, b) => Ok(op.apply(eval_sem(a, values)?, eval_sem(b, values)?)),
    }
}

/// Role of one written operand of an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Dest,
    Src,
    /// Read and then overwritten by the same instruction (compressed two-address forms).
    SrcDest,
    Imm,
    /// `offset(base)` memory operand; the base register is read.
    Mem,
    /// PC-relative branch or jump target.
    Target,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Signature {
    Fixed(&'static [Role]),
    /// Several assembler forms exist; operands are parsed generically and
    /// every register operand is treated as read.
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpClass {
    Alu,
    MulDiv,
    Load,
    Store,
    Branch,
    Jump,
    System,
    /// Known but never fusable (pc-relative arithmetic, stack-pointer forms, fences, CSRs).
    Other,
}

impl OpClass {
    /// Whether the instruction ends a basic block.
    pub fn is_control_flow(self) -> bool {
        matches!(self, OpClass::Branch | OpClass::Jump | OpClass::System)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signedness {
    Signed,
    Unsigned,
}

/// Immediate operand properties: signedness and the architectural field width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ImmKind {
    pub signedness: Signedness,
    pub max_width: u8,
}

impl ImmKind {
    pub fn contains(&self, value: i64) -> bool {
        fits(value, self.max_width, self.signedness)
    }
}

/// Whether `value` is representable in a field of `width` bits.
pub fn fits(value: i64, width: u8, signedness: Signedness) -> bool {
    if width == 0 || width > 32 {
        return false;
    }
    let w = width as u32;
    match signedness {
        Signedness::Signed => {
            let lo = -(1i64 << (w - 1));
            let hi = (1i64 << (w - 1)) - 1;
            (lo..=hi).contains(&value)
        }
        Signedness::Unsigned => value >= 0 && value < (1i64 << w),
    }
}

/// Smallest field width holding `value`; zero takes one bit.
pub fn min_width(value: i64, signedness: Signedness) -> u8 {
    (1..=64u8).find(|&w| w > 32 || fits(value, w, signedness)).unwrap_or(64)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpSpec {
    pub mnemonic: &'static str,
    /// Compressed prefix stripped: `c.or` → `or`.
    pub base_mnemonic: &'static str,
    pub signature: Signature,
    pub byte_size: u8,
    pub class: OpClass,
    /// Member of the default fusable whitelist.
    pub fusable: bool,
    pub imm: Option<ImmKind>,
    pub semantic_template: Option<SemExpr>,
}

impl OpSpec {
    pub fn is_compressed(&self) -> bool {
        self.mnemonic.starts_with("c.")
    }

    /// Fusability under a configuration that may enable the M extension.
    pub fn fusable_with(&self, include_m_ext: bool) -> bool {
        self.fusable || (include_m_ext && self.class == OpClass::MulDiv)
    }

    pub fn imm_signedness(&self) -> Option<Signedness> {
        self.imm.map(|k| k.signedness)
    }
}

/// The default fusable set: the integer ALU subset of RV32I and RVC.
pub const FUSABLE_WHITELIST: &[&str] = &[
    "add", "sub", "and", "or", "xor", "addi", "andi", "ori", "xori", "slt", "sltu", "slti", "sltiu",
    "sll", "srl", "sra", "slli", "srli", "srai", "lui", "c.add", "c.sub", "c.and", "c.or", "c.xor",
    "c.addi", "c.andi", "c.slli", "c.srli", "c.srai", "c.mv", "c.li", "c.lui",
];

pub const M_EXT_OPS: &[&str] = &["mul", "mulh", "mulhsu", "mulhu", "div", "divu", "rem", "remu"];

const R3: &[Role] = &[Role::Dest, Role::Src, Role::Src];
const RI: &[Role] = &[Role::Dest, Role::Src, Role::Imm];
const DI: &[Role] = &[Role::Dest, Role::Imm];
const SD_S: &[Role] = &[Role::SrcDest, Role::Src];
const SD_I: &[Role] = &[Role::SrcDest, Role::Imm];
const D_S: &[Role] = &[Role::Dest, Role::Src];
const LOAD: &[Role] = &[Role::Dest, Role::Mem];
const STORE: &[Role] = &[Role::Src, Role::Mem];
const BR2: &[Role] = &[Role::Src, Role::Src, Role::Target];
const BR1: &[Role] = &[Role::Src, Role::Target];
const TGT: &[Role] = &[Role::Target];
const SRC: &[Role] = &[Role::Src];
const NONE: &[Role] = &[];

const SIMM12: ImmKind = ImmKind { signedness: Signedness::Signed, max_width: 12 };
const SHAMT: ImmKind = ImmKind { signedness: Signedness::Unsigned, max_width: 5 };
const UIMM20: ImmKind = ImmKind { signedness: Signedness::Unsigned, max_width: 20 };

/// Semantic template of a base (uncompressed) mnemonic over its canonical operands.
pub fn base_template(base: &str) -> Option<SemExpr> {
    use SemExpr::{Const, Imm, Read};
    let rr = |op| SemExpr::bin(op, Read(0), Read(1));
    let ri = |op| SemExpr::bin(op, Read(0), Imm(0));
    Some(match base {
        "add" => rr(BinOp::Add),
        "sub" => rr(BinOp::Sub),
        "and" => rr(BinOp::And),
        "or" => rr(BinOp::Or),
        "xor" => rr(BinOp::Xor),
        "sll" => rr(BinOp::Sll),
        "srl" => rr(BinOp::Srl),
        "sra" => rr(BinOp::Sra),
        "slt" => rr(BinOp::Slt),
        "sltu" => rr(BinOp::Sltu),
        "addi" => ri(BinOp::Add),
        "andi" => ri(BinOp::And),
        "ori" => ri(BinOp::Or),
        "xori" => ri(BinOp::Xor),
        "slti" => ri(BinOp::Slt),
        "sltiu" => ri(BinOp::Sltu),
        "slli" => ri(BinOp::Sll),
        "srli" => ri(BinOp::Srl),
        "srai" => ri(BinOp::Sra),
        "lui" => SemExpr::bin(BinOp::Sll, Imm(0), Const(12)),
        "mv" => Read(0),
        "li" => Imm(0),
        "mul" => rr(BinOp::Mul),
        "mulh" => rr(BinOp::Mulh),
        "mulhsu" => rr(BinOp::Mulhsu),
        "mulhu" => rr(BinOp::Mulhu),
        "div" => rr(BinOp::Div),
        "divu" => rr(BinOp::Divu),
        "rem" => rr(BinOp::Rem),
        "remu" => rr(BinOp::Remu),
        _ => return None,
    })
}

struct Row(&'static str, Signature, u8, OpClass, Option<ImmKind>);

fn rows() -> Vec<Row> {
    use OpClass::*;
    use Signature::{Fixed, Free};
    let mut v = Vec::new();
    for m in ["add", "sub", "and", "or", "xor", "sll", "srl", "sra", "slt", "sltu"] {
        v.push(Row(m, Fixed(R3), 4, Alu, None));
    }
    for m in ["addi", "andi", "ori", "xori", "slti", "sltiu"] {
        v.push(Row(m, Fixed(RI), 4, Alu, Some(SIMM12)));
    }
    for m in ["slli", "srli", "srai"] {
        v.push(Row(m, Fixed(RI), 4, Alu, Some(SHAMT)));
    }
    v.push(Row("lui", Fixed(DI), 4, Alu, Some(UIMM20)));
    v.push(Row("auipc", Fixed(DI), 4, Other, Some(UIMM20)));
    for m in ["c.add", "c.sub", "c.and", "c.or", "c.xor"] {
        v.push(Row(m, Fixed(SD_S), 2, Alu, None));
    }
    for m in ["c.addi", "c.andi"] {
        v.push(Row(m, Fixed(SD_I), 2, Alu, Some(SIMM12)));
    }
    for m in ["c.slli", "c.srli", "c.srai"] {
        v.push(Row(m, Fixed(SD_I), 2, Alu, Some(SHAMT)));
    }
    v.push(Row("c.mv", Fixed(D_S), 2, Alu, None));
    v.push(Row("c.li", Fixed(DI), 2, Alu, Some(SIMM12)));
    v.push(Row("c.lui", Fixed(DI), 2, Alu, Some(UIMM20)));
    v.push(Row("c.addi4spn", Fixed(RI), 2, Other, None));
    v.push(Row("c.addi16sp", Fixed(SD_I), 2, Other, None));
    for m in M_EXT_OPS {
        v.push(Row(m, Fixed(R3), 4, MulDiv, None));
    }
    for m in ["lb", "lh", "lw", "lbu", "lhu"] {
        v.push(Row(m, Fixed(LOAD), 4, Load, None));
    }
    for m in ["c.lw", "c.lwsp"] {
        v.push(Row(m, Fixed(LOAD), 2, Load, None));
    }
    for m in ["sb", "sh", "sw"] {
        v.push(Row(m, Fixed(STORE), 4, Store, None));
    }
    for m in ["c.sw", "c.swsp"] {
        v.push(Row(m, Fixed(STORE), 2, Store, None));
    }
    for m in ["beq", "bne", "blt", "bge", "bltu", "bgeu", "bgt", "ble", "bgtu", "bleu"] {
        v.push(Row(m, Fixed(BR2), 4, Branch, None));
    }
    for m in ["beqz", "bnez", "blez", "bgez", "bltz", "bgtz"] {
        v.push(Row(m, Fixed(BR1), 4, Branch, None));
    }
    for m in ["c.beqz", "c.bnez"] {
        v.push(Row(m, Fixed(BR1), 2, Branch, None));
    }
    v.push(Row("jal", Free, 4, Jump, None));
    v.push(Row("jalr", Free, 4, Jump, None));
    v.push(Row("j", Fixed(TGT), 4, Jump, None));
    v.push(Row("jr", Fixed(SRC), 4, Jump, None));
    v.push(Row("ret", Fixed(NONE), 4, Jump, None));
    v.push(Row("c.j", Fixed(TGT), 2, Jump, None));
    v.push(Row("c.jal", Fixed(TGT), 2, Jump, None));
    v.push(Row("c.jr", Fixed(SRC), 2, Jump, None));
    v.push(Row("c.jalr", Fixed(SRC), 2, Jump, None));
    for m in ["ecall", "ebreak", "mret", "sret", "wfi"] {
        v.push(Row(m, Free, 4, System, None));
    }
    v.push(Row("c.ebreak", Free, 2, System, None));
    for m in ["fence", "fence.i", "csrr", "csrw", "csrs", "csrc", "csrrw", "csrrs", "csrrc", "csrrwi", "csrrsi", "csrrci"] {
        v.push(Row(m, Free, 4, Other, None));
    }
    v.push(Row("nop", Fixed(NONE), 4, Other, None));
    v.push(Row("c.nop", Fixed(NONE), 2, Other, None));
    v
}

fn table() -> &'static BTreeMap<&'static str, OpSpec> {
    static TABLE: OnceLock<BTreeMap<&'static str, OpSpec>> = OnceLock::new();
    TABLE.get_or_init(|| {
        rows()
            .into_iter()
            .map(|Row(mnemonic, signature, byte_size, class, imm)| {
                let base_mnemonic = mnemonic.strip_prefix("c.").unwrap_or(mnemonic);
                let fusable = FUSABLE_WHITELIST.contains(&mnemonic);
                let semantic_template = match class {
                    OpClass::Alu if fusable => base_template(base_mnemonic),
                    OpClass::MulDiv => base_template(base_mnemonic),
                    _ => None,
                };
                let spec = OpSpec {
                    mnemonic,
                    base_mnemonic,
                    signature,
                    byte_size,
                    class,
                    fusable,
                    imm,
                    semantic_template,
                };
                (mnemonic, spec)
            })
            .collect()
    })
}

/// Compressed forms whose register fields only address x8-x15.
pub fn requires_prime_regs(mnemonic: &str) -> bool {
    matches!(
        mnemonic,
        "c.sub" | "c.xor" | "c.or" | "c.and" | "c.andi" | "c.srli" | "c.srai" | "c.lw" | "c.sw" | "c.beqz" | "c.bnez"
    )
}

/// Looks up a mnemonic; `None` marks an unknown or unsupported operation.
pub fn lookup_op(mnemonic: &str) -> Option<&'static OpSpec> {
    table().get(mnemonic)
}

/// All known operations in mnemonic order.
pub fn all_ops() -> impl Iterator<Item = &'static OpSpec> {
    table().values()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abi_names_are_a_bijection() {
        for r in Reg::all() {
            assert_eq!(Reg::parse(r.abi_name()), Some(r));
            assert_eq!(Reg::parse(&format!("x{}", r.index())), Some(r));
        }
        assert_eq!(Reg::parse("fp"), Reg::parse("s0"));
        assert_eq!(Reg::parse("x32"), None);
        assert_eq!(Reg::parse("x01"), None);
        assert_eq!(Reg::parse("fa0"), None);
    }

    #[test]
    fn lookup_examples() {
        let add = lookup_op("add").unwrap();
        assert_eq!(add.byte_size, 4);
        assert!(add.fusable);
        assert_eq!(add.signature, Signature::Fixed(&[Role::Dest, Role::Src, Role::Src]));

        let cor = lookup_op("c.or").unwrap();
        assert_eq!(cor.byte_size, 2);
        assert!(cor.fusable);
        assert_eq!(cor.signature, Signature::Fixed(&[Role::SrcDest, Role::Src]));
        assert_eq!(cor.base_mnemonic, "or");

        assert!(!lookup_op("beq").unwrap().fusable);
        assert!(lookup_op("frobnicate").is_none());
    }

    #[test]
    fn table_invariants() {
        for op in all_ops() {
            assert_eq!(op.byte_size == 2, op.is_compressed(), "{}", op.mnemonic);
            if op.fusable {
                assert!(matches!(op.class, OpClass::Alu), "{}", op.mnemonic);
                assert!(op.semantic_template.is_some(), "{}", op.mnemonic);
            }
            if op.class == OpClass::MulDiv {
                assert!(!op.fusable);
                assert!(op.fusable_with(true));
                assert!(op.semantic_template.is_some());
            }
        }
        for m in FUSABLE_WHITELIST {
            assert!(lookup_op(m).unwrap().fusable, "{m}");
        }
        assert!(!lookup_op("auipc").unwrap().fusable);
        assert!(!lookup_op("lw").unwrap().fusable);
    }

    #[test]
    fn eval_examples() {
        let xori = SemExpr::bin(BinOp::Xor, SemExpr::Read(0), SemExpr::Imm(0));
        let v = SlotValues { reads: vec![8], imms: vec![1] };
        assert_eq!(eval_sem(&xori, &v), Ok(9));

        let add = SemExpr::bin(BinOp::Add, SemExpr::Read(0), SemExpr::Read(1));
        let v = SlotValues { reads: vec![0xFFFF_FFFF, 1], imms: vec![] };
        assert_eq!(eval_sem(&add, &v), Ok(0));

        let sltu = SemExpr::bin(BinOp::Sltu, SemExpr::Const(0), SemExpr::Read(0));
        let v = SlotValues { reads: vec![5], imms: vec![] };
        assert_eq!(eval_sem(&sltu, &v), Ok(1));
    }

    #[test]
    fn unbound_slot_is_an_error() {
        let e = SemExpr::bin(BinOp::Add, SemExpr::Read(0), SemExpr::Read(3));
        let v = SlotValues { reads: vec![1, 2], imms: vec![] };
        assert_eq!(eval_sem(&e, &v), Err(SemError::UnboundRead(3)));
        assert_eq!(eval_sem(&SemExpr::Imm(0), &v), Err(SemError::UnboundImm(0)));
    }

    #[test]
    fn widths() {
        assert_eq!(min_width(-1, Signedness::Signed), 1);
        assert_eq!(min_width(0, Signedness::Signed), 1);
        assert_eq!(min_width(1, Signedness::Signed), 2);
        assert_eq!(min_width(1, Signedness::Unsigned), 1);
        assert_eq!(min_width(0x1f, Signedness::Unsigned), 5);
        assert_eq!(min_width(128, Signedness::Signed), 9);
        assert_eq!(min_width(-2048, Signedness::Signed), 12);
        assert!(fits(7, 3, Signedness::Unsigned));
        assert!(!fits(-1, 3, Signedness::Unsigned));
        assert!(fits(-4, 3, Signedness::Signed));
        assert!(!fits(4, 3, Signedness::Signed));
    }

    #[test]
    fn shifts_use_low_five_bits() {
        assert_eq!(BinOp::Sll.apply(1, 33), 2);
        assert_eq!(BinOp::Sra.apply(0x8000_0000, 31), 0xFFFF_FFFF);
        assert_eq!(BinOp::Srl.apply(0x8000_0000, 31), 1);
    }
}
