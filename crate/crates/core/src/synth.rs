//! Seeded synthetic programs and traces for fuzzing, benchmarks and the
//! bundled corpus.
//!
//! Programs are objdump-style listings built from a few recurring
//! dataflow idioms (re-instantiated with fresh registers), interleaved with
//! loads, stores, unrelated ALU work and branches. Encodings are filler of
//! the right width; only their length carries meaning.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::frontend::{BlockId, Operand, ProgramModel, StaticInstr};
use crate::isa::Reg;

const FUNCTION_BASE: u32 = 0x10000;
const FUNCTION_STRIDE: u32 = 0x1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthOptions {
    pub instrs: usize,
    pub functions: usize,
    pub m_ext: bool,
}

impl SynthOptions {
    pub fn new(instrs: usize) -> Self {
        SynthOptions { instrs, functions: (instrs / 120).clamp(1, 4), m_ext: false }
    }
}

#[derive(Clone, Debug)]
enum Arg {
    R(Reg),
    I(i64),
    Mem(i64, Reg),
    /// Branch target by instruction index within the function.
    To(usize),
}

#[derive(Clone, Debug)]
struct Pending {
    mnemonic: &'static str,
    args: Vec<Arg>,
}

impl Pending {
    fn size(&self) -> u32 {
        if self.mnemonic.starts_with("c.") {
            2
        } else {
            4
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Step {
    /// Three-register op whose first source is the previous result.
    Rr(&'static str),
    /// Register-immediate op on the previous result.
    Ri(&'static str, i64, i64),
    /// Compressed read-modify op on the previous result.
    Ca(&'static str),
    /// Compressed immediate op on the previous result.
    Ci(&'static str, i64, i64),
}

const RR: &[&str] = &["add", "sub", "and", "or", "xor", "sll", "srl", "sra", "slt", "sltu"];
const MUL: &[&str] = &["mul", "mulhu", "divu", "rem"];
const RI: &[(&str, i64, i64)] = &[
    ("addi", -2048, 2047),
    ("andi", -64, 63),
    ("ori", 0, 15),
    ("xori", -8, 8),
    ("slti", -16, 16),
    ("sltiu", 0, 32),
    ("slli", 0, 31),
    ("srli", 0, 31),
    ("srai", 0, 31),
];
const CA: &[&str] = &["c.add", "c.sub", "c.and", "c.or", "c.xor"];
const CI: &[(&str, i64, i64)] = &[("c.addi", -32, 31), ("c.andi", -32, 31), ("c.slli", 1, 31), ("c.srli", 1, 31), ("c.srai", 1, 31)];

fn needs_prime(m: &str) -> bool {
    matches!(m, "c.sub" | "c.and" | "c.or" | "c.xor" | "c.andi" | "c.srli" | "c.srai")
}

fn reg(name: &str) -> Reg {
    Reg::parse(name).expect("static register name")
}

struct Gen {
    rng: ChaCha8Rng,
    general: Vec<Reg>,
    prime: Vec<Reg>,
    m_ext: bool,
}

impl Gen {
    fn pick(&mut self, pool: &[Reg]) -> Reg {
        *pool.choose(&mut self.rng).expect("non-empty pool")
    }

    fn any(&mut self) -> Reg {
        let pool = self.general.clone();
        self.pick(&pool)
    }

    fn any_prime(&mut self) -> Reg {
        let pool = self.prime.clone();
        self.pick(&pool)
    }

    fn idiom(&mut self) -> Vec<Step> {
        let len = self.rng.gen_range(2..=4);
        (0..len)
            .map(|_| match self.rng.gen_range(0..10) {
                0..=2 => Step::Rr(if self.m_ext && self.rng.gen_ratio(1, 3) {
                    MUL.choose(&mut self.rng).copied().unwrap()
                } else {
                    RR.choose(&mut self.rng).copied().unwrap()
                }),
                3..=5 => {
                    let (m, lo, hi) = *RI.choose(&mut self.rng).unwrap();
                    Step::Ri(m, lo, hi)
                }
                6..=7 => Step::Ca(CA.choose(&mut self.rng).copied().unwrap()),
                _ => {
                    let (m, lo, hi) = *CI.choose(&mut self.rng).unwrap();
                    Step::Ci(m, lo, hi)
                }
            })
            .collect()
    }

    /// One concrete instance of an idiom as a dependent chain.
    fn instantiate(&mut self, idiom: &[Step], out: &mut Vec<Pending>) {
        let prime_chain = idiom.iter().any(|s| match s {
            Step::Ca(m) | Step::Ci(m, _, _) => needs_prime(m),
            _ => false,
        });
        let mut prev: Option<Reg> = None;
        for (k, step) in idiom.iter().enumerate() {
            let fresh = |g: &mut Gen| if prime_chain { g.any_prime() } else { g.any() };
            let src = match prev {
                Some(r) => r,
                None => fresh(self),
            };
            // The chain result either stays in place or moves to a new register.
            let dest = if k > 0 && self.rng.gen_ratio(1, 2) { src } else { fresh(self) };
            let p = match *step {
                Step::Rr(m) => {
                    let other = if self.rng.gen_ratio(1, 8) { Reg::ZERO } else { fresh(self) };
                    let args = if self.rng.gen_ratio(1, 4) { [other, src] } else { [src, other] };
                    Pending { mnemonic: m, args: vec![Arg::R(dest), Arg::R(args[0]), Arg::R(args[1])] }
                }
                Step::Ri(m, lo, hi) => {
                    let imm = self.rng.gen_range(lo..=hi);
                    Pending { mnemonic: m, args: vec![Arg::R(dest), Arg::R(src), Arg::I(imm)] }
                }
                Step::Ca(m) => {
                    let other = fresh(self);
                    Pending { mnemonic: m, args: vec![Arg::R(src), Arg::R(other)] }
                }
                Step::Ci(m, lo, hi) => {
                    let mut imm = self.rng.gen_range(lo..=hi);
                    if imm == 0 {
                        imm = 1;
                    }
                    Pending { mnemonic: m, args: vec![Arg::R(src), Arg::I(imm)] }
                }
            };
            prev = match p.args[0] {
                Arg::R(r) => Some(r),
                _ => None,
            };
            out.push(p);
        }
    }

    fn filler(&mut self, out: &mut Vec<Pending>) {
        let sp = reg("sp");
        let p = match self.rng.gen_range(0..8) {
            0 => Pending { mnemonic: "lw", args: vec![Arg::R(self.any()), Arg::Mem(4 * self.rng.gen_range(0..16), sp)] },
            1 => Pending { mnemonic: "sw", args: vec![Arg::R(self.any()), Arg::Mem(4 * self.rng.gen_range(0..16), sp)] },
            2 => {
                let (d, b) = (self.any_prime(), self.any_prime());
                Pending { mnemonic: "c.lw", args: vec![Arg::R(d), Arg::Mem(4 * self.rng.gen_range(0..8), b)] }
            }
            3 => Pending { mnemonic: "c.mv", args: vec![Arg::R(self.any()), Arg::R(self.any())] },
            4 => Pending { mnemonic: "c.li", args: vec![Arg::R(self.any()), Arg::I(self.rng.gen_range(-32..32))] },
            5 => Pending { mnemonic: "lui", args: vec![Arg::R(self.any()), Arg::I(self.rng.gen_range(0..0x100000))] },
            6 => Pending { mnemonic: "c.swsp", args: vec![Arg::R(self.any()), Arg::Mem(4 * self.rng.gen_range(0..16), sp)] },
            _ => {
                let m = RR.choose(&mut self.rng).copied().unwrap();
                Pending { mnemonic: m, args: vec![Arg::R(self.any()), Arg::R(self.any()), Arg::R(self.any())] }
            }
        };
        out.push(p);
    }

    fn branch(&mut self, here: usize, len_hint: usize) -> Pending {
        let forward = self.rng.gen_ratio(3, 4) || here < 4;
        let target = if forward {
            Arg::To(here + 1 + self.rng.gen_range(1..8).min(len_hint.saturating_sub(here + 1).max(1)))
        } else {
            Arg::To(self.rng.gen_range(here.saturating_sub(12)..here))
        };
        match self.rng.gen_range(0..4) {
            0 => Pending { mnemonic: "c.beqz", args: vec![Arg::R(self.any_prime()), target] },
            1 => Pending { mnemonic: "bne", args: vec![Arg::R(self.any()), Arg::R(self.any()), target] },
            2 => Pending { mnemonic: "blt", args: vec![Arg::R(self.any()), Arg::R(Reg::ZERO), target] },
            _ => Pending { mnemonic: "beq", args: vec![Arg::R(self.any()), Arg::R(self.any()), target] },
        }
    }
}

/// A random program of roughly `opts.instrs` instructions, as listing text.
pub fn synth_program(seed: u64, opts: &SynthOptions) -> String {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        general: ["t0", "t1", "t2", "a0", "a1", "a2", "a3", "a4", "a5", "a6", "a7", "s0", "s1", "s2", "s3", "s4", "t3"]
            .iter()
            .map(|r| reg(r))
            .collect(),
        prime: ["s0", "s1", "a0", "a1", "a2", "a3", "a4", "a5"].iter().map(|r| reg(r)).collect(),
        m_ext: opts.m_ext,
    };
    let idioms: Vec<Vec<Step>> = (0..g.rng.gen_range(3..=6)).map(|_| g.idiom()).collect();
    let functions = opts.functions.clamp(1, opts.instrs.max(2) / 2);

    let mut text = String::new();
    for f in 0..functions {
        let per_fn = (opts.instrs / functions + usize::from(f < opts.instrs % functions)).max(2);
        let mut body: Vec<Pending> = Vec::new();
        while body.len() + 1 < per_fn {
            match g.rng.gen_range(0..10) {
                0..=4 => {
                    let idiom = idioms.choose(&mut g.rng).unwrap().clone();
                    g.instantiate(&idiom, &mut body);
                }
                5..=7 => g.filler(&mut body),
                _ => {
                    let b = g.branch(body.len(), per_fn);
                    body.push(b);
                }
            }
        }
        body.truncate(per_fn - 1);
        body.push(Pending { mnemonic: "ret", args: vec![] });
        text.push_str(&render_function(&mut g.rng, f, &body));
    }
    text
}

fn render_function(rng: &mut ChaCha8Rng, f: usize, body: &[Pending]) -> String {
    let base = FUNCTION_BASE + f as u32 * FUNCTION_STRIDE;
    let name = format!("fn{f}");
    let mut addrs = Vec::with_capacity(body.len());
    let mut a = base;
    for p in body {
        addrs.push(a);
        a += p.size();
    }
    let last = body.len() - 1;
    let mut text = format!("{base:08x} <{name}>:\n");
    for (i, p) in body.iter().enumerate() {
        let enc = if p.size() == 2 {
            format!("{:04x}", (rng.gen::<u16>() & !3) | rng.gen_range(0..3))
        } else {
            format!("{:08x}", rng.gen::<u32>() | 3)
        };
        let ops: Vec<String> = p
            .args
            .iter()
            .map(|arg| match arg {
                Arg::R(r) => r.to_string(),
                Arg::I(v) if p.mnemonic == "lui" || v.unsigned_abs() > 9 => {
                    if *v < 0 {
                        format!("-0x{:x}", v.unsigned_abs())
                    } else {
                        format!("0x{v:x}")
                    }
                }
                Arg::I(v) => v.to_string(),
                Arg::Mem(off, b) => format!("{off}({b})"),
                Arg::To(idx) => {
                    let t = addrs[(*idx).min(last)];
                    if t == base {
                        format!("{t:x} <{name}>")
                    } else {
                        format!("{t:x} <{name}+0x{:x}>", t - base)
                    }
                }
            })
            .collect();
        if ops.is_empty() {
            text.push_str(&format!("{:8x}:\t{enc}          \t{}\n", addrs[i], p.mnemonic));
        } else {
            text.push_str(&format!("{:8x}:\t{enc}          \t{}\t{}\n", addrs[i], p.mnemonic, ops.join(",")));
        }
    }
    text.push('\n');
    text
}

/// Aggregated trace with one execution count per basic block, so every
/// instruction of a block executes equally often. Some blocks never run.
pub fn synth_trace(program: &ProgramModel, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7261_6365);
    let mut text = String::new();
    for block in program.blocks() {
        let count: u64 = match rng.gen_range(0..10) {
            0 => 0,
            1..=6 => rng.gen_range(1..50),
            _ => rng.gen_range(100..5000),
        };
        if count == 0 {
            continue;
        }
        for i in &block.instrs {
            text.push_str(&format!("{:x},{count}\n", i.address));
        }
    }
    text
}

/// Inserts a branch in front of `program.blocks[id].instrs[index]`,
/// shifting every later address (and every branch target at or beyond the
/// insertion point) by four bytes. Returns the new program and the address
/// of the inserted branch.
pub fn inject_branch(program: &ProgramModel, id: BlockId, index: usize) -> Result<(ProgramModel, u32)> {
    let at = program.block(id).instrs[index].address;
    let shift = |a: u32| if a >= at { a + 4 } else { a };
    let mut raw = program.flatten();
    for (fi, (_, addr, instrs)) in raw.iter_mut().enumerate() {
        if let Some(a) = addr {
            if *a > at {
                *a += 4;
            }
        }
        for instr in instrs.iter_mut() {
            instr.address = shift(instr.address);
            for op in &mut instr.operands {
                if let Operand::Target { addr, .. } = op {
                    *addr = shift(*addr);
                }
            }
        }
        if fi == id.function {
            let pos = instrs.iter().position(|i| i.address == at + 4).expect("instruction moved by four");
            instrs.insert(
                pos,
                StaticInstr {
                    address: at,
                    byte_size: 4,
                    encoding: 0x0000_0463,
                    mnemonic: "beq".to_string(),
                    operands: vec![
                        Operand::Reg(Reg::ZERO),
                        Operand::Reg(Reg::ZERO),
                        Operand::Target { addr: at + 4, symbol: None },
                    ],
                    raw_text: format!("beq\tzero,zero,0x{:x}", at + 4),
                },
            );
        }
    }
    Ok((ProgramModel::from_functions(raw)?, at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_disassembly, parse_trace};

    #[test]
    fn programs_parse_cleanly() {
        for seed in 0..20 {
            let text = synth_program(seed, &SynthOptions::new(50 + seed as usize * 20));
            let p = parse_disassembly(&text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{text}"));
            assert_eq!(p.warnings.unknown_mnemonics, 0);
            assert_eq!(p.warnings.size_mismatches, 0);
            assert_eq!(p.instr_count(), 50 + seed as usize * 20);
            let t = parse_trace(&synth_trace(&p, seed), &p).unwrap();
            assert_eq!(t.unmatched, 0);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let o = SynthOptions::new(200);
        assert_eq!(synth_program(3, &o), synth_program(3, &o));
        assert_ne!(synth_program(3, &o), synth_program(4, &o));
    }

    #[test]
    fn injected_branch_splits_block() {
        let p = parse_disassembly(&synth_program(1, &SynthOptions::new(120))).unwrap();
        let block = p.blocks().find(|b| b.instrs.len() >= 3).unwrap();
        let (q, at) = inject_branch(&p, block.id, 1).unwrap();
        assert_eq!(q.instr_count(), p.instr_count() + 1);
        assert!(q.instr_at(at).unwrap().is_control_flow());
        let next = q.addr_index[&(at + 4)];
        assert_eq!(next.index, 0, "instruction after the branch starts a block");
    }
}
