//! Ground truth for every number the selector reports.
//!
//! The oracle rewrites the program with the selected patterns, recounts the
//! three metrics from scratch on the rewritten program, and checks each
//! pattern's fused semantics against a sequential interpretation of its
//! constituent instructions. The interpreter below is deliberately written
//! independently of the semantic templates in [`crate::isa`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::frontend::{BlockId, ProgramModel, StaticInstr, TraceProfile};
use crate::generator::{CandidatePattern, LivenessMode};
use crate::isa::{eval_sem, Reg, Signedness, SlotValues};
use crate::selector::{match_at, MatchSite, FUSED_BYTES};

/// Architectural register file; `x0` always reads as zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MachineState {
    regs: [u32; 32],
}

impl MachineState {
    pub fn from_regs(mut regs: [u32; 32]) -> Self {
        regs[0] = 0;
        MachineState { regs }
    }

    pub fn read(&self, r: Reg) -> u32 {
        self.regs[r.index() as usize]
    }

    pub fn write(&mut self, r: Reg, value: u32) {
        if !r.is_zero() {
            self.regs[r.index() as usize] = value;
        }
    }

    pub fn regs(&self) -> &[u32; 32] {
        &self.regs
    }
}

/// Result of one base ALU operation on concrete operands, or `None` for an
/// operation the interpreter does not model.
pub fn reference_exec(base: &str, srcs: &[u32], imm: Option<i64>) -> Option<u32> {
    let a = srcs.first().copied();
    let b = srcs.get(1).copied();
    let i = imm.map(|v| v as i32 as u32);
    let shamt = |x: u32| x % 32;
    let v = match base {
        "add" => a?.wrapping_add(b?),
        "sub" => a?.wrapping_sub(b?),
        "and" => a? & b?,
        "or" => a? | b?,
        "xor" => a? ^ b?,
        "sll" => a?.wrapping_shl(shamt(b?)),
        "srl" => a?.wrapping_shr(shamt(b?)),
        "sra" => (a? as i32).wrapping_shr(shamt(b?)) as u32,
        "slt" => u32::from((a? as i32) < (b? as i32)),
        "sltu" => u32::from(a? < b?),
        "addi" => a?.wrapping_add(i?),
        "andi" => a? & i?,
        "ori" => a? | i?,
        "xori" => a? ^ i?,
        "slti" => u32::from((a? as i32) < (i? as i32)),
        "sltiu" => u32::from(a? < i?),
        "slli" => a?.wrapping_shl(shamt(i?)),
        "srli" => a?.wrapping_shr(shamt(i?)),
        "srai" => (a? as i32).wrapping_shr(shamt(i?)) as u32,
        "lui" => i?.wrapping_shl(12),
        "mv" => a?,
        "li" => i?,
        "mul" => (i64::from(a? as i32) * i64::from(b? as i32)) as u32,
        "mulh" => ((i64::from(a? as i32) * i64::from(b? as i32)) >> 32) as u32,
        "mulhsu" => ((i128::from(a? as i32) * i128::from(b?)) >> 32) as u32,
        "mulhu" => ((u64::from(a?) * u64::from(b?)) >> 32) as u32,
        "div" => match (a? as i32, b? as i32) {
            (_, 0) => u32::MAX,
            (i32::MIN, -1) => i32::MIN as u32,
            (x, y) => (x / y) as u32,
        },
        "divu" => match b? {
            0 => u32::MAX,
            y => a? / y,
        },
        "rem" => match (a? as i32, b? as i32) {
            (x, 0) => x as u32,
            (i32::MIN, -1) => 0,
            (x, y) => (x % y) as u32,
        },
        "remu" => match b? {
            0 => a?,
            y => a? % y,
        },
        _ => return None,
    };
    Some(v)
}

/// Runs the pattern's constituent operations one after another on `state`,
/// using the exemplar registers and the given immediate field values.
/// Returns the value left in the exemplar output register.
pub fn interpret_sequence(pattern: &CandidatePattern, state: &mut MachineState, imms: &[i64]) -> Option<u32> {
    for op in &pattern.ops {
        let srcs: Vec<u32> = op.exemplar.srcs.iter().map(|r| state.read(*r)).collect();
        let imm = match op.imm {
            Some(i) => Some(*imms.get(i as usize)?),
            None => None,
        };
        let v = reference_exec(&op.mnemonic, &srcs, imm)?;
        state.write(op.exemplar.dest, v);
    }
    Some(state.read(pattern.output))
}

/// A failed equivalence trial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub trial: u32,
    pub state: MachineState,
    pub imms: Vec<i64>,
    pub expected: Option<u32>,
    pub got: Option<u32>,
}

fn random_word(rng: &mut ChaCha8Rng) -> u32 {
    const EDGES: [u32; 8] = [0, 1, 2, 31, 32, 0x7fff_ffff, 0x8000_0000, u32::MAX];
    if rng.gen_ratio(1, 4) {
        EDGES[rng.gen_range(0..EDGES.len())]
    } else {
        rng.gen()
    }
}

fn random_imm(rng: &mut ChaCha8Rng, width: u8, signedness: Signedness) -> i64 {
    let w = u32::from(width.clamp(1, 32));
    match signedness {
        Signedness::Signed => rng.gen_range(-(1i64 << (w - 1))..(1i64 << (w - 1))),
        Signedness::Unsigned => rng.gen_range(0..(1i64 << w)),
    }
}

/// Compares `fused_semantics` with sequential interpretation on `trials`
/// random machine states and immediate values, deterministically under
/// `seed`. Reports the first failing trial.
pub fn check_equivalence(pattern: &CandidatePattern, trials: u32, seed: u64) -> Result<(), Box<Counterexample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let mut regs = [0u32; 32];
        for r in regs.iter_mut().skip(1) {
            *r = random_word(&mut rng);
        }
        let state = MachineState::from_regs(regs);
        let imms: Vec<i64> = pattern
            .imm_fields
            .iter()
            .map(|f| random_imm(&mut rng, f.width, f.signedness))
            .collect();

        let values = SlotValues {
            reads: pattern.inputs.iter().map(|r| state.read(*r)).collect(),
            imms: imms.iter().map(|v| *v as u32).collect(),
        };
        let got = eval_sem(&pattern.fused_semantics, &values).ok();
        let expected = interpret_sequence(pattern, &mut state.clone(), &imms);
        if got.is_none() || got != expected {
            return Err(Box::new(Counterexample { trial, state, imms, expected, got }));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RewrittenItem {
    Original(StaticInstr),
    /// One fused 4-byte instruction standing at the slice's first address.
    Fused { rank: usize, address: u32, site: MatchSite },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewrittenBlock {
    pub id: BlockId,
    pub items: Vec<RewrittenItem>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Replacement {
    pub pattern: String,
    pub rank: usize,
    pub site: MatchSite,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RewrittenProgram {
    pub blocks: Vec<RewrittenBlock>,
    pub log: Vec<Replacement>,
}

impl RewrittenProgram {
    pub fn replacements_for(&self, rank: usize) -> impl Iterator<Item = &Replacement> {
        self.log.iter().filter(move |r| r.rank == rank)
    }
}

/// Replaces matched slices by fused instructions. Patterns claim slices in
/// rank order, each scanning left to right; the first claim wins.
pub fn rewrite(
    program: &ProgramModel,
    selected: &[CandidatePattern],
    mode: LivenessMode,
    trace: Option<&TraceProfile>,
) -> RewrittenProgram {
    let mut out = RewrittenProgram::default();
    for block in program.blocks() {
        let n = block.instrs.len();
        let mut claimed: Vec<Option<usize>> = vec![None; n];
        let mut sites: Vec<(usize, MatchSite)> = Vec::new();
        for (rank, pattern) in selected.iter().enumerate() {
            let plen = pattern.len();
            if plen == 0 {
                continue;
            }
            let mut index = 0;
            while index + plen <= n {
                let free = claimed[index..index + plen].iter().all(Option::is_none);
                match free.then(|| match_at(block, index, pattern, mode, trace)).flatten() {
                    Some(site) => {
                        for c in &mut claimed[index..index + plen] {
                            *c = Some(sites.len());
                        }
                        sites.push((rank, site));
                        index += plen;
                    }
                    None => index += 1,
                }
            }
        }

        let mut items = Vec::with_capacity(n);
        let mut i = 0;
        while i < n {
            match claimed[i] {
                Some(s) => {
                    let (rank, site) = &sites[s];
                    items.push(RewrittenItem::Fused {
                        rank: *rank,
                        address: block.instrs[i].address,
                        site: site.clone(),
                    });
                    i += site.len;
                }
                None => {
                    items.push(RewrittenItem::Original(block.instrs[i].clone()));
                    i += 1;
                }
            }
        }
        sites.sort_by_key(|(_, s)| s.start);
        out.log.extend(sites.into_iter().map(|(rank, site)| Replacement {
            pattern: selected[rank].name.clone(),
            rank,
            site,
        }));
        out.blocks.push(RewrittenBlock { id: block.id, items });
    }
    out
}

/// A metric total before and after rewriting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Figure {
    pub baseline: u64,
    pub after: u64,
}

impl Figure {
    pub fn saved(&self) -> i64 {
        self.baseline as i64 - self.after as i64
    }

    /// Saving as a percentage of the baseline; zero for an empty baseline.
    pub fn pct(&self) -> f64 {
        if self.baseline == 0 {
            0.0
        } else {
            self.saved() as f64 / self.baseline as f64 * 100.0
        }
    }
}

/// The three metrics recounted from scratch. Dynamic figures are absent
/// without a trace.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Recount {
    pub static_size: Figure,
    pub dynamic_size: Option<Figure>,
    pub dynamic_count: Option<Figure>,
}

/// Recounts static bytes, executed bytes and executed instructions for the
/// original and the rewritten program. Fused instructions inherit the
/// execution count of their slice's first address.
pub fn recount(original: &ProgramModel, rewritten: &RewrittenProgram, trace: Option<&TraceProfile>) -> Recount {
    let count = |addr: u32| trace.map_or(0, |t| t.count(addr));
    let mut st = Figure::default();
    let mut dsize = Figure::default();
    let mut dcount = Figure::default();

    for block in original.blocks() {
        for instr in &block.instrs {
            let c = count(instr.address);
            st.baseline += u64::from(instr.byte_size);
            dsize.baseline += c * u64::from(instr.byte_size);
            dcount.baseline += c;
        }
    }
    for block in &rewritten.blocks {
        for item in &block.items {
            let (addr, bytes) = match item {
                RewrittenItem::Original(i) => (i.address, u64::from(i.byte_size)),
                RewrittenItem::Fused { address, .. } => (*address, FUSED_BYTES as u64),
            };
            let c = count(addr);
            st.after += bytes;
            dsize.after += c * bytes;
            dcount.after += c;
        }
    }
    Recount {
        static_size: st,
        dynamic_size: trace.map(|_| dsize),
        dynamic_count: trace.map(|_| dcount),
    }
}
