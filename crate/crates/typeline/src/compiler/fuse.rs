//! Routing and conversion fusion.
//!
//! Every IR op is realized as a typed instruction, a traditional op, an
//! object op, or (for conversions) one of three cheaper forms:
//!
//! * fused into its single typed consumer as a cross-lane operand,
//! * rewired into a traditional compute op whose operand kind matches,
//! * materialized as a standalone cross-lane move.
//!
//! A fused conversion deletes its op outright and saves its whole CONV
//! cost, which more than funds the one mask instruction a block may
//! need. A materialized move costs the same cycle the conversion would
//! have, so fusion never loses ground against the one-op-per-issue
//! baseline. Fusion only fires when the conversion's destination stays
//! inside the block and has exactly one consumer, keeping issue member
//! counts in one-to-one correspondence with executed IR ops.

use std::collections::BTreeMap;

use crate::ir::{
    self, route, IrBlock, IrOp, IrProgram, IrTerm, Route, Val, VReg,
};
use crate::isa::{ConvMask, CostTable, Opcode, Scalar, SdtKind};

use super::config::CompilerConfig;

/// What one output position does; scheduling and emission work on these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum SlotSource {
    /// Realizes `block.ops[index]`.
    Ir(usize),
    /// Materialized conversion: a cross-lane move into `dst`'s lane.
    MatMove { dst: VReg, src: VReg, lane: SdtKind },
}

/// Scheduling class of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum SlotKind {
    /// Typed load, candidate for a vector load cluster.
    Load { lane: SdtKind },
    /// Typed arithmetic/logic/shift/compare, candidate for an op cluster.
    Compute { lane: SdtKind },
    /// Typed store or move; always issues alone.
    TypedOther,
    /// Materialized conversion move; always issues alone.
    MatMove,
    /// Object-memory op; always issues alone.
    Obj,
    /// Traditional-lane op; always issues alone.
    Trad,
}

/// Memory footprint of a slot, for hazard checks between slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(super) enum MemEffect {
    None,
    /// Reads the named static symbol.
    Read(usize),
    /// Writes the named static symbol.
    Write(usize),
    /// Reads through a pointer: may touch any static word.
    ReadAll,
    /// Writes through a pointer: may touch any static word.
    WriteAll,
    /// Allocates or releases an object; handle values are ordered.
    Heap,
}

/// One schedulable position of a block after fusion.
#[derive(Debug, Clone)]
pub(super) struct Slot {
    pub source: SlotSource,
    pub kind: SlotKind,
    /// Cycles this slot costs when issued alone.
    pub cost: u32,
    /// Mask bits needed by conversions fused into this slot.
    pub mask: ConvMask,
    /// Baseline cycles of the conversions fused into this slot.
    pub fused_cost: u32,
    /// Register reads after operand substitution.
    pub reads: Vec<VReg>,
    pub write: Option<VReg>,
    pub mem: MemEffect,
    /// Fused-conversion operand substitutions (conversion dst to src).
    pub subs: BTreeMap<VReg, VReg>,
}

/// Apply lane disables: every typed vreg of a disabled lane becomes a
/// traditional vreg, which reroutes all its ops off that lane.
pub(super) fn effective_program(prog: &IrProgram, config: &CompilerConfig) -> IrProgram {
    let mut eff = prog.clone();
    if config.lane_enabled != [true; 4] {
        for info in &mut eff.vregs {
            if let (false, Some(lane)) = (info.trad, info.kind.sdt()) {
                if !config.lane_on(lane) {
                    info.trad = true;
                }
            }
        }
    }
    eff
}

/// How each conversion op is realized.
#[derive(Debug, Clone, Copy, PartialEq)]
enum ConvPlan {
    /// Deleted; the consumer at the given op index reads the source.
    Fused { into: usize, bit: Option<u8> },
    /// Emitted as a cross-lane move into the `to` lane.
    Mat { to: SdtKind },
    /// Emitted as a traditional convert (off-lane kinds involved).
    Trad,
}

/// Blocks where each vreg is read or written, including branch reads.
struct AccessMap {
    reads: Vec<Vec<usize>>,
    writes: Vec<Vec<usize>>,
}

fn access_map(prog: &IrProgram) -> AccessMap {
    let mut reads = vec![Vec::new(); prog.vregs.len()];
    let mut writes = vec![Vec::new(); prog.vregs.len()];
    for (bi, block) in prog.blocks.iter().enumerate() {
        for op in &block.ops {
            for r in op.reads() {
                let list: &mut Vec<usize> = &mut reads[r.index()];
                if list.last() != Some(&bi) {
                    list.push(bi);
                }
            }
            if let Some(d) = op.dst() {
                let list: &mut Vec<usize> = &mut writes[d.index()];
                if list.last() != Some(&bi) {
                    list.push(bi);
                }
            }
        }
        if let IrTerm::Bnz { cond, .. } = block.term {
            let list: &mut Vec<usize> = &mut reads[cond.index()];
            if list.last() != Some(&bi) {
                list.push(bi);
            }
        }
    }
    AccessMap { reads, writes }
}

/// Whether every read of `d` inside `consumer` sits in an operand slot
/// that tolerates a cross-lane register after substitution.
fn fusable_positions(consumer: &IrOp, d: VReg) -> bool {
    match consumer {
        IrOp::Bin { .. } | IrOp::Cmp { .. } => true,
        IrOp::Store { index, .. } => *index != Some(d),
        _ => false,
    }
}

/// Kind a traditional compute op converts its operands to; mirrors the
/// emission rule so fusion only fires when values stay bit-identical.
fn trad_compute_kind(prog: &IrProgram, op: &IrOp) -> Option<Scalar> {
    match op {
        IrOp::Bin { dst, .. } => Some(prog.kind_of(*dst)),
        IrOp::Cmp { lhs, .. } => Some(match lhs {
            Val::Reg(r) => prog.kind_of(*r),
            Val::Imm(i) => i.scalar(),
        }),
        _ => None,
    }
}

/// Decide how each conversion in the block is realized.
fn plan_conversions(prog: &IrProgram, block: &IrBlock, bi: usize, access: &AccessMap) -> BTreeMap<usize, ConvPlan> {
    let mut plans = BTreeMap::new();
    for (i, op) in block.ops.iter().enumerate() {
        let IrOp::Convert { dst, src: _ } = op else { continue };
        let (from, to) = match route(prog, op) {
            Route::Convert { from, to } => (from, to),
            _ => {
                plans.insert(i, ConvPlan::Trad);
                continue;
            }
        };
        let mat = ConvPlan::Mat { to };
        let outside = access.reads[dst.index()].iter().any(|&b| b != bi)
            || access.writes[dst.index()].iter().any(|&b| b != bi);
        let branch_read = matches!(block.term, IrTerm::Bnz { cond, .. } if cond == *dst);
        if outside || branch_read {
            plans.insert(i, mat);
            continue;
        }
        let consumers: Vec<usize> = (i + 1..block.ops.len())
            .filter(|&j| block.ops[j].reads().contains(dst))
            .collect();
        let &[j] = consumers.as_slice() else {
            plans.insert(i, mat);
            continue;
        };
        let consumer = &block.ops[j];
        let plan = match route(prog, consumer) {
            Route::Typed(_) if fusable_positions(consumer, *dst) => {
                ConvPlan::Fused { into: j, bit: ConvMask::bit_for(from, to) }
            }
            Route::Trad
                if trad_compute_kind(prog, consumer) == Some(Scalar::from(to)) =>
            {
                ConvPlan::Fused { into: j, bit: None }
            }
            _ => mat,
        };
        plans.insert(i, plan);
    }
    plans
}

/// Memory footprint of an op. Indexed accesses hazard by symbol, which
/// matches the validator's base-address rule.
fn mem_effect(op: &IrOp) -> MemEffect {
    match op {
        IrOp::Load { sym, .. } => MemEffect::Read(*sym),
        IrOp::Store { sym, .. } => MemEffect::Write(*sym),
        IrOp::LoadInd { .. } => MemEffect::ReadAll,
        IrOp::StoreInd { .. } => MemEffect::WriteAll,
        IrOp::ObjNew { .. } | IrOp::ObjRelease { .. } => MemEffect::Heap,
        IrOp::Move { .. }
        | IrOp::Bin { .. }
        | IrOp::Cmp { .. }
        | IrOp::Convert { .. }
        | IrOp::AddrOf { .. } => MemEffect::None,
    }
}

/// Build the slot stream of one block: fusion applied, substitutions
/// recorded, reads/writes and memory effects precomputed.
pub(super) fn plan_block(
    prog: &IrProgram,
    block: &IrBlock,
    bi: usize,
    access: &AccessMap,
    table: &CostTable,
) -> Vec<Slot> {
    let conv_plans = plan_conversions(prog, block, bi, access);

    // Substitutions, mask bits, and absorbed baseline cost per consumer.
    let mut subs: BTreeMap<usize, BTreeMap<VReg, VReg>> = BTreeMap::new();
    let mut masks: BTreeMap<usize, ConvMask> = BTreeMap::new();
    let mut fused: BTreeMap<usize, u32> = BTreeMap::new();
    for (&i, plan) in &conv_plans {
        if let ConvPlan::Fused { into, bit } = plan {
            let IrOp::Convert { dst, src } = &block.ops[i] else { unreachable!() };
            subs.entry(*into).or_default().insert(*dst, *src);
            if let Some(b) = bit {
                let m = masks.entry(*into).or_insert(ConvMask::EMPTY);
                *m = m.union(ConvMask(*b));
            }
            *fused.entry(*into).or_insert(0) += table.cost(Opcode::Conv);
        }
    }

    let mut slots = Vec::new();
    for (i, op) in block.ops.iter().enumerate() {
        if let Some(plan) = conv_plans.get(&i) {
            match plan {
                ConvPlan::Fused { .. } => continue,
                ConvPlan::Mat { to } => {
                    let IrOp::Convert { dst, src } = op else { unreachable!() };
                    slots.push(Slot {
                        source: SlotSource::MatMove { dst: *dst, src: *src, lane: *to },
                        kind: SlotKind::MatMove,
                        cost: table.cost(mov_opcode(*to)),
                        mask: ConvMask::EMPTY,
                        fused_cost: 0,
                        reads: vec![*src],
                        write: Some(*dst),
                        mem: MemEffect::None,
                        subs: BTreeMap::new(),
                    });
                    continue;
                }
                ConvPlan::Trad => {} // falls through to the routed form
            }
        }
        let op_subs = subs.remove(&i).unwrap_or_default();
        let reads: Vec<VReg> = op
            .reads()
            .into_iter()
            .map(|r| op_subs.get(&r).copied().unwrap_or(r))
            .collect();
        let (kind, cost) = match route(prog, op) {
            Route::Typed(lane) => {
                let opc = ir::typed_opcode(prog, op).expect("typed route has an opcode");
                let kind = match op {
                    IrOp::Load { .. } => SlotKind::Load { lane },
                    IrOp::Bin { .. } | IrOp::Cmp { .. } => SlotKind::Compute { lane },
                    _ => SlotKind::TypedOther,
                };
                (kind, table.cost(opc))
            }
            Route::Obj => {
                let opc = match op {
                    IrOp::ObjNew { .. } => Opcode::ObjN,
                    _ => Opcode::ObjR,
                };
                (SlotKind::Obj, table.cost(opc))
            }
            Route::Convert { .. } | Route::Trad => {
                let base = ir::trad_base_opcode(prog, op);
                (SlotKind::Trad, table.cost(base) + table.traditional_overhead)
            }
        };
        slots.push(Slot {
            source: SlotSource::Ir(i),
            kind,
            cost,
            mask: masks.remove(&i).unwrap_or(ConvMask::EMPTY),
            fused_cost: fused.remove(&i).unwrap_or(0),
            reads,
            write: op.dst(),
            mem: mem_effect(op),
            subs: op_subs,
        });
    }
    slots
}

/// Slot streams for every block of the program.
pub(super) fn plan_program(prog: &IrProgram, table: &CostTable) -> Vec<Vec<Slot>> {
    let access = access_map(prog);
    prog.blocks
        .iter()
        .enumerate()
        .map(|(bi, block)| plan_block(prog, block, bi, &access, table))
        .collect()
}

/// Move opcode of a lane, used for materialized conversions.
pub(super) fn mov_opcode(lane: SdtKind) -> Opcode {
    match lane {
        SdtKind::Int => Opcode::MovIn,
        SdtKind::Float => Opcode::MovFt,
        SdtKind::Double => Opcode::MovDb,
        SdtKind::Char => Opcode::MovCh,
    }
}

/// Register hazard between two slots in either order: any write-read,
/// read-write, or write-write overlap on virtual registers.
pub(super) fn reg_hazard(a: &Slot, b: &Slot) -> bool {
    if let Some(w) = a.write {
        if b.reads.contains(&w) || b.write == Some(w) {
            return true;
        }
    }
    if let Some(w) = b.write {
        if a.reads.contains(&w) {
            return true;
        }
    }
    false
}

/// Memory-order hazard between two slots. Reads never conflict with
/// reads; named symbols conflict only with themselves or with pointer
/// accesses; heap ops order among themselves because handle values
/// depend on allocation order, but never touch static words.
pub(super) fn mem_hazard(a: MemEffect, b: MemEffect) -> bool {
    use MemEffect::*;
    match (a, b) {
        (None, _) | (_, None) => false,
        (Heap, other) | (other, Heap) => other == Heap,
        (Read(_) | ReadAll, Read(_) | ReadAll) => false,
        (Read(x), Write(y)) | (Write(x), Read(y)) | (Write(x), Write(y)) => x == y,
        // A pointer access against any write, or two pointer writes.
        _ => true,
    }
}

/// Full hazard check combining registers and memory.
pub(super) fn hazard(a: &Slot, b: &Slot) -> bool {
    reg_hazard(a, b) || mem_hazard(a.mem, b.mem)
}
