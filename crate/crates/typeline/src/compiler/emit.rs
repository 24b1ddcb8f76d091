//! Register allocation and machine-code emission.
//!
//! Positions are numbered over the final scheduled stream and every
//! lane vreg gets one live interval spanning its accesses, widened to
//! cover whole loop extents and whole clusters it appears in. A linear
//! scan assigns registers 0..29 of each lane; 30 and 31 stay reserved
//! as scratch for spill traffic. Vregs that lose allocation spill to
//! internal one-word globals, with reloads before and stores after the
//! slots that touch them. Clusters never contain spill traffic: when
//! pressure hits a cluster-resident vreg the cluster dissolves into
//! singles and allocation starts over.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{self, IrOp, IrProgram, IrTerm, Route, Val, VReg};
use crate::isa::{
    AsmBlock, CondRef, GlobalSym, Imm, Instruction, Item, MemRef, Opcode, Operand, Program,
    RegRef, Scalar, SdtKind, Terminator, TradAddr, TradOp, TradReg, TradVal, REGS_PER_LANE,
};

use super::fuse::{mov_opcode, Slot, SlotSource};
use super::schedule::{dissolved, BlockSchedule, Unit};

/// Registers per lane available to the allocator; the top two are
/// scratch for spill reloads and writebacks.
const ALLOC_REGS: u8 = REGS_PER_LANE - 2;

fn ld_opcode(lane: SdtKind) -> Opcode {
    match lane {
        SdtKind::Int => Opcode::LdIn,
        SdtKind::Float => Opcode::LdFt,
        SdtKind::Double => Opcode::LdDb,
        SdtKind::Char => Opcode::LdCh,
    }
}

fn st_opcode(lane: SdtKind) -> Opcode {
    match lane {
        SdtKind::Int => Opcode::StIn,
        SdtKind::Float => Opcode::StFt,
        SdtKind::Double => Opcode::StDb,
        SdtKind::Char => Opcode::StCh,
    }
}

fn make(opcode: Opcode, operands: Vec<Operand>, tag: Option<u32>) -> Instruction {
    match tag {
        Some(t) => Instruction::tagged(opcode, operands, t),
        None => Instruction::new(opcode, operands),
    }
}

/// One cluster's extent in the position numbering.
struct ClusterSpan {
    block: usize,
    unit: usize,
    end: usize,
    touched: Vec<VReg>,
}

/// Live intervals plus the structure the allocator needs.
struct Intervals {
    range: BTreeMap<VReg, (usize, usize)>,
    clusters: Vec<ClusterSpan>,
}

fn build_intervals(prog: &IrProgram, slots: &[Vec<Slot>], units: &[Vec<Unit>]) -> Intervals {
    let mut range: BTreeMap<VReg, (usize, usize)> = BTreeMap::new();
    let mut blocks_of: BTreeMap<VReg, BTreeSet<usize>> = BTreeMap::new();
    let mut clusters: Vec<ClusterSpan> = Vec::new();
    let mut block_range: Vec<(usize, usize)> = Vec::new();

    let mut pos = 0usize;
    for (b, block_units) in units.iter().enumerate() {
        let first = pos;
        for (ui, unit) in block_units.iter().enumerate() {
            let mut touch = |v: VReg, p: usize, set: Option<&mut Vec<VReg>>| {
                if prog.lane_of(v).is_none() {
                    return;
                }
                let e = range.entry(v).or_insert((p, p));
                e.0 = e.0.min(p);
                e.1 = e.1.max(p);
                blocks_of.entry(v).or_default().insert(b);
                if let Some(set) = set {
                    if !set.contains(&v) {
                        set.push(v);
                    }
                }
            };
            match unit {
                Unit::Single(s) => {
                    let slot = &slots[b][*s];
                    for &r in &slot.reads {
                        touch(r, pos, None);
                    }
                    if let Some(w) = slot.write {
                        touch(w, pos, None);
                    }
                    pos += 1;
                }
                Unit::LoadCluster { members, .. } | Unit::OpCluster { members } => {
                    let mut touched = Vec::new();
                    for &m in members {
                        let slot = &slots[b][m];
                        for &r in &slot.reads {
                            touch(r, pos, Some(&mut touched));
                        }
                        if let Some(w) = slot.write {
                            touch(w, pos, Some(&mut touched));
                        }
                        pos += 1;
                    }
                    clusters.push(ClusterSpan { block: b, unit: ui, end: pos - 1, touched });
                }
            }
        }
        if let IrTerm::Bnz { cond, .. } = prog.blocks[b].term {
            if prog.lane_of(cond).is_some() {
                let e = range.entry(cond).or_insert((pos, pos));
                e.0 = e.0.min(pos);
                e.1 = e.1.max(pos);
                blocks_of.entry(cond).or_default().insert(b);
            }
        }
        block_range.push((first, pos));
        pos += 1;
    }

    // Anything touched inside a loop stays live across the whole loop,
    // covering values that flow around the back edge.
    for ext in &prog.loops {
        let lo = block_range[ext.head].0;
        let hi = block_range[ext.tail].1;
        for (v, bs) in &blocks_of {
            if bs.range(ext.head..=ext.tail).next().is_some() {
                let e = range.get_mut(v).expect("touched vreg has a range");
                e.0 = e.0.min(lo);
                e.1 = e.1.max(hi);
            }
        }
    }

    // Everything a cluster touches lives to the cluster's end, so no
    // two of its values can share a register and trip a hazard.
    for c in &clusters {
        for v in &c.touched {
            let e = range.get_mut(v).expect("cluster vreg has a range");
            e.1 = e.1.max(c.end);
        }
    }

    Intervals { range, clusters }
}

struct Alloc {
    assign: BTreeMap<VReg, u8>,
    spilled: BTreeSet<VReg>,
}

/// Linear scan over each lane. On pressure, the longest-living value
/// outside every cluster spills; if only cluster residents remain the
/// offending cluster is reported for dissolution.
fn allocate(prog: &IrProgram, iv: &Intervals) -> Result<Alloc, (usize, usize)> {
    let mut cluster_of: BTreeMap<VReg, (usize, usize)> = BTreeMap::new();
    for c in &iv.clusters {
        for v in &c.touched {
            cluster_of.entry(*v).or_insert((c.block, c.unit));
        }
    }

    let mut assign = BTreeMap::new();
    let mut spilled = BTreeSet::new();
    for lane in SdtKind::ALL {
        let mut list: Vec<(usize, usize, VReg)> = iv
            .range
            .iter()
            .filter(|(v, _)| prog.lane_of(**v) == Some(lane))
            .map(|(v, &(s, e))| (s, e, *v))
            .collect();
        list.sort_by_key(|&(s, _, v)| (s, v.0));

        let mut free: BTreeSet<u8> = (0..ALLOC_REGS).collect();
        let mut active: Vec<(usize, VReg, u8)> = Vec::new();
        for (start, end, v) in list {
            active.sort_by_key(|&(e, av, _)| (e, av.0));
            while let Some(&(e, _, r)) = active.first() {
                if e < start {
                    free.insert(r);
                    active.remove(0);
                } else {
                    break;
                }
            }
            if let Some(&r) = free.iter().next() {
                free.remove(&r);
                assign.insert(v, r);
                active.push((end, v, r));
                continue;
            }
            let mut victim: Option<(usize, VReg, Option<u8>)> = None;
            for &(e, av, r) in &active {
                if !cluster_of.contains_key(&av) && victim.map_or(true, |(ve, vv, _)| (e, av.0) > (ve, vv.0)) {
                    victim = Some((e, av, Some(r)));
                }
            }
            if !cluster_of.contains_key(&v)
                && victim.map_or(true, |(ve, vv, _)| (end, v.0) > (ve, vv.0))
            {
                victim = Some((end, v, None));
            }
            match victim {
                None => {
                    // Every live value here sits in some cluster; give
                    // back the one holding the latest-ending value.
                    let worst = active
                        .iter()
                        .map(|&(e, av, _)| (e, av))
                        .chain([(end, v)])
                        .max_by_key(|&(e, av)| (e, av.0))
                        .expect("pressure implies live values");
                    return Err(cluster_of[&worst.1]);
                }
                Some((_, sv, None)) => {
                    debug_assert_eq!(sv, v);
                    spilled.insert(v);
                }
                Some((_, sv, Some(r))) => {
                    spilled.insert(sv);
                    assign.remove(&sv);
                    active.retain(|&(_, av, _)| av != sv);
                    assign.insert(v, r);
                    active.push((end, v, r));
                }
            }
        }
    }
    Ok(Alloc { assign, spilled })
}

struct Emitter<'a> {
    prog: &'a IrProgram,
    assign: &'a BTreeMap<VReg, u8>,
    spill_addr: &'a BTreeMap<VReg, u32>,
    next_tag: u32,
}

/// Per-slot scratch cursor, one per lane, starting at the first
/// reserved register.
type Scratch = [u8; 4];

fn fresh_scratch() -> Scratch {
    [ALLOC_REGS; 4]
}

impl<'a> Emitter<'a> {
    fn tag(&mut self) -> u32 {
        let t = self.next_tag;
        self.next_tag += 1;
        t
    }

    /// Register holding `v` for a read, reloading a spilled value into
    /// scratch first.
    fn read_reg(&self, v: VReg, pre: &mut Vec<Item>, scratch: &mut Scratch) -> RegRef {
        let lane = self.prog.lane_of(v).expect("typed vreg");
        if let Some(&r) = self.assign.get(&v) {
            return RegRef::new(lane, r);
        }
        let sc = scratch[lane.lane_index()];
        scratch[lane.lane_index()] += 1;
        debug_assert!(sc < REGS_PER_LANE, "at most two spilled reads per lane per slot");
        let addr = self.spill_addr[&v];
        let reg = RegRef::new(lane, sc);
        pre.push(Item::Typed(Instruction::new(
            ld_opcode(lane),
            vec![Operand::Reg(reg), Operand::Mem(MemRef::at(addr))],
        )));
        reg
    }

    /// Register receiving `v` for a write, storing scratch back to the
    /// spill word afterwards when `v` lost allocation.
    fn write_reg(&self, v: VReg, post: &mut Vec<Item>) -> RegRef {
        let lane = self.prog.lane_of(v).expect("typed vreg");
        if let Some(&r) = self.assign.get(&v) {
            return RegRef::new(lane, r);
        }
        let reg = RegRef::new(lane, ALLOC_REGS);
        let addr = self.spill_addr[&v];
        post.push(Item::Typed(Instruction::new(
            st_opcode(lane),
            vec![Operand::Reg(reg), Operand::Mem(MemRef::at(addr))],
        )));
        reg
    }

    /// Int register holding an index value; traditional index values
    /// hop through scratch via a traditional move.
    fn index_reg(&self, v: VReg, pre: &mut Vec<Item>, scratch: &mut Scratch) -> RegRef {
        if !self.prog.is_trad(v) {
            return self.read_reg(v, pre, scratch);
        }
        let li = SdtKind::Int.lane_index();
        let sc = scratch[li];
        scratch[li] += 1;
        debug_assert!(sc < REGS_PER_LANE);
        let reg = RegRef::new(SdtKind::Int, sc);
        pre.push(Item::Trad(TradOp::Mov {
            ty: Scalar::Int,
            dst: TradReg::Lane(reg),
            src: TradVal::Reg(TradReg::Slot(v.0)),
        }));
        reg
    }

    fn mem_ref(
        &self,
        sym: usize,
        index: Option<VReg>,
        pre: &mut Vec<Item>,
        scratch: &mut Scratch,
    ) -> MemRef {
        MemRef {
            base: self.prog.symbols[sym].addr,
            index: index.map(|v| self.index_reg(v, pre, scratch)),
        }
    }

    fn trad_read(&self, v: VReg, pre: &mut Vec<Item>, scratch: &mut Scratch) -> TradReg {
        if self.prog.is_trad(v) {
            TradReg::Slot(v.0)
        } else {
            TradReg::Lane(self.read_reg(v, pre, scratch))
        }
    }

    fn trad_write(&self, v: VReg, post: &mut Vec<Item>) -> TradReg {
        if self.prog.is_trad(v) {
            TradReg::Slot(v.0)
        } else {
            TradReg::Lane(self.write_reg(v, post))
        }
    }

    /// Emit one slot with any spill traffic around it.
    fn emit_slot(&mut self, ops: &[IrOp], slot: &Slot, tag: Option<u32>, items: &mut Vec<Item>) {
        let mut pre: Vec<Item> = Vec::new();
        let mut post: Vec<Item> = Vec::new();
        let mut scratch = fresh_scratch();
        let main = match slot.source {
            SlotSource::MatMove { dst, src, lane } => {
                let s = self.read_reg(src, &mut pre, &mut scratch);
                let d = self.write_reg(dst, &mut post);
                Item::Typed(make(
                    mov_opcode(lane),
                    vec![Operand::Reg(d), Operand::Reg(s)],
                    tag,
                ))
            }
            SlotSource::Ir(i) => self.ir_item(&ops[i], slot, tag, &mut pre, &mut post, &mut scratch),
        };
        debug_assert!(
            tag.is_none() || (pre.is_empty() && post.is_empty()),
            "cluster members never carry spill traffic"
        );
        items.extend(pre);
        items.push(main);
        items.extend(post);
    }

    fn val_operand(
        &self,
        v: Val,
        subs: &BTreeMap<VReg, VReg>,
        pre: &mut Vec<Item>,
        scratch: &mut Scratch,
    ) -> Operand {
        match v {
            Val::Imm(i) => Operand::Imm(i),
            Val::Reg(r) => {
                let r = subs.get(&r).copied().unwrap_or(r);
                Operand::Reg(self.read_reg(r, pre, scratch))
            }
        }
    }

    fn ir_item(
        &self,
        op: &IrOp,
        slot: &Slot,
        tag: Option<u32>,
        pre: &mut Vec<Item>,
        post: &mut Vec<Item>,
        scratch: &mut Scratch,
    ) -> Item {
        let subs = &slot.subs;
        let sub = |v: VReg| subs.get(&v).copied().unwrap_or(v);
        match ir::route(self.prog, op) {
            Route::Typed(_) => {
                let opc = ir::typed_opcode(self.prog, op).expect("typed route has an opcode");
                let operands = match op {
                    IrOp::Load { dst, sym, index } => vec![
                        Operand::Reg(self.write_reg(*dst, post)),
                        Operand::Mem(self.mem_ref(*sym, *index, pre, scratch)),
                    ],
                    IrOp::Store { src, sym, index } => vec![
                        Operand::Reg(self.read_reg(sub(*src), pre, scratch)),
                        Operand::Mem(self.mem_ref(*sym, *index, pre, scratch)),
                    ],
                    IrOp::Move { dst, src } => vec![
                        Operand::Reg(self.write_reg(*dst, post)),
                        self.val_operand(*src, subs, pre, scratch),
                    ],
                    IrOp::Bin { dst, lhs, rhs, .. } => vec![
                        Operand::Reg(self.write_reg(*dst, post)),
                        self.val_operand(*lhs, subs, pre, scratch),
                        self.val_operand(*rhs, subs, pre, scratch),
                    ],
                    IrOp::Cmp { pred, dst, lhs, rhs } => {
                        let mut v = vec![
                            Operand::Reg(self.write_reg(*dst, post)),
                            self.val_operand(*lhs, subs, pre, scratch),
                            self.val_operand(*rhs, subs, pre, scratch),
                        ];
                        if matches!(opc, Opcode::CmpFt | Opcode::CmpDb) {
                            v.push(Operand::Imm(Imm::Int(pred.mode() as i32)));
                        }
                        v
                    }
                    other => unreachable!("{other:?} cannot route typed"),
                };
                Item::Typed(make(opc, operands, tag))
            }
            Route::Obj => match op {
                IrOp::ObjNew { dst, size } => Item::Typed(make(
                    Opcode::ObjN,
                    vec![
                        Operand::Reg(self.write_reg(*dst, post)),
                        Operand::Reg(self.read_reg(*size, pre, scratch)),
                    ],
                    tag,
                )),
                IrOp::ObjRelease { src } => Item::Typed(make(
                    Opcode::ObjR,
                    vec![Operand::Reg(self.read_reg(*src, pre, scratch))],
                    tag,
                )),
                other => unreachable!("{other:?} cannot route to object memory"),
            },
            Route::Trad => Item::Trad(self.trad_item(op, slot, pre, post, scratch)),
            Route::Convert { .. } => unreachable!("conversions are fused or materialized"),
        }
    }

    fn trad_item(
        &self,
        op: &IrOp,
        slot: &Slot,
        pre: &mut Vec<Item>,
        post: &mut Vec<Item>,
        scratch: &mut Scratch,
    ) -> TradOp {
        let subs = &slot.subs;
        let sub = |v: VReg| subs.get(&v).copied().unwrap_or(v);
        let mut tval = |v: Val, pre: &mut Vec<Item>, scratch: &mut Scratch| match v {
            Val::Imm(i) => TradVal::Imm(i),
            Val::Reg(r) => TradVal::Reg(self.trad_read(sub(r), pre, scratch)),
        };
        match op {
            IrOp::Move { dst, src } => TradOp::Mov {
                ty: self.prog.kind_of(*dst),
                dst: self.trad_write(*dst, post),
                src: tval(*src, pre, scratch),
            },
            IrOp::Load { dst, sym, index } => TradOp::Ld {
                ty: self.prog.kind_of(*dst),
                dst: self.trad_write(*dst, post),
                addr: TradAddr::Static(self.mem_ref(*sym, *index, pre, scratch)),
            },
            IrOp::Store { src, sym, index } => TradOp::St {
                ty: self.prog.kind_of(*src),
                src: TradVal::Reg(self.trad_read(sub(*src), pre, scratch)),
                addr: TradAddr::Static(self.mem_ref(*sym, *index, pre, scratch)),
            },
            IrOp::Bin { op: kind, dst, lhs, rhs } => TradOp::Bin {
                op: *kind,
                ty: self.prog.kind_of(*dst),
                dst: self.trad_write(*dst, post),
                lhs: tval(*lhs, pre, scratch),
                rhs: tval(*rhs, pre, scratch),
            },
            IrOp::Cmp { pred, dst, lhs, rhs } => TradOp::Cmp {
                pred: *pred,
                // The comparison kind follows the original left operand,
                // not a substituted register.
                ty: match lhs {
                    Val::Reg(r) => self.prog.kind_of(*r),
                    Val::Imm(i) => i.scalar(),
                },
                dst: self.trad_write(*dst, post),
                lhs: tval(*lhs, pre, scratch),
                rhs: tval(*rhs, pre, scratch),
            },
            IrOp::Convert { dst, src } => TradOp::Cvt {
                from: self.prog.kind_of(*src),
                to: self.prog.kind_of(*dst),
                dst: self.trad_write(*dst, post),
                src: TradVal::Reg(self.trad_read(*src, pre, scratch)),
            },
            IrOp::LoadInd { dst, addr } => TradOp::Ld {
                ty: self.prog.kind_of(*dst),
                dst: self.trad_write(*dst, post),
                addr: TradAddr::Indirect(self.trad_read(*addr, pre, scratch)),
            },
            IrOp::StoreInd { src, addr } => TradOp::St {
                ty: self.prog.kind_of(*src),
                src: TradVal::Reg(self.trad_read(*src, pre, scratch)),
                addr: TradAddr::Indirect(self.trad_read(*addr, pre, scratch)),
            },
            IrOp::AddrOf { dst, sym } => TradOp::Mov {
                ty: Scalar::Long,
                dst: self.trad_write(*dst, post),
                src: TradVal::Imm(Imm::Long(self.prog.symbols[*sym].addr as i64)),
            },
            IrOp::ObjNew { .. } | IrOp::ObjRelease { .. } => {
                unreachable!("object ops never route traditional")
            }
        }
    }
}

/// Allocate registers and emit the final program.
pub(super) fn emit_program(
    prog: &IrProgram,
    slots: &[Vec<Slot>],
    scheds: &[BlockSchedule],
) -> Program {
    let mut units: Vec<Vec<Unit>> = scheds.iter().map(|s| s.units.clone()).collect();
    let alloc = loop {
        let iv = build_intervals(prog, slots, &units);
        match allocate(prog, &iv) {
            Ok(alloc) => break alloc,
            Err((b, u)) => units[b] = dissolved(&units[b], u),
        }
    };

    let base = prog.symbols.iter().map(|g| g.addr + g.count).max().unwrap_or(0);
    let mut globals = prog.symbols.clone();
    let mut spill_addr: BTreeMap<VReg, u32> = BTreeMap::new();
    for (n, &v) in alloc.spilled.iter().enumerate() {
        let addr = base + n as u32;
        spill_addr.insert(v, addr);
        globals.push(GlobalSym {
            name: format!("__sp{n}"),
            kind: prog.kind_of(v),
            addr,
            count: 1,
            init: None,
        });
    }

    let mut em = Emitter { prog, assign: &alloc.assign, spill_addr: &spill_addr, next_tag: 0 };
    let mut blocks = Vec::new();
    for (b, ir_block) in prog.blocks.iter().enumerate() {
        let block_slots = &slots[b];
        let ops = ir_block.ops.as_slice();
        let mut items: Vec<Item> = Vec::new();

        let needs_conv = units[b].iter().any(
            |u| matches!(u, Unit::Single(s) if block_slots[*s].mask != crate::isa::ConvMask::EMPTY),
        );
        if needs_conv {
            items.push(Item::Typed(Instruction::new(
                Opcode::Conv,
                vec![Operand::Mask(scheds[b].mask)],
            )));
        }

        for unit in &units[b] {
            match unit {
                Unit::Single(s) => em.emit_slot(ops, &block_slots[*s], None, &mut items),
                Unit::LoadCluster { members, .. } => {
                    let t = em.tag();
                    items.push(Item::Typed(Instruction::new(
                        Opcode::Ven,
                        vec![Operand::VecLen(members.len() as u8)],
                    )));
                    for &m in members {
                        em.emit_slot(ops, &block_slots[m], Some(t), &mut items);
                    }
                    items.push(Item::Typed(Instruction::new(Opcode::Vds, vec![])));
                }
                Unit::OpCluster { members } => {
                    let t = em.tag();
                    items.push(Item::Typed(Instruction::new(Opcode::Pen, vec![])));
                    let rider = members
                        .iter()
                        .any(|&m| block_slots[m].mask != crate::isa::ConvMask::EMPTY);
                    if rider {
                        items.push(Item::Typed(Instruction::tagged(
                            Opcode::Conv,
                            vec![Operand::Mask(scheds[b].mask)],
                            t,
                        )));
                    }
                    for &m in members {
                        em.emit_slot(ops, &block_slots[m], Some(t), &mut items);
                    }
                    items.push(Item::Typed(Instruction::new(Opcode::Pds, vec![])));
                }
            }
        }

        let term = match &ir_block.term {
            IrTerm::Halt => Terminator::Halt,
            IrTerm::Jump(t) => Terminator::Jump(prog.blocks[*t].label.clone()),
            IrTerm::Bnz { cond, then_blk, else_blk } => {
                let c = if prog.is_trad(*cond) {
                    CondRef::Trad(cond.0)
                } else {
                    let mut pre = Vec::new();
                    let mut scratch = fresh_scratch();
                    let r = em.read_reg(*cond, &mut pre, &mut scratch);
                    items.extend(pre);
                    CondRef::Reg(r)
                };
                Terminator::Bnz {
                    cond: c,
                    then_label: prog.blocks[*then_blk].label.clone(),
                    else_label: prog.blocks[*else_blk].label.clone(),
                }
            }
        };
        blocks.push(AsmBlock { label: ir_block.label.clone(), items, term });
    }
    Program { globals, blocks }
}
