//! Baseline executor: runs the IR directly, one op per issue.
//!
//! This is the yardstick the clustering compiler is measured against.
//! Every op issues alone at its scalar cost ([`ir::scalar_cost`]), so
//! baseline cycles are exactly the sum of per-op costs along the
//! executed path. Values, traps, and final memory must match the
//! compiled program bit for bit; both executors share the ALU, heap,
//! memory layout, and output extraction.

use crate::ir::{self, IrOp, IrProgram, IrTerm, Route, Val, VReg};
use crate::isa::{CostTable, Imm, Scalar, SdtKind};

use super::{
    alu, extract_outputs, init_memory, zero_of, ExecTrace, Inputs, IssueKind, IssueRecord,
    ObjectHeap, RunConfig, Trap,
};

struct BaselineState {
    vals: Vec<Imm>,
    mem: Vec<Imm>,
    heap: ObjectHeap,
}

impl BaselineState {
    fn val(&self, v: Val) -> Imm {
        match v {
            Val::Reg(r) => self.vals[r.index()],
            Val::Imm(i) => i,
        }
    }

    fn val_as(&self, v: Val, kind: Scalar) -> Imm {
        alu::convert(self.val(v), kind)
    }

    fn write(&mut self, prog: &IrProgram, dst: VReg, v: Imm) {
        self.vals[dst.index()] = alu::convert(v, prog.kind_of(dst));
    }

    fn addr_of(&self, prog: &IrProgram, sym: usize, index: Option<VReg>) -> Result<usize, Trap> {
        let mut addr = prog.symbols[sym].addr as i64;
        if let Some(idx) = index {
            addr += match alu::convert(self.vals[idx.index()], Scalar::Int) {
                Imm::Int(x) => x as i64,
                _ => unreachable!("convert to int"),
            };
        }
        self.check_addr(addr)
    }

    fn indirect_addr(&self, ptr: VReg) -> Result<usize, Trap> {
        let addr = match alu::convert(self.vals[ptr.index()], Scalar::Long) {
            Imm::Long(x) => x,
            _ => unreachable!("convert to long"),
        };
        self.check_addr(addr)
    }

    fn check_addr(&self, addr: i64) -> Result<usize, Trap> {
        if addr < 0 || addr as usize >= self.mem.len() {
            return Err(Trap::MemOutOfRange(addr));
        }
        Ok(addr as usize)
    }
}

fn bin_trap(e: alu::AluError) -> Trap {
    match e {
        alu::AluError::DivisionByZero => Trap::DivisionByZero,
        other => Trap::BadProgram(other.to_string()),
    }
}

/// Execute one op. The memory type rules mirror the machine: a typed
/// load requires the word kind to match (char widens to int for free)
/// and a typed store may not retag a word, while traditionally routed
/// accesses convert freely on read and coerce stores to the word kind.
fn exec_op(prog: &IrProgram, op: &IrOp, st: &mut BaselineState) -> Result<(), Trap> {
    match op {
        IrOp::Move { dst, src } => {
            let v = st.val(*src);
            st.write(prog, *dst, v);
        }
        IrOp::Load { dst, sym, index } => {
            let addr = st.addr_of(prog, *sym, *index)?;
            let slot = st.mem[addr];
            let v = match ir::route(prog, op) {
                Route::Typed(lane) => {
                    if slot.scalar() == Scalar::from(lane) {
                        slot
                    } else if let (Imm::Char(c), SdtKind::Int) = (slot, lane) {
                        Imm::Int(c as i32)
                    } else {
                        return Err(Trap::TypeMismatch {
                            addr,
                            expected: lane.into(),
                            found: slot.scalar(),
                        });
                    }
                }
                _ => alu::convert(slot, prog.kind_of(*dst)),
            };
            st.write(prog, *dst, v);
        }
        IrOp::Store { src, sym, index } => {
            let addr = st.addr_of(prog, *sym, *index)?;
            let v = st.vals[src.index()];
            match ir::route(prog, op) {
                Route::Typed(_) => {
                    let slot = st.mem[addr];
                    if slot.scalar() != v.scalar() {
                        return Err(Trap::TypeMismatch {
                            addr,
                            expected: slot.scalar(),
                            found: v.scalar(),
                        });
                    }
                    st.mem[addr] = v;
                }
                _ => {
                    let slot_kind = st.mem[addr].scalar();
                    st.mem[addr] = alu::convert(v, slot_kind);
                }
            }
        }
        IrOp::Bin { op: kind, dst, lhs, rhs } => {
            let ty = prog.kind_of(*dst);
            let a = st.val_as(*lhs, ty);
            let b = st.val_as(*rhs, ty);
            let v = alu::bin(*kind, a, b).map_err(bin_trap)?;
            st.write(prog, *dst, v);
        }
        IrOp::Cmp { pred, dst, lhs, rhs } => {
            let a = st.val(*lhs);
            let b = alu::convert(st.val(*rhs), a.scalar());
            let hit = alu::cmp(*pred, a, b).map_err(|e| Trap::BadProgram(e.to_string()))?;
            st.write(prog, *dst, Imm::Int(hit as i32));
        }
        IrOp::Convert { dst, src } => {
            let v = st.vals[src.index()];
            st.write(prog, *dst, v);
        }
        IrOp::LoadInd { dst, addr } => {
            let a = st.indirect_addr(*addr)?;
            let v = st.mem[a];
            st.write(prog, *dst, v);
        }
        IrOp::StoreInd { src, addr } => {
            let a = st.indirect_addr(*addr)?;
            let slot_kind = st.mem[a].scalar();
            st.mem[a] = alu::convert(st.vals[src.index()], slot_kind);
        }
        IrOp::AddrOf { dst, sym } => {
            st.write(prog, *dst, Imm::Long(prog.symbols[*sym].addr as i64));
        }
        IrOp::ObjNew { dst, size } => {
            let bytes = match alu::convert(st.vals[size.index()], Scalar::Int) {
                Imm::Int(x) => x as i64,
                _ => unreachable!("convert to int"),
            };
            let handle = st.heap.alloc(bytes)?;
            st.write(prog, *dst, Imm::Int(handle as i32));
        }
        IrOp::ObjRelease { src } => {
            let handle = match alu::convert(st.vals[src.index()], Scalar::Int) {
                Imm::Int(x) => x as u32 as u64,
                _ => unreachable!("convert to int"),
            };
            st.heap.release(handle)?;
        }
    }
    Ok(())
}

/// Execute an IR program one op per issue and return its trace.
pub fn run_baseline(
    prog: &IrProgram,
    inputs: &Inputs,
    table: &CostTable,
    config: &RunConfig,
) -> Result<ExecTrace, Trap> {
    let mem = init_memory(&prog.symbols, inputs)?;
    let mut st = BaselineState {
        vals: prog.vregs.iter().map(|i| zero_of(i.kind)).collect(),
        mem,
        heap: ObjectHeap::new(),
    };
    let mut issues: Vec<IssueRecord> = Vec::new();
    let mut cycles: u64 = 0;

    if !prog.blocks.is_empty() {
        let mut pc = 0usize;
        let mut entries: u64 = 0;
        loop {
            entries += 1;
            if entries > config.cycle_limit {
                return Err(Trap::RuntimeLimit(config.cycle_limit));
            }
            let block = &prog.blocks[pc];
            for op in &block.ops {
                exec_op(prog, op, &mut st)?;
                let cost = ir::scalar_cost(prog, op, table);
                let route = ir::route(prog, op);
                let kind = match route {
                    Route::Trad => IssueKind::Traditional,
                    _ => IssueKind::Scalar,
                };
                let lanes = match route {
                    Route::Typed(k) => vec![k],
                    Route::Convert { to, .. } => vec![to],
                    _ => vec![],
                };
                let loads = matches!(op, IrOp::Load { .. } | IrOp::LoadInd { .. }) as u32;
                let ariths = matches!(op, IrOp::Bin { .. } | IrOp::Cmp { .. }) as u32;
                let miss = matches!(route, Route::Trad) as u32;
                issues.push(IssueRecord {
                    cycle_start: cycles,
                    cost,
                    kind,
                    members: 1,
                    lanes,
                    loads,
                    ariths,
                    miss_handled: miss,
                });
                cycles += cost as u64;
                if cycles > config.cycle_limit {
                    return Err(Trap::RuntimeLimit(config.cycle_limit));
                }
            }
            match block.term {
                IrTerm::Halt => break,
                IrTerm::Jump(next) => pc = next,
                IrTerm::Bnz { cond, then_blk, else_blk } => {
                    pc = if alu::is_nonzero(st.vals[cond.index()]) { then_blk } else { else_blk };
                }
            }
        }
    }

    Ok(ExecTrace { issues, cycles, outputs: extract_outputs(&prog.symbols, &st.mem) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{IrBlock, IrOp, IrProgram};
    use crate::isa::{BinKind, CmpPred, GlobalSym};
    use crate::machine::InputVal;

    fn sym(name: &str, kind: Scalar, addr: u32) -> GlobalSym {
        GlobalSym { name: name.into(), kind, addr, count: 1, init: None }
    }

    /// IR twin of the four-load/add/divide block used in the machine
    /// tests, for cycle and output parity checks.
    fn showcase() -> IrProgram {
        let mut p = IrProgram::new();
        for (i, n) in ["a", "b", "c", "d", "s", "e"].iter().enumerate() {
            p.symbols.push(sym(n, Scalar::Int, i as u32));
        }
        p.symbols.push(sym("q", Scalar::Float, 6));
        let va = p.lane_vreg(SdtKind::Int);
        let vb = p.lane_vreg(SdtKind::Int);
        let vc = p.lane_vreg(SdtKind::Int);
        let vd = p.lane_vreg(SdtKind::Int);
        let sum = p.lane_vreg(SdtKind::Int);
        let cf = p.lane_vreg(SdtKind::Float);
        let quot = p.lane_vreg(SdtKind::Float);
        let mut b = IrBlock::new("entry", 0);
        b.ops.push(IrOp::Load { dst: va, sym: 0, index: None });
        b.ops.push(IrOp::Load { dst: vb, sym: 1, index: None });
        b.ops.push(IrOp::Load { dst: vc, sym: 2, index: None });
        b.ops.push(IrOp::Load { dst: vd, sym: 3, index: None });
        b.ops.push(IrOp::Bin { op: BinKind::Add, dst: sum, lhs: Val::Reg(va), rhs: Val::Reg(vb) });
        b.ops.push(IrOp::Store { src: sum, sym: 4, index: None });
        b.ops.push(IrOp::Convert { dst: cf, src: vc });
        b.ops.push(IrOp::Bin {
            op: BinKind::Div,
            dst: quot,
            lhs: Val::Reg(cf),
            rhs: Val::Imm(Imm::Float(2.5)),
        });
        b.ops.push(IrOp::Store { src: quot, sym: 6, index: None });
        b.ops.push(IrOp::Store { src: vd, sym: 5, index: None });
        p.blocks.push(b);
        p
    }

    fn num_inputs(pairs: &[(&str, f64)]) -> Inputs {
        pairs.iter().map(|(n, v)| (n.to_string(), InputVal::Num(*v))).collect()
    }

    #[test]
    fn showcase_runs_at_summed_scalar_cost() {
        let p = showcase();
        let inputs = num_inputs(&[("a", 3.0), ("b", 4.0), ("c", 5.0), ("d", 6.0)]);
        let trace =
            run_baseline(&p, &inputs, &CostTable::default(), &RunConfig::default()).unwrap();
        assert_eq!(trace.cycles, 35);
        assert!(trace.is_contiguous());
        assert_eq!(trace.total_members(), 10);
        assert_eq!(trace.outputs["s"], vec![Imm::Int(7)]);
        assert_eq!(trace.outputs["q"], vec![Imm::Float(2.0)]);
        assert_eq!(trace.outputs["e"], vec![Imm::Int(6)]);
        assert!(trace.issues.iter().all(|r| r.members == 1));
        assert!(trace.issues.iter().all(|r| r.kind == IssueKind::Scalar));
    }

    #[test]
    fn loop_accumulates_and_terminates() {
        let mut p = IrProgram::new();
        p.symbols.push(sym("n", Scalar::Int, 0));
        p.symbols.push(sym("total", Scalar::Int, 1));
        let n = p.lane_vreg(SdtKind::Int);
        let acc = p.lane_vreg(SdtKind::Int);
        let n2 = p.lane_vreg(SdtKind::Int);
        let acc2 = p.lane_vreg(SdtKind::Int);
        let going = p.lane_vreg(SdtKind::Int);

        let mut entry = IrBlock::new("entry", 0);
        entry.ops.push(IrOp::Load { dst: n, sym: 0, index: None });
        entry.ops.push(IrOp::Move { dst: acc, src: Val::Imm(Imm::Int(0)) });
        entry.term = IrTerm::Jump(1);

        let mut head = IrBlock::new("head", 1);
        head.ops.push(IrOp::Cmp {
            pred: CmpPred::Lt,
            dst: going,
            lhs: Val::Imm(Imm::Int(0)),
            rhs: Val::Reg(n),
        });
        head.term = IrTerm::Bnz { cond: going, then_blk: 2, else_blk: 3 };

        let mut body = IrBlock::new("body", 1);
        body.ops
            .push(IrOp::Bin { op: BinKind::Add, dst: acc2, lhs: Val::Reg(acc), rhs: Val::Reg(n) });
        body.ops
            .push(IrOp::Bin { op: BinKind::Sub, dst: n2, lhs: Val::Reg(n), rhs: Val::Imm(Imm::Int(1)) });
        body.ops.push(IrOp::Move { dst: acc, src: Val::Reg(acc2) });
        body.ops.push(IrOp::Move { dst: n, src: Val::Reg(n2) });
        body.term = IrTerm::Jump(1);

        let mut done = IrBlock::new("done", 0);
        done.ops.push(IrOp::Store { src: acc, sym: 1, index: None });
        done.term = IrTerm::Halt;

        p.blocks.extend([entry, head, body, done]);
        p.check().expect("well formed");

        let inputs = num_inputs(&[("n", 5.0)]);
        let trace =
            run_baseline(&p, &inputs, &CostTable::default(), &RunConfig::default()).unwrap();
        assert_eq!(trace.outputs["total"], vec![Imm::Int(15)]);
    }

    #[test]
    fn traditional_long_work_counts_miss_handled() {
        let mut p = IrProgram::new();
        p.symbols.push(sym("g", Scalar::Long, 0));
        p.symbols.push(sym("out", Scalar::Long, 1));
        let a = p.trad_vreg(Scalar::Long);
        let b = p.trad_vreg(Scalar::Long);
        let mut blk = IrBlock::new("entry", 0);
        blk.ops.push(IrOp::Load { dst: a, sym: 0, index: None });
        blk.ops.push(IrOp::Bin {
            op: BinKind::Mul,
            dst: b,
            lhs: Val::Reg(a),
            rhs: Val::Imm(Imm::Long(3)),
        });
        blk.ops.push(IrOp::Store { src: b, sym: 1, index: None });
        p.blocks.push(blk);

        let inputs = num_inputs(&[("g", 14.0)]);
        let trace =
            run_baseline(&p, &inputs, &CostTable::default(), &RunConfig::default()).unwrap();
        assert_eq!(trace.outputs["out"], vec![Imm::Long(42)]);
        assert!(trace.issues.iter().all(|r| r.kind == IssueKind::Traditional));
        assert!(trace.issues.iter().all(|r| r.miss_handled == 1));
        // ld 3+2, mul 7+2, st 3+2.
        assert_eq!(trace.cycles, 19);
    }

    #[test]
    fn heap_ops_round_trip_handles() {
        let mut p = IrProgram::new();
        p.symbols.push(sym("h", Scalar::Int, 0));
        let size = p.lane_vreg(SdtKind::Int);
        let handle = p.lane_vreg(SdtKind::Int);
        let mut blk = IrBlock::new("entry", 0);
        blk.ops.push(IrOp::Move { dst: size, src: Val::Imm(Imm::Int(24)) });
        blk.ops.push(IrOp::ObjNew { dst: handle, size });
        blk.ops.push(IrOp::Store { src: handle, sym: 0, index: None });
        blk.ops.push(IrOp::ObjRelease { src: handle });
        p.blocks.push(blk);

        let trace =
            run_baseline(&p, &Inputs::new(), &CostTable::default(), &RunConfig::default())
                .unwrap();
        assert_eq!(trace.outputs["h"], vec![Imm::Int(1)]);
        // mov 1, obj.n 10, st 3, obj.r 5.
        assert_eq!(trace.cycles, 19);
    }

    #[test]
    fn runaway_loop_trips_limit() {
        let mut p = IrProgram::new();
        let v = p.lane_vreg(SdtKind::Int);
        let mut blk = IrBlock::new("entry", 0);
        blk.ops.push(IrOp::Move { dst: v, src: Val::Imm(Imm::Int(1)) });
        blk.term = IrTerm::Jump(0);
        p.blocks.push(blk);
        let config = RunConfig { cycle_limit: 500 };
        let err =
            run_baseline(&p, &Inputs::new(), &CostTable::default(), &config).unwrap_err();
        assert_eq!(err, Trap::RuntimeLimit(500));
    }
}
