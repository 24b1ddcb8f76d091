//! Lowering from typed programs to the block IR.
//!
//! Calls are inlined (the IR has no call op), so recursion is rejected
//! here with a depth error. Register-resident variables get one stable
//! "home" virtual register each; inside a block, assignments only
//! update a binding table, and the pending values are committed to
//! their homes with moves when control flow splits or merges. That
//! keeps every virtual register written at most once per block and
//! lets expression temporaries stay single-assignment.
//!
//! Conversions deserve care: the checker marks each widening with an
//! explicit node, and lowering emits one `Convert` per consumer, right
//! before it, collapsing the char-to-int-to-float style chains into a
//! single step (exact, since every intermediate step is exact). A
//! conversion that feeds exactly one typed op can then be folded into
//! that op as a cross-line source register later in the pipeline.
//!
//! Constant subexpressions fold through the same ALU the executors
//! use, so folding can never change a result or hide a division trap
//! (a folding attempt that would trap is left in the code).

use std::collections::{BTreeMap, BTreeSet};

use super::ast::BinOp;
use super::types::{
    LocalId, TExpr, TExprKind, TFunc, TGlobal, TLocal, TStmt, TypedProgram, ValTy, VarRef,
};
use super::FrontendError;
use crate::ir::{IrBlock, IrOp, IrProgram, IrTerm, LoopExtent, Val, VReg};
use crate::isa::{BinKind, CmpPred, GlobalSym, Imm, Scalar, SdtKind};
use crate::machine::{alu, zero_of};

/// Tuning knobs for lowering.
#[derive(Debug, Clone, Copy)]
pub struct LowerOptions {
    /// Fully unroll a counted `for` loop when its literal trip count is
    /// at most this many iterations. Zero disables unrolling.
    pub unroll: u32,
}

impl Default for LowerOptions {
    fn default() -> Self {
        LowerOptions { unroll: 1 }
    }
}

/// Inlining depth bound; a call chain deeper than this (in particular,
/// any recursion) is a compile error.
pub const MAX_INLINE_DEPTH: u32 = 64;

/// Lower a checked program into block IR, inlining every call.
pub fn lower(prog: &TypedProgram, opts: &LowerOptions) -> Result<IrProgram, FrontendError> {
    let mut lo = Lowerer::new(prog, opts);
    lo.build_symbols();
    lo.run()?;
    let out = lo.out;
    if let Err(e) = out.check() {
        panic!("lowering produced invalid IR: {e}");
    }
    Ok(out)
}

/// A variable instance: (inline instance id, local index). Globals are
/// never in the binding table; they live in memory.
type VarKey = (u32, u32);

/// Per-inlined-call state.
struct FnCtx {
    /// Unique id distinguishing locals of separate inline instances.
    inst: u32,
    /// Index of the function being lowered.
    func: usize,
    /// Call depth, for the recursion bound.
    call_depth: u32,
    /// Where returns deposit their value; `None` for void and for the
    /// top-level entry function.
    ret_dst: Option<VReg>,
    /// Blocks whose terminator must be patched to jump to the join.
    ret_jumps: Vec<usize>,
}

struct Lowerer<'a> {
    p: &'a TypedProgram,
    unroll: u32,
    out: IrProgram,
    /// (function, local) to its backing symbol, for memory-resident locals.
    local_syms: BTreeMap<(usize, u32), usize>,
    cur: usize,
    loop_depth: u32,
    env: BTreeMap<VarKey, Val>,
    homes: BTreeMap<VarKey, VReg>,
    home_regs: BTreeSet<VReg>,
    next_inst: u32,
}

impl<'a> Lowerer<'a> {
    fn new(p: &'a TypedProgram, opts: &LowerOptions) -> Lowerer<'a> {
        Lowerer {
            p,
            unroll: opts.unroll,
            out: IrProgram::new(),
            local_syms: BTreeMap::new(),
            cur: 0,
            loop_depth: 0,
            env: BTreeMap::new(),
            homes: BTreeMap::new(),
            home_regs: BTreeSet::new(),
            next_inst: 0,
        }
    }

    /// Globals first (so a `GlobalId` doubles as a symbol index), then
    /// one internal symbol per memory-resident local. Addresses come
    /// from the checker's layout, which the interpreter also uses, so
    /// pointer values agree between all executors.
    fn build_symbols(&mut self) {
        for g in &self.p.globals {
            let kind = g.ty.scalar().expect("global scalar");
            let init = if g.count == 1 && g.init[0] != zero_of(kind) {
                Some(g.init[0])
            } else {
                None
            };
            self.out.symbols.push(GlobalSym {
                name: g.name.clone(),
                kind,
                addr: g.addr,
                count: g.count,
                init,
            });
        }
        for (fi, f) in self.p.funcs.iter().enumerate() {
            for (li, l) in f.locals.iter().enumerate() {
                let Some(slot) = l.slot else { continue };
                let name = format!("__l{fi}_{li}_{}", sanitize(&l.name));
                let sym = self.out.symbols.len();
                self.out.symbols.push(GlobalSym {
                    name,
                    kind: l.ty.scalar().expect("memory local scalar"),
                    addr: slot,
                    count: l.count.unwrap_or(1),
                    init: None,
                });
                self.local_syms.insert((fi, li as u32), sym);
            }
        }
    }

    fn run(&mut self) -> Result<(), FrontendError> {
        let entry = self.new_block();
        self.cur = entry;
        self.emit_startup_stores();
        let main = self.p.main;
        let inst = self.fresh_inst(main);
        let mut fx =
            FnCtx { inst, func: main, call_depth: 0, ret_dst: None, ret_jumps: Vec::new() };
        let body = &self.p.funcs[main].body;
        self.lower_stmts(body, &mut fx)?;
        let end = self.new_block();
        self.out.blocks[self.cur].term = IrTerm::Jump(end);
        for b in fx.ret_jumps {
            self.out.blocks[b].term = IrTerm::Jump(end);
        }
        self.out.blocks[end].term = IrTerm::Halt;
        Ok(())
    }

    /// Brace-initialized arrays are materialized by explicit stores at
    /// entry, after inputs are bound, so a brace list beats an input
    /// bound to the same global. The interpreter replays the same rule.
    fn emit_startup_stores(&mut self) {
        for (gi, g) in self.p.globals.iter().enumerate() {
            if !g.has_list {
                continue;
            }
            for (i, v) in g.init.iter().enumerate() {
                let idx = self.materialize(Imm::Int(i as i32));
                let val = self.materialize(*v);
                self.emit(IrOp::Store { src: val, sym: gi, index: Some(idx) });
            }
        }
    }

    // ----- small builders ---------------------------------------------------

    fn new_block(&mut self) -> usize {
        let idx = self.out.blocks.len();
        self.out.blocks.push(IrBlock::new(format!("b{idx}"), self.loop_depth));
        idx
    }

    fn emit(&mut self, op: IrOp) {
        self.out.blocks[self.cur].ops.push(op);
    }

    /// Fresh value register: typed line for scalar datatypes, the
    /// traditional file otherwise.
    fn vreg_for(&mut self, kind: Scalar) -> VReg {
        match kind.sdt() {
            Some(k) => self.out.lane_vreg(k),
            None => self.out.trad_vreg(kind),
        }
    }

    /// Move an immediate into a fresh register of its own kind.
    fn materialize(&mut self, imm: Imm) -> VReg {
        let dst = self.vreg_for(imm.scalar());
        self.emit(IrOp::Move { dst, src: Val::Imm(imm) });
        dst
    }

    fn as_vreg(&mut self, val: Val) -> VReg {
        match val {
            Val::Reg(r) => r,
            Val::Imm(v) => self.materialize(v),
        }
    }

    fn fresh_inst(&mut self, func: usize) -> u32 {
        let inst = self.next_inst;
        self.next_inst += 1;
        for (li, l) in self.p.funcs[func].locals.iter().enumerate() {
            if l.in_memory() {
                continue;
            }
            let kind = l.ty.scalar().expect("register local scalar");
            let trad = l.trad_only || kind.sdt().is_none();
            let home = self.out.add_vreg(kind, trad, Some(l.name.clone()));
            self.homes.insert((inst, li as u32), home);
            self.home_regs.insert(home);
        }
        inst
    }

    /// Commit pending bindings to their home registers. Called exactly
    /// once per block, right before a control-flow terminator, so each
    /// home is written at most once per block.
    fn seal(&mut self) {
        let pending = std::mem::take(&mut self.env);
        for (key, val) in pending {
            let home = self.homes[&key];
            if val != Val::Reg(home) {
                self.emit(IrOp::Move { dst: home, src: val });
            }
        }
    }

    // ----- variable access --------------------------------------------------

    fn local(&self, fx: &FnCtx, id: LocalId) -> &'a TLocal {
        &self.p.funcs[fx.func].locals[id.0 as usize]
    }

    fn load_sym(&mut self, sym: usize, kind: Scalar, trad_only: bool) -> Val {
        let dst = if trad_only { self.out.trad_vreg(kind) } else { self.vreg_for(kind) };
        self.emit(IrOp::Load { dst, sym, index: None });
        Val::Reg(dst)
    }

    fn read_var(&mut self, fx: &FnCtx, var: VarRef) -> Val {
        match var {
            VarRef::Global(g) => {
                let tg = self.p.global(g);
                let kind = tg.ty.scalar().expect("global scalar");
                self.load_sym(g.0 as usize, kind, tg.trad_only)
            }
            VarRef::Local(l) => {
                let tl = self.local(fx, l);
                if tl.in_memory() {
                    let sym = self.local_syms[&(fx.func, l.0)];
                    let kind = tl.ty.scalar().expect("local scalar");
                    self.load_sym(sym, kind, tl.trad_only)
                } else {
                    let key = (fx.inst, l.0);
                    match self.env.get(&key) {
                        Some(v) => *v,
                        None => Val::Reg(self.homes[&key]),
                    }
                }
            }
        }
    }

    fn assign_var(&mut self, fx: &FnCtx, var: VarRef, val: Val) {
        match var {
            VarRef::Global(g) => {
                let src = self.as_vreg(val);
                self.emit(IrOp::Store { src, sym: g.0 as usize, index: None });
            }
            VarRef::Local(l) => {
                if self.local(fx, l).in_memory() {
                    let sym = self.local_syms[&(fx.func, l.0)];
                    let src = self.as_vreg(val);
                    self.emit(IrOp::Store { src, sym, index: None });
                } else {
                    let key = (fx.inst, l.0);
                    let home = self.homes[&key];
                    // Binding a variable to another variable's home
                    // would make commit order matter; copy through a
                    // temporary instead.
                    let val = match val {
                        Val::Reg(r) if r != home && self.home_regs.contains(&r) => {
                            let t = self.vreg_for(self.out.kind_of(r));
                            self.emit(IrOp::Move { dst: t, src: Val::Reg(r) });
                            Val::Reg(t)
                        }
                        other => other,
                    };
                    self.env.insert(key, val);
                }
            }
        }
    }

    /// Symbol and element facts behind an indexed variable.
    fn array_sym(&self, fx: &FnCtx, var: VarRef) -> (usize, Scalar, bool) {
        match var {
            VarRef::Global(g) => {
                let tg: &TGlobal = self.p.global(g);
                (g.0 as usize, tg.ty.scalar().expect("global scalar"), tg.trad_only)
            }
            VarRef::Local(l) => {
                let tl = self.local(fx, l);
                let sym = self.local_syms[&(fx.func, l.0)];
                (sym, tl.ty.scalar().expect("local scalar"), tl.trad_only)
            }
        }
    }

    /// Indexes feed the address unit as a non-traditional int register.
    fn index_vreg(&mut self, val: Val) -> VReg {
        match val {
            Val::Imm(v) => self.materialize(alu::convert(v, Scalar::Int)),
            Val::Reg(r) => {
                let info = self.out.info(r);
                if info.kind == Scalar::Int && !info.trad {
                    r
                } else {
                    let t = self.out.lane_vreg(SdtKind::Int);
                    self.emit(IrOp::Move { dst: t, src: Val::Reg(r) });
                    t
                }
            }
        }
    }

    // ----- statements -------------------------------------------------------

    fn lower_stmts(&mut self, stmts: &'a [TStmt], fx: &mut FnCtx) -> Result<(), FrontendError> {
        for s in stmts {
            self.lower_stmt(s, fx)?;
        }
        Ok(())
    }

    fn lower_stmt(&mut self, s: &'a TStmt, fx: &mut FnCtx) -> Result<(), FrontendError> {
        match s {
            TStmt::AssignVar { var, value } => {
                let val = self.lower_expr(value, fx)?;
                self.assign_var(fx, *var, val);
            }
            TStmt::AssignIndex { arr, index, value } => {
                let (sym, _, _) = self.array_sym(fx, *arr);
                let idx = self.lower_expr(index, fx)?;
                let idx = self.index_vreg(idx);
                let val = self.lower_expr(value, fx)?;
                let src = self.as_vreg(val);
                self.emit(IrOp::Store { src, sym, index: Some(idx) });
            }
            TStmt::AssignDeref { ptr, value, .. } => {
                let addr = self.lower_expr(ptr, fx)?;
                let addr = self.as_vreg(addr);
                let val = self.lower_expr(value, fx)?;
                let src = self.as_vreg(val);
                self.emit(IrOp::StoreInd { src, addr });
            }
            TStmt::If { cond, then_blk, else_blk } => {
                self.lower_if(cond, then_blk, else_blk, fx)?;
            }
            TStmt::While { cond, body } => self.lower_while(cond, body, fx)?,
            TStmt::For { init, cond, step, body } => {
                if let Some(trip) = self.unroll_trip(init, cond, step, body, fx) {
                    self.lower_stmts(init, fx)?;
                    for _ in 0..trip {
                        self.lower_stmts(body, fx)?;
                        self.lower_stmts(step, fx)?;
                    }
                } else {
                    self.lower_for(init, cond, step, body, fx)?;
                }
            }
            TStmt::Return { value, .. } => {
                let val = match value {
                    Some(e) => Some(self.lower_expr(e, fx)?),
                    None => None,
                };
                if let Some(rd) = fx.ret_dst {
                    let src = val.unwrap_or(Val::Imm(zero_of(self.out.kind_of(rd))));
                    self.emit(IrOp::Move { dst: rd, src });
                }
                self.seal();
                fx.ret_jumps.push(self.cur);
                // Anything after an unconditional return lowers into an
                // unreachable block.
                let dead = self.new_block();
                self.cur = dead;
            }
            TStmt::Delete(e) => {
                let val = self.lower_expr(e, fx)?;
                let src = self.as_vreg(val);
                self.emit(IrOp::ObjRelease { src });
            }
            TStmt::Eval(e) => {
                self.lower_expr(e, fx)?;
            }
        }
        Ok(())
    }

    fn lower_if(
        &mut self,
        cond: &'a TExpr,
        then_blk: &'a [TStmt],
        else_blk: &'a [TStmt],
        fx: &mut FnCtx,
    ) -> Result<(), FrontendError> {
        let (cv, flip) = self.lower_cond(cond, fx)?;
        self.seal();
        let head = self.cur;
        let t = self.new_block();
        self.cur = t;
        self.lower_stmts(then_blk, fx)?;
        self.seal();
        let t_end = self.cur;
        if else_blk.is_empty() {
            let merge = self.new_block();
            let (then_t, else_t) = if flip { (merge, t) } else { (t, merge) };
            self.out.blocks[head].term =
                IrTerm::Bnz { cond: cv, then_blk: then_t, else_blk: else_t };
            self.out.blocks[t_end].term = IrTerm::Jump(merge);
            self.cur = merge;
        } else {
            let e = self.new_block();
            self.cur = e;
            self.lower_stmts(else_blk, fx)?;
            self.seal();
            let e_end = self.cur;
            let merge = self.new_block();
            let (then_t, else_t) = if flip { (e, t) } else { (t, e) };
            self.out.blocks[head].term =
                IrTerm::Bnz { cond: cv, then_blk: then_t, else_blk: else_t };
            self.out.blocks[t_end].term = IrTerm::Jump(merge);
            self.out.blocks[e_end].term = IrTerm::Jump(merge);
            self.cur = merge;
        }
        Ok(())
    }

    fn lower_while(
        &mut self,
        cond: &'a TExpr,
        body: &'a [TStmt],
        fx: &mut FnCtx,
    ) -> Result<(), FrontendError> {
        self.seal();
        let pre = self.cur;
        self.loop_depth += 1;
        let head = self.new_block();
        self.out.blocks[pre].term = IrTerm::Jump(head);
        self.cur = head;
        let (cv, flip) = self.lower_cond(cond, fx)?;
        self.seal();
        let guard_end = self.cur;
        let b = self.new_block();
        self.cur = b;
        self.lower_stmts(body, fx)?;
        self.seal();
        self.out.blocks[self.cur].term = IrTerm::Jump(head);
        self.loop_depth -= 1;
        let exit = self.new_block();
        let (then_t, else_t) = if flip { (exit, b) } else { (b, exit) };
        self.out.blocks[guard_end].term =
            IrTerm::Bnz { cond: cv, then_blk: then_t, else_blk: else_t };
        self.out.loops.push(LoopExtent { head, tail: exit - 1 });
        self.cur = exit;
        Ok(())
    }

    fn lower_for(
        &mut self,
        init: &'a [TStmt],
        cond: &'a TExpr,
        step: &'a [TStmt],
        body: &'a [TStmt],
        fx: &mut FnCtx,
    ) -> Result<(), FrontendError> {
        self.lower_stmts(init, fx)?;
        self.seal();
        let pre = self.cur;
        self.loop_depth += 1;
        let head = self.new_block();
        self.out.blocks[pre].term = IrTerm::Jump(head);
        self.cur = head;
        let (cv, flip) = self.lower_cond(cond, fx)?;
        self.seal();
        let guard_end = self.cur;
        let b = self.new_block();
        self.cur = b;
        self.lower_stmts(body, fx)?;
        self.lower_stmts(step, fx)?;
        self.seal();
        self.out.blocks[self.cur].term = IrTerm::Jump(head);
        self.loop_depth -= 1;
        let exit = self.new_block();
        let (then_t, else_t) = if flip { (exit, b) } else { (b, exit) };
        self.out.blocks[guard_end].term =
            IrTerm::Bnz { cond: cv, then_blk: then_t, else_blk: else_t };
        self.out.loops.push(LoopExtent { head, tail: exit - 1 });
        self.cur = exit;
        Ok(())
    }

    /// Trip count for a fully unrollable counted loop: literal int
    /// start and bound, a positive literal increment, and a body that
    /// never reassigns the (register-resident) counter.
    fn unroll_trip(
        &self,
        init: &[TStmt],
        cond: &TExpr,
        step: &[TStmt],
        body: &[TStmt],
        fx: &FnCtx,
    ) -> Option<u32> {
        if self.unroll == 0 {
            return None;
        }
        let [TStmt::AssignVar { var: v0, value: iv }] = init else { return None };
        let VarRef::Local(l) = *v0 else { return None };
        let tl = self.local(fx, l);
        if tl.ty != ValTy::Int || tl.in_memory() {
            return None;
        }
        let TExprKind::Imm(Imm::Int(start)) = iv.kind else { return None };
        let TExprKind::Cmp { pred, cmp_ty: ValTy::Int, ref lhs, ref rhs } = cond.kind else {
            return None;
        };
        if !matches!(pred, BinOp::Lt | BinOp::Le) {
            return None;
        }
        let TExprKind::Read(cv) = lhs.kind else { return None };
        if cv != *v0 {
            return None;
        }
        let TExprKind::Imm(Imm::Int(bound)) = rhs.kind else { return None };
        let [TStmt::AssignVar { var: sv, value: se }] = step else { return None };
        if sv != v0 {
            return None;
        }
        let TExprKind::Bin { op: BinOp::Add, ref lhs, ref rhs } = se.kind else { return None };
        let TExprKind::Read(rv) = lhs.kind else { return None };
        if rv != *v0 {
            return None;
        }
        let TExprKind::Imm(Imm::Int(inc)) = rhs.kind else { return None };
        if inc <= 0 || assigns_var(body, *v0) {
            return None;
        }
        let mut trip: u32 = 0;
        let mut x = start as i64;
        let keep = |x: i64| if pred == BinOp::Lt { x < bound as i64 } else { x <= bound as i64 };
        while keep(x) {
            trip += 1;
            if trip > self.unroll {
                return None;
            }
            x += inc as i64;
        }
        Some(trip)
    }

    // ----- expressions ------------------------------------------------------

    fn lower_expr(&mut self, e: &'a TExpr, fx: &mut FnCtx) -> Result<Val, FrontendError> {
        match &e.kind {
            TExprKind::Imm(v) => Ok(Val::Imm(*v)),
            TExprKind::Read(var) => Ok(self.read_var(fx, *var)),
            TExprKind::ReadIndex { arr, index } => {
                let (sym, kind, trad_only) = self.array_sym(fx, *arr);
                let idx = self.lower_expr(index, fx)?;
                let idx = self.index_vreg(idx);
                let dst = if trad_only { self.out.trad_vreg(kind) } else { self.vreg_for(kind) };
                self.emit(IrOp::Load { dst, sym, index: Some(idx) });
                Ok(Val::Reg(dst))
            }
            TExprKind::ReadDeref { ptr, pointee } => {
                let addr = self.lower_expr(ptr, fx)?;
                let addr = self.as_vreg(addr);
                let dst = self.vreg_for(*pointee);
                self.emit(IrOp::LoadInd { dst, addr });
                Ok(Val::Reg(dst))
            }
            TExprKind::AddrOfVar(var) => {
                let sym = self.var_sym(fx, *var);
                let dst = self.out.trad_vreg(Scalar::Long);
                self.emit(IrOp::AddrOf { dst, sym });
                Ok(Val::Reg(dst))
            }
            TExprKind::AddrOfIndex { arr, index } => {
                let (sym, _, _) = self.array_sym(fx, *arr);
                let base = self.out.trad_vreg(Scalar::Long);
                self.emit(IrOp::AddrOf { dst: base, sym });
                let idx = self.lower_expr(index, fx)?;
                let dst = self.out.trad_vreg(Scalar::Long);
                self.emit(IrOp::Bin { op: BinKind::Add, dst, lhs: Val::Reg(base), rhs: idx });
                Ok(Val::Reg(dst))
            }
            TExprKind::Convert(_) => {
                // Collapse conversion chains into one step; every chain
                // the checker builds starts from char or takes a single
                // hop, so the one-step value is bit-identical.
                let mut inner = e;
                while let TExprKind::Convert(next) = &inner.kind {
                    inner = next.as_ref();
                }
                let val = self.lower_expr(inner, fx)?;
                let to = e.ty.scalar().expect("conversion target");
                Ok(self.emit_convert(val, to))
            }
            TExprKind::Bin { op, lhs, rhs } => {
                let a = self.lower_expr(lhs, fx)?;
                let b = self.lower_expr(rhs, fx)?;
                let kind = e.ty.scalar().expect("arithmetic type");
                Ok(self.emit_bin(*op, kind, a, b))
            }
            TExprKind::Cmp { pred, cmp_ty, lhs, rhs } => {
                let a = self.lower_expr(lhs, fx)?;
                let b = self.lower_expr(rhs, fx)?;
                Ok(self.emit_cmp_value(*pred, *cmp_ty, a, b))
            }
            TExprKind::Call { func, args } => self.inline_call(*func, args, e, fx),
            TExprKind::New { elem, count } => {
                let c = self.lower_expr(count, fx)?;
                let bytes = self.emit_bin(
                    BinOp::Mul,
                    Scalar::Int,
                    c,
                    Val::Imm(Imm::Int(elem.size_bytes() as i32)),
                );
                let size = self.as_vreg(bytes);
                let dst = self.out.lane_vreg(SdtKind::Int);
                self.emit(IrOp::ObjNew { dst, size });
                Ok(Val::Reg(dst))
            }
        }
    }

    fn var_sym(&self, fx: &FnCtx, var: VarRef) -> usize {
        match var {
            VarRef::Global(g) => g.0 as usize,
            VarRef::Local(l) => self.local_syms[&(fx.func, l.0)],
        }
    }

    /// One conversion step, folded when the source is a constant.
    fn emit_convert(&mut self, val: Val, to: Scalar) -> Val {
        match val {
            Val::Imm(v) => Val::Imm(alu::convert(v, to)),
            Val::Reg(src) => {
                let dst = self.vreg_for(to);
                self.emit(IrOp::Convert { dst, src });
                Val::Reg(dst)
            }
        }
    }

    fn emit_bin(&mut self, op: BinOp, kind: Scalar, a: Val, b: Val) -> Val {
        if let (Val::Imm(x), Val::Imm(y)) = (a, b) {
            if op == BinOp::Mod {
                if let Ok(q) = alu::bin(BinKind::Div, x, y) {
                    let m = alu::bin(BinKind::Mul, q, y).expect("same kinds");
                    return Val::Imm(alu::bin(BinKind::Sub, x, m).expect("same kinds"));
                }
            } else if let Ok(v) = alu::bin(bin_kind(op), x, y) {
                return Val::Imm(v);
            }
            // A constant op that would trap stays in the code so the
            // trap still happens at run time.
        }
        if op == BinOp::Mod {
            // a - (a / b) * b, the expansion every executor agrees on.
            let q = self.bin_into(BinKind::Div, kind, a, b);
            let m = self.bin_into(BinKind::Mul, kind, Val::Reg(q), b);
            let r = self.bin_into(BinKind::Sub, kind, a, Val::Reg(m));
            return Val::Reg(r);
        }
        Val::Reg(self.bin_into(bin_kind(op), kind, a, b))
    }

    fn bin_into(&mut self, op: BinKind, kind: Scalar, lhs: Val, rhs: Val) -> VReg {
        let dst = self.vreg_for(kind);
        self.emit(IrOp::Bin { op, dst, lhs, rhs });
        dst
    }

    /// A comparison used as a value: int 0/1. Int and char compares
    /// stay on their line (greater-than flips its operands; not-equal
    /// computes equality and flips the bit), and a char result widens
    /// to int. Float, double, long, and pointer compares write the int
    /// flag through the traditional lane.
    fn emit_cmp_value(&mut self, pred: BinOp, cmp_ty: ValTy, a: Val, b: Val) -> Val {
        if let (Val::Imm(x), Val::Imm(y)) = (a, b) {
            if let Ok(hit) = alu::cmp(cmp_pred(pred), x, y) {
                return Val::Imm(Imm::Int(hit as i32));
            }
        }
        match cmp_ty.sdt() {
            Some(k) if k == SdtKind::Int || k == SdtKind::Char => {
                let (pred2, a, b, negate) = normalize_int_pred(pred, a, b);
                let dst = self.out.lane_vreg(k);
                self.emit(IrOp::Cmp { pred: pred2, dst, lhs: a, rhs: b });
                let mut out = dst;
                if negate {
                    let one = if k == SdtKind::Char { Imm::Char(1) } else { Imm::Int(1) };
                    out = self.bin_into(
                        BinKind::Xor,
                        Scalar::from(k),
                        Val::Reg(dst),
                        Val::Imm(one),
                    );
                }
                if k == SdtKind::Char {
                    self.emit_convert(Val::Reg(out), Scalar::Int)
                } else {
                    Val::Reg(out)
                }
            }
            _ => {
                // Float, double, long, and pointer operands route
                // traditionally and already produce an int flag.
                let dst = self.out.lane_vreg(SdtKind::Int);
                self.emit(IrOp::Cmp { pred: cmp_pred(pred), dst, lhs: a, rhs: b });
                Val::Reg(dst)
            }
        }
    }

    /// A condition for a branch. Returns the flag register plus a flip
    /// marker meaning "branch when zero instead" (used to keep int
    /// not-equal compares on their line without an extra op).
    fn lower_cond(&mut self, e: &'a TExpr, fx: &mut FnCtx) -> Result<(VReg, bool), FrontendError> {
        if let TExprKind::Cmp { pred, cmp_ty, lhs, rhs } = &e.kind {
            let a = self.lower_expr(lhs, fx)?;
            let b = self.lower_expr(rhs, fx)?;
            if let (Val::Imm(x), Val::Imm(y)) = (a, b) {
                if let Ok(hit) = alu::cmp(cmp_pred(*pred), x, y) {
                    return Ok((self.materialize(Imm::Int(hit as i32)), false));
                }
            }
            let line = cmp_ty.sdt();
            if line == Some(SdtKind::Int) || line == Some(SdtKind::Char) {
                let k = line.expect("checked just above");
                let (pred2, a, b, negate) = normalize_int_pred(*pred, a, b);
                let dst = self.out.lane_vreg(k);
                self.emit(IrOp::Cmp { pred: pred2, dst, lhs: a, rhs: b });
                return Ok((dst, negate));
            }
            // Float and double guards keep the flag in their own line;
            // long compares write an int flag traditionally.
            let dst = match cmp_ty.sdt() {
                Some(k) => self.out.lane_vreg(k),
                None => self.out.lane_vreg(SdtKind::Int),
            };
            self.emit(IrOp::Cmp { pred: cmp_pred(*pred), dst, lhs: a, rhs: b });
            return Ok((dst, false));
        }
        let val = self.lower_expr(e, fx)?;
        Ok((self.as_vreg(val), false))
    }

    // ----- calls ------------------------------------------------------------

    fn inline_call(
        &mut self,
        func: usize,
        args: &'a [TExpr],
        site: &'a TExpr,
        fx: &mut FnCtx,
    ) -> Result<Val, FrontendError> {
        let f: &TFunc = &self.p.funcs[func];
        if fx.call_depth + 1 > MAX_INLINE_DEPTH {
            return Err(FrontendError::CallDepth {
                pos: site.pos,
                name: f.name.clone(),
                limit: MAX_INLINE_DEPTH as usize,
            });
        }
        let mut vals = Vec::with_capacity(args.len());
        for a in args {
            vals.push(self.lower_expr(a, fx)?);
        }
        let inst = self.fresh_inst(func);
        let ret_dst = f.ret.scalar().map(|k| self.vreg_for(k));
        let mut sub = FnCtx {
            inst,
            func,
            call_depth: fx.call_depth + 1,
            ret_dst,
            ret_jumps: Vec::new(),
        };
        for (i, val) in vals.into_iter().enumerate() {
            self.assign_var(&sub, VarRef::Local(LocalId(i as u32)), val);
        }
        self.lower_stmts(&f.body, &mut sub)?;
        // Falling off the end returns zero; when every path returns,
        // this lands in an unreachable block and never runs.
        if let Some(rd) = sub.ret_dst {
            self.emit(IrOp::Move { dst: rd, src: Val::Imm(zero_of(self.out.kind_of(rd))) });
        }
        self.seal();
        let join = self.new_block();
        self.out.blocks[self.cur].term = IrTerm::Jump(join);
        for b in sub.ret_jumps {
            self.out.blocks[b].term = IrTerm::Jump(join);
        }
        self.cur = join;
        // The callee's bindings are dead past this point.
        self.env.retain(|k, _| k.0 != inst);
        Ok(match sub.ret_dst {
            Some(rd) => Val::Reg(rd),
            None => Val::Imm(Imm::Int(0)),
        })
    }
}

/// Does any statement in the tree reassign `var`?
fn assigns_var(stmts: &[TStmt], var: VarRef) -> bool {
    stmts.iter().any(|s| match s {
        TStmt::AssignVar { var: v, .. } => *v == var,
        TStmt::If { then_blk, else_blk, .. } => {
            assigns_var(then_blk, var) || assigns_var(else_blk, var)
        }
        TStmt::While { body, .. } => assigns_var(body, var),
        TStmt::For { init, step, body, .. } => {
            assigns_var(init, var) || assigns_var(step, var) || assigns_var(body, var)
        }
        _ => false,
    })
}

fn bin_kind(op: BinOp) -> BinKind {
    match op {
        BinOp::Add => BinKind::Add,
        BinOp::Sub => BinKind::Sub,
        BinOp::Mul => BinKind::Mul,
        BinOp::Div => BinKind::Div,
        BinOp::BitAnd => BinKind::And,
        BinOp::BitOr => BinKind::Or,
        BinOp::BitXor => BinKind::Xor,
        BinOp::BitXnor => BinKind::Xnor,
        other => unreachable!("no ALU op for {other:?}"),
    }
}

fn cmp_pred(op: BinOp) -> CmpPred {
    match op {
        BinOp::Eq => CmpPred::Eq,
        BinOp::Ne => CmpPred::Ne,
        BinOp::Lt => CmpPred::Lt,
        BinOp::Le => CmpPred::Le,
        BinOp::Gt => CmpPred::Gt,
        BinOp::Ge => CmpPred::Ge,
        other => unreachable!("not a predicate: {other:?}"),
    }
}

/// Rewrite an int or char comparison onto the four native predicates.
/// Greater-than swaps its operands; not-equal computes equality and
/// asks the caller to flip (`negate`).
fn normalize_int_pred(pred: BinOp, a: Val, b: Val) -> (CmpPred, Val, Val, bool) {
    match pred {
        BinOp::Eq => (CmpPred::Eq, a, b, false),
        BinOp::Ne => (CmpPred::Eq, a, b, true),
        BinOp::Lt => (CmpPred::Lt, a, b, false),
        BinOp::Le => (CmpPred::Le, a, b, false),
        BinOp::Gt => (CmpPred::Lt, b, a, false),
        BinOp::Ge => (CmpPred::Ge, a, b, false),
        other => unreachable!("not a predicate: {other:?}"),
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::interp::{interpret, InterpLimits};
    use crate::frontend::parser::parse;
    use crate::frontend::types::check;
    use crate::isa::CostTable;
    use crate::machine::{run_baseline, InputVal, Inputs, RunConfig, Trap};

    fn lower_src(src: &str) -> IrProgram {
        let prog = check(&parse(src).expect("parses")).expect("typechecks");
        lower(&prog, &LowerOptions::default()).expect("lowers")
    }

    fn lower_unrolled(src: &str, unroll: u32) -> IrProgram {
        let prog = check(&parse(src).expect("parses")).expect("typechecks");
        lower(&prog, &LowerOptions { unroll }).expect("lowers")
    }

    fn baseline(src: &str, inputs: &Inputs) -> Result<crate::machine::ExecTrace, Trap> {
        let ir = lower_src(src);
        run_baseline(&ir, inputs, &CostTable::default(), &RunConfig::default())
    }

    #[test]
    fn global_add_lowers_to_load_add_store() {
        let ir = lower_src("int a; int b; int c;\nvoid main() { c = a + b; }");
        let ops = &ir.blocks[0].ops;
        assert_eq!(ops.len(), 4, "expected load/load/add/store, got {ops:?}");
        assert!(matches!(ops[0], IrOp::Load { sym: 0, index: None, .. }));
        assert!(matches!(ops[1], IrOp::Load { sym: 1, index: None, .. }));
        assert!(matches!(ops[2], IrOp::Bin { op: BinKind::Add, .. }));
        assert!(matches!(ops[3], IrOp::Store { sym: 2, index: None, .. }));
    }

    #[test]
    fn short_counted_loops_unroll_flat() {
        let src = "int s;\nvoid main() { int i; for (i = 0; i < 4; i = i + 1) { s = s + 1; } }";
        let ir = lower_unrolled(src, 8);
        assert!(ir.loops.is_empty(), "expected full unroll, got {:?}", ir.loops);
        assert_eq!(ir.blocks.len(), 2);
        assert!(ir.blocks.iter().all(|b| !matches!(b.term, IrTerm::Bnz { .. })));
        let trace = run_baseline(&ir, &Inputs::new(), &CostTable::default(), &RunConfig::default())
            .expect("runs");
        assert_eq!(trace.outputs["s"], vec![Imm::Int(4)]);
    }

    #[test]
    fn long_loops_keep_structure_and_extent() {
        let src =
            "int s;\nvoid main() { int i; for (i = 0; i < 100; i = i + 1) { s = s + 2; } }";
        let ir = lower_src(src);
        assert_eq!(ir.loops.len(), 1);
        let ext = ir.loops[0];
        assert!(matches!(ir.blocks[ext.head].term, IrTerm::Bnz { .. }));
        assert!(ir.blocks[ext.head..=ext.tail].iter().all(|b| b.depth == 1));
        assert_eq!(ir.blocks[0].depth, 0);
        let trace = run_baseline(&ir, &Inputs::new(), &CostTable::default(), &RunConfig::default())
            .expect("runs");
        assert_eq!(trace.outputs["s"], vec![Imm::Int(200)]);
    }

    #[test]
    fn while_guard_branches_to_body_then_exit() {
        let ir = lower_src("int n;\nvoid main() { while (n > 0) { n = n - 1; } }");
        assert_eq!(ir.loops.len(), 1);
        let head = ir.loops[0].head;
        let IrTerm::Bnz { then_blk, else_blk, .. } = ir.blocks[head].term else {
            panic!("guard must branch, got {:?}", ir.blocks[head].term);
        };
        assert_eq!(then_blk, head + 1, "fallthrough into the body");
        assert!(else_blk > then_blk, "exit comes after the body");
        assert!(matches!(ir.blocks[then_blk].term, IrTerm::Jump(t) if t == head));
    }

    #[test]
    fn widening_chains_collapse_to_one_convert() {
        let ir = lower_src("char c; float f;\nvoid main() { f = f + c; }");
        let converts: Vec<_> = ir.blocks[0]
            .ops
            .iter()
            .filter_map(|op| match op {
                IrOp::Convert { dst, src } => Some((*dst, *src)),
                _ => None,
            })
            .collect();
        assert_eq!(converts.len(), 1, "char widens to float in one step");
        let (dst, src) = converts[0];
        assert_eq!(ir.kind_of(src), Scalar::Char);
        assert_eq!(ir.kind_of(dst), Scalar::Float);
    }

    #[test]
    fn recursion_is_rejected_with_a_depth_error() {
        let prog = check(&parse("int f(int n) { return f(n); }\nvoid main() { f(1); }")
            .expect("parses"))
        .expect("typechecks");
        let err = lower(&prog, &LowerOptions::default()).unwrap_err();
        assert!(matches!(err, FrontendError::CallDepth { .. }), "got {err}");
    }

    #[test]
    fn inlined_calls_fold_and_run() {
        let trace = baseline(
            "int c;\nint add(int a, int b) { return a + b; }\nvoid main() { c = add(1, 2); }",
            &Inputs::new(),
        )
        .expect("runs");
        assert_eq!(trace.outputs["c"], vec![Imm::Int(3)]);
    }

    #[test]
    fn memory_locals_become_internal_symbols() {
        let ir = lower_src("void main() { int xs[2]; xs[0] = 1; xs[1] = 2; }");
        let hidden: Vec<_> =
            ir.symbols.iter().filter(|s| s.is_internal()).map(|s| s.name.clone()).collect();
        assert_eq!(hidden.len(), 1, "one spilled array, got {hidden:?}");
        assert!(hidden[0].ends_with("_xs"));
        let trace = run_baseline(&ir, &Inputs::new(), &CostTable::default(), &RunConfig::default())
            .expect("runs");
        assert!(trace.outputs.is_empty(), "internal symbols are not outputs");
    }

    #[test]
    fn lowering_is_deterministic() {
        let src = "int a[3] = {5, 6, 7}; int s; float f;
int half(int x) { return x / 2; }
void main() {
  int i;
  for (i = 0; i < 3; i = i + 1) { s = s + a[i]; }
  f = half(s);
}";
        let prog = check(&parse(src).expect("parses")).expect("typechecks");
        let first = lower(&prog, &LowerOptions::default()).expect("lowers");
        let second = lower(&prog, &LowerOptions::default()).expect("lowers");
        assert_eq!(first, second);
    }

    #[test]
    fn lowered_programs_match_the_interpreter() {
        let src = "int a[4] = {3, 1, 4, 1};
int s; float f; double d; double seed; long n; char c;
int scale(int x) { return x * 2 + 1; }
void main() {
  int i;
  for (i = 0; i < 4; i = i + 1) { s = s + a[i]; }
  for (i = 0; i < 20; i = i + 1) { s = s + 1; }
  s = scale(s);
  c = 250; c = c + 10;
  f = s; f = f / 4;
  d = f; d = d * 0.5; d = d + seed;
  n = 123456789L; n = n * 2L;
  if (s > 10) { s = s - 1; } else { s = 0; }
  int* p = &s; *p = *p + 1;
  while (c > 0) { c = c - 1; }
}";
        let mut inputs = Inputs::new();
        inputs.insert("seed".into(), InputVal::Num(1.25));
        let prog = check(&parse(src).expect("parses")).expect("typechecks");
        let want = interpret(&prog, &inputs, &InterpLimits::default()).expect("interprets");
        let trace = baseline(src, &inputs).expect("runs");

        // Independently computed expectations guard against a shared bug.
        assert_eq!(want["s"], vec![Imm::Int(59)]);
        assert_eq!(want["c"], vec![Imm::Char(0)]);
        assert_eq!(want["f"], vec![Imm::Float(14.75)]);
        assert_eq!(want["d"], vec![Imm::Double(8.625)]);
        assert_eq!(want["n"], vec![Imm::Long(246913578)]);

        assert_eq!(trace.outputs.len(), want.len());
        for (name, vals) in &want {
            let got = &trace.outputs[name];
            assert_eq!(got.len(), vals.len(), "arity of `{name}`");
            for (a, b) in got.iter().zip(vals) {
                assert!(a.bits_eq(*b), "`{name}`: baseline {a:?} vs interpreter {b:?}");
            }
        }
    }
}
