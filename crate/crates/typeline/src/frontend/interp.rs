//! Reference interpreter for typed programs.
//!
//! Walks the [`TypedProgram`] directly, with real calls instead of
//! inlining, and shares the ALU, heap, traps, and memory-tag rules with
//! the machine. Lowering is correct exactly when the compiled program
//! and this interpreter produce bit-identical outputs; the lowering
//! property tests enforce that.
//!
//! Memory words keep the type tag they were initialized with. Typed
//! accesses (scalar-datatype arrays and variables) require the tag to
//! match, except that a char word widens into an int read for free;
//! traditional accesses (longs, pointers, struct fields) convert on
//! read and coerce stores to the word's tag. Out-of-range addresses
//! trap. All of this mirrors the executors so a program that strays out
//! of an array fails identically everywhere.

use std::collections::BTreeMap;

use super::ast::BinOp;
use super::types::{
    zero_imm, LocalId, TExpr, TExprKind, TStmt, TypedProgram, ValTy, VarRef,
};
use crate::isa::{BinKind, CmpPred, Imm, Scalar, SdtKind};
use crate::machine::{alu, zero_of, InputVal, Inputs, ObjectHeap, Trap};

/// Interpreter budget; evaluation steps are roughly one per expression
/// node or statement.
#[derive(Debug, Clone, Copy)]
pub struct InterpLimits {
    pub steps: u64,
}

impl Default for InterpLimits {
    fn default() -> Self {
        InterpLimits { steps: 10_000_000 }
    }
}

const MAX_CALL_DEPTH: u32 = 64;

/// Run `main` and return the final value of every global.
pub fn interpret(
    prog: &TypedProgram,
    inputs: &Inputs,
    limits: &InterpLimits,
) -> Result<BTreeMap<String, Vec<Imm>>, Trap> {
    let mem = init_memory(prog, inputs)?;
    let mut it = Interp { p: prog, mem, heap: ObjectHeap::new(), steps: 0, limit: limits.steps };
    it.call(prog.main, Vec::new(), 0)?;
    let mut out = BTreeMap::new();
    for g in &prog.globals {
        let lo = g.addr as usize;
        out.insert(g.name.clone(), it.mem[lo..lo + g.count as usize].to_vec());
    }
    Ok(out)
}

/// Build static memory: initializers, then inputs, then the startup
/// stores that brace-list arrays compile into (so those win).
fn init_memory(p: &TypedProgram, inputs: &Inputs) -> Result<Vec<Imm>, Trap> {
    let mut mem = vec![Imm::Int(0); p.mem_extent as usize];
    for g in &p.globals {
        for (i, v) in g.init.iter().enumerate() {
            mem[g.addr as usize + i] = *v;
        }
    }
    for f in &p.funcs {
        for l in &f.locals {
            if let Some(slot) = l.slot {
                let kind = l.ty.scalar().expect("memory local");
                for i in 0..l.count.unwrap_or(1) {
                    mem[(slot + i) as usize] = zero_of(kind);
                }
            }
        }
    }
    for (name, val) in inputs {
        let g = p
            .globals
            .iter()
            .find(|g| g.name == *name)
            .ok_or_else(|| Trap::UnboundInput(name.clone()))?;
        let kind = g.ty.scalar().expect("global scalar");
        match val {
            InputVal::Num(x) => {
                if g.count != 1 {
                    return Err(Trap::BadInput(format!(
                        "`{name}` is an array of {} elements, got a scalar",
                        g.count
                    )));
                }
                mem[g.addr as usize] = alu::convert(Imm::Double(*x), kind);
            }
            InputVal::Arr(xs) => {
                if xs.len() > g.count as usize {
                    return Err(Trap::BadInput(format!(
                        "`{name}` holds {} elements, got {}",
                        g.count,
                        xs.len()
                    )));
                }
                for (i, x) in xs.iter().enumerate() {
                    mem[g.addr as usize + i] = alu::convert(Imm::Double(*x), kind);
                }
            }
        }
    }
    for g in &p.globals {
        if g.has_list {
            for (i, v) in g.init.iter().enumerate() {
                mem[g.addr as usize + i] = *v;
            }
        }
    }
    Ok(mem)
}

enum Flow {
    Normal,
    Return(Imm),
}

struct Frame {
    func: usize,
    depth: u32,
    locals: Vec<Imm>,
}

struct Interp<'a> {
    p: &'a TypedProgram,
    mem: Vec<Imm>,
    heap: ObjectHeap,
    steps: u64,
    limit: u64,
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

fn alu_trap(e: alu::AluError) -> Trap {
    match e {
        alu::AluError::DivisionByZero => Trap::DivisionByZero,
        other => Trap::BadProgram(other.to_string()),
    }
}

impl<'a> Interp<'a> {
    fn tick(&mut self) -> Result<(), Trap> {
        self.steps += 1;
        if self.steps > self.limit {
            return Err(Trap::RuntimeLimit(self.limit));
        }
        Ok(())
    }

    fn call(&mut self, func: usize, args: Vec<Imm>, depth: u32) -> Result<Imm, Trap> {
        if depth > MAX_CALL_DEPTH {
            return Err(Trap::BadProgram(format!("call depth exceeds {MAX_CALL_DEPTH}")));
        }
        let f = &self.p.funcs[func];
        let mut frame = Frame {
            func,
            depth,
            locals: f.locals.iter().map(|l| zero_imm(l.ty)).collect(),
        };
        for (i, a) in args.into_iter().enumerate() {
            self.write_local(&mut frame, LocalId(i as u32), a);
        }
        match self.exec_stmts(&f.body, &mut frame)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(zero_imm(f.ret)),
        }
    }

    fn write_local(&mut self, frame: &mut Frame, id: LocalId, v: Imm) {
        let l = &self.p.funcs[frame.func].locals[id.0 as usize];
        let kind = l.ty.scalar().expect("scalar local");
        let v = alu::convert(v, kind);
        match l.slot {
            Some(slot) => self.mem[slot as usize] = v,
            None => frame.locals[id.0 as usize] = v,
        }
    }

    fn var_base(&self, frame: &Frame, r: VarRef) -> (u32, ValTy, bool) {
        match r {
            VarRef::Global(g) => {
                let g = self.p.global(g);
                (g.addr, g.ty, true)
            }
            VarRef::Local(l) => {
                let l = &self.p.funcs[frame.func].locals[l.0 as usize];
                (l.slot.unwrap_or(0), l.ty, l.slot.is_some())
            }
        }
    }

    fn read_var(&self, frame: &Frame, r: VarRef) -> Imm {
        match r {
            VarRef::Global(g) => {
                let g = self.p.global(g);
                self.mem[g.addr as usize]
            }
            VarRef::Local(l) => {
                let loc = &self.p.funcs[frame.func].locals[l.0 as usize];
                match loc.slot {
                    Some(slot) => self.mem[slot as usize],
                    None => frame.locals[l.0 as usize],
                }
            }
        }
    }

    fn write_var(&mut self, frame: &mut Frame, r: VarRef, v: Imm) {
        match r {
            VarRef::Global(g) => {
                let g = self.p.global(g);
                let kind = g.ty.scalar().expect("scalar global");
                self.mem[g.addr as usize] = alu::convert(v, kind);
            }
            VarRef::Local(l) => self.write_local(frame, l, v),
        }
    }

    fn check_addr(&self, addr: i64) -> Result<usize, Trap> {
        if addr < 0 || addr as usize >= self.mem.len() {
            return Err(Trap::MemOutOfRange(addr));
        }
        Ok(addr as usize)
    }

    /// Element address of `arr[index]`.
    fn elem_addr(&mut self, frame: &mut Frame, arr: VarRef, index: &TExpr) -> Result<usize, Trap> {
        let (base, _, _) = self.var_base(frame, arr);
        let idx = match alu::convert(self.eval(index, frame)?, Scalar::Int) {
            Imm::Int(x) => x as i64,
            _ => unreachable!("convert to int"),
        };
        self.check_addr(base as i64 + idx)
    }

    /// Typed array accesses demand matching word tags; traditional
    /// (long) arrays convert freely.
    fn read_mem(&self, addr: usize, ty: ValTy, trad_only: bool) -> Result<Imm, Trap> {
        let kind = ty.scalar().expect("scalar element");
        let slot = self.mem[addr];
        match ty.sdt() {
            Some(lane) if !trad_only => {
                if slot.scalar() == kind {
                    Ok(slot)
                } else if let (Imm::Char(c), SdtKind::Int) = (slot, lane) {
                    Ok(Imm::Int(c as i32))
                } else {
                    Err(Trap::TypeMismatch { addr, expected: kind, found: slot.scalar() })
                }
            }
            _ => Ok(alu::convert(slot, kind)),
        }
    }

    fn write_mem(&mut self, addr: usize, ty: ValTy, trad_only: bool, v: Imm) -> Result<(), Trap> {
        let kind = ty.scalar().expect("scalar element");
        let v = alu::convert(v, kind);
        if ty.sdt().is_some() && !trad_only {
            let slot = self.mem[addr];
            if slot.scalar() != v.scalar() {
                return Err(Trap::TypeMismatch { addr, expected: slot.scalar(), found: v.scalar() });
            }
            self.mem[addr] = v;
        } else {
            let slot_kind = self.mem[addr].scalar();
            self.mem[addr] = alu::convert(v, slot_kind);
        }
        Ok(())
    }

    fn var_trad(&self, frame: &Frame, r: VarRef) -> bool {
        match r {
            VarRef::Global(g) => self.p.global(g).trad_only,
            VarRef::Local(l) => self.p.funcs[frame.func].locals[l.0 as usize].trad_only,
        }
    }

    fn exec_stmts(&mut self, stmts: &[TStmt], frame: &mut Frame) -> Result<Flow, Trap> {
        for s in stmts {
            match self.exec_stmt(s, frame)? {
                Flow::Normal => {}
                ret => return Ok(ret),
            }
        }
        Ok(Flow::Normal)
    }

    fn exec_stmt(&mut self, s: &TStmt, frame: &mut Frame) -> Result<Flow, Trap> {
        self.tick()?;
        match s {
            TStmt::AssignVar { var, value } => {
                let v = self.eval(value, frame)?;
                self.write_var(frame, *var, v);
                Ok(Flow::Normal)
            }
            TStmt::AssignIndex { arr, index, value } => {
                let addr = self.elem_addr(frame, *arr, index)?;
                let v = self.eval(value, frame)?;
                let (_, ty, _) = self.var_base(frame, *arr);
                self.write_mem(addr, ty, self.var_trad(frame, *arr), v)?;
                Ok(Flow::Normal)
            }
            TStmt::AssignDeref { ptr, pointee, value } => {
                let addr = match alu::convert(self.eval(ptr, frame)?, Scalar::Long) {
                    Imm::Long(x) => x,
                    _ => unreachable!("convert to long"),
                };
                let addr = self.check_addr(addr)?;
                let v = self.eval(value, frame)?;
                // Pointer stores are traditional: coerce to the word.
                let slot_kind = self.mem[addr].scalar();
                let v = alu::convert(alu::convert(v, *pointee), slot_kind);
                self.mem[addr] = v;
                Ok(Flow::Normal)
            }
            TStmt::If { cond, then_blk, else_blk } => {
                let c = self.eval(cond, frame)?;
                if alu::is_nonzero(c) {
                    self.exec_stmts(then_blk, frame)
                } else {
                    self.exec_stmts(else_blk, frame)
                }
            }
            TStmt::While { cond, body } => loop {
                self.tick()?;
                let c = self.eval(cond, frame)?;
                if !alu::is_nonzero(c) {
                    return Ok(Flow::Normal);
                }
                match self.exec_stmts(body, frame)? {
                    Flow::Normal => {}
                    ret => return Ok(ret),
                }
            },
            TStmt::For { init, cond, step, body } => {
                match self.exec_stmts(init, frame)? {
                    Flow::Normal => {}
                    ret => return Ok(ret),
                }
                loop {
                    self.tick()?;
                    let c = self.eval(cond, frame)?;
                    if !alu::is_nonzero(c) {
                        return Ok(Flow::Normal);
                    }
                    match self.exec_stmts(body, frame)? {
                        Flow::Normal => {}
                        ret => return Ok(ret),
                    }
                    match self.exec_stmts(step, frame)? {
                        Flow::Normal => {}
                        ret => return Ok(ret),
                    }
                }
            }
            TStmt::Return { value, .. } => {
                let v = match value {
                    Some(e) => self.eval(e, frame)?,
                    None => Imm::Int(0),
                };
                Ok(Flow::Return(v))
            }
            TStmt::Delete(e) => {
                let v = self.eval(e, frame)?;
                let handle = match alu::convert(v, Scalar::Int) {
                    Imm::Int(x) => x as u32 as u64,
                    _ => unreachable!("convert to int"),
                };
                self.heap.release(handle)?;
                Ok(Flow::Normal)
            }
            TStmt::Eval(e) => {
                self.eval(e, frame)?;
                Ok(Flow::Normal)
            }
        }
    }

    fn eval(&mut self, e: &TExpr, frame: &mut Frame) -> Result<Imm, Trap> {
        self.tick()?;
        match &e.kind {
            TExprKind::Imm(v) => Ok(*v),
            TExprKind::Read(r) => Ok(self.read_var(frame, *r)),
            TExprKind::ReadIndex { arr, index } => {
                let addr = self.elem_addr(frame, *arr, index)?;
                let (_, ty, _) = self.var_base(frame, *arr);
                self.read_mem(addr, ty, self.var_trad(frame, *arr))
            }
            TExprKind::ReadDeref { ptr, pointee } => {
                let addr = match alu::convert(self.eval(ptr, frame)?, Scalar::Long) {
                    Imm::Long(x) => x,
                    _ => unreachable!("convert to long"),
                };
                let addr = self.check_addr(addr)?;
                Ok(alu::convert(self.mem[addr], *pointee))
            }
            TExprKind::AddrOfVar(r) => {
                let (base, _, in_mem) = self.var_base(frame, *r);
                debug_assert!(in_mem, "addressed variable has a slot");
                Ok(Imm::Long(base as i64))
            }
            TExprKind::AddrOfIndex { arr, index } => {
                let (base, _, _) = self.var_base(frame, *arr);
                let idx = match alu::convert(self.eval(index, frame)?, Scalar::Int) {
                    Imm::Int(x) => x as i64,
                    _ => unreachable!("convert to int"),
                };
                // Address arithmetic does not bounds-check; the deref does.
                Ok(Imm::Long((base as i64).wrapping_add(idx)))
            }
            TExprKind::Convert(inner) => {
                let v = self.eval(inner, frame)?;
                Ok(alu::convert(v, e.ty.scalar().expect("convert target")))
            }
            TExprKind::Bin { op, lhs, rhs } => {
                let kind = e.ty.scalar().expect("arith type");
                let a = alu::convert(self.eval(lhs, frame)?, kind);
                let b = alu::convert(self.eval(rhs, frame)?, kind);
                match op {
                    BinOp::Mod => {
                        // Same expansion the lowering emits: a - (a/b)*b.
                        let q = alu::bin(BinKind::Div, a, b).map_err(alu_trap)?;
                        let m = alu::bin(BinKind::Mul, q, b).map_err(alu_trap)?;
                        alu::bin(BinKind::Sub, a, m).map_err(alu_trap)
                    }
                    _ => alu::bin(bin_kind(*op), a, b).map_err(alu_trap),
                }
            }
            TExprKind::Cmp { pred, cmp_ty, lhs, rhs } => {
                let kind = cmp_ty.scalar().expect("comparison type");
                let a = alu::convert(self.eval(lhs, frame)?, kind);
                let b = alu::convert(self.eval(rhs, frame)?, kind);
                let hit = alu::cmp(cmp_pred(*pred), a, b).map_err(alu_trap)?;
                Ok(Imm::Int(hit as i32))
            }
            TExprKind::Call { func, args } => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.eval(a, frame)?);
                }
                self.call(*func, vals, frame.depth + 1)
            }
            TExprKind::New { elem, count } => {
                let c = alu::convert(self.eval(count, frame)?, Scalar::Int);
                // Bytes are computed in int arithmetic, as lowered code does.
                let bytes = alu::bin(BinKind::Mul, c, Imm::Int(elem.size_bytes() as i32))
                    .map_err(alu_trap)?;
                let bytes = match bytes {
                    Imm::Int(x) => x as i64,
                    _ => unreachable!("int multiply"),
                };
                let handle = self.heap.alloc(bytes)?;
                Ok(Imm::Int(handle as i32))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parser::parse;
    use crate::frontend::types::check;
    use crate::machine::HeapError;

    fn run(src: &str, inputs: &Inputs) -> Result<BTreeMap<String, Vec<Imm>>, Trap> {
        let prog = check(&parse(src).expect("parses")).expect("typechecks");
        interpret(&prog, inputs, &InterpLimits::default())
    }

    fn run_ok(src: &str) -> BTreeMap<String, Vec<Imm>> {
        run(src, &Inputs::new()).expect("runs")
    }

    #[test]
    fn loops_and_arithmetic_accumulate() {
        let out = run_ok(
            "int s;\nvoid main() { int i; for (i = 1; i <= 10; i = i + 1) { s = s + i; } }",
        );
        assert_eq!(out["s"], vec![Imm::Int(55)]);
    }

    #[test]
    fn calls_pass_arguments_and_missing_return_yields_zero() {
        let out = run_ok(
            "int r; int s;\nint add(int a, int b) { return a + b; }\n\
             int nothing() { int x = 9; }\n\
             void main() { r = add(2, 3); s = nothing(); }",
        );
        assert_eq!(out["r"], vec![Imm::Int(5)]);
        assert_eq!(out["s"], vec![Imm::Int(0)]);
    }

    #[test]
    fn char_arithmetic_wraps_at_a_byte() {
        let out = run_ok("char c;\nvoid main() { c = 200; c = c + 100; }");
        assert_eq!(out["c"], vec![Imm::Char(44)]);
    }

    #[test]
    fn pointer_stores_write_through_addresses() {
        let out = run_ok(
            "int x; int y;\nvoid main() { int* p = &x; *p = 7; p = &y; *p = 9; }",
        );
        assert_eq!(out["x"], vec![Imm::Int(7)]);
        assert_eq!(out["y"], vec![Imm::Int(9)]);
    }

    #[test]
    fn heap_release_is_tracked_and_double_free_traps() {
        let out = run_ok("int h;\nvoid main() { h = new float[16]; delete h; }");
        assert_eq!(out["h"], vec![Imm::Int(1)]);
        let err = run(
            "int h;\nvoid main() { h = new float[16]; delete h; delete h; }",
            &Inputs::new(),
        )
        .unwrap_err();
        assert!(matches!(err, Trap::Heap(HeapError::DoubleFree(1))));
    }

    #[test]
    fn division_by_zero_traps() {
        let err =
            run("int a;\nvoid main() { int z = 0; a = 7 / z; }", &Inputs::new()).unwrap_err();
        assert!(matches!(err, Trap::DivisionByZero));
    }

    #[test]
    fn inputs_bind_to_globals_and_convert() {
        let mut inputs = Inputs::new();
        inputs.insert("x".into(), InputVal::Num(3.7));
        let out = run("int x;\nvoid main() { }", &inputs).expect("runs");
        assert_eq!(out["x"], vec![Imm::Int(3)]);

        let mut unknown = Inputs::new();
        unknown.insert("q".into(), InputVal::Num(1.0));
        let err = run("int x;\nvoid main() { }", &unknown).unwrap_err();
        assert!(matches!(err, Trap::UnboundInput(n) if n == "q"));

        let mut shape = Inputs::new();
        shape.insert("a".into(), InputVal::Num(1.0));
        let err = run("int a[2];\nvoid main() { }", &shape).unwrap_err();
        assert!(matches!(err, Trap::BadInput(_)));
    }

    #[test]
    fn brace_lists_override_inputs() {
        let mut inputs = Inputs::new();
        inputs.insert("a".into(), InputVal::Arr(vec![1.0, 2.0]));
        let out = run("int a[2] = {7, 8};\nvoid main() { }", &inputs).expect("runs");
        assert_eq!(out["a"], vec![Imm::Int(7), Imm::Int(8)]);
    }

    #[test]
    fn runaway_loop_hits_step_limit() {
        let prog = check(&parse("void main() { while (1) { } }").expect("parses"))
            .expect("typechecks");
        let err = interpret(&prog, &Inputs::new(), &InterpLimits { steps: 1000 }).unwrap_err();
        assert!(matches!(err, Trap::RuntimeLimit(1000)));
    }

    #[test]
    fn out_of_range_index_traps() {
        let err =
            run("int a[3];\nvoid main() { int i = 5; a[i] = 1; }", &Inputs::new()).unwrap_err();
        assert!(matches!(err, Trap::MemOutOfRange(5)));
    }

    #[test]
    fn array_accesses_check_element_tags() {
        // `a[2]` lands on the first word of `d`, which holds a double.
        let err = run(
            "int a[2]; double d[2]; int r;\nvoid main() { int i = 2; r = a[i]; }",
            &Inputs::new(),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Trap::TypeMismatch { addr: 2, expected: Scalar::Int, found: Scalar::Double }
        ));
    }
}
