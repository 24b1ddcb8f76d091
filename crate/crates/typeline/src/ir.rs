//! Typed three-address intermediate representation.
//!
//! The frontend lowers MiniC to this form; the compiler schedules it
//! into clusters and the baseline executor runs it directly, one op per
//! issue. Both consumers share [`route`] and [`scalar_cost`], so the
//! clustering compiler and the baseline always agree on where an op
//! runs and what it costs when issued alone. That symmetry is what
//! makes the cycle-dominance guarantee provable rather than empirical.
//!
//! Conventions:
//!
//! * Virtual registers are written at most once per block. Mutable
//!   variables that cross blocks get a home vreg written once per
//!   assigning block; expression temporaries are always fresh.
//! * Every implicit conversion is an explicit [`IrOp::Convert`], one
//!   per consuming operation and source register, so a later fusion
//!   pass can absorb each convert into exactly one consumer.
//! * Long, enum, pointer, and struct-field values live in traditional
//!   virtual registers (`VregInfo::trad`), which never map to lanes.

use crate::isa::{
    BinKind, CmpPred, CostTable, GlobalSym, Imm, Opcode, Scalar, SdtKind,
};

/// Virtual register id, an index into [`IrProgram::vregs`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VReg(pub u32);

impl VReg {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Declared properties of one virtual register.
#[derive(Debug, Clone, PartialEq)]
pub struct VregInfo {
    pub kind: Scalar,
    /// Traditional-lane value (long, enum, pointer, struct field, or a
    /// value forced off the typed lanes). Never allocated to a lane.
    pub trad: bool,
    /// Source variable name, for diagnostics; temporaries have none.
    pub name: Option<String>,
}

/// Operand of an IR op: a virtual register or a typed immediate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Val {
    Reg(VReg),
    Imm(Imm),
}

impl Val {
    pub fn as_reg(self) -> Option<VReg> {
        match self {
            Val::Reg(r) => Some(r),
            Val::Imm(_) => None,
        }
    }
}

/// Symbol id, an index into [`IrProgram::symbols`].
pub type SymId = usize;

/// One three-address operation.
#[derive(Debug, Clone, PartialEq)]
pub enum IrOp {
    /// Register copy or immediate materialization.
    Move { dst: VReg, src: Val },
    /// Read a static symbol, optionally indexed by an int register.
    Load { dst: VReg, sym: SymId, index: Option<VReg> },
    /// Write a static symbol, optionally indexed by an int register.
    Store { src: VReg, sym: SymId, index: Option<VReg> },
    Bin { op: BinKind, dst: VReg, lhs: Val, rhs: Val },
    /// Comparison producing 1/0 in `dst`. Guard compares keep `dst` in
    /// the operand lane; value-context float/double compares give `dst`
    /// kind int, which routes them traditional.
    Cmp { pred: CmpPred, dst: VReg, lhs: Val, rhs: Val },
    /// Explicit widening conversion; kinds come from the vreg table.
    Convert { dst: VReg, src: VReg },
    /// Read through a pointer register.
    LoadInd { dst: VReg, addr: VReg },
    /// Write through a pointer register.
    StoreInd { src: VReg, addr: VReg },
    /// Address of a static symbol.
    AddrOf { dst: VReg, sym: SymId },
    /// Heap allocation: `size` bytes from an int register, fresh handle
    /// into `dst` (int register).
    ObjNew { dst: VReg, size: VReg },
    /// Heap release of the handle in an int register.
    ObjRelease { src: VReg },
}

impl IrOp {
    /// The register this op writes, if any.
    pub fn dst(&self) -> Option<VReg> {
        match self {
            IrOp::Move { dst, .. }
            | IrOp::Load { dst, .. }
            | IrOp::Bin { dst, .. }
            | IrOp::Cmp { dst, .. }
            | IrOp::Convert { dst, .. }
            | IrOp::LoadInd { dst, .. }
            | IrOp::AddrOf { dst, .. }
            | IrOp::ObjNew { dst, .. } => Some(*dst),
            IrOp::Store { .. } | IrOp::StoreInd { .. } | IrOp::ObjRelease { .. } => None,
        }
    }

    /// Registers this op reads, in operand order.
    pub fn reads(&self) -> Vec<VReg> {
        let mut out = Vec::new();
        let mut val = |v: &Val| {
            if let Val::Reg(r) = v {
                out.push(*r);
            }
        };
        match self {
            IrOp::Move { src, .. } => val(src),
            IrOp::Load { index, .. } => out.extend(index.iter().copied()),
            IrOp::Store { src, index, .. } => {
                out.push(*src);
                out.extend(index.iter().copied());
            }
            IrOp::Bin { lhs, rhs, .. } | IrOp::Cmp { lhs, rhs, .. } => {
                val(lhs);
                val(rhs);
            }
            IrOp::Convert { src, .. } => out.push(*src),
            IrOp::LoadInd { addr, .. } => out.push(*addr),
            IrOp::StoreInd { src, addr } => {
                out.push(*src);
                out.push(*addr);
            }
            IrOp::AddrOf { .. } => {}
            IrOp::ObjNew { size, .. } => out.push(*size),
            IrOp::ObjRelease { src } => out.push(*src),
        }
        out
    }
}

/// Block terminator over block indexes.
#[derive(Debug, Clone, PartialEq)]
pub enum IrTerm {
    Halt,
    Jump(usize),
    /// Branch to `then_blk` when `cond` is nonzero, else `else_blk`.
    Bnz { cond: VReg, then_blk: usize, else_blk: usize },
}

/// A straight-line block with its loop-nesting depth.
#[derive(Debug, Clone, PartialEq)]
pub struct IrBlock {
    pub label: String,
    pub ops: Vec<IrOp>,
    pub term: IrTerm,
    pub depth: u32,
}

impl IrBlock {
    pub fn new(label: impl Into<String>, depth: u32) -> IrBlock {
        IrBlock { label: label.into(), ops: Vec::new(), term: IrTerm::Halt, depth }
    }
}

/// Contiguous block range `head..=tail` forming one loop, used to
/// extend live intervals across back edges during register allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoopExtent {
    pub head: usize,
    pub tail: usize,
}

/// A lowered program: symbols, virtual registers, and blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IrProgram {
    pub symbols: Vec<GlobalSym>,
    pub vregs: Vec<VregInfo>,
    pub blocks: Vec<IrBlock>,
    pub loops: Vec<LoopExtent>,
}

impl IrProgram {
    pub fn new() -> IrProgram {
        IrProgram::default()
    }

    pub fn add_vreg(&mut self, kind: Scalar, trad: bool, name: Option<String>) -> VReg {
        self.vregs.push(VregInfo { kind, trad, name });
        VReg(self.vregs.len() as u32 - 1)
    }

    /// Fresh typed-lane temporary.
    pub fn lane_vreg(&mut self, kind: SdtKind) -> VReg {
        self.add_vreg(Scalar::from(kind), false, None)
    }

    /// Fresh traditional-lane temporary.
    pub fn trad_vreg(&mut self, kind: Scalar) -> VReg {
        self.add_vreg(kind, true, None)
    }

    pub fn info(&self, r: VReg) -> &VregInfo {
        &self.vregs[r.index()]
    }

    pub fn kind_of(&self, r: VReg) -> Scalar {
        self.vregs[r.index()].kind
    }

    pub fn is_trad(&self, r: VReg) -> bool {
        self.vregs[r.index()].trad
    }

    /// Lane of a typed vreg; `None` for traditional vregs.
    pub fn lane_of(&self, r: VReg) -> Option<SdtKind> {
        let info = self.info(r);
        if info.trad {
            None
        } else {
            info.kind.sdt()
        }
    }

    fn val_kind(&self, v: Val) -> Scalar {
        match v {
            Val::Reg(r) => self.kind_of(r),
            Val::Imm(i) => i.scalar(),
        }
    }

    fn val_is_lane(&self, v: Val) -> bool {
        match v {
            Val::Reg(r) => !self.is_trad(r) && self.kind_of(r).sdt().is_some(),
            Val::Imm(i) => i.scalar().sdt().is_some(),
        }
    }

    /// Structural sanity: indexes in range, one write per vreg per
    /// block, conversions widen. A read that precedes the block's own
    /// write is allowed only for home vregs (ones also written in some
    /// other block); it sees the value flowing in from predecessors.
    pub fn check(&self) -> Result<(), String> {
        let nv = self.vregs.len() as u32;
        let reg_ok = |r: VReg| r.0 < nv;
        let mut writing_blocks: Vec<u32> = vec![0; self.vregs.len()];
        for block in &self.blocks {
            let mut seen: Vec<VReg> = Vec::new();
            for op in &block.ops {
                if let Some(d) = op.dst() {
                    if reg_ok(d) && !seen.contains(&d) {
                        seen.push(d);
                        writing_blocks[d.index()] += 1;
                    }
                }
            }
        }
        for (bi, block) in self.blocks.iter().enumerate() {
            let mut written: Vec<VReg> = Vec::new();
            for (oi, op) in block.ops.iter().enumerate() {
                for r in op.reads() {
                    if !reg_ok(r) {
                        return Err(format!("block {bi} op {oi}: vreg {} out of range", r.0));
                    }
                }
                if let IrOp::Load { sym, .. }
                | IrOp::Store { sym, .. }
                | IrOp::AddrOf { sym, .. } = op
                {
                    if *sym >= self.symbols.len() {
                        return Err(format!("block {bi} op {oi}: symbol {sym} out of range"));
                    }
                }
                if let IrOp::Convert { dst, src } = op {
                    let (d, s) = (self.info(*dst), self.info(*src));
                    if !d.trad && !s.trad && d.kind == s.kind {
                        return Err(format!(
                            "block {bi} op {oi}: conversion between equal types"
                        ));
                    }
                }
                if let Some(d) = op.dst() {
                    if !reg_ok(d) {
                        return Err(format!("block {bi} op {oi}: vreg {} out of range", d.0));
                    }
                    if written.contains(&d) {
                        return Err(format!(
                            "block {bi} op {oi}: vreg {} written twice in one block",
                            d.0
                        ));
                    }
                    if writing_blocks[d.index()] == 1 {
                        for (pi, prev) in block.ops[..oi].iter().enumerate() {
                            if prev.reads().contains(&d) {
                                return Err(format!(
                                    "block {bi} op {oi}: vreg {} read at op {pi} before its write",
                                    d.0
                                ));
                            }
                        }
                    }
                    written.push(d);
                }
            }
            match &block.term {
                IrTerm::Halt => {}
                IrTerm::Jump(t) => {
                    if *t >= self.blocks.len() {
                        return Err(format!("block {bi}: jump target {t} out of range"));
                    }
                }
                IrTerm::Bnz { cond, then_blk, else_blk } => {
                    if !reg_ok(*cond) {
                        return Err(format!("block {bi}: branch condition out of range"));
                    }
                    if *then_blk >= self.blocks.len() || *else_blk >= self.blocks.len() {
                        return Err(format!("block {bi}: branch target out of range"));
                    }
                }
            }
        }
        for l in &self.loops {
            if l.head > l.tail || l.tail >= self.blocks.len() {
                return Err(format!("loop extent {}..={} out of range", l.head, l.tail));
            }
        }
        Ok(())
    }
}

/// Where an op executes when issued alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// A typed lane instruction in lane `.0`.
    Typed(SdtKind),
    /// A supported widening conversion, candidate for fusion into its
    /// consumer as a cross-lane source operand.
    Convert { from: SdtKind, to: SdtKind },
    /// Object-memory instruction (`OBJ.n` / `OBJ.r`).
    Obj,
    /// Traditional fallback lane.
    Trad,
}

/// Decide the execution route of one op. Shared by the compiler and
/// the baseline cost model so the two always agree.
pub fn route(prog: &IrProgram, op: &IrOp) -> Route {
    match op {
        IrOp::Move { dst, src } => {
            let d = prog.info(*dst);
            let lane = match (d.trad, d.kind.sdt()) {
                (false, Some(k)) => k,
                _ => return Route::Trad,
            };
            let same_kind = prog.val_kind(*src) == d.kind && prog.val_is_lane(*src);
            if same_kind {
                Route::Typed(lane)
            } else {
                Route::Trad
            }
        }
        IrOp::Load { dst, sym, index } => {
            typed_mem_route(prog, *dst, *sym, *index)
        }
        IrOp::Store { src, sym, index } => {
            typed_mem_route(prog, *src, *sym, *index)
        }
        IrOp::Bin { op, dst, lhs, rhs } => {
            let d = prog.info(*dst);
            let lane = match (d.trad, d.kind.sdt()) {
                (false, Some(k)) => k,
                _ => return Route::Trad,
            };
            if typed_bin_opcode(*op, lane).is_none() {
                return Route::Trad;
            }
            for v in [lhs, rhs] {
                if prog.val_kind(*v) != d.kind || !prog.val_is_lane(*v) {
                    return Route::Trad;
                }
            }
            Route::Typed(lane)
        }
        IrOp::Cmp { pred, dst, lhs, rhs } => {
            let d = prog.info(*dst);
            let dk = match (d.trad, d.kind.sdt()) {
                (false, Some(k)) => k,
                _ => return Route::Trad,
            };
            let lk = prog.val_kind(*lhs);
            if lk != prog.val_kind(*rhs)
                || !prog.val_is_lane(*lhs)
                || !prog.val_is_lane(*rhs)
            {
                return Route::Trad;
            }
            match lk.sdt() {
                Some(k) if k == dk && typed_cmp_opcode(*pred, k).is_some() => Route::Typed(k),
                _ => Route::Trad,
            }
        }
        IrOp::Convert { dst, src } => {
            let (d, s) = (prog.info(*dst), prog.info(*src));
            match (d.trad, d.kind.sdt(), s.trad, s.kind.sdt()) {
                (false, Some(to), false, Some(from)) if from < to => {
                    Route::Convert { from, to }
                }
                _ => Route::Trad,
            }
        }
        IrOp::ObjNew { .. } | IrOp::ObjRelease { .. } => Route::Obj,
        IrOp::LoadInd { .. } | IrOp::StoreInd { .. } | IrOp::AddrOf { .. } => Route::Trad,
    }
}

fn typed_mem_route(prog: &IrProgram, data: VReg, sym: SymId, index: Option<VReg>) -> Route {
    let info = prog.info(data);
    let lane = match (info.trad, info.kind.sdt()) {
        (false, Some(k)) => k,
        _ => return Route::Trad,
    };
    if prog.symbols[sym].kind != info.kind {
        return Route::Trad;
    }
    if let Some(idx) = index {
        if prog.is_trad(idx) || prog.kind_of(idx) != Scalar::Int {
            return Route::Trad;
        }
    }
    Route::Typed(lane)
}

/// Typed opcode implementing a binary op in a lane, if the lane's
/// execution unit supports it.
pub fn typed_bin_opcode(op: BinKind, lane: SdtKind) -> Option<Opcode> {
    use BinKind::*;
    use SdtKind::*;
    Some(match (op, lane) {
        (Add, Int) => Opcode::AddIn,
        (Sub, Int) => Opcode::SubIn,
        (Mul, Int) => Opcode::MulIn,
        (Div, Int) => Opcode::DivIn,
        (And, Int) => Opcode::AndIn,
        (Or, Int) => Opcode::OrIn,
        (Xor, Int) => Opcode::XorIn,
        (Nor, Int) => Opcode::NorIn,
        (Xnor, Int) => Opcode::XnorIn,
        (Sra, Int) => Opcode::SraIn,
        (Srl, Int) => Opcode::SrlIn,
        (Add, Float) => Opcode::AddFt,
        (Sub, Float) => Opcode::SubFt,
        (Mul, Float) => Opcode::MulFt,
        (Div, Float) => Opcode::DivFt,
        (Add, Double) => Opcode::AddDb,
        (Sub, Double) => Opcode::SubDb,
        (Mul, Double) => Opcode::MulDb,
        (Add, Char) => Opcode::AddCh,
        (Sub, Char) => Opcode::SubCh,
        (And, Char) => Opcode::AndCh,
        (Or, Char) => Opcode::OrCh,
        (Xor, Char) => Opcode::XorCh,
        (Nor, Char) => Opcode::NorCh,
        (Xnor, Char) => Opcode::XnorCh,
        _ => return None,
    })
}

/// Typed opcode implementing a comparison in a lane. Int and char
/// lanes have fixed-predicate opcodes (no not-equal or greater-than;
/// the frontend normalizes those away); float and double lanes take
/// the predicate as a mode operand.
pub fn typed_cmp_opcode(pred: CmpPred, lane: SdtKind) -> Option<Opcode> {
    use CmpPred::*;
    use SdtKind::*;
    Some(match (pred, lane) {
        (Eq, Int) => Opcode::CmpeIn,
        (Ge, Int) => Opcode::CmpegIn,
        (Le, Int) => Opcode::CmpesIn,
        (Lt, Int) => Opcode::CmpsIn,
        (Eq, Char) => Opcode::CmpeCh,
        (Ge, Char) => Opcode::CmpegCh,
        (Le, Char) => Opcode::CmpesCh,
        (Lt, Char) => Opcode::CmpsCh,
        (_, Float) => Opcode::CmpFt,
        (_, Double) => Opcode::CmpDb,
        _ => return None,
    })
}

fn typed_lane_opcode(role: &IrOp, lane: SdtKind) -> Opcode {
    use SdtKind::*;
    match role {
        IrOp::Load { .. } => match lane {
            Int => Opcode::LdIn,
            Float => Opcode::LdFt,
            Double => Opcode::LdDb,
            Char => Opcode::LdCh,
        },
        IrOp::Store { .. } => match lane {
            Int => Opcode::StIn,
            Float => Opcode::StFt,
            Double => Opcode::StDb,
            Char => Opcode::StCh,
        },
        IrOp::Move { .. } => match lane {
            Int => Opcode::MovIn,
            Float => Opcode::MovFt,
            Double => Opcode::MovDb,
            Char => Opcode::MovCh,
        },
        other => unreachable!("no fixed lane opcode for {other:?}"),
    }
}

/// Machine opcode for an op that routes [`Route::Typed`].
pub fn typed_opcode(prog: &IrProgram, op: &IrOp) -> Option<Opcode> {
    match route(prog, op) {
        Route::Typed(lane) => Some(match op {
            IrOp::Move { .. } | IrOp::Load { .. } | IrOp::Store { .. } => {
                typed_lane_opcode(op, lane)
            }
            IrOp::Bin { op: kind, .. } => typed_bin_opcode(*kind, lane).expect("routed typed"),
            IrOp::Cmp { pred, .. } => typed_cmp_opcode(*pred, lane).expect("routed typed"),
            _ => unreachable!("route gave Typed for {op:?}"),
        }),
        _ => None,
    }
}

/// Opcode whose table entry anchors the traditional-lane cost of an
/// op: the traditional lane charges the equivalent typed cost plus the
/// configured overhead.
pub fn trad_base_opcode(prog: &IrProgram, op: &IrOp) -> Opcode {
    match op {
        IrOp::Move { .. } | IrOp::AddrOf { .. } => Opcode::MovIn,
        IrOp::Load { .. } | IrOp::LoadInd { .. } => Opcode::LdIn,
        IrOp::Store { .. } | IrOp::StoreInd { .. } => Opcode::StIn,
        IrOp::Bin { op: kind, dst, .. } => match kind {
            BinKind::Add => Opcode::AddIn,
            BinKind::Sub => Opcode::SubIn,
            BinKind::Mul => Opcode::MulIn,
            BinKind::Div => match prog.kind_of(*dst) {
                Scalar::Float | Scalar::Double => Opcode::DivFt,
                _ => Opcode::DivIn,
            },
            BinKind::And => Opcode::AndIn,
            BinKind::Or => Opcode::OrIn,
            BinKind::Xor => Opcode::XorIn,
            BinKind::Nor => Opcode::NorIn,
            BinKind::Xnor => Opcode::XnorIn,
            BinKind::Sra => Opcode::SraIn,
            BinKind::Srl => Opcode::SrlIn,
        },
        IrOp::Cmp { .. } => Opcode::CmpeIn,
        IrOp::Convert { .. } => Opcode::Conv,
        IrOp::ObjNew { .. } => Opcode::ObjN,
        IrOp::ObjRelease { .. } => Opcode::ObjR,
    }
}

/// Cycles one op costs when issued alone: typed ops at their typed
/// cost, supported conversions at the CONV cost, object ops at their
/// table cost, everything else at the traditional base plus overhead.
pub fn scalar_cost(prog: &IrProgram, op: &IrOp, table: &CostTable) -> u32 {
    match route(prog, op) {
        Route::Typed(_) => table.cost(typed_opcode(prog, op).expect("typed route")),
        Route::Convert { .. } => table.cost(Opcode::Conv),
        Route::Obj => match op {
            IrOp::ObjNew { .. } => table.cost(Opcode::ObjN),
            _ => table.cost(Opcode::ObjR),
        },
        Route::Trad => table.cost(trad_base_opcode(prog, op)) + table.traditional_overhead,
    }
}

/// Baseline cost of a whole block: the sum of its ops' scalar costs.
/// Terminators cost nothing on either side.
pub fn block_baseline_cost(prog: &IrProgram, block: &IrBlock, table: &CostTable) -> u64 {
    block.ops.iter().map(|op| scalar_cost(prog, op, table) as u64).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(name: &str, kind: Scalar, addr: u32) -> GlobalSym {
        GlobalSym { name: name.into(), kind, addr, count: 1, init: None }
    }

    /// IR analogue of the four-load/add/divide showcase block.
    fn showcase() -> (IrProgram, usize) {
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
        (p, 0)
    }

    #[test]
    fn showcase_block_is_well_formed() {
        let (p, _) = showcase();
        p.check().expect("well formed");
    }

    #[test]
    fn routes_match_lane_rules() {
        let mut p = IrProgram::new();
        p.symbols.push(sym("g", Scalar::Long, 0));
        let i1 = p.lane_vreg(SdtKind::Int);
        let i2 = p.lane_vreg(SdtKind::Int);
        let i3 = p.lane_vreg(SdtKind::Int);
        let d1 = p.lane_vreg(SdtKind::Double);
        let d2 = p.lane_vreg(SdtKind::Double);
        let d3 = p.lane_vreg(SdtKind::Double);
        let c1 = p.lane_vreg(SdtKind::Char);
        let c2 = p.lane_vreg(SdtKind::Char);
        let c3 = p.lane_vreg(SdtKind::Char);
        let f1 = p.lane_vreg(SdtKind::Float);
        let f2 = p.lane_vreg(SdtKind::Float);
        let l1 = p.trad_vreg(Scalar::Long);
        let l2 = p.trad_vreg(Scalar::Long);
        let l3 = p.trad_vreg(Scalar::Long);

        let add = IrOp::Bin { op: BinKind::Add, dst: i3, lhs: Val::Reg(i1), rhs: Val::Reg(i2) };
        assert_eq!(route(&p, &add), Route::Typed(SdtKind::Int));

        let ddiv = IrOp::Bin { op: BinKind::Div, dst: d3, lhs: Val::Reg(d1), rhs: Val::Reg(d2) };
        assert_eq!(route(&p, &ddiv), Route::Trad);

        let cmul = IrOp::Bin { op: BinKind::Mul, dst: c3, lhs: Val::Reg(c1), rhs: Val::Reg(c2) };
        assert_eq!(route(&p, &cmul), Route::Trad);

        let ladd = IrOp::Bin { op: BinKind::Add, dst: l3, lhs: Val::Reg(l1), rhs: Val::Reg(l2) };
        assert_eq!(route(&p, &ladd), Route::Trad);

        let cvt = IrOp::Convert { dst: f1, src: i1 };
        assert_eq!(route(&p, &cvt), Route::Convert { from: SdtKind::Int, to: SdtKind::Float });

        let widen = IrOp::Convert { dst: i3, src: c1 };
        assert_eq!(route(&p, &widen), Route::Convert { from: SdtKind::Char, to: SdtKind::Int });

        let to_long = IrOp::Convert { dst: l1, src: i1 };
        assert_eq!(route(&p, &to_long), Route::Trad);

        let guard_cmp =
            IrOp::Cmp { pred: CmpPred::Lt, dst: f2, lhs: Val::Reg(f1), rhs: Val::Imm(Imm::Float(0.0)) };
        assert_eq!(route(&p, &guard_cmp), Route::Typed(SdtKind::Float));

        let value_cmp =
            IrOp::Cmp { pred: CmpPred::Lt, dst: i3, lhs: Val::Reg(f1), rhs: Val::Imm(Imm::Float(0.0)) };
        assert_eq!(route(&p, &value_cmp), Route::Trad);

        let gt_cmp = IrOp::Cmp { pred: CmpPred::Gt, dst: i3, lhs: Val::Reg(i1), rhs: Val::Reg(i2) };
        assert_eq!(route(&p, &gt_cmp), Route::Trad);

        let long_load = IrOp::Load { dst: l2, sym: 0, index: None };
        assert_eq!(route(&p, &long_load), Route::Trad);

        let addr = IrOp::AddrOf { dst: l3, sym: 0 };
        assert_eq!(route(&p, &addr), Route::Trad);

        let alloc = IrOp::ObjNew { dst: i3, size: i1 };
        assert_eq!(route(&p, &alloc), Route::Obj);
    }

    #[test]
    fn scalar_costs_follow_routes() {
        let table = CostTable::default();
        let mut p = IrProgram::new();
        p.symbols.push(sym("x", Scalar::Int, 0));
        p.symbols.push(sym("l", Scalar::Long, 1));
        let i1 = p.lane_vreg(SdtKind::Int);
        let f1 = p.lane_vreg(SdtKind::Float);
        let d1 = p.lane_vreg(SdtKind::Double);
        let d2 = p.lane_vreg(SdtKind::Double);
        let d3 = p.lane_vreg(SdtKind::Double);
        let l1 = p.trad_vreg(Scalar::Long);

        let ld = IrOp::Load { dst: i1, sym: 0, index: None };
        assert_eq!(scalar_cost(&p, &ld, &table), 3);

        let trad_ld = IrOp::Load { dst: l1, sym: 1, index: None };
        assert_eq!(scalar_cost(&p, &trad_ld, &table), 5);

        let cvt = IrOp::Convert { dst: f1, src: i1 };
        assert_eq!(scalar_cost(&p, &cvt, &table), 1);

        let ddiv = IrOp::Bin { op: BinKind::Div, dst: d3, lhs: Val::Reg(d1), rhs: Val::Reg(d2) };
        assert_eq!(scalar_cost(&p, &ddiv, &table), 14);

        let alloc = IrOp::ObjNew { dst: i1, size: i1 };
        assert_eq!(scalar_cost(&p, &alloc, &table), 10);
    }

    #[test]
    fn showcase_baseline_costs() {
        let (p, bi) = showcase();
        let table = CostTable::default();
        assert_eq!(block_baseline_cost(&p, &p.blocks[bi], &table), 35);
        let region: u64 = p.blocks[bi]
            .ops
            .iter()
            .filter(|op| !matches!(op, IrOp::Store { .. }))
            .map(|op| scalar_cost(&p, op, &table) as u64)
            .sum();
        assert_eq!(region, 26);
    }

    #[test]
    fn check_rejects_double_write() {
        let mut p = IrProgram::new();
        let v = p.lane_vreg(SdtKind::Int);
        let mut b = IrBlock::new("entry", 0);
        b.ops.push(IrOp::Move { dst: v, src: Val::Imm(Imm::Int(1)) });
        b.ops.push(IrOp::Move { dst: v, src: Val::Imm(Imm::Int(2)) });
        p.blocks.push(b);
        assert!(p.check().unwrap_err().contains("written twice"));
    }

    #[test]
    fn check_rejects_read_before_write() {
        let mut p = IrProgram::new();
        let a = p.lane_vreg(SdtKind::Int);
        let b = p.lane_vreg(SdtKind::Int);
        let mut blk = IrBlock::new("entry", 0);
        blk.ops.push(IrOp::Move { dst: b, src: Val::Reg(a) });
        blk.ops.push(IrOp::Move { dst: a, src: Val::Imm(Imm::Int(1)) });
        p.blocks.push(blk);
        assert!(p.check().unwrap_err().contains("before its write"));
    }

    #[test]
    fn check_rejects_identity_conversion() {
        let mut p = IrProgram::new();
        let a = p.lane_vreg(SdtKind::Float);
        let b = p.lane_vreg(SdtKind::Float);
        let mut blk = IrBlock::new("entry", 0);
        blk.ops.push(IrOp::Convert { dst: b, src: a });
        p.blocks.push(blk);
        assert!(p.check().unwrap_err().contains("equal types"));
    }
}
