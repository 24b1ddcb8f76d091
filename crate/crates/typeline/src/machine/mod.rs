//! Cycle-accurate simulator for the four-lane machine.
//!
//! [`run`] executes an assembled [`Program`]: consecutive typed
//! instructions sharing a cluster tag issue together (a load cluster
//! at one member's cost, an op cluster at its widest member's cost
//! plus the conversion cost when a CONV rides along), everything else
//! issues alone. [`run_baseline`] executes the untransformed IR one op
//! per issue for comparison. Both executors share the ALU, the object
//! heap, memory initialization, and output extraction, so a correct
//! compilation is bit-identical to its baseline.
//!
//! Grouping is permissive by construction: a tagged group that is not
//! actually issuable (malformed shape, parallel or vector mode off, a
//! member's line disabled) degrades to per-member scalar issues rather
//! than trapping. Scalar ops on a disabled line re-route to the
//! traditional lane at its overhead and are recorded as miss-handled.
//! Member effects inside an issued cluster use pre-read semantics: all
//! inputs are read before any output is written, so issue order inside
//! a group cannot matter. The validator, not the simulator, is the
//! authority on cluster legality.

pub mod alu;
mod baseline;
mod heap;
mod trace;

pub use baseline::run_baseline;
pub use heap::{HeapError, ObjectHeap};
pub use trace::{ExecTrace, IssueKind, IssueRecord};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::isa::{
    conversion_supported, operand_slots, ConvMask, CostTable, GlobalSym, Imm, Instruction, Item,
    MemRef, Opcode, Operand, Program, RegRef, Role, Scalar, SdtKind, Slot, TradAddr, TradOp,
    TradReg, TradVal, CondRef, Terminator, REGS_PER_LANE,
};

/// Reasons a run aborts.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Trap {
    #[error("integer division by zero")]
    DivisionByZero,
    #[error("conversion from {} to {} is disabled by the conversion mask", .from.name(), .to.name())]
    ConversionDisabled { from: SdtKind, to: SdtKind },
    #[error("no conversion from {} to {}", .from.name(), .to.name())]
    UnsupportedConversion { from: SdtKind, to: SdtKind },
    #[error("the int line cannot be disabled")]
    ProtectedLane,
    #[error(transparent)]
    Heap(#[from] HeapError),
    #[error("input `{0}` does not name a program global")]
    UnboundInput(String),
    #[error("bad input: {0}")]
    BadInput(String),
    #[error("memory access out of range at word {0}")]
    MemOutOfRange(i64),
    #[error("memory word {addr} holds {}, expected {}", .found.name(), .expected.name())]
    TypeMismatch { addr: usize, expected: Scalar, found: Scalar },
    #[error("run exceeded the limit of {0} cycles")]
    RuntimeLimit(u64),
    #[error("malformed program: {0}")]
    BadProgram(String),
}

/// Simulator limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Abort with [`Trap::RuntimeLimit`] past this many cycles. Block
    /// entries count against the same limit so that zero-cost jump
    /// cycles cannot spin forever.
    pub cycle_limit: u64,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig { cycle_limit: 10_000_000 }
    }
}

/// One external input value, bound to a global by name before the run.
/// Values arrive as JSON numbers and are converted to the global's
/// declared scalar kind.
#[derive(Debug, Clone, PartialEq)]
pub enum InputVal {
    Num(f64),
    Arr(Vec<f64>),
}

/// Program inputs keyed by global name.
pub type Inputs = BTreeMap<String, InputVal>;

/// Machine mode state driven by the control opcodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlFlags {
    /// Vector mode per line; `VEN`/`VDS` set all four together.
    pub vector_mode: [bool; 4],
    /// Declared vector length from the last `VEN`.
    pub vector_len: u8,
    /// Cross-line parallel issue, toggled by `PEN`/`PDS`.
    pub parallel: bool,
    /// Line enables; the int line is protected and always on.
    pub lane_enabled: [bool; 4],
    /// Conversion-unit configuration; `CONV` replaces it outright.
    pub conv_mask: ConvMask,
}

impl Default for ControlFlags {
    fn default() -> ControlFlags {
        ControlFlags {
            vector_mode: [false; 4],
            vector_len: 0,
            parallel: false,
            lane_enabled: [true; 4],
            conv_mask: ConvMask::EMPTY,
        }
    }
}

const LANE_REGS: usize = REGS_PER_LANE as usize;

/// Issue record builder; `cycle_start` is stamped by [`Machine::record`].
fn issue(
    kind: IssueKind,
    cost: u32,
    members: u32,
    lanes: Vec<SdtKind>,
    loads: u32,
    ariths: u32,
    miss_handled: u32,
) -> IssueRecord {
    IssueRecord { cycle_start: 0, cost, kind, members, lanes, loads, ariths, miss_handled }
}

/// Architectural state of one run.
pub struct Machine<'a> {
    table: &'a CostTable,
    pub flags: ControlFlags,
    ints: [i32; LANE_REGS],
    floats: [f32; LANE_REGS],
    doubles: [f64; LANE_REGS],
    chars: [u8; LANE_REGS],
    trad: BTreeMap<u32, Imm>,
    pub mem: Vec<Imm>,
    pub heap: ObjectHeap,
    pub cycles: u64,
    issues: Vec<IssueRecord>,
}

/// Zero value of a scalar kind.
pub(crate) fn zero_of(kind: Scalar) -> Imm {
    match kind {
        Scalar::Int => Imm::Int(0),
        Scalar::Float => Imm::Float(0.0),
        Scalar::Double => Imm::Double(0.0),
        Scalar::Char => Imm::Char(0),
        Scalar::Long => Imm::Long(0),
    }
}

/// Lay out static memory from the symbol table and bind inputs.
///
/// Every word carries its owning symbol's kind; gap words default to
/// int zero. Inputs must name non-internal globals; a scalar input
/// needs a one-word global and an array input at most the declared
/// element count (shorter arrays fill a prefix).
pub(crate) fn init_memory(symbols: &[GlobalSym], inputs: &Inputs) -> Result<Vec<Imm>, Trap> {
    let extent = symbols.iter().map(|g| g.addr + g.count).max().unwrap_or(0);
    let mut mem = vec![Imm::Int(0); extent as usize];
    for g in symbols {
        let fill = g.init.unwrap_or_else(|| zero_of(g.kind));
        if fill.scalar() != g.kind {
            return Err(Trap::BadProgram(format!(
                "global `{}` initialized with a {} value",
                g.name,
                fill.scalar().name()
            )));
        }
        for i in 0..g.count {
            mem[(g.addr + i) as usize] = fill;
        }
    }
    for (name, val) in inputs {
        let g = symbols
            .iter()
            .find(|g| g.name == *name && !g.is_internal())
            .ok_or_else(|| Trap::UnboundInput(name.clone()))?;
        match val {
            InputVal::Num(x) => {
                if g.count != 1 {
                    return Err(Trap::BadInput(format!(
                        "`{name}` is an array of {} elements, got a scalar",
                        g.count
                    )));
                }
                mem[g.addr as usize] = alu::convert(Imm::Double(*x), g.kind);
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
                    mem[g.addr as usize + i] = alu::convert(Imm::Double(*x), g.kind);
                }
            }
        }
    }
    Ok(mem)
}

/// Final values of every non-internal global, one entry per element.
pub(crate) fn extract_outputs(symbols: &[GlobalSym], mem: &[Imm]) -> BTreeMap<String, Vec<Imm>> {
    let mut out = BTreeMap::new();
    for g in symbols.iter().filter(|g| !g.is_internal()) {
        let lo = g.addr as usize;
        let hi = lo + g.count as usize;
        out.insert(g.name.clone(), mem[lo..hi].to_vec());
    }
    out
}

/// Execute an assembled program and return its trace.
pub fn run(
    program: &Program,
    inputs: &Inputs,
    table: &CostTable,
    config: &RunConfig,
) -> Result<ExecTrace, Trap> {
    let mem = init_memory(&program.globals, inputs)?;
    let mut m = Machine::new(table, mem);

    let mut labels: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, b) in program.blocks.iter().enumerate() {
        if labels.insert(b.label.as_str(), i).is_some() {
            return Err(Trap::BadProgram(format!("duplicate block label `{}`", b.label)));
        }
    }
    let lookup = |label: &str| {
        labels
            .get(label)
            .copied()
            .ok_or_else(|| Trap::BadProgram(format!("jump to unknown label `{label}`")))
    };

    if !program.blocks.is_empty() {
        let mut pc = 0usize;
        let mut entries: u64 = 0;
        loop {
            entries += 1;
            if entries > config.cycle_limit {
                return Err(Trap::RuntimeLimit(config.cycle_limit));
            }
            let block = &program.blocks[pc];
            m.exec_items(&block.items, config.cycle_limit)?;
            match &block.term {
                Terminator::Halt => break,
                Terminator::Jump(label) => pc = lookup(label)?,
                Terminator::Bnz { cond, then_label, else_label } => {
                    let taken = m.cond_nonzero(*cond);
                    pc = lookup(if taken { then_label } else { else_label })?;
                }
            }
        }
    }

    Ok(ExecTrace {
        issues: m.issues,
        cycles: m.cycles,
        outputs: extract_outputs(&program.globals, &m.mem),
    })
}

impl<'a> Machine<'a> {
    pub fn new(table: &'a CostTable, mem: Vec<Imm>) -> Machine<'a> {
        Machine {
            table,
            flags: ControlFlags::default(),
            ints: [0; LANE_REGS],
            floats: [0.0; LANE_REGS],
            doubles: [0.0; LANE_REGS],
            chars: [0; LANE_REGS],
            trad: BTreeMap::new(),
            mem,
            heap: ObjectHeap::new(),
            cycles: 0,
            issues: Vec::new(),
        }
    }

    /// Current value of a typed register.
    pub fn reg(&self, r: RegRef) -> Imm {
        let i = r.index as usize;
        match r.lane {
            SdtKind::Int => Imm::Int(self.ints[i]),
            SdtKind::Float => Imm::Float(self.floats[i]),
            SdtKind::Double => Imm::Double(self.doubles[i]),
            SdtKind::Char => Imm::Char(self.chars[i]),
        }
    }

    /// Enable or disable a typed line. The int line is protected.
    pub fn set_line(&mut self, lane: SdtKind, enabled: bool) -> Result<(), Trap> {
        if lane == SdtKind::Int && !enabled {
            return Err(Trap::ProtectedLane);
        }
        self.flags.lane_enabled[lane.lane_index()] = enabled;
        Ok(())
    }

    fn lane_enabled(&self, lane: SdtKind) -> bool {
        self.flags.lane_enabled[lane.lane_index()]
    }

    fn record(&mut self, mut rec: IssueRecord) {
        rec.cycle_start = self.cycles;
        self.cycles += rec.cost as u64;
        self.issues.push(rec);
    }

    fn exec_items(&mut self, items: &[Item], cycle_limit: u64) -> Result<(), Trap> {
        let mut i = 0;
        while i < items.len() {
            match &items[i] {
                Item::Trad(op) => {
                    self.exec_trad(op)?;
                    i += 1;
                }
                Item::Typed(ins) => match ins.cluster {
                    None => {
                        self.exec_scalar(ins)?;
                        i += 1;
                    }
                    Some(tag) => {
                        let mut j = i + 1;
                        while j < items.len() {
                            match &items[j] {
                                Item::Typed(next) if next.cluster == Some(tag) => j += 1,
                                _ => break,
                            }
                        }
                        let group: Vec<&Instruction> = items[i..j]
                            .iter()
                            .map(|it| match it {
                                Item::Typed(ins) => ins,
                                Item::Trad(_) => unreachable!("group holds typed items"),
                            })
                            .collect();
                        if group.len() == 1 {
                            self.exec_scalar(group[0])?;
                        } else {
                            self.exec_group(&group)?;
                        }
                        i = j;
                    }
                },
            }
            if self.cycles > cycle_limit {
                return Err(Trap::RuntimeLimit(cycle_limit));
            }
        }
        Ok(())
    }

    /// Branch condition: any register or traditional slot, nonzero test.
    fn cond_nonzero(&self, cond: CondRef) -> bool {
        match cond {
            CondRef::Reg(r) => alu::is_nonzero(self.reg(r)),
            CondRef::Trad(n) => alu::is_nonzero(self.trad.get(&n).copied().unwrap_or(Imm::Long(0))),
        }
    }

    // ----- operand access ------------------------------------------------

    fn reg_write(&mut self, r: RegRef, v: Imm) -> Result<(), Trap> {
        let i = r.index as usize;
        match (r.lane, v) {
            (SdtKind::Int, Imm::Int(x)) => self.ints[i] = x,
            (SdtKind::Float, Imm::Float(x)) => self.floats[i] = x,
            (SdtKind::Double, Imm::Double(x)) => self.doubles[i] = x,
            (SdtKind::Char, Imm::Char(x)) => self.chars[i] = x,
            _ => {
                return Err(Trap::BadProgram(format!(
                    "cannot write a {} value to a {} register",
                    v.scalar().name(),
                    r.lane.name()
                )))
            }
        }
        Ok(())
    }

    /// Read a register as a `want`-lane value. Cross-lane reads go
    /// through the conversion unit: char widens to int for free, the
    /// three masked directions need their mask bit, everything else is
    /// unsupported. The traditional lane converts freely (`mask_free`).
    fn read_as(&self, r: RegRef, want: SdtKind, mask_free: bool) -> Result<Imm, Trap> {
        let v = self.reg(r);
        if r.lane == want {
            return Ok(v);
        }
        if !conversion_supported(r.lane, want) {
            return Err(Trap::UnsupportedConversion { from: r.lane, to: want });
        }
        if !mask_free {
            if let Some(bit) = ConvMask::bit_for(r.lane, want) {
                if !self.flags.conv_mask.contains(bit) {
                    return Err(Trap::ConversionDisabled { from: r.lane, to: want });
                }
            }
        }
        Ok(alu::convert(v, want.into()))
    }

    fn operand_value(&self, op: &Operand, want: SdtKind, mask_free: bool) -> Result<Imm, Trap> {
        match op {
            Operand::Reg(r) => self.read_as(*r, want, mask_free),
            Operand::Imm(i) => {
                if i.scalar() == Scalar::from(want) {
                    Ok(*i)
                } else {
                    Err(Trap::BadProgram(format!(
                        "{} immediate in a {} operand",
                        i.scalar().name(),
                        want.name()
                    )))
                }
            }
            _ => Err(Trap::BadProgram("unexpected operand shape".into())),
        }
    }

    fn mem_addr(&self, m: &MemRef) -> Result<usize, Trap> {
        let mut addr = m.base as i64;
        if let Some(idx) = m.index {
            addr += self.ints[idx.index as usize] as i64;
        }
        if addr < 0 || addr as usize >= self.mem.len() {
            return Err(Trap::MemOutOfRange(addr));
        }
        Ok(addr as usize)
    }

    /// Typed load: the word's kind must match the lane, except that a
    /// char word widens to the int lane for free.
    fn mem_read_typed(&self, addr: usize, lane: SdtKind) -> Result<Imm, Trap> {
        let slot = self.mem[addr];
        if slot.scalar() == Scalar::from(lane) {
            return Ok(slot);
        }
        if let (Imm::Char(c), SdtKind::Int) = (slot, lane) {
            return Ok(Imm::Int(c as i32));
        }
        Err(Trap::TypeMismatch { addr, expected: lane.into(), found: slot.scalar() })
    }

    /// Typed store: the value's kind must match the word's kind.
    fn mem_write_typed(&mut self, addr: usize, v: Imm) -> Result<(), Trap> {
        let slot = self.mem[addr];
        if slot.scalar() != v.scalar() {
            return Err(Trap::TypeMismatch { addr, expected: slot.scalar(), found: v.scalar() });
        }
        self.mem[addr] = v;
        Ok(())
    }

    fn operand(ins: &Instruction, at: usize) -> Result<&Operand, Trap> {
        ins.operands.get(at).ok_or_else(|| {
            Trap::BadProgram(format!("{} is missing operand {at}", ins.opcode.mnemonic()))
        })
    }

    fn reg_operand(ins: &Instruction, at: usize) -> Result<RegRef, Trap> {
        match ins.operands.get(at) {
            Some(Operand::Reg(r)) => Ok(*r),
            _ => Err(Trap::BadProgram(format!(
                "{} operand {at} is not a register",
                ins.opcode.mnemonic()
            ))),
        }
    }

    fn mem_operand(ins: &Instruction, at: usize) -> Result<MemRef, Trap> {
        match ins.operands.get(at) {
            Some(Operand::Mem(m)) => Ok(*m),
            _ => Err(Trap::BadProgram(format!(
                "{} operand {at} is not a memory reference",
                ins.opcode.mnemonic()
            ))),
        }
    }

    /// Conversions absorbed into an instruction: its distinct cross-lane
    /// source registers. Each stands for one IR convert fused into this
    /// consumer, so it counts toward the issue's covered members. A move
    /// is exempt: a cross-lane move is itself the standalone conversion
    /// form and already counts as one member.
    fn absorbed(ins: &Instruction) -> u32 {
        if matches!(ins.opcode.role(), Role::Move) {
            return 0;
        }
        let Some(lane) = ins.opcode.lane() else { return 0 };
        let mut seen: Vec<RegRef> = Vec::new();
        for (op, slot) in ins.operands.iter().zip(operand_slots(ins.opcode)) {
            if matches!(slot, Slot::SrcReg | Slot::SrcRegOrImm) {
                if let Operand::Reg(r) = op {
                    if r.lane != lane && !seen.contains(r) {
                        seen.push(*r);
                    }
                }
            }
        }
        seen.len() as u32
    }

    // ----- typed execution ------------------------------------------------

    /// Compute the effect of a register-writing data op (move,
    /// arithmetic, logic, shift, compare) without applying it.
    fn typed_compute(&self, ins: &Instruction, mask_free: bool) -> Result<(RegRef, Imm), Trap> {
        let lane = ins.opcode.lane().expect("data opcode");
        let dst = Self::reg_operand(ins, 0)?;
        let value = match ins.opcode.role() {
            // A cross-lane move is the explicit conversion request, so it
            // goes through the conversion unit without consulting the mask;
            // the mask gates only conversions riding on compute operands.
            Role::Move => self.operand_value(Self::operand(ins, 1)?, lane, true)?,
            Role::Arith | Role::Logic | Role::Shift => {
                let kind = ins.opcode.bin_kind().expect("arith opcode");
                let a = self.operand_value(Self::operand(ins, 1)?, lane, mask_free)?;
                let b = self.operand_value(Self::operand(ins, 2)?, lane, mask_free)?;
                alu::bin(kind, a, b).map_err(|e| match e {
                    alu::AluError::DivisionByZero => Trap::DivisionByZero,
                    other => Trap::BadProgram(other.to_string()),
                })?
            }
            Role::Compare => {
                let a = self.operand_value(Self::operand(ins, 1)?, lane, mask_free)?;
                let b = self.operand_value(Self::operand(ins, 2)?, lane, mask_free)?;
                let pred = match ins.opcode.cmp_pred() {
                    Some(p) => p,
                    None => {
                        let mode = match ins.operands.get(3) {
                            Some(Operand::Imm(Imm::Int(m))) => *m,
                            _ => {
                                return Err(Trap::BadProgram(
                                    "comparison without a mode operand".into(),
                                ))
                            }
                        };
                        crate::isa::CmpPred::from_mode(mode as u8).ok_or_else(|| {
                            Trap::BadProgram(format!("comparison mode {mode} out of range"))
                        })?
                    }
                };
                let hit = alu::cmp(pred, a, b)
                    .map_err(|e| Trap::BadProgram(e.to_string()))?;
                match lane {
                    SdtKind::Int => Imm::Int(hit as i32),
                    SdtKind::Char => Imm::Char(hit as u8),
                    SdtKind::Float => Imm::Float(if hit { 1.0 } else { 0.0 }),
                    SdtKind::Double => Imm::Double(if hit { 1.0 } else { 0.0 }),
                }
            }
            other => {
                return Err(Trap::BadProgram(format!("{other:?} is not a computing role")))
            }
        };
        Ok((dst, value))
    }

    /// Execute one typed instruction as its own issue.
    fn exec_scalar(&mut self, ins: &Instruction) -> Result<(), Trap> {
        match ins.opcode.role() {
            Role::Control => return self.exec_control(ins),
            Role::Obj => return self.exec_obj(ins),
            _ => {}
        }
        let lane = ins.opcode.lane().expect("data opcode");
        let enabled = self.lane_enabled(lane);
        let (mut loads, mut ariths) = (0, 0);
        match ins.opcode.role() {
            Role::Load => {
                loads = 1;
                let dst = Self::reg_operand(ins, 0)?;
                let addr = self.mem_addr(&Self::mem_operand(ins, 1)?)?;
                let v = self.mem_read_typed(addr, lane)?;
                self.reg_write(dst, v)?;
            }
            Role::Store => {
                let src = Self::reg_operand(ins, 0)?;
                let addr = self.mem_addr(&Self::mem_operand(ins, 1)?)?;
                let v = self.read_as(src, lane, !enabled)?;
                self.mem_write_typed(addr, v)?;
            }
            Role::Move => {
                let (dst, v) = self.typed_compute(ins, !enabled)?;
                self.reg_write(dst, v)?;
            }
            Role::Arith | Role::Logic | Role::Shift | Role::Compare => {
                ariths = 1;
                let (dst, v) = self.typed_compute(ins, !enabled)?;
                self.reg_write(dst, v)?;
            }
            Role::Control | Role::Obj => unreachable!("handled above"),
        }
        let base = self.table.cost(ins.opcode);
        let (cost, miss) = if enabled {
            (base, 0)
        } else {
            (base + self.table.traditional_overhead, 1)
        };
        let members = 1 + Self::absorbed(ins);
        self.record(issue(IssueKind::Scalar, cost, members, vec![lane], loads, ariths, miss));
        Ok(())
    }

    /// Apply a control opcode and record its one-cycle issue.
    fn exec_control(&mut self, ins: &Instruction) -> Result<(), Trap> {
        match ins.opcode {
            Opcode::Ven => {
                let len = match ins.operands.first() {
                    Some(Operand::VecLen(n)) => *n,
                    _ => return Err(Trap::BadProgram("VEN without a length".into())),
                };
                self.flags.vector_mode = [true; 4];
                self.flags.vector_len = len;
            }
            Opcode::Vds => self.flags.vector_mode = [false; 4],
            Opcode::Pen => self.flags.parallel = true,
            Opcode::Pds => self.flags.parallel = false,
            Opcode::Ften => self.set_line(SdtKind::Float, true)?,
            Opcode::Ftds => self.set_line(SdtKind::Float, false)?,
            Opcode::Dben => self.set_line(SdtKind::Double, true)?,
            Opcode::Dbds => self.set_line(SdtKind::Double, false)?,
            Opcode::Chen => self.set_line(SdtKind::Char, true)?,
            Opcode::Chds => self.set_line(SdtKind::Char, false)?,
            Opcode::Conv => {
                let mask = match ins.operands.first() {
                    Some(Operand::Mask(m)) => *m,
                    _ => return Err(Trap::BadProgram("CONV without a mask".into())),
                };
                self.flags.conv_mask = mask;
            }
            other => {
                return Err(Trap::BadProgram(format!(
                    "{} is not a control opcode",
                    other.mnemonic()
                )))
            }
        }
        let cost = self.table.cost(ins.opcode);
        self.record(issue(IssueKind::Control, cost, 0, vec![], 0, 0, 0));
        Ok(())
    }

    /// Execute an object-memory opcode as its own issue.
    fn exec_obj(&mut self, ins: &Instruction) -> Result<(), Trap> {
        match ins.opcode {
            Opcode::ObjN => {
                let dst = Self::reg_operand(ins, 0)?;
                let src = Self::reg_operand(ins, 1)?;
                let size = self.ints[src.index as usize] as i64;
                let handle = self.heap.alloc(size)?;
                self.reg_write(dst, Imm::Int(handle as i32))?;
            }
            Opcode::ObjR => {
                let handle = match ins.operands.first() {
                    Some(Operand::Reg(r)) => self.ints[r.index as usize] as u32 as u64,
                    Some(Operand::ObjHandle(h)) => *h,
                    _ => return Err(Trap::BadProgram("OBJ.r without a handle".into())),
                };
                self.heap.release(handle)?;
            }
            other => {
                return Err(Trap::BadProgram(format!(
                    "{} is not an object opcode",
                    other.mnemonic()
                )))
            }
        }
        let cost = self.table.cost(ins.opcode);
        self.record(issue(IssueKind::Scalar, cost, 1, vec![], 0, 0, 0));
        Ok(())
    }

    /// Execute a tagged group: as one issue when it is issuable in the
    /// current mode, otherwise member by member.
    fn exec_group(&mut self, group: &[&Instruction]) -> Result<(), Trap> {
        let convs: Vec<&Instruction> =
            group.iter().copied().filter(|i| i.opcode == Opcode::Conv).collect();
        let data: Vec<&Instruction> =
            group.iter().copied().filter(|i| i.opcode != Opcode::Conv).collect();

        let other_control = data.iter().any(|i| i.opcode.role() == Role::Control);
        let all_loads = data.iter().all(|i| i.opcode.role() == Role::Load);
        let all_ops = data.iter().all(|i| i.opcode.role().op_clusterable());
        let lanes: Vec<SdtKind> = data.iter().filter_map(|i| i.opcode.lane()).collect();
        let all_enabled = lanes.iter().all(|&l| self.lane_enabled(l));

        if convs.len() > 1 || other_control || data.len() < 2 {
            return self.exec_sequential(group);
        }

        if all_loads && convs.is_empty() {
            let lane = lanes[0];
            let same_lane = lanes.iter().all(|&l| l == lane);
            let vector_ok = self.flags.vector_mode[lane.lane_index()]
                && data.len() <= self.flags.vector_len as usize;
            if !same_lane || !all_enabled || !vector_ok {
                return self.exec_sequential(group);
            }
            return self.exec_load_cluster(&data, lane);
        }

        if all_ops {
            let types_ok = {
                let mut distinct = lanes.clone();
                distinct.sort();
                distinct.dedup();
                distinct.len() == 1 || distinct.len() == lanes.len()
            };
            if !types_ok || data.len() > 4 || !all_enabled || !self.flags.parallel {
                return self.exec_sequential(group);
            }
            return self.exec_op_cluster(&data, convs.first().copied());
        }

        self.exec_sequential(group)
    }

    fn exec_sequential(&mut self, group: &[&Instruction]) -> Result<(), Trap> {
        for ins in group {
            self.exec_scalar(ins)?;
        }
        Ok(())
    }

    /// Issue hazard-free same-lane loads together at one member's cost.
    fn exec_load_cluster(&mut self, data: &[&Instruction], lane: SdtKind) -> Result<(), Trap> {
        let mut writes: Vec<(RegRef, Imm)> = Vec::new();
        for ins in data {
            let dst = Self::reg_operand(ins, 0)?;
            let addr = self.mem_addr(&Self::mem_operand(ins, 1)?)?;
            writes.push((dst, self.mem_read_typed(addr, lane)?));
        }
        for (dst, v) in writes {
            self.reg_write(dst, v)?;
        }
        let cost = data.iter().map(|i| self.table.cost(i.opcode)).max().unwrap_or(0);
        let n = data.len() as u32;
        self.record(issue(IssueKind::LoadCluster, cost, n, vec![lane], n, 0, 0));
        Ok(())
    }

    /// Issue compute ops across lanes at the widest member's cost, plus
    /// the conversion cost when a CONV rides along. The CONV applies
    /// before member reads; all members read before any writes.
    fn exec_op_cluster(
        &mut self,
        data: &[&Instruction],
        conv: Option<&Instruction>,
    ) -> Result<(), Trap> {
        let mut conv_cost = 0;
        if let Some(c) = conv {
            let mask = match c.operands.first() {
                Some(Operand::Mask(m)) => *m,
                _ => return Err(Trap::BadProgram("CONV without a mask".into())),
            };
            self.flags.conv_mask = mask;
            conv_cost = self.table.cost(Opcode::Conv);
        }
        let mut writes: Vec<(RegRef, Imm)> = Vec::new();
        let mut members = 0;
        for ins in data {
            writes.push(self.typed_compute(ins, false)?);
            members += 1 + Self::absorbed(ins);
        }
        for (dst, v) in writes {
            self.reg_write(dst, v)?;
        }
        let widest = data.iter().map(|i| self.table.cost(i.opcode)).max().unwrap_or(0);
        let mut lanes: Vec<SdtKind> = data.iter().filter_map(|i| i.opcode.lane()).collect();
        lanes.sort();
        lanes.dedup();
        let ariths = data.len() as u32;
        self.record(issue(IssueKind::OpCluster, widest + conv_cost, members, lanes, 0, ariths, 0));
        Ok(())
    }

    // ----- traditional execution -------------------------------------------

    fn trad_read(&self, r: TradReg) -> Imm {
        match r {
            TradReg::Slot(n) => self.trad.get(&n).copied().unwrap_or(Imm::Long(0)),
            TradReg::Lane(rr) => self.reg(rr),
        }
    }

    fn trad_value(&self, v: &TradVal, ty: Scalar) -> Imm {
        match v {
            TradVal::Imm(i) => alu::convert(*i, ty),
            TradVal::Reg(r) => alu::convert(self.trad_read(*r), ty),
        }
    }

    fn trad_write(&mut self, r: TradReg, v: Imm) -> Result<(), Trap> {
        match r {
            TradReg::Slot(n) => {
                self.trad.insert(n, v);
                Ok(())
            }
            TradReg::Lane(rr) => self.reg_write(rr, alu::convert(v, rr.lane.into())),
        }
    }

    fn trad_addr(&self, a: &TradAddr) -> Result<usize, Trap> {
        match a {
            TradAddr::Static(m) => self.mem_addr(m),
            TradAddr::Indirect(r) => {
                let addr = match alu::convert(self.trad_read(*r), Scalar::Long) {
                    Imm::Long(x) => x,
                    _ => unreachable!("convert to long"),
                };
                if addr < 0 || addr as usize >= self.mem.len() {
                    return Err(Trap::MemOutOfRange(addr));
                }
                Ok(addr as usize)
            }
        }
    }

    /// Execute a traditional-lane op as one issue at its base cost plus
    /// the traditional overhead. The traditional lane converts freely
    /// on read and coerces stores to the target word's kind.
    fn exec_trad(&mut self, op: &TradOp) -> Result<(), Trap> {
        let base = match op {
            TradOp::Ld { .. } => Opcode::LdIn,
            TradOp::St { .. } => Opcode::StIn,
            TradOp::Mov { .. } => Opcode::MovIn,
            TradOp::Bin { op, ty, .. } => match op {
                crate::isa::BinKind::Add => Opcode::AddIn,
                crate::isa::BinKind::Sub => Opcode::SubIn,
                crate::isa::BinKind::Mul => Opcode::MulIn,
                crate::isa::BinKind::Div => match ty {
                    Scalar::Float | Scalar::Double => Opcode::DivFt,
                    _ => Opcode::DivIn,
                },
                crate::isa::BinKind::And => Opcode::AndIn,
                crate::isa::BinKind::Or => Opcode::OrIn,
                crate::isa::BinKind::Xor => Opcode::XorIn,
                crate::isa::BinKind::Nor => Opcode::NorIn,
                crate::isa::BinKind::Xnor => Opcode::XnorIn,
                crate::isa::BinKind::Sra => Opcode::SraIn,
                crate::isa::BinKind::Srl => Opcode::SrlIn,
            },
            TradOp::Cmp { .. } => Opcode::CmpeIn,
            TradOp::Cvt { .. } => Opcode::Conv,
        };
        let (mut loads, mut ariths) = (0, 0);
        match op {
            TradOp::Ld { ty, dst, addr } => {
                loads = 1;
                let a = self.trad_addr(addr)?;
                let v = alu::convert(self.mem[a], *ty);
                self.trad_write(*dst, v)?;
            }
            TradOp::St { ty, src, addr } => {
                let v = self.trad_value(src, *ty);
                let a = self.trad_addr(addr)?;
                let slot_kind = self.mem[a].scalar();
                self.mem[a] = alu::convert(v, slot_kind);
            }
            TradOp::Mov { ty, dst, src } => {
                let v = self.trad_value(src, *ty);
                self.trad_write(*dst, v)?;
            }
            TradOp::Bin { op: kind, ty, dst, lhs, rhs } => {
                ariths = 1;
                let a = self.trad_value(lhs, *ty);
                let b = self.trad_value(rhs, *ty);
                let v = alu::bin(*kind, a, b).map_err(|e| match e {
                    alu::AluError::DivisionByZero => Trap::DivisionByZero,
                    other => Trap::BadProgram(other.to_string()),
                })?;
                self.trad_write(*dst, v)?;
            }
            TradOp::Cmp { pred, ty, dst, lhs, rhs } => {
                ariths = 1;
                let a = self.trad_value(lhs, *ty);
                let b = self.trad_value(rhs, *ty);
                let hit =
                    alu::cmp(*pred, a, b).map_err(|e| Trap::BadProgram(e.to_string()))?;
                self.trad_write(*dst, Imm::Int(hit as i32))?;
            }
            TradOp::Cvt { from, to, dst, src } => {
                let v = self.trad_value(src, *from);
                self.trad_write(*dst, alu::convert(v, *to))?;
            }
        }
        let cost = self.table.cost(base) + self.table.traditional_overhead;
        let members = 1 + Self::absorbed_trad(op);
        self.record(issue(IssueKind::Traditional, cost, members, vec![], loads, ariths, 1));
        Ok(())
    }

    /// Conversions absorbed by a traditional compute op: distinct typed
    /// registers among its value operands whose lane differs from the
    /// operation kind. Each one stands for a fused IR convert.
    fn absorbed_trad(op: &TradOp) -> u32 {
        let (ty, vals): (Scalar, [&TradVal; 2]) = match op {
            TradOp::Bin { ty, lhs, rhs, .. } => (*ty, [lhs, rhs]),
            TradOp::Cmp { ty, lhs, rhs, .. } => (*ty, [lhs, rhs]),
            _ => return 0,
        };
        let mut seen: Vec<RegRef> = Vec::new();
        for v in vals {
            if let TradVal::Reg(TradReg::Lane(r)) = v {
                if Scalar::from(r.lane) != ty && !seen.contains(r) {
                    seen.push(*r);
                }
            }
        }
        seen.len() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::parse_assembly;

    fn run_text(text: &str, inputs: &Inputs) -> Result<ExecTrace, Trap> {
        let program = parse_assembly(text).expect("parses");
        run(&program, inputs, &CostTable::default(), &RunConfig::default())
    }

    fn num_inputs(pairs: &[(&str, f64)]) -> Inputs {
        pairs.iter().map(|(n, v)| (n.to_string(), InputVal::Num(*v))).collect()
    }

    const SHOWCASE: &str = "\
@global a int 0 1
@global b int 1 1
@global c int 2 1
@global d int 3 1
@global s int 4 1
@global e int 5 1
@global q float 6 1

@block entry
VEN 4
@cluster 0
LD.in r1, [0]
LD.in r2, [1]
LD.in r3, [2]
LD.in r4, [3]
@cluster
VDS
PEN
@cluster 1
CONV 00000001
ADD.in r5, r1, r2
DIV.ft f1, r3, 2.5
@cluster
PDS
ST.in r5, [4]
ST.ft f1, [6]
ST.in r4, [5]
@halt
";

    #[test]
    fn showcase_block_cycles_and_conservation() {
        let inputs = num_inputs(&[("a", 3.0), ("b", 4.0), ("c", 5.0), ("d", 6.0)]);
        let trace = run_text(SHOWCASE, &inputs).expect("runs");
        assert_eq!(trace.cycles, 29);
        assert!(trace.is_contiguous());

        let data_members: u64 = trace
            .issues
            .iter()
            .filter(|r| r.kind != IssueKind::Control)
            .map(|r| r.members as u64)
            .sum();
        assert_eq!(data_members, 10);

        let kinds: Vec<IssueKind> = trace.issues.iter().map(|r| r.kind).collect();
        assert_eq!(
            kinds,
            vec![
                IssueKind::Control,
                IssueKind::LoadCluster,
                IssueKind::Control,
                IssueKind::Control,
                IssueKind::OpCluster,
                IssueKind::Control,
                IssueKind::Scalar,
                IssueKind::Scalar,
                IssueKind::Scalar,
            ]
        );
        assert_eq!(trace.issues[1].cost, 3);
        assert_eq!(trace.issues[1].members, 4);
        // Widest member (the float divide) plus the CONV rider.
        assert_eq!(trace.issues[4].cost, 13);
        assert_eq!(trace.issues[4].members, 3);

        assert_eq!(trace.outputs["s"], vec![Imm::Int(7)]);
        assert_eq!(trace.outputs["e"], vec![Imm::Int(6)]);
        assert_eq!(trace.outputs["q"], vec![Imm::Float(2.0)]);
    }

    #[test]
    fn cross_lane_read_needs_mask_bit() {
        let text = "\
@global c int 0 1
@global q float 1 1
@block entry
LD.in r3, [0]
DIV.ft f1, r3, 2.5
ST.ft f1, [1]
@halt
";
        let inputs = num_inputs(&[("c", 5.0)]);
        let err = run_text(text, &inputs).unwrap_err();
        assert_eq!(
            err,
            Trap::ConversionDisabled { from: SdtKind::Int, to: SdtKind::Float }
        );
    }

    #[test]
    fn conv_mask_is_replaced_not_accumulated() {
        let ok = "\
@global x double 0 1
@block entry
CONV 00000010
MOV.in r1, 7
ADD.db d1, r1, 0.0
ST.db d1, [0]
@halt
";
        let trace = run_text(ok, &Inputs::new()).expect("bit 1 allows int to double");
        assert_eq!(trace.outputs["x"], vec![Imm::Double(7.0)]);

        // A second CONV replaces the mask outright, so the previously
        // enabled direction is gone rather than accumulated.
        let replaced = "\
@global x double 0 1
@block entry
CONV 00000010
MOV.in r1, 7
CONV 00000100
ADD.db d1, r1, 0.0
ST.db d1, [0]
@halt
";
        let err = run_text(replaced, &Inputs::new()).unwrap_err();
        assert_eq!(
            err,
            Trap::ConversionDisabled { from: SdtKind::Int, to: SdtKind::Double }
        );
    }

    #[test]
    fn cross_lane_move_converts_without_the_mask() {
        let text = "\
@global q float 0 1
@block entry
MOV.in r1, 5
MOV.ft f1, r1
ST.ft f1, [0]
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("explicit move converts");
        assert_eq!(trace.outputs["q"], vec![Imm::Float(5.0)]);
        // The move is the standalone conversion form: exactly one member.
        assert!(trace.issues.iter().all(|r| r.members == 1));
    }

    #[test]
    fn narrowing_move_is_still_rejected() {
        let text = "\
@block entry
MOV.ft f1, 1.5
MOV.in r1, f1
@halt
";
        let errs = parse_assembly(text).unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e.kind, crate::isa::AsmErrorKind::LaneMismatch(_))));
    }

    #[test]
    fn trad_compute_counts_typed_operand_conversions() {
        let text = "\
@global out float 0 1
@block entry
MOV.in r2, 3
@trad add.f t1, r2, 1.5
@trad st.f t1, [0]
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["out"], vec![Imm::Float(4.5)]);
        let add = trace.issues.iter().find(|r| r.ariths == 1).unwrap();
        assert_eq!(add.kind, IssueKind::Traditional);
        assert_eq!(add.members, 2);
    }

    #[test]
    fn char_widens_to_int_for_free() {
        let text = "\
@global ch char 0 1
@global out int 1 1
@block entry
MOV.ch c1, 200
ADD.in r1, c1, 50
ST.in r1, [1]
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["out"], vec![Imm::Int(250)]);
        // The widening still counts as an absorbed conversion member.
        let add = trace.issues.iter().find(|r| r.ariths == 1).unwrap();
        assert_eq!(add.members, 2);
    }

    #[test]
    fn typed_load_checks_word_kind() {
        let text = "\
@global q float 0 1
@block entry
LD.in r1, [0]
@halt
";
        let err = run_text(text, &Inputs::new()).unwrap_err();
        assert_eq!(
            err,
            Trap::TypeMismatch { addr: 0, expected: Scalar::Int, found: Scalar::Float }
        );
    }

    #[test]
    fn cluster_without_vector_mode_issues_sequentially() {
        let text = "\
@global a int 0 4
@block entry
@cluster 0
LD.in r1, [0]
LD.in r2, [1]
LD.in r3, [2]
LD.in r4, [3]
@cluster
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.issues.len(), 4);
        assert!(trace.issues.iter().all(|r| r.kind == IssueKind::Scalar && r.cost == 3));
        assert_eq!(trace.cycles, 12);
    }

    #[test]
    fn op_cluster_without_parallel_mode_issues_sequentially() {
        let text = "\
@block entry
MOV.in r1, 6
MOV.in r2, 7
@cluster 0
ADD.in r3, r1, r2
SUB.in r4, r1, r2
@cluster
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        let kinds: Vec<IssueKind> = trace.issues.iter().map(|r| r.kind).collect();
        assert!(kinds.iter().all(|&k| k == IssueKind::Scalar));
        assert_eq!(trace.cycles, 4);
    }

    #[test]
    fn op_cluster_members_read_before_writes() {
        // Swap via a cluster: both members read the pre-cluster values.
        let text = "\
@global x int 0 1
@global y int 1 1
@block entry
MOV.in r1, 11
MOV.in r2, 22
PEN
@cluster 0
ADD.in r1, r2, 0
ADD.in r2, r1, 0
@cluster
PDS
ST.in r1, [0]
ST.in r2, [1]
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["x"], vec![Imm::Int(22)]);
        assert_eq!(trace.outputs["y"], vec![Imm::Int(11)]);
    }

    #[test]
    fn disabled_line_reroutes_and_counts_miss() {
        let text = "\
@global q float 0 1
@block entry
FTDS
MOV.ft f1, 1.5
ADD.ft f2, f1, 2.5
ST.ft f2, [0]
FTEN
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["q"], vec![Imm::Float(4.0)]);
        let data: Vec<&IssueRecord> =
            trace.issues.iter().filter(|r| r.kind == IssueKind::Scalar).collect();
        assert_eq!(data.len(), 3);
        assert!(data.iter().all(|r| r.miss_handled == 1));
        // MOV 1+2, ADD 4+2, ST 3+2, plus the two control cycles.
        assert_eq!(trace.cycles, 3 + 6 + 5 + 2);
    }

    #[test]
    fn int_line_is_protected() {
        let table = CostTable::default();
        let mut m = Machine::new(&table, vec![]);
        assert_eq!(m.set_line(SdtKind::Int, false), Err(Trap::ProtectedLane));
        assert_eq!(m.set_line(SdtKind::Float, false), Ok(()));
        assert!(!m.lane_enabled(SdtKind::Float));
    }

    #[test]
    fn loop_counts_down_and_halts() {
        let text = "\
@global n int 0 1
@global total int 1 1
@block entry
LD.in r1, [0]
MOV.in r2, 0
@jmp head
@block head
CMPS.in r3, 0, r1
@bnz r3, body, done
@block body
ADD.in r2, r2, r1
SUB.in r1, r1, 1
ST.in r2, [1]
ST.in r1, [0]
@jmp head
@block done
@halt
";
        let inputs = num_inputs(&[("n", 4.0)]);
        let trace = run_text(text, &inputs).expect("runs");
        assert_eq!(trace.outputs["total"], vec![Imm::Int(10)]);
        assert_eq!(trace.outputs["n"], vec![Imm::Int(0)]);
        assert!(trace.is_contiguous());
    }

    #[test]
    fn runaway_loop_hits_cycle_limit() {
        let text = "\
@block entry
MOV.in r1, 1
@jmp entry
";
        let program = parse_assembly(text).expect("parses");
        let config = RunConfig { cycle_limit: 1_000 };
        let err = run(&program, &Inputs::new(), &CostTable::default(), &config).unwrap_err();
        assert_eq!(err, Trap::RuntimeLimit(1_000));
    }

    #[test]
    fn empty_jump_cycle_hits_limit_too() {
        let text = "\
@block entry
@jmp entry
";
        let program = parse_assembly(text).expect("parses");
        let config = RunConfig { cycle_limit: 100 };
        let err = run(&program, &Inputs::new(), &CostTable::default(), &config).unwrap_err();
        assert_eq!(err, Trap::RuntimeLimit(100));
    }

    #[test]
    fn object_ops_allocate_and_release() {
        let text = "\
@global h int 0 1
@block entry
MOV.in r1, 64
OBJ.n r2, r1
ST.in r2, [0]
OBJ.r r2
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["h"], vec![Imm::Int(1)]);
        let release_err = "\
@block entry
MOV.in r1, 8
OBJ.n r2, r1
OBJ.r r2
OBJ.r r2
@halt
";
        let err = run_text(release_err, &Inputs::new()).unwrap_err();
        assert_eq!(err, Trap::Heap(HeapError::DoubleFree(1)));
    }

    #[test]
    fn zero_size_allocation_traps() {
        let text = "\
@block entry
MOV.in r1, 0
OBJ.n r2, r1
@halt
";
        let err = run_text(text, &Inputs::new()).unwrap_err();
        assert_eq!(err, Trap::Heap(HeapError::ZeroSizeAllocation));
    }

    #[test]
    fn traditional_ops_cost_overhead_and_count_miss() {
        let text = "\
@global g long 0 1
@global out long 1 1
@block entry
@trad ld.l t0, [0]
@trad add.l t1, t0, 5
@trad st.l t1, [1]
@halt
";
        let inputs = num_inputs(&[("g", 37.0)]);
        let trace = run_text(text, &inputs).expect("runs");
        assert_eq!(trace.outputs["out"], vec![Imm::Long(42)]);
        assert_eq!(trace.cycles, 5 + 3 + 5);
        assert!(trace.issues.iter().all(|r| r.kind == IssueKind::Traditional));
        assert!(trace.issues.iter().all(|r| r.miss_handled == 1));
    }

    #[test]
    fn traditional_indirect_access_follows_pointers() {
        let text = "\
@global arr int 0 3
@global out int 3 1
@block entry
@trad mov.l t0, 1
@trad ld.i t1, [t0]
@trad st.i t1, [3]
@halt
";
        let inputs: Inputs =
            [("arr".to_string(), InputVal::Arr(vec![10.0, 20.0, 30.0]))].into_iter().collect();
        let trace = run_text(text, &inputs).expect("runs");
        assert_eq!(trace.outputs["out"], vec![Imm::Int(20)]);
    }

    #[test]
    fn inputs_bind_and_reject_unknown_names() {
        let program = parse_assembly("@global x int 0 1\n@block entry\n@halt\n").unwrap();
        let bad = num_inputs(&[("y", 1.0)]);
        let err = run(&program, &bad, &CostTable::default(), &RunConfig::default()).unwrap_err();
        assert_eq!(err, Trap::UnboundInput("y".into()));

        let too_long: Inputs =
            [("x".to_string(), InputVal::Arr(vec![1.0, 2.0]))].into_iter().collect();
        let err =
            run(&program, &too_long, &CostTable::default(), &RunConfig::default()).unwrap_err();
        assert!(matches!(err, Trap::BadInput(_)));
    }

    #[test]
    fn division_by_zero_traps_on_int_not_float() {
        let int_div = "\
@block entry
MOV.in r1, 9
MOV.in r2, 0
DIV.in r3, r1, r2
@halt
";
        assert_eq!(run_text(int_div, &Inputs::new()).unwrap_err(), Trap::DivisionByZero);

        let float_div = "\
@global q float 0 1
@block entry
MOV.ft f1, 1.0
MOV.ft f2, 0.0
DIV.ft f3, f1, f2
ST.ft f3, [0]
@halt
";
        let trace = run_text(float_div, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["q"], vec![Imm::Float(f32::INFINITY)]);
    }

    #[test]
    fn float_compare_takes_mode_operand() {
        let text = "\
@global flag float 0 1
@block entry
MOV.ft f1, 1.5
MOV.ft f2, 2.5
CMP.ft f3, f1, f2, 2
ST.ft f3, [0]
@halt
";
        let trace = run_text(text, &Inputs::new()).expect("runs");
        assert_eq!(trace.outputs["flag"], vec![Imm::Float(1.0)]);
    }
}
