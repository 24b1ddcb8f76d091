//! Instruction set for the typed four-lane machine.
//!
//! The opcode set is closed: one load/store/move/arithmetic group per
//! typed lane (`.in`, `.ft`, `.db`, `.ch` suffixes), control opcodes for
//! vector and parallel grouping, lane enable/disable, conversion-unit
//! configuration, and the two object-memory opcodes. Programs carry the
//! compiler's clustering as textual `@cluster` tags so the simulator can
//! co-issue exactly what the compiler grouped.

mod cost;
mod format;
mod opcode;
mod parse;
mod validate;

pub use cost::{instruction_cost, CostTable, CostTableError};
pub use format::format_assembly;
pub use opcode::{Category, Opcode, Role};
pub use parse::{parse_assembly, AsmError, AsmErrorKind};
pub use validate::{validate, validate_with_caps, ClusterCaps, Violation};

pub(crate) use parse::{operand_slots, Slot};

use serde::{Deserialize, Serialize};

/// Datatypes that can own a typed process line.
///
/// The ordering is the promotion lattice: `Char < Int < Float < Double`.
/// A mixed-type operation produces the larger of its operand types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SdtKind {
    Char,
    Int,
    Float,
    Double,
}

impl SdtKind {
    pub const ALL: [SdtKind; 4] = [SdtKind::Int, SdtKind::Float, SdtKind::Double, SdtKind::Char];

    /// Lane index used for register files and enable flags.
    pub fn lane_index(self) -> usize {
        match self {
            SdtKind::Int => 0,
            SdtKind::Float => 1,
            SdtKind::Double => 2,
            SdtKind::Char => 3,
        }
    }

    pub fn from_lane_index(i: usize) -> Option<SdtKind> {
        match i {
            0 => Some(SdtKind::Int),
            1 => Some(SdtKind::Float),
            2 => Some(SdtKind::Double),
            3 => Some(SdtKind::Char),
            _ => None,
        }
    }

    /// Register name prefix in assembly (`r3`, `f3`, `d3`, `c3`).
    pub fn reg_prefix(self) -> char {
        match self {
            SdtKind::Int => 'r',
            SdtKind::Float => 'f',
            SdtKind::Double => 'd',
            SdtKind::Char => 'c',
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SdtKind::Int => "int",
            SdtKind::Float => "float",
            SdtKind::Double => "double",
            SdtKind::Char => "char",
        }
    }
}

/// Result type of a binary operation over the promotion lattice.
///
/// Comparisons are typed `int` at the language level; this function is
/// about the arithmetic lattice only.
pub fn result_type(lhs: SdtKind, rhs: SdtKind) -> SdtKind {
    lhs.max(rhs)
}

/// Scalar value kinds storable in machine memory. Extends [`SdtKind`]
/// with `long`, which never owns a typed lane and is handled by the
/// traditional lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scalar {
    Int,
    Float,
    Double,
    Char,
    Long,
}

impl Scalar {
    pub fn sdt(self) -> Option<SdtKind> {
        match self {
            Scalar::Int => Some(SdtKind::Int),
            Scalar::Float => Some(SdtKind::Float),
            Scalar::Double => Some(SdtKind::Double),
            Scalar::Char => Some(SdtKind::Char),
            Scalar::Long => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scalar::Int => "int",
            Scalar::Float => "float",
            Scalar::Double => "double",
            Scalar::Char => "char",
            Scalar::Long => "long",
        }
    }

    pub fn from_name(s: &str) -> Option<Scalar> {
        match s {
            "int" => Some(Scalar::Int),
            "float" => Some(Scalar::Float),
            "double" => Some(Scalar::Double),
            "char" => Some(Scalar::Char),
            "long" => Some(Scalar::Long),
            _ => None,
        }
    }

    /// Size in bytes, used for object allocation sizes.
    pub fn size_bytes(self) -> u32 {
        match self {
            Scalar::Char => 1,
            Scalar::Int | Scalar::Float => 4,
            Scalar::Double | Scalar::Long => 8,
        }
    }
}

impl From<SdtKind> for Scalar {
    fn from(k: SdtKind) -> Scalar {
        match k {
            SdtKind::Int => Scalar::Int,
            SdtKind::Float => Scalar::Float,
            SdtKind::Double => Scalar::Double,
            SdtKind::Char => Scalar::Char,
        }
    }
}

/// A typed immediate operand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Imm {
    Int(i32),
    Float(f32),
    Double(f64),
    Char(u8),
    Long(i64),
}

impl Imm {
    pub fn scalar(self) -> Scalar {
        match self {
            Imm::Int(_) => Scalar::Int,
            Imm::Float(_) => Scalar::Float,
            Imm::Double(_) => Scalar::Double,
            Imm::Char(_) => Scalar::Char,
            Imm::Long(_) => Scalar::Long,
        }
    }

    /// Bit-exact equality; `{Float,Double}` compare by bit pattern so that
    /// NaN and signed zero survive round trips.
    pub fn bits_eq(self, other: Imm) -> bool {
        match (self, other) {
            (Imm::Int(a), Imm::Int(b)) => a == b,
            (Imm::Char(a), Imm::Char(b)) => a == b,
            (Imm::Long(a), Imm::Long(b)) => a == b,
            (Imm::Float(a), Imm::Float(b)) => a.to_bits() == b.to_bits(),
            (Imm::Double(a), Imm::Double(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

/// Reference to one register in one typed lane. Indexes run 0..32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RegRef {
    pub lane: SdtKind,
    pub index: u8,
}

impl RegRef {
    pub fn new(lane: SdtKind, index: u8) -> RegRef {
        RegRef { lane, index }
    }
}

/// Number of registers in each lane's register file.
pub const REGS_PER_LANE: u8 = 32;

/// Conversion-unit configuration mask.
///
/// Bit 0 enables int-to-float, bit 1 int-to-double, bit 2 float-to-double.
/// Bits 3..8 are reserved and must stay zero in valid programs. Char
/// widens to int for free on the datapath and needs no mask bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
pub struct ConvMask(pub u8);

pub const CONV_INT_TO_FLOAT: u8 = 1 << 0;
pub const CONV_INT_TO_DOUBLE: u8 = 1 << 1;
pub const CONV_FLOAT_TO_DOUBLE: u8 = 1 << 2;

impl ConvMask {
    pub const EMPTY: ConvMask = ConvMask(0);

    pub fn contains(self, bits: u8) -> bool {
        self.0 & bits == bits
    }

    pub fn union(self, other: ConvMask) -> ConvMask {
        ConvMask(self.0 | other.0)
    }

    pub fn reserved_bits_set(self) -> bool {
        self.0 & !0b0000_0111 != 0
    }

    /// Mask bit required to read a `from`-lane register as a `to`-lane
    /// value. `None` means the direction is free (char widening or same
    /// lane); `Err(())` would be an unsupported direction, which callers
    /// check with [`conversion_supported`].
    pub fn bit_for(from: SdtKind, to: SdtKind) -> Option<u8> {
        match (from, to) {
            (SdtKind::Int, SdtKind::Float) | (SdtKind::Char, SdtKind::Float) => {
                Some(CONV_INT_TO_FLOAT)
            }
            (SdtKind::Int, SdtKind::Double) | (SdtKind::Char, SdtKind::Double) => {
                Some(CONV_INT_TO_DOUBLE)
            }
            (SdtKind::Float, SdtKind::Double) => Some(CONV_FLOAT_TO_DOUBLE),
            _ => None,
        }
    }
}

/// Whether a value of lane `from` may feed an instruction in lane `to`.
///
/// Only widening along the promotion lattice is possible: the char
/// widener handles char-to-int, the conversion unit handles the three
/// masked directions. Everything else needs the traditional lane.
pub fn conversion_supported(from: SdtKind, to: SdtKind) -> bool {
    from <= to
}

/// Memory operand: a static word address with an optional int-register
/// index for array element access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemRef {
    pub base: u32,
    pub index: Option<RegRef>,
}

impl MemRef {
    pub fn at(base: u32) -> MemRef {
        MemRef { base, index: None }
    }

    pub fn indexed(base: u32, index: RegRef) -> MemRef {
        MemRef { base, index: Some(index) }
    }
}

/// One instruction operand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operand {
    Reg(RegRef),
    Imm(Imm),
    Mem(MemRef),
    /// Opaque object handle, printed as `h<N>`. Accepted by `OBJ.r` as a
    /// literal alternative to a handle-holding register.
    ObjHandle(u64),
    Mask(ConvMask),
    VecLen(u8),
}

/// One machine instruction with its optional cluster tag. Instructions
/// sharing a tag with their neighbours issue together.
#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub opcode: Opcode,
    pub operands: Vec<Operand>,
    pub cluster: Option<u32>,
}

impl Instruction {
    pub fn new(opcode: Opcode, operands: Vec<Operand>) -> Instruction {
        Instruction { opcode, operands, cluster: None }
    }

    pub fn tagged(opcode: Opcode, operands: Vec<Operand>, cluster: u32) -> Instruction {
        Instruction { opcode, operands, cluster: Some(cluster) }
    }
}

/// Traditional-lane register: either an unbounded traditional slot
/// (`t<N>`) or a direct reference into one of the typed register files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TradReg {
    Slot(u32),
    Lane(RegRef),
}

/// Traditional-lane operand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TradVal {
    Reg(TradReg),
    Imm(Imm),
}

/// Traditional-lane address: static (optionally indexed by an int
/// register) or indirect through a pointer-holding operand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TradAddr {
    Static(MemRef),
    Indirect(TradReg),
}

/// Binary operation selector shared by the IR and the traditional lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinKind {
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Xor,
    Nor,
    Xnor,
    Sra,
    Srl,
}

impl BinKind {
    pub fn name(self) -> &'static str {
        match self {
            BinKind::Add => "add",
            BinKind::Sub => "sub",
            BinKind::Mul => "mul",
            BinKind::Div => "div",
            BinKind::And => "and",
            BinKind::Or => "or",
            BinKind::Xor => "xor",
            BinKind::Nor => "nor",
            BinKind::Xnor => "xnor",
            BinKind::Sra => "sra",
            BinKind::Srl => "srl",
        }
    }
}

/// Comparison predicate shared by the IR and the traditional lane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpPred {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpPred {
    pub fn name(self) -> &'static str {
        match self {
            CmpPred::Eq => "eq",
            CmpPred::Ne => "ne",
            CmpPred::Lt => "lt",
            CmpPred::Le => "le",
            CmpPred::Gt => "gt",
            CmpPred::Ge => "ge",
        }
    }

    /// Encoding used by the mode operand of `CMP.ft` / `CMP.db`.
    pub fn mode(self) -> u8 {
        match self {
            CmpPred::Eq => 0,
            CmpPred::Ne => 1,
            CmpPred::Lt => 2,
            CmpPred::Le => 3,
            CmpPred::Gt => 4,
            CmpPred::Ge => 5,
        }
    }

    pub fn from_mode(m: u8) -> Option<CmpPred> {
        match m {
            0 => Some(CmpPred::Eq),
            1 => Some(CmpPred::Ne),
            2 => Some(CmpPred::Lt),
            3 => Some(CmpPred::Le),
            4 => Some(CmpPred::Gt),
            5 => Some(CmpPred::Ge),
            _ => None,
        }
    }
}

/// An operation executed by the traditional fallback lane. These cover
/// everything the typed opcode set cannot express: long/enum/pointer
/// work, struct field access, double division, char multiply/divide,
/// and conversions outside the supported directions.
#[derive(Debug, Clone, PartialEq)]
pub enum TradOp {
    Ld { ty: Scalar, dst: TradReg, addr: TradAddr },
    St { ty: Scalar, src: TradVal, addr: TradAddr },
    Mov { ty: Scalar, dst: TradReg, src: TradVal },
    Bin { op: BinKind, ty: Scalar, dst: TradReg, lhs: TradVal, rhs: TradVal },
    Cmp { pred: CmpPred, ty: Scalar, dst: TradReg, lhs: TradVal, rhs: TradVal },
    Cvt { from: Scalar, to: Scalar, dst: TradReg, src: TradVal },
}

/// One line of a block: a typed instruction or a traditional-lane op.
#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Typed(Instruction),
    Trad(TradOp),
}

/// Branch condition: a typed register or a traditional slot, tested for
/// a nonzero value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CondRef {
    Reg(RegRef),
    Trad(u32),
}

/// Block terminator. Control flow lives in directives rather than
/// opcodes; the typed lanes are straight-line engines and sequencing is
/// the simulator's job.
#[derive(Debug, Clone, PartialEq)]
pub enum Terminator {
    Halt,
    Jump(String),
    Bnz { cond: CondRef, then_label: String, else_label: String },
}

/// A labelled straight-line block.
#[derive(Debug, Clone, PartialEq)]
pub struct AsmBlock {
    pub label: String,
    pub items: Vec<Item>,
    pub term: Terminator,
}

impl AsmBlock {
    pub fn new(label: impl Into<String>) -> AsmBlock {
        AsmBlock { label: label.into(), items: Vec::new(), term: Terminator::Halt }
    }
}

/// A named memory region: scalar global, array, flattened struct field,
/// or compiler-internal slot. Names starting with `__` are internal and
/// excluded from program outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSym {
    pub name: String,
    pub kind: Scalar,
    pub addr: u32,
    pub count: u32,
    pub init: Option<Imm>,
}

impl GlobalSym {
    pub fn is_internal(&self) -> bool {
        self.name.starts_with("__")
    }
}

/// A complete program: the compiled artifact and the unit of the
/// assembly text format.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Program {
    pub globals: Vec<GlobalSym>,
    pub blocks: Vec<AsmBlock>,
}

impl Program {
    pub fn empty() -> Program {
        Program::default()
    }

    /// Word extent of static memory: one past the highest symbol slot.
    pub fn memory_extent(&self) -> u32 {
        self.globals.iter().map(|g| g.addr + g.count).max().unwrap_or(0)
    }

    pub fn find_global(&self, name: &str) -> Option<&GlobalSym> {
        self.globals.iter().find(|g| g.name == name)
    }

    /// Iterate instructions with their global index (trad ops skipped).
    pub fn typed_instructions(&self) -> impl Iterator<Item = (usize, &Instruction)> {
        self.blocks
            .iter()
            .flat_map(|b| b.items.iter())
            .enumerate()
            .filter_map(|(i, item)| match item {
                Item::Typed(ins) => Some((i, ins)),
                Item::Trad(_) => None,
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn promotion_lattice_order() {
        assert!(SdtKind::Char < SdtKind::Int);
        assert!(SdtKind::Int < SdtKind::Float);
        assert!(SdtKind::Float < SdtKind::Double);
    }

    #[test]
    fn result_type_examples() {
        assert_eq!(result_type(SdtKind::Float, SdtKind::Char), SdtKind::Float);
        assert_eq!(result_type(SdtKind::Int, SdtKind::Int), SdtKind::Int);
        assert_eq!(result_type(SdtKind::Int, SdtKind::Double), SdtKind::Double);
    }

    #[test]
    fn result_type_commutes_and_associates() {
        for &a in &SdtKind::ALL {
            for &b in &SdtKind::ALL {
                assert_eq!(result_type(a, b), result_type(b, a));
                for &c in &SdtKind::ALL {
                    assert_eq!(
                        result_type(result_type(a, b), c),
                        result_type(a, result_type(b, c))
                    );
                }
            }
        }
    }

    #[test]
    fn conv_mask_bits() {
        assert_eq!(ConvMask::bit_for(SdtKind::Int, SdtKind::Float), Some(CONV_INT_TO_FLOAT));
        assert_eq!(ConvMask::bit_for(SdtKind::Int, SdtKind::Double), Some(CONV_INT_TO_DOUBLE));
        assert_eq!(ConvMask::bit_for(SdtKind::Float, SdtKind::Double), Some(CONV_FLOAT_TO_DOUBLE));
        assert_eq!(ConvMask::bit_for(SdtKind::Char, SdtKind::Int), None);
        assert!(ConvMask(0b1000_0000).reserved_bits_set());
        assert!(!ConvMask(0b0000_0111).reserved_bits_set());
    }

    #[test]
    fn widening_only_conversions() {
        assert!(conversion_supported(SdtKind::Char, SdtKind::Double));
        assert!(conversion_supported(SdtKind::Int, SdtKind::Float));
        assert!(!conversion_supported(SdtKind::Float, SdtKind::Int));
        assert!(!conversion_supported(SdtKind::Double, SdtKind::Char));
    }

    #[test]
    fn internal_symbols_by_prefix() {
        let g = GlobalSym {
            name: "__spill0".into(),
            kind: Scalar::Int,
            addr: 0,
            count: 1,
            init: None,
        };
        assert!(g.is_internal());
    }
}
