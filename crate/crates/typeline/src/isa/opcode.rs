//! The closed opcode set.

use super::{BinKind, CmpPred, SdtKind};

/// Table category of an opcode: the four typed groups plus control and
/// object-memory opcodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Category {
    Integer,
    Float,
    Double,
    Char,
    Control,
    Memory,
}

/// What an opcode does, independent of its lane. Drives clustering and
/// validation rules: load clusters take `Load` members, op clusters take
/// `Arith`/`Logic`/`Compare`/`Shift` members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Load,
    Store,
    Move,
    Arith,
    Logic,
    Shift,
    Compare,
    Control,
    Obj,
}

impl Role {
    /// May this instruction be a member of an op cluster?
    pub fn op_clusterable(self) -> bool {
        matches!(self, Role::Arith | Role::Logic | Role::Shift | Role::Compare)
    }
}

macro_rules! opcodes {
    ($($variant:ident => $mnem:literal, $cat:ident, $role:ident, $cost:literal;)+) => {
        /// One of the machine's opcodes. The set is closed; the
        /// assembly parser accepts exactly these mnemonics.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Opcode {
            $($variant,)+
        }

        impl Opcode {
            pub const ALL: &'static [Opcode] = &[$(Opcode::$variant,)+];

            pub fn mnemonic(self) -> &'static str {
                match self {
                    $(Opcode::$variant => $mnem,)+
                }
            }

            pub fn from_mnemonic(s: &str) -> Option<Opcode> {
                match s {
                    $($mnem => Some(Opcode::$variant),)+
                    _ => None,
                }
            }

            pub fn category(self) -> Category {
                match self {
                    $(Opcode::$variant => Category::$cat,)+
                }
            }

            pub fn role(self) -> Role {
                match self {
                    $(Opcode::$variant => Role::$role,)+
                }
            }

            /// Built-in cycle cost, overridable through [`super::CostTable`].
            pub(crate) fn default_cost(self) -> u32 {
                match self {
                    $(Opcode::$variant => $cost,)+
                }
            }
        }
    };
}

opcodes! {
    // Integer lane.
    LdIn   => "LD.in",    Integer, Load,    3;
    StIn   => "ST.in",    Integer, Store,   3;
    MovIn  => "MOV.in",   Integer, Move,    1;
    AddIn  => "ADD.in",   Integer, Arith,   1;
    SubIn  => "SUB.in",   Integer, Arith,   1;
    MulIn  => "MUL.in",   Integer, Arith,   7;
    DivIn  => "DIV.in",   Integer, Arith,   20;
    CmpeIn => "CMPE.in",  Integer, Compare, 1;
    CmpegIn => "CMPEG.in", Integer, Compare, 1;
    CmpesIn => "CMPEs.in", Integer, Compare, 1;
    CmpsIn => "CMPS.in",  Integer, Compare, 1;
    AndIn  => "AND.in",   Integer, Logic,   1;
    OrIn   => "OR.in",    Integer, Logic,   1;
    XorIn  => "XOR.in",   Integer, Logic,   1;
    NorIn  => "NOR.in",   Integer, Logic,   1;
    XnorIn => "XNOR.in",  Integer, Logic,   1;
    SraIn  => "SRA.in",   Integer, Shift,   1;
    SrlIn  => "SRL.in",   Integer, Shift,   1;
    // Float lane.
    LdFt   => "LD.ft",    Float,   Load,    3;
    StFt   => "ST.ft",    Float,   Store,   3;
    MovFt  => "MOV.ft",   Float,   Move,    1;
    AddFt  => "ADD.ft",   Float,   Arith,   4;
    SubFt  => "SUB.ft",   Float,   Arith,   4;
    MulFt  => "MUL.ft",   Float,   Arith,   4;
    DivFt  => "DIV.ft",   Float,   Arith,   12;
    CmpFt  => "CMP.ft",   Float,   Compare, 1;
    // Double lane. Division is deliberately absent; the traditional
    // lane handles double division.
    LdDb   => "LD.db",    Double,  Load,    3;
    StDb   => "ST.db",    Double,  Store,   3;
    MovDb  => "MOV.db",   Double,  Move,    1;
    AddDb  => "ADD.db",   Double,  Arith,   4;
    SubDb  => "SUB.db",   Double,  Arith,   4;
    MulDb  => "MUL.db",   Double,  Arith,   4;
    CmpDb  => "CMP.db",   Double,  Compare, 1;
    // Char lane.
    LdCh   => "LD.ch",    Char,    Load,    3;
    StCh   => "ST.ch",    Char,    Store,   3;
    MovCh  => "MOV.ch",   Char,    Move,    1;
    AddCh  => "ADD.ch",   Char,    Arith,   1;
    SubCh  => "SUB.ch",   Char,    Arith,   1;
    CmpeCh => "CMPE.ch",  Char,    Compare, 1;
    CmpegCh => "CMPEG.ch", Char,   Compare, 1;
    CmpesCh => "CMPEs.ch", Char,   Compare, 1;
    CmpsCh => "CMPS.ch",  Char,    Compare, 1;
    AndCh  => "AND.ch",   Char,    Logic,   1;
    OrCh   => "OR.ch",    Char,    Logic,   1;
    XorCh  => "XOR.ch",   Char,    Logic,   1;
    NorCh  => "NOR.ch",   Char,    Logic,   1;
    XnorCh => "XNOR.ch",  Char,    Logic,   1;
    // Control.
    Ven    => "VEN",      Control, Control, 1;
    Vds    => "VDS",      Control, Control, 1;
    Pen    => "PEN",      Control, Control, 1;
    Pds    => "PDS",      Control, Control, 1;
    Ften   => "FTEN",     Control, Control, 1;
    Dben   => "DBEN",     Control, Control, 1;
    Chen   => "CHEN",     Control, Control, 1;
    Ftds   => "FTDS",     Control, Control, 1;
    Dbds   => "DBDS",     Control, Control, 1;
    Chds   => "CHDS",     Control, Control, 1;
    Conv   => "CONV",     Control, Control, 1;
    // Object memory.
    ObjN   => "OBJ.n",    Memory,  Obj,     10;
    ObjR   => "OBJ.r",    Memory,  Obj,     5;
}

impl Opcode {
    /// The typed lane an opcode executes in, if any.
    pub fn lane(self) -> Option<SdtKind> {
        match self.category() {
            Category::Integer => Some(SdtKind::Int),
            Category::Float => Some(SdtKind::Float),
            Category::Double => Some(SdtKind::Double),
            Category::Char => Some(SdtKind::Char),
            Category::Control | Category::Memory => None,
        }
    }

    /// The arithmetic function computed by an `Arith`/`Logic`/`Shift` opcode.
    pub fn bin_kind(self) -> Option<BinKind> {
        use Opcode::*;
        Some(match self {
            AddIn | AddFt | AddDb | AddCh => BinKind::Add,
            SubIn | SubFt | SubDb | SubCh => BinKind::Sub,
            MulIn | MulFt | MulDb => BinKind::Mul,
            DivIn | DivFt => BinKind::Div,
            AndIn | AndCh => BinKind::And,
            OrIn | OrCh => BinKind::Or,
            XorIn | XorCh => BinKind::Xor,
            NorIn | NorCh => BinKind::Nor,
            XnorIn | XnorCh => BinKind::Xnor,
            SraIn => BinKind::Sra,
            SrlIn => BinKind::Srl,
            _ => return None,
        })
    }

    /// The fixed predicate of an int or char compare opcode. `CMP.ft` and
    /// `CMP.db` carry their predicate as a mode operand instead.
    pub fn cmp_pred(self) -> Option<CmpPred> {
        use Opcode::*;
        Some(match self {
            CmpeIn | CmpeCh => CmpPred::Eq,
            CmpegIn | CmpegCh => CmpPred::Ge,
            CmpesIn | CmpesCh => CmpPred::Le,
            CmpsIn | CmpsCh => CmpPred::Lt,
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn opcode_count_matches_table() {
        assert_eq!(Opcode::ALL.len(), 60);
        let by_cat = |c: Category| Opcode::ALL.iter().filter(|o| o.category() == c).count();
        assert_eq!(by_cat(Category::Integer), 18);
        assert_eq!(by_cat(Category::Float), 8);
        assert_eq!(by_cat(Category::Double), 7);
        assert_eq!(by_cat(Category::Char), 14);
        assert_eq!(by_cat(Category::Control), 11);
        assert_eq!(by_cat(Category::Memory), 2);
    }

    #[test]
    fn mnemonics_round_trip() {
        for &op in Opcode::ALL {
            assert_eq!(Opcode::from_mnemonic(op.mnemonic()), Some(op));
        }
        assert_eq!(Opcode::from_mnemonic("DIV.db"), None);
        assert_eq!(Opcode::from_mnemonic("MUL.ch"), None);
        assert_eq!(Opcode::from_mnemonic("BR"), None);
    }

    #[test]
    fn mnemonic_case_is_significant() {
        assert_eq!(Opcode::from_mnemonic("CMPEs.in"), Some(Opcode::CmpesIn));
        assert_eq!(Opcode::from_mnemonic("CMPES.in"), None);
    }

    #[test]
    fn lanes_follow_suffix() {
        assert_eq!(Opcode::AddIn.lane(), Some(SdtKind::Int));
        assert_eq!(Opcode::CmpFt.lane(), Some(SdtKind::Float));
        assert_eq!(Opcode::MovDb.lane(), Some(SdtKind::Double));
        assert_eq!(Opcode::XnorCh.lane(), Some(SdtKind::Char));
        assert_eq!(Opcode::Ven.lane(), None);
        assert_eq!(Opcode::ObjN.lane(), None);
    }
}
