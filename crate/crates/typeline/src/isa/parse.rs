//! Assembly text parser.
//!
//! One instruction per line. `;` starts a comment. Directives begin with
//! `@`:
//!
//! * `@global NAME KIND ADDR COUNT [= INIT]` declares a named memory
//!   region.
//! * `@block LABEL` opens a block; `@jmp`, `@bnz`, `@halt` terminate it.
//! * `@cluster N` tags the following instructions as one co-issue group;
//!   bare `@cluster` returns to untagged scalar issue.
//! * `@trad ...` is a traditional-lane operation.
//!
//! A file with no block directives is read as a single entry block that
//! halts at end of input.

use thiserror::Error;

use super::opcode::{Opcode, Role};
use super::{
    AsmBlock, BinKind, CmpPred, CondRef, ConvMask, GlobalSym, Imm, Instruction, Item, MemRef,
    Operand, Program, RegRef, Scalar, SdtKind, Terminator, TradAddr, TradOp, TradReg, TradVal,
    REGS_PER_LANE,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AsmErrorKind {
    #[error("unknown opcode {0:?}")]
    UnknownOpcode(String),
    #[error("malformed operand: {0}")]
    MalformedOperand(String),
    #[error("lane mismatch: {0}")]
    LaneMismatch(String),
    #[error("expected {expected} operands, found {found}")]
    WrongOperandCount { expected: usize, found: usize },
    #[error("malformed directive: {0}")]
    MalformedDirective(String),
    #[error("duplicate block label {0:?}")]
    DuplicateLabel(String),
    #[error("branch to unknown label {0:?}")]
    UnknownLabel(String),
    #[error("instruction after block terminator")]
    AfterTerminator,
}

/// A parse diagnostic with its 1-based source line.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct AsmError {
    pub line: usize,
    pub kind: AsmErrorKind,
}

/// Operand shape expected in one position of an instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slot {
    /// Destination register, lane must equal the opcode lane.
    DstReg,
    /// Source register in the opcode lane or a lane that widens to it,
    /// or an immediate of the opcode's type.
    SrcRegOrImm,
    /// Source register only (no immediate form).
    SrcReg,
    Mem,
    Mask,
    VecLen,
    /// Comparison mode immediate 0..=5 on `CMP.ft` / `CMP.db`.
    CmpMode,
    /// `OBJ.n` destination: int register.
    IntDst,
    /// `OBJ.n` size source: int register.
    IntSrc,
    /// `OBJ.r` source: int register or a literal `h<N>` handle.
    HandleOrIntReg,
}

/// Expected operand slots per opcode.
pub(crate) fn operand_slots(op: Opcode) -> &'static [Slot] {
    use Slot::*;
    match op.role() {
        Role::Load => &[DstReg, Mem],
        Role::Store => &[SrcReg, Mem],
        Role::Move => &[DstReg, SrcRegOrImm],
        Role::Arith | Role::Logic | Role::Shift => &[DstReg, SrcRegOrImm, SrcRegOrImm],
        Role::Compare => match op {
            Opcode::CmpFt | Opcode::CmpDb => &[DstReg, SrcRegOrImm, SrcRegOrImm, CmpMode],
            _ => &[DstReg, SrcRegOrImm, SrcRegOrImm],
        },
        Role::Control => match op {
            Opcode::Ven => &[VecLen],
            Opcode::Conv => &[Mask],
            _ => &[],
        },
        Role::Obj => match op {
            Opcode::ObjN => &[IntDst, IntSrc],
            _ => &[HandleOrIntReg],
        },
    }
}

fn parse_reg(tok: &str) -> Option<RegRef> {
    let mut chars = tok.chars();
    let prefix = chars.next()?;
    let lane = match prefix {
        'r' => SdtKind::Int,
        'f' => SdtKind::Float,
        'd' => SdtKind::Double,
        'c' => SdtKind::Char,
        _ => return None,
    };
    let rest = chars.as_str();
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index: u32 = rest.parse().ok()?;
    if index >= REGS_PER_LANE as u32 {
        return None;
    }
    Some(RegRef { lane, index: index as u8 })
}

fn parse_imm(tok: &str, kind: Scalar) -> Option<Imm> {
    match kind {
        Scalar::Int => tok.parse::<i32>().ok().map(Imm::Int),
        Scalar::Long => tok.parse::<i64>().ok().map(Imm::Long),
        Scalar::Char => tok.parse::<u8>().ok().map(Imm::Char),
        Scalar::Float => tok.parse::<f32>().ok().map(Imm::Float),
        Scalar::Double => tok.parse::<f64>().ok().map(Imm::Double),
    }
}

fn parse_mem(tok: &str) -> Option<MemRef> {
    let inner = tok.strip_prefix('[')?.strip_suffix(']')?;
    match inner.split_once('+') {
        None => inner.trim().parse::<u32>().ok().map(MemRef::at),
        Some((base, idx)) => {
            let base = base.trim().parse::<u32>().ok()?;
            let idx = parse_reg(idx.trim())?;
            if idx.lane != SdtKind::Int {
                return None;
            }
            Some(MemRef::indexed(base, idx))
        }
    }
}

fn parse_mask(tok: &str) -> Option<ConvMask> {
    if tok.len() != 8 || !tok.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    u8::from_str_radix(tok, 2).ok().map(ConvMask)
}

fn parse_operand(tok: &str, slot: Slot, lane: Option<SdtKind>) -> Result<Operand, AsmErrorKind> {
    let malformed = || AsmErrorKind::MalformedOperand(tok.to_string());
    match slot {
        Slot::DstReg => {
            let reg = parse_reg(tok).ok_or_else(malformed)?;
            let lane = lane.expect("typed slot on typed opcode");
            if reg.lane != lane {
                return Err(AsmErrorKind::LaneMismatch(format!(
                    "destination {tok} is not a {} lane register",
                    lane.name()
                )));
            }
            Ok(Operand::Reg(reg))
        }
        Slot::SrcReg | Slot::SrcRegOrImm => {
            if let Some(reg) = parse_reg(tok) {
                let lane = lane.expect("typed slot on typed opcode");
                if !super::conversion_supported(reg.lane, lane) {
                    return Err(AsmErrorKind::LaneMismatch(format!(
                        "source {tok} cannot feed a {} lane instruction",
                        lane.name()
                    )));
                }
                return Ok(Operand::Reg(reg));
            }
            if slot == Slot::SrcRegOrImm {
                let kind = Scalar::from(lane.expect("typed slot on typed opcode"));
                if let Some(imm) = parse_imm(tok, kind) {
                    return Ok(Operand::Imm(imm));
                }
            }
            Err(malformed())
        }
        Slot::Mem => parse_mem(tok).map(Operand::Mem).ok_or_else(malformed),
        Slot::Mask => parse_mask(tok).map(Operand::Mask).ok_or_else(malformed),
        Slot::VecLen => {
            let n: u8 = tok.parse().map_err(|_| malformed())?;
            if n == 0 || n > 16 {
                return Err(malformed());
            }
            Ok(Operand::VecLen(n))
        }
        Slot::CmpMode => {
            let n: u8 = tok.parse().map_err(|_| malformed())?;
            if CmpPred::from_mode(n).is_none() {
                return Err(malformed());
            }
            Ok(Operand::Imm(Imm::Int(n as i32)))
        }
        Slot::IntDst | Slot::IntSrc => {
            let reg = parse_reg(tok).ok_or_else(malformed)?;
            if reg.lane != SdtKind::Int {
                return Err(AsmErrorKind::LaneMismatch(format!(
                    "{tok} must be an int lane register"
                )));
            }
            Ok(Operand::Reg(reg))
        }
        Slot::HandleOrIntReg => {
            if let Some(rest) = tok.strip_prefix('h') {
                if let Ok(h) = rest.parse::<u64>() {
                    return Ok(Operand::ObjHandle(h));
                }
            }
            let reg = parse_reg(tok).ok_or_else(malformed)?;
            if reg.lane != SdtKind::Int {
                return Err(AsmErrorKind::LaneMismatch(format!(
                    "{tok} must be an int lane register or handle"
                )));
            }
            Ok(Operand::Reg(reg))
        }
    }
}

fn parse_instruction(line: &str) -> Result<Instruction, AsmErrorKind> {
    let line = line.trim();
    let (mnemonic, rest) = match line.split_once(char::is_whitespace) {
        Some((m, r)) => (m, r.trim()),
        None => (line, ""),
    };
    let opcode = Opcode::from_mnemonic(mnemonic)
        .ok_or_else(|| AsmErrorKind::UnknownOpcode(mnemonic.to_string()))?;
    let slots = operand_slots(opcode);
    let toks: Vec<&str> = if rest.is_empty() {
        Vec::new()
    } else {
        rest.split(',').map(str::trim).collect()
    };
    if toks.len() != slots.len() {
        return Err(AsmErrorKind::WrongOperandCount { expected: slots.len(), found: toks.len() });
    }
    let mut operands = Vec::with_capacity(slots.len());
    for (tok, &slot) in toks.iter().zip(slots) {
        operands.push(parse_operand(tok, slot, opcode.lane())?);
    }
    Ok(Instruction::new(opcode, operands))
}

fn scalar_letter(s: &str) -> Option<Scalar> {
    match s {
        "i" => Some(Scalar::Int),
        "f" => Some(Scalar::Float),
        "d" => Some(Scalar::Double),
        "c" => Some(Scalar::Char),
        "l" => Some(Scalar::Long),
        _ => None,
    }
}

fn parse_trad_reg(tok: &str) -> Option<TradReg> {
    if let Some(rest) = tok.strip_prefix('t') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return rest.parse::<u32>().ok().map(TradReg::Slot);
        }
    }
    parse_reg(tok).map(TradReg::Lane)
}

fn parse_trad_val(tok: &str, ty: Scalar) -> Option<TradVal> {
    if let Some(r) = parse_trad_reg(tok) {
        return Some(TradVal::Reg(r));
    }
    parse_imm(tok, ty).map(TradVal::Imm)
}

fn parse_trad_addr(tok: &str) -> Option<TradAddr> {
    let inner = tok.strip_prefix('[')?.strip_suffix(']')?;
    if let Some(r) = parse_trad_reg(inner.trim()) {
        if matches!(r, TradReg::Slot(_)) {
            return Some(TradAddr::Indirect(r));
        }
    }
    parse_mem(tok).map(TradAddr::Static)
}

fn parse_trad(rest: &str) -> Result<TradOp, AsmErrorKind> {
    let malformed = || AsmErrorKind::MalformedDirective(format!("@trad {rest}"));
    let (head, args) = match rest.split_once(char::is_whitespace) {
        Some((h, a)) => (h, a.trim()),
        None => (rest, ""),
    };
    let toks: Vec<&str> =
        if args.is_empty() { Vec::new() } else { args.split(',').map(str::trim).collect() };
    let mut parts = head.split('.');
    let name = parts.next().ok_or_else(malformed)?;

    if name == "cvt" {
        let from = parts.next().and_then(scalar_letter).ok_or_else(malformed)?;
        let to = parts.next().and_then(scalar_letter).ok_or_else(malformed)?;
        if parts.next().is_some() || toks.len() != 2 {
            return Err(malformed());
        }
        let dst = parse_trad_reg(toks[0]).ok_or_else(malformed)?;
        let src = parse_trad_val(toks[1], from).ok_or_else(malformed)?;
        return Ok(TradOp::Cvt { from, to, dst, src });
    }

    let ty = parts.next().and_then(scalar_letter).ok_or_else(malformed)?;
    if parts.next().is_some() {
        return Err(malformed());
    }

    let bin = |op: BinKind| -> Result<TradOp, AsmErrorKind> {
        if toks.len() != 3 {
            return Err(malformed());
        }
        Ok(TradOp::Bin {
            op,
            ty,
            dst: parse_trad_reg(toks[0]).ok_or_else(malformed)?,
            lhs: parse_trad_val(toks[1], ty).ok_or_else(malformed)?,
            rhs: parse_trad_val(toks[2], ty).ok_or_else(malformed)?,
        })
    };
    let cmp = |pred: CmpPred| -> Result<TradOp, AsmErrorKind> {
        if toks.len() != 3 {
            return Err(malformed());
        }
        Ok(TradOp::Cmp {
            pred,
            ty,
            dst: parse_trad_reg(toks[0]).ok_or_else(malformed)?,
            lhs: parse_trad_val(toks[1], ty).ok_or_else(malformed)?,
            rhs: parse_trad_val(toks[2], ty).ok_or_else(malformed)?,
        })
    };

    match name {
        "ld" => {
            if toks.len() != 2 {
                return Err(malformed());
            }
            Ok(TradOp::Ld {
                ty,
                dst: parse_trad_reg(toks[0]).ok_or_else(malformed)?,
                addr: parse_trad_addr(toks[1]).ok_or_else(malformed)?,
            })
        }
        "st" => {
            if toks.len() != 2 {
                return Err(malformed());
            }
            Ok(TradOp::St {
                ty,
                src: parse_trad_val(toks[0], ty).ok_or_else(malformed)?,
                addr: parse_trad_addr(toks[1]).ok_or_else(malformed)?,
            })
        }
        "mov" => {
            if toks.len() != 2 {
                return Err(malformed());
            }
            Ok(TradOp::Mov {
                ty,
                dst: parse_trad_reg(toks[0]).ok_or_else(malformed)?,
                src: parse_trad_val(toks[1], ty).ok_or_else(malformed)?,
            })
        }
        "add" => bin(BinKind::Add),
        "sub" => bin(BinKind::Sub),
        "mul" => bin(BinKind::Mul),
        "div" => bin(BinKind::Div),
        "and" => bin(BinKind::And),
        "or" => bin(BinKind::Or),
        "xor" => bin(BinKind::Xor),
        "nor" => bin(BinKind::Nor),
        "xnor" => bin(BinKind::Xnor),
        "sra" => bin(BinKind::Sra),
        "srl" => bin(BinKind::Srl),
        "cmpe" => cmp(CmpPred::Eq),
        "cmpne" => cmp(CmpPred::Ne),
        "cmpeg" => cmp(CmpPred::Ge),
        "cmpes" => cmp(CmpPred::Le),
        "cmps" => cmp(CmpPred::Lt),
        "cmpg" => cmp(CmpPred::Gt),
        _ => Err(malformed()),
    }
}

fn parse_global(rest: &str, line: usize) -> Result<GlobalSym, AsmError> {
    let err = |msg: &str| AsmError {
        line,
        kind: AsmErrorKind::MalformedDirective(format!("@global: {msg}")),
    };
    let toks: Vec<&str> = rest.split_whitespace().collect();
    if toks.len() != 4 && toks.len() != 6 {
        return Err(err("expected NAME KIND ADDR COUNT [= INIT]"));
    }
    let name = toks[0].to_string();
    let kind = Scalar::from_name(toks[1]).ok_or_else(|| err("bad kind"))?;
    let addr: u32 = toks[2].parse().map_err(|_| err("bad address"))?;
    let count: u32 = toks[3].parse().map_err(|_| err("bad count"))?;
    if count == 0 {
        return Err(err("count must be positive"));
    }
    let init = if toks.len() == 6 {
        if toks[4] != "=" {
            return Err(err("expected ="));
        }
        Some(parse_imm(toks[5], kind).ok_or_else(|| err("bad initializer"))?)
    } else {
        None
    };
    Ok(GlobalSym { name, kind, addr, count, init })
}

fn parse_cond(tok: &str) -> Option<CondRef> {
    if let Some(rest) = tok.strip_prefix('t') {
        if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
            return rest.parse::<u32>().ok().map(CondRef::Trad);
        }
    }
    parse_reg(tok).map(CondRef::Reg)
}

/// Parse assembly text into a [`Program`]. All line diagnostics are
/// collected; the program is returned only when there are none.
pub fn parse_assembly(text: &str) -> Result<Program, Vec<AsmError>> {
    let mut errors = Vec::new();
    let mut program = Program::empty();
    let mut current: Option<AsmBlock> = None;
    let mut terminated = false;
    let mut tag: Option<u32> = None;

    let finish = |blk: Option<AsmBlock>, program: &mut Program, errors: &mut Vec<AsmError>| {
        if let Some(b) = blk {
            if program.blocks.iter().any(|p| p.label == b.label) {
                errors.push(AsmError {
                    line: 0,
                    kind: AsmErrorKind::DuplicateLabel(b.label.clone()),
                });
            }
            program.blocks.push(b);
        }
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.split_once(';') {
            Some((code, _)) => code.trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }

        if let Some(rest) = line.strip_prefix('@') {
            let (word, args) = match rest.split_once(char::is_whitespace) {
                Some((w, a)) => (w, a.trim()),
                None => (rest, ""),
            };
            match word {
                "global" => match parse_global(args, line_no) {
                    Ok(g) => program.globals.push(g),
                    Err(e) => errors.push(e),
                },
                "block" => {
                    finish(current.take(), &mut program, &mut errors);
                    if args.is_empty() || args.split_whitespace().count() != 1 {
                        errors.push(AsmError {
                            line: line_no,
                            kind: AsmErrorKind::MalformedDirective("@block LABEL".into()),
                        });
                    } else {
                        current = Some(AsmBlock::new(args));
                    }
                    terminated = false;
                    tag = None;
                }
                "cluster" => {
                    if args.is_empty() {
                        tag = None;
                    } else {
                        match args.parse::<u32>() {
                            Ok(n) => tag = Some(n),
                            Err(_) => errors.push(AsmError {
                                line: line_no,
                                kind: AsmErrorKind::MalformedDirective(
                                    "@cluster takes an integer or nothing".into(),
                                ),
                            }),
                        }
                    }
                }
                "trad" => {
                    if terminated {
                        errors.push(AsmError { line: line_no, kind: AsmErrorKind::AfterTerminator });
                        continue;
                    }
                    match parse_trad(args) {
                        Ok(op) => {
                            current
                                .get_or_insert_with(|| AsmBlock::new("entry"))
                                .items
                                .push(Item::Trad(op));
                        }
                        Err(kind) => errors.push(AsmError { line: line_no, kind }),
                    }
                }
                "jmp" | "halt" | "bnz" => {
                    if terminated {
                        errors.push(AsmError { line: line_no, kind: AsmErrorKind::AfterTerminator });
                        continue;
                    }
                    let term = match word {
                        "halt" => Some(Terminator::Halt),
                        "jmp" => {
                            if args.split_whitespace().count() == 1 {
                                Some(Terminator::Jump(args.to_string()))
                            } else {
                                None
                            }
                        }
                        _ => {
                            let toks: Vec<&str> = args.split(',').map(str::trim).collect();
                            if toks.len() == 3 {
                                parse_cond(toks[0]).map(|cond| Terminator::Bnz {
                                    cond,
                                    then_label: toks[1].to_string(),
                                    else_label: toks[2].to_string(),
                                })
                            } else {
                                None
                            }
                        }
                    };
                    match term {
                        Some(t) => {
                            current.get_or_insert_with(|| AsmBlock::new("entry")).term = t;
                            terminated = true;
                            tag = None;
                        }
                        None => errors.push(AsmError {
                            line: line_no,
                            kind: AsmErrorKind::MalformedDirective(format!("@{word} {args}")),
                        }),
                    }
                }
                other => errors.push(AsmError {
                    line: line_no,
                    kind: AsmErrorKind::MalformedDirective(format!("@{other}")),
                }),
            }
            continue;
        }

        if terminated {
            errors.push(AsmError { line: line_no, kind: AsmErrorKind::AfterTerminator });
            continue;
        }
        match parse_instruction(line) {
            Ok(mut ins) => {
                ins.cluster = tag;
                current
                    .get_or_insert_with(|| AsmBlock::new("entry"))
                    .items
                    .push(Item::Typed(ins));
            }
            Err(kind) => errors.push(AsmError { line: line_no, kind }),
        }
    }
    finish(current.take(), &mut program, &mut errors);

    // Branch targets must exist.
    for block in &program.blocks {
        let labels: Vec<&String> = match &block.term {
            Terminator::Halt => Vec::new(),
            Terminator::Jump(l) => vec![l],
            Terminator::Bnz { then_label, else_label, .. } => vec![then_label, else_label],
        };
        for label in labels {
            if !program.blocks.iter().any(|b| &b.label == label) {
                errors.push(AsmError {
                    line: 0,
                    kind: AsmErrorKind::UnknownLabel(label.clone()),
                });
            }
        }
    }

    if errors.is_empty() {
        Ok(program)
    } else {
        Err(errors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_instr(text: &str) -> Instruction {
        let p = parse_assembly(text).expect("parse");
        assert_eq!(p.blocks.len(), 1);
        match &p.blocks[0].items[0] {
            Item::Typed(i) => i.clone(),
            Item::Trad(_) => panic!("expected typed instruction"),
        }
    }

    fn one_error(text: &str) -> AsmErrorKind {
        let errs = parse_assembly(text).expect_err("should fail");
        errs[0].kind.clone()
    }

    #[test]
    fn parses_int_add() {
        let i = one_instr("ADD.in r3, r1, r2");
        assert_eq!(i.opcode, Opcode::AddIn);
        assert_eq!(i.operands[0], Operand::Reg(RegRef::new(SdtKind::Int, 3)));
        assert_eq!(i.operands[2], Operand::Reg(RegRef::new(SdtKind::Int, 2)));
    }

    #[test]
    fn rejects_unknown_mnemonic() {
        assert_eq!(one_error("DIV.db d1, d2, d3"), AsmErrorKind::UnknownOpcode("DIV.db".into()));
    }

    #[test]
    fn rejects_wrong_dest_lane() {
        assert!(matches!(one_error("ADD.in f3, r1, r2"), AsmErrorKind::LaneMismatch(_)));
    }

    #[test]
    fn rejects_narrowing_source() {
        assert!(matches!(one_error("ADD.in r3, f1, r2"), AsmErrorKind::LaneMismatch(_)));
    }

    #[test]
    fn accepts_widening_source() {
        let i = one_instr("DIV.ft f3, r1, 2.5");
        assert_eq!(i.operands[1], Operand::Reg(RegRef::new(SdtKind::Int, 1)));
        assert_eq!(i.operands[2], Operand::Imm(Imm::Float(2.5)));
    }

    #[test]
    fn parses_loads_and_stores() {
        let i = one_instr("LD.in r1, [5]");
        assert_eq!(i.operands[1], Operand::Mem(MemRef::at(5)));
        let i = one_instr("ST.ft f2, [8+r3]");
        assert_eq!(
            i.operands[1],
            Operand::Mem(MemRef::indexed(8, RegRef::new(SdtKind::Int, 3)))
        );
    }

    #[test]
    fn parses_conv_mask() {
        let i = one_instr("CONV 00000001");
        assert_eq!(i.operands[0], Operand::Mask(ConvMask(1)));
        assert!(matches!(one_error("CONV 0001"), AsmErrorKind::MalformedOperand(_)));
    }

    #[test]
    fn parses_vector_length() {
        let i = one_instr("VEN 4");
        assert_eq!(i.operands[0], Operand::VecLen(4));
        assert!(matches!(one_error("VEN 17"), AsmErrorKind::MalformedOperand(_)));
        assert!(matches!(one_error("VEN 0"), AsmErrorKind::MalformedOperand(_)));
    }

    #[test]
    fn parses_obj_ops() {
        let i = one_instr("OBJ.n r1, r2");
        assert_eq!(i.opcode, Opcode::ObjN);
        let i = one_instr("OBJ.r h7");
        assert_eq!(i.operands[0], Operand::ObjHandle(7));
        assert!(matches!(one_error("OBJ.n r1, 40"), AsmErrorKind::MalformedOperand(_)));
    }

    #[test]
    fn register_index_bounded() {
        assert!(matches!(one_error("MOV.in r32, 1"), AsmErrorKind::MalformedOperand(_)));
    }

    #[test]
    fn cluster_tags_apply_until_cleared() {
        let text = "@cluster 0\nLD.in r1, [0]\nLD.in r2, [1]\n@cluster\nST.in r1, [2]";
        let p = parse_assembly(text).unwrap();
        let tags: Vec<Option<u32>> = p.blocks[0]
            .items
            .iter()
            .map(|i| match i {
                Item::Typed(ins) => ins.cluster,
                _ => None,
            })
            .collect();
        assert_eq!(tags, vec![Some(0), Some(0), None]);
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let p = parse_assembly("; header\n\nADD.in r1, r2, r3 ; trailing\n").unwrap();
        assert_eq!(p.blocks[0].items.len(), 1);
    }

    #[test]
    fn parses_globals() {
        let p = parse_assembly("@global x int 0 1 = 3\n@global a float 1 8").unwrap();
        assert_eq!(p.globals.len(), 2);
        assert_eq!(p.globals[0].init, Some(Imm::Int(3)));
        assert_eq!(p.globals[1].count, 8);
        assert_eq!(p.memory_extent(), 9);
    }

    #[test]
    fn parses_blocks_and_branches() {
        let text = "@block top\nADD.in r1, r1, 1\n@bnz r1, top, done\n@block done\n@halt";
        let p = parse_assembly(text).unwrap();
        assert_eq!(p.blocks.len(), 2);
        assert!(matches!(p.blocks[0].term, Terminator::Bnz { .. }));
    }

    #[test]
    fn branch_to_missing_label_fails() {
        let errs = parse_assembly("@jmp nowhere").unwrap_err();
        assert!(errs.iter().any(|e| matches!(e.kind, AsmErrorKind::UnknownLabel(_))));
    }

    #[test]
    fn parses_trad_ops() {
        let text = "@trad add.l t1, t2, 5\n@trad cvt.f.i r3, f2\n@trad ld.i r4, [t1]";
        let p = parse_assembly(text).unwrap();
        assert_eq!(p.blocks[0].items.len(), 3);
        match &p.blocks[0].items[0] {
            Item::Trad(TradOp::Bin { op: BinKind::Add, ty: Scalar::Long, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_text_is_empty_program() {
        let p = parse_assembly("").unwrap();
        assert_eq!(p, Program::empty());
    }
}
