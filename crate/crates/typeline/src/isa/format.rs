//! Assembly text emission.
//!
//! [`format_assembly`] is the inverse of [`parse_assembly`]: the printed
//! text parses back to an equal [`Program`], and formatting is
//! deterministic, so recompiling identical input yields identical bytes.
//!
//! A program with no globals and a single `entry` block that halts is
//! printed bare, without block scaffolding, matching the hand-written
//! form of small fixtures. Everything else gets explicit `@block` labels
//! and terminators.

use std::fmt::Write;

use super::{
    AsmBlock, CondRef, Imm, Instruction, Item, MemRef, Operand, Program, RegRef, Scalar,
    Terminator, TradAddr, TradOp, TradReg, TradVal,
};

fn scalar_letter(s: Scalar) -> char {
    match s {
        Scalar::Int => 'i',
        Scalar::Float => 'f',
        Scalar::Double => 'd',
        Scalar::Char => 'c',
        Scalar::Long => 'l',
    }
}

fn fmt_reg(r: RegRef) -> String {
    format!("{}{}", r.lane.reg_prefix(), r.index)
}

fn fmt_imm(imm: Imm) -> String {
    match imm {
        Imm::Int(v) => v.to_string(),
        Imm::Long(v) => v.to_string(),
        Imm::Char(v) => v.to_string(),
        Imm::Float(v) => v.to_string(),
        Imm::Double(v) => v.to_string(),
    }
}

fn fmt_mem(m: MemRef) -> String {
    match m.index {
        None => format!("[{}]", m.base),
        Some(r) => format!("[{}+{}]", m.base, fmt_reg(r)),
    }
}

fn fmt_operand(op: &Operand) -> String {
    match op {
        Operand::Reg(r) => fmt_reg(*r),
        Operand::Imm(i) => fmt_imm(*i),
        Operand::Mem(m) => fmt_mem(*m),
        Operand::ObjHandle(h) => format!("h{h}"),
        Operand::Mask(m) => format!("{:08b}", m.0),
        Operand::VecLen(n) => n.to_string(),
    }
}

fn fmt_instruction(ins: &Instruction) -> String {
    if ins.operands.is_empty() {
        ins.opcode.mnemonic().to_string()
    } else {
        let ops: Vec<String> = ins.operands.iter().map(fmt_operand).collect();
        format!("{} {}", ins.opcode.mnemonic(), ops.join(", "))
    }
}

fn fmt_trad_reg(r: TradReg) -> String {
    match r {
        TradReg::Slot(n) => format!("t{n}"),
        TradReg::Lane(reg) => fmt_reg(reg),
    }
}

fn fmt_trad_val(v: &TradVal) -> String {
    match v {
        TradVal::Reg(r) => fmt_trad_reg(*r),
        TradVal::Imm(i) => fmt_imm(*i),
    }
}

fn fmt_trad_addr(a: &TradAddr) -> String {
    match a {
        TradAddr::Static(m) => fmt_mem(*m),
        TradAddr::Indirect(r) => format!("[{}]", fmt_trad_reg(*r)),
    }
}

fn cmp_name(pred: super::CmpPred) -> &'static str {
    use super::CmpPred::*;
    match pred {
        Eq => "cmpe",
        Ne => "cmpne",
        Lt => "cmps",
        Le => "cmpes",
        Gt => "cmpg",
        Ge => "cmpeg",
    }
}

fn fmt_trad(op: &TradOp) -> String {
    match op {
        TradOp::Ld { ty, dst, addr } => {
            format!("@trad ld.{} {}, {}", scalar_letter(*ty), fmt_trad_reg(*dst), fmt_trad_addr(addr))
        }
        TradOp::St { ty, src, addr } => {
            format!("@trad st.{} {}, {}", scalar_letter(*ty), fmt_trad_val(src), fmt_trad_addr(addr))
        }
        TradOp::Mov { ty, dst, src } => {
            format!("@trad mov.{} {}, {}", scalar_letter(*ty), fmt_trad_reg(*dst), fmt_trad_val(src))
        }
        TradOp::Bin { op, ty, dst, lhs, rhs } => format!(
            "@trad {}.{} {}, {}, {}",
            op.name(),
            scalar_letter(*ty),
            fmt_trad_reg(*dst),
            fmt_trad_val(lhs),
            fmt_trad_val(rhs)
        ),
        TradOp::Cmp { pred, ty, dst, lhs, rhs } => format!(
            "@trad {}.{} {}, {}, {}",
            cmp_name(*pred),
            scalar_letter(*ty),
            fmt_trad_reg(*dst),
            fmt_trad_val(lhs),
            fmt_trad_val(rhs)
        ),
        TradOp::Cvt { from, to, dst, src } => format!(
            "@trad cvt.{}.{} {}, {}",
            scalar_letter(*from),
            scalar_letter(*to),
            fmt_trad_reg(*dst),
            fmt_trad_val(src)
        ),
    }
}

fn fmt_cond(c: CondRef) -> String {
    match c {
        CondRef::Reg(r) => fmt_reg(r),
        CondRef::Trad(n) => format!("t{n}"),
    }
}

fn write_items(out: &mut String, block: &AsmBlock) {
    let mut tag: Option<u32> = None;
    for item in &block.items {
        match item {
            Item::Typed(ins) => {
                if ins.cluster != tag {
                    match ins.cluster {
                        Some(n) => writeln!(out, "@cluster {n}").unwrap(),
                        None => writeln!(out, "@cluster").unwrap(),
                    }
                    tag = ins.cluster;
                }
                writeln!(out, "{}", fmt_instruction(ins)).unwrap();
            }
            Item::Trad(op) => writeln!(out, "{}", fmt_trad(op)).unwrap(),
        }
    }
}

/// True when the program prints without block scaffolding: no globals
/// and exactly one nonempty `entry` block that halts.
fn is_bare(program: &Program) -> bool {
    program.globals.is_empty()
        && program.blocks.len() == 1
        && program.blocks[0].label == "entry"
        && program.blocks[0].term == Terminator::Halt
        && !program.blocks[0].items.is_empty()
}

/// Render a program as assembly text. `parse_assembly` on the result
/// reproduces the program exactly.
pub fn format_assembly(program: &Program) -> String {
    let mut out = String::new();
    for g in &program.globals {
        match g.init {
            Some(init) => writeln!(
                out,
                "@global {} {} {} {} = {}",
                g.name,
                g.kind.name(),
                g.addr,
                g.count,
                fmt_imm(init)
            )
            .unwrap(),
            None => {
                writeln!(out, "@global {} {} {} {}", g.name, g.kind.name(), g.addr, g.count)
                    .unwrap()
            }
        }
    }
    if is_bare(program) {
        write_items(&mut out, &program.blocks[0]);
        return out;
    }
    for block in &program.blocks {
        writeln!(out, "@block {}", block.label).unwrap();
        write_items(&mut out, block);
        match &block.term {
            Terminator::Halt => writeln!(out, "@halt").unwrap(),
            Terminator::Jump(l) => writeln!(out, "@jmp {l}").unwrap(),
            Terminator::Bnz { cond, then_label, else_label } => {
                writeln!(out, "@bnz {}, {}, {}", fmt_cond(*cond), then_label, else_label).unwrap()
            }
        }
    }
    out
}

/// Debug helper: assert the parse/format round trip for a program.
#[cfg(test)]
fn assert_round_trip(program: &Program) {
    let text = format_assembly(program);
    let back = super::parse::parse_assembly(&text)
        .unwrap_or_else(|e| panic!("reparse failed: {e:?}\n{text}"));
    assert_eq!(&back, program, "round trip changed program\n{text}");
}

#[cfg(test)]
mod tests {
    use super::super::{
        parse_assembly, BinKind, CondRef, ConvMask, GlobalSym, Imm, Instruction, MemRef, Opcode,
        Operand, RegRef, Scalar, SdtKind, Terminator, TradOp, TradReg, TradVal,
    };
    use super::*;

    #[test]
    fn empty_program_formats_empty() {
        assert_eq!(format_assembly(&Program::empty()), "");
    }

    #[test]
    fn lone_conv_formats_bare() {
        let mut block = AsmBlock::new("entry");
        block.items.push(Item::Typed(Instruction::new(
            Opcode::Conv,
            vec![Operand::Mask(ConvMask(1))],
        )));
        let p = Program { globals: Vec::new(), blocks: vec![block] };
        assert_eq!(format_assembly(&p), "CONV 00000001\n");
        assert_round_trip(&p);
    }

    #[test]
    fn empty_entry_block_keeps_scaffolding() {
        let p = Program { globals: Vec::new(), blocks: vec![AsmBlock::new("entry")] };
        assert_eq!(format_assembly(&p), "@block entry\n@halt\n");
        assert_round_trip(&p);
    }

    #[test]
    fn cluster_state_changes_emit_directives() {
        let mut block = AsmBlock::new("entry");
        let ld = |idx, slot, tag| {
            let mut i = Instruction::new(
                Opcode::LdIn,
                vec![
                    Operand::Reg(RegRef::new(SdtKind::Int, idx)),
                    Operand::Mem(MemRef::at(slot)),
                ],
            );
            i.cluster = tag;
            Item::Typed(i)
        };
        block.items.push(ld(1, 0, Some(0)));
        block.items.push(ld(2, 1, Some(0)));
        block.items.push(ld(3, 2, None));
        let p = Program { globals: Vec::new(), blocks: vec![block] };
        let text = format_assembly(&p);
        assert_eq!(text, "@cluster 0\nLD.in r1, [0]\nLD.in r2, [1]\n@cluster\nLD.in r3, [2]\n");
        assert_round_trip(&p);
    }

    #[test]
    fn float_immediates_round_trip() {
        for v in [2.5f32, -0.0, f32::INFINITY, f32::NEG_INFINITY, f32::NAN, 1.0e-7, 16777217.0] {
            let mut block = AsmBlock::new("entry");
            block.items.push(Item::Typed(Instruction::new(
                Opcode::MovFt,
                vec![
                    Operand::Reg(RegRef::new(SdtKind::Float, 0)),
                    Operand::Imm(Imm::Float(v)),
                ],
            )));
            let p = Program { globals: Vec::new(), blocks: vec![block] };
            let back = parse_assembly(&format_assembly(&p)).unwrap();
            match &back.blocks[0].items[0] {
                Item::Typed(i) => match i.operands[1] {
                    Operand::Imm(imm) => assert!(imm.bits_eq(Imm::Float(v)), "value {v}"),
                    ref other => panic!("unexpected {other:?}"),
                },
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn full_program_round_trip() {
        let globals = vec![
            GlobalSym { name: "a".into(), kind: Scalar::Int, addr: 0, count: 1, init: Some(Imm::Int(7)) },
            GlobalSym { name: "v.x".into(), kind: Scalar::Double, addr: 1, count: 1, init: None },
            GlobalSym { name: "__spill0".into(), kind: Scalar::Float, addr: 2, count: 1, init: None },
            GlobalSym { name: "buf".into(), kind: Scalar::Char, addr: 3, count: 16, init: Some(Imm::Char(0)) },
        ];
        let mut top = AsmBlock::new("top");
        top.items.push(Item::Typed(Instruction::tagged(
            Opcode::LdIn,
            vec![Operand::Reg(RegRef::new(SdtKind::Int, 1)), Operand::Mem(MemRef::at(0))],
            3,
        )));
        top.items.push(Item::Trad(TradOp::Bin {
            op: BinKind::Mul,
            ty: Scalar::Long,
            dst: TradReg::Slot(0),
            lhs: TradVal::Reg(TradReg::Lane(RegRef::new(SdtKind::Int, 1))),
            rhs: TradVal::Imm(Imm::Long(8)),
        }));
        top.items.push(Item::Typed(Instruction::new(
            Opcode::CmpFt,
            vec![
                Operand::Reg(RegRef::new(SdtKind::Float, 2)),
                Operand::Reg(RegRef::new(SdtKind::Int, 1)),
                Operand::Imm(Imm::Float(0.5)),
                Operand::Imm(Imm::Int(4)),
            ],
        )));
        top.term = Terminator::Bnz {
            cond: CondRef::Reg(RegRef::new(SdtKind::Float, 2)),
            then_label: "top".into(),
            else_label: "done".into(),
        };
        let mut done = AsmBlock::new("done");
        done.items.push(Item::Typed(Instruction::new(
            Opcode::ObjR,
            vec![Operand::ObjHandle(2)],
        )));
        done.term = Terminator::Halt;
        let p = Program { globals, blocks: vec![top, done] };
        assert_round_trip(&p);
    }
}
