//! Structural validation of programs.
//!
//! Checks every instruction against its operand shape and lane rules,
//! and every cluster-tagged group against the co-issue composition
//! rules: load clusters hold 2..=16 hazard-free same-type loads, op
//! clusters hold 2..=4 hazard-free compute ops whose lanes are either
//! all the same or all pairwise distinct, plus at most one CONV.
//! Violations are data, not errors; an empty list means the program is
//! well formed.

use super::opcode::{Opcode, Role};
use super::parse::{operand_slots, Slot};
use super::{Instruction, Item, Operand, Program, RegRef, SdtKind, REGS_PER_LANE};

/// A broken rule at one instruction. `index` is the position of the
/// instruction in the flattened item list of the program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub rule: String,
}

impl Violation {
    fn new(index: usize, rule: impl Into<String>) -> Violation {
        Violation { index, rule: rule.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "instruction {}: {}", self.index, self.rule)
    }
}

/// Cluster size limits. The defaults are the hardware limits; larger
/// values are only reachable through experimental configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterCaps {
    pub max_load: usize,
    pub max_op: usize,
}

impl Default for ClusterCaps {
    fn default() -> ClusterCaps {
        ClusterCaps { max_load: 16, max_op: 4 }
    }
}

/// Validate against the hardware cluster caps (16 loads, 4 ops).
pub fn validate(program: &Program) -> Vec<Violation> {
    validate_with_caps(program, ClusterCaps::default())
}

/// Validate with explicit cluster caps, for experimental configurations.
pub fn validate_with_caps(program: &Program, caps: ClusterCaps) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut index = 0usize;
    for block in &program.blocks {
        let base = index;
        for (offset, item) in block.items.iter().enumerate() {
            if let Item::Typed(ins) = item {
                check_instruction(ins, base + offset, &mut out);
            }
        }
        check_clusters(&block.items, base, caps, &mut out);
        index += block.items.len();
    }
    out
}

fn check_instruction(ins: &Instruction, index: usize, out: &mut Vec<Violation>) {
    let slots = operand_slots(ins.opcode);
    if ins.operands.len() != slots.len() {
        out.push(Violation::new(
            index,
            format!(
                "{} takes {} operands, found {}",
                ins.opcode.mnemonic(),
                slots.len(),
                ins.operands.len()
            ),
        ));
        return;
    }
    for (operand, &slot) in ins.operands.iter().zip(slots) {
        check_operand(ins, operand, slot, index, out);
    }
}

fn check_reg_index(reg: RegRef, index: usize, out: &mut Vec<Violation>) {
    if reg.index >= REGS_PER_LANE {
        out.push(Violation::new(index, "register index out of range"));
    }
}

fn check_operand(
    ins: &Instruction,
    operand: &Operand,
    slot: Slot,
    index: usize,
    out: &mut Vec<Violation>,
) {
    let lane = ins.opcode.lane();
    match slot {
        Slot::DstReg => match operand {
            Operand::Reg(r) => {
                check_reg_index(*r, index, out);
                if Some(r.lane) != lane {
                    out.push(Violation::new(index, "destination lane does not match opcode suffix"));
                }
            }
            _ => out.push(Violation::new(index, "expected a destination register")),
        },
        Slot::SrcReg | Slot::SrcRegOrImm => match operand {
            Operand::Reg(r) => {
                check_reg_index(*r, index, out);
                let lane = lane.expect("typed slot on typed opcode");
                if !super::conversion_supported(r.lane, lane) {
                    out.push(Violation::new(index, "source lane cannot widen to opcode lane"));
                }
            }
            Operand::Imm(imm) if slot == Slot::SrcRegOrImm => {
                let lane = lane.expect("typed slot on typed opcode");
                if imm.scalar() != super::Scalar::from(lane) {
                    out.push(Violation::new(index, "immediate type does not match opcode suffix"));
                }
            }
            _ => out.push(Violation::new(index, "expected a source register or immediate")),
        },
        Slot::Mem => match operand {
            Operand::Mem(m) => {
                if let Some(r) = m.index {
                    check_reg_index(r, index, out);
                    if r.lane != SdtKind::Int {
                        out.push(Violation::new(index, "memory index must be an int register"));
                    }
                }
            }
            _ => out.push(Violation::new(index, "expected a memory operand")),
        },
        Slot::Mask => match operand {
            Operand::Mask(m) => {
                if m.reserved_bits_set() {
                    out.push(Violation::new(index, "conversion mask uses reserved bits"));
                }
            }
            _ => out.push(Violation::new(index, "expected a conversion mask")),
        },
        Slot::VecLen => match operand {
            Operand::VecLen(n) => {
                if *n == 0 || *n > 16 {
                    out.push(Violation::new(index, "vector length out of range"));
                }
            }
            _ => out.push(Violation::new(index, "expected a vector length")),
        },
        Slot::CmpMode => match operand {
            Operand::Imm(super::Imm::Int(m)) if (0..=5).contains(m) => {}
            _ => out.push(Violation::new(index, "comparison mode must be 0..=5")),
        },
        Slot::IntDst | Slot::IntSrc => match operand {
            Operand::Reg(r) => {
                check_reg_index(*r, index, out);
                if r.lane != SdtKind::Int {
                    out.push(Violation::new(index, "expected an int lane register"));
                }
            }
            _ => out.push(Violation::new(index, "expected an int lane register")),
        },
        Slot::HandleOrIntReg => match operand {
            Operand::ObjHandle(_) => {}
            Operand::Reg(r) => {
                check_reg_index(*r, index, out);
                if r.lane != SdtKind::Int {
                    out.push(Violation::new(index, "expected an int lane register or handle"));
                }
            }
            _ => out.push(Violation::new(index, "expected an int lane register or handle")),
        },
    }
}

/// Register and memory footprint of one instruction, for hazard checks.
#[derive(Debug, Default)]
struct Access {
    reg_reads: Vec<RegRef>,
    reg_writes: Vec<RegRef>,
    mem_reads: Vec<u32>,
    mem_writes: Vec<u32>,
}

fn access(ins: &Instruction) -> Access {
    let mut acc = Access::default();
    for (operand, &slot) in ins.operands.iter().zip(operand_slots(ins.opcode)) {
        match (slot, operand) {
            (Slot::DstReg | Slot::IntDst, Operand::Reg(r)) => acc.reg_writes.push(*r),
            (
                Slot::SrcReg | Slot::SrcRegOrImm | Slot::IntSrc | Slot::HandleOrIntReg,
                Operand::Reg(r),
            ) => acc.reg_reads.push(*r),
            (Slot::Mem, Operand::Mem(m)) => {
                if let Some(r) = m.index {
                    acc.reg_reads.push(r);
                }
                if ins.opcode.role() == Role::Store {
                    acc.mem_writes.push(m.base);
                } else {
                    acc.mem_reads.push(m.base);
                }
            }
            _ => {}
        }
    }
    acc
}

fn hazard(a: &Access, b: &Access) -> bool {
    let overlap = |xs: &[RegRef], ys: &[RegRef]| xs.iter().any(|x| ys.contains(x));
    let mem_overlap = |xs: &[u32], ys: &[u32]| xs.iter().any(|x| ys.contains(x));
    overlap(&a.reg_writes, &b.reg_reads)
        || overlap(&a.reg_reads, &b.reg_writes)
        || overlap(&a.reg_writes, &b.reg_writes)
        || mem_overlap(&a.mem_writes, &b.mem_reads)
        || mem_overlap(&a.mem_reads, &b.mem_writes)
        || mem_overlap(&a.mem_writes, &b.mem_writes)
}

/// Split a block's items into runs of consecutive typed instructions
/// sharing one cluster tag, and check each run's composition.
fn check_clusters(items: &[Item], base: usize, caps: ClusterCaps, out: &mut Vec<Violation>) {
    let mut i = 0usize;
    while i < items.len() {
        let tag = match &items[i] {
            Item::Typed(ins) => ins.cluster,
            Item::Trad(_) => None,
        };
        if tag.is_none() {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < items.len() {
            match &items[j] {
                Item::Typed(ins) if ins.cluster == tag => j += 1,
                _ => break,
            }
        }
        if j - i >= 2 {
            let members: Vec<(usize, &Instruction)> = (i..j)
                .map(|k| match &items[k] {
                    Item::Typed(ins) => (base + k, ins),
                    Item::Trad(_) => unreachable!("run contains typed items only"),
                })
                .collect();
            check_group(&members, caps, out);
        }
        i = j;
    }
}

fn check_group(members: &[(usize, &Instruction)], caps: ClusterCaps, out: &mut Vec<Violation>) {
    let first = members[0].0;
    let mut convs = 0usize;
    let mut data: Vec<(usize, &Instruction)> = Vec::new();
    for &(idx, ins) in members {
        if ins.opcode == Opcode::Conv {
            convs += 1;
            if convs > 1 {
                out.push(Violation::new(idx, "more than one CONV in a cluster"));
            }
            continue;
        }
        match ins.opcode.role() {
            Role::Control => {
                out.push(Violation::new(idx, "control instruction inside a cluster"));
                continue;
            }
            Role::Store => {
                out.push(Violation::new(idx, "store inside a cluster"));
                continue;
            }
            Role::Move => {
                out.push(Violation::new(idx, "move inside a cluster"));
                continue;
            }
            Role::Obj => {
                out.push(Violation::new(idx, "object operation inside a cluster"));
                continue;
            }
            Role::Load | Role::Arith | Role::Logic | Role::Shift | Role::Compare => {
                data.push((idx, ins));
            }
        }
    }
    if data.is_empty() {
        return;
    }

    let loads = data.iter().filter(|(_, ins)| ins.opcode.role() == Role::Load).count();
    if loads > 0 {
        if loads != data.len() {
            out.push(Violation::new(first, "loads mixed with compute in a cluster"));
            return;
        }
        if convs > 0 {
            out.push(Violation::new(first, "conversion inside a load cluster"));
        }
        if data.len() > caps.max_load {
            out.push(Violation::new(first, format!("load cluster exceeds {}", caps.max_load)));
        }
        let lane = data[0].1.opcode.lane();
        if data.iter().any(|(_, ins)| ins.opcode.lane() != lane) {
            out.push(Violation::new(first, "load cluster mixes types"));
        }
    } else {
        if data.len() > caps.max_op {
            out.push(Violation::new(first, format!("op cluster exceeds {}", caps.max_op)));
        }
        let lanes: Vec<SdtKind> =
            data.iter().filter_map(|(_, ins)| ins.opcode.lane()).collect();
        let all_same = lanes.windows(2).all(|w| w[0] == w[1]);
        let all_distinct = (0..lanes.len())
            .all(|a| (a + 1..lanes.len()).all(|b| lanes[a] != lanes[b]));
        if !(all_same || all_distinct) {
            out.push(Violation::new(
                first,
                "cluster types neither all-same nor all-distinct",
            ));
        }
    }

    let accesses: Vec<(usize, Access)> =
        data.iter().map(|&(idx, ins)| (idx, access(ins))).collect();
    for a in 0..accesses.len() {
        for b in a + 1..accesses.len() {
            if hazard(&accesses[a].1, &accesses[b].1) {
                out.push(Violation::new(
                    accesses[b].0,
                    "hazard between clustered instructions",
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_assembly, Imm, MemRef, Operand, Program, RegRef};
    use super::*;

    fn check(text: &str) -> Vec<Violation> {
        validate(&parse_assembly(text).expect("parse"))
    }

    fn tagged_block(lines: &[&str]) -> String {
        let mut s = String::from("@cluster 0\n");
        for l in lines {
            s.push_str(l);
            s.push('\n');
        }
        s
    }

    #[test]
    fn clean_programs_have_no_violations() {
        assert!(check("ADD.in r3, r1, r2\nST.in r3, [0]").is_empty());
    }

    #[test]
    fn mixed_partial_types_rejected() {
        let v = check(&tagged_block(&[
            "ADD.in r3, r1, r2",
            "SUB.in r4, r1, r2",
            "ADD.ft f3, f1, f2",
        ]));
        assert!(v.iter().any(|v| v.rule == "cluster types neither all-same nor all-distinct"));
    }

    #[test]
    fn all_distinct_types_accepted() {
        let v = check(&tagged_block(&[
            "ADD.in r3, r1, r2",
            "ADD.ft f3, f1, f2",
            "ADD.db d3, d1, d2",
            "ADD.ch c3, c1, c2",
        ]));
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn seventeen_loads_rejected() {
        let lines: Vec<String> =
            (0..17).map(|i| format!("LD.in r{}, [{}]", i % 30, i)).collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        let v = check(&tagged_block(&refs));
        assert!(v.iter().any(|v| v.rule == "load cluster exceeds 16"), "{v:?}");
    }

    #[test]
    fn sixteen_loads_accepted() {
        let lines: Vec<String> = (0..16).map(|i| format!("LD.in r{i}, [{i}]")).collect();
        let refs: Vec<&str> = lines.iter().map(String::as_str).collect();
        assert!(check(&tagged_block(&refs)).is_empty());
    }

    #[test]
    fn fig5_style_op_cluster_accepted() {
        let v = check(&tagged_block(&[
            "CONV 00000001",
            "ADD.in r3, r1, r2",
            "DIV.ft f1, r4, 2.5",
        ]));
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn op_cluster_of_five_rejected() {
        let v = check(&tagged_block(&[
            "ADD.in r1, r10, r11",
            "SUB.in r2, r10, r11",
            "AND.in r3, r10, r11",
            "OR.in r4, r10, r11",
            "XOR.in r5, r10, r11",
        ]));
        assert!(v.iter().any(|v| v.rule == "op cluster exceeds 4"), "{v:?}");
    }

    #[test]
    fn raised_caps_accept_larger_op_clusters() {
        let p = parse_assembly(&tagged_block(&[
            "ADD.in r1, r10, r11",
            "SUB.in r2, r10, r11",
            "AND.in r3, r10, r11",
            "OR.in r4, r10, r11",
            "XOR.in r5, r10, r11",
        ]))
        .unwrap();
        let caps = ClusterCaps { max_load: 16, max_op: 8 };
        assert!(validate_with_caps(&p, caps).is_empty());
    }

    #[test]
    fn raw_hazard_rejected() {
        let v = check(&tagged_block(&["ADD.in r3, r1, r2", "SUB.in r4, r3, r2"]));
        assert!(v.iter().any(|v| v.rule == "hazard between clustered instructions"));
    }

    #[test]
    fn waw_hazard_rejected() {
        let v = check(&tagged_block(&["LD.in r1, [0]", "LD.in r1, [1]"]));
        assert!(v.iter().any(|v| v.rule == "hazard between clustered instructions"));
    }

    #[test]
    fn read_read_is_not_a_hazard() {
        let v = check(&tagged_block(&["ADD.in r3, r1, r2", "SUB.in r4, r1, r2"]));
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn loads_mixed_with_compute_rejected() {
        let v = check(&tagged_block(&["LD.in r1, [0]", "ADD.in r3, r4, r5"]));
        assert!(v.iter().any(|v| v.rule == "loads mixed with compute in a cluster"));
    }

    #[test]
    fn store_in_cluster_rejected() {
        let v = check(&tagged_block(&["ADD.in r3, r1, r2", "ST.in r4, [0]"]));
        assert!(v.iter().any(|v| v.rule == "store inside a cluster"));
    }

    #[test]
    fn two_conv_rejected() {
        let v = check(&tagged_block(&["CONV 00000001", "CONV 00000011", "ADD.in r1, r2, r3", "SUB.in r4, r2, r3"]));
        assert!(v.iter().any(|v| v.rule == "more than one CONV in a cluster"));
    }

    #[test]
    fn single_member_tag_is_scalar() {
        assert!(check("@cluster 0\nST.in r1, [0]").is_empty());
    }

    #[test]
    fn reserved_mask_bits_rejected() {
        let v = check("CONV 10000001");
        assert!(v.iter().any(|v| v.rule == "conversion mask uses reserved bits"));
    }

    #[test]
    fn programmatic_bad_operands_caught() {
        use super::super::{AsmBlock, Instruction, Item, Opcode, SdtKind};
        let mut block = AsmBlock::new("entry");
        block.items.push(Item::Typed(Instruction::new(
            Opcode::Ven,
            vec![Operand::VecLen(17)],
        )));
        block.items.push(Item::Typed(Instruction::new(
            Opcode::LdIn,
            vec![
                Operand::Reg(RegRef::new(SdtKind::Int, 40)),
                Operand::Mem(MemRef::at(0)),
            ],
        )));
        block.items.push(Item::Typed(Instruction::new(
            Opcode::MovIn,
            vec![
                Operand::Reg(RegRef::new(SdtKind::Int, 0)),
                Operand::Imm(Imm::Float(1.0)),
            ],
        )));
        let p = Program { globals: Vec::new(), blocks: vec![block] };
        let v = validate(&p);
        assert!(v.iter().any(|v| v.rule == "vector length out of range"));
        assert!(v.iter().any(|v| v.rule == "register index out of range"));
        assert!(v.iter().any(|v| v.rule == "immediate type does not match opcode suffix"));
    }

    #[test]
    fn violation_indexes_point_at_offenders() {
        let v = check("MOV.in r0, 0\n@cluster 1\nLD.in r1, [0]\nLD.in r1, [1]");
        let hazard: Vec<usize> = v
            .iter()
            .filter(|v| v.rule == "hazard between clustered instructions")
            .map(|v| v.index)
            .collect();
        assert_eq!(hazard, vec![2]);
    }
}
