//! Windowed greedy clustering.
//!
//! Scheduling walks each block's slot stream head-first: the earliest
//! unscheduled slot either seeds a cluster or issues alone. A cluster
//! grows over later slots within a sliding window measured from the
//! last accepted member, pulling candidates forward only when they are
//! independent of every member and of every slot they would jump over.
//!
//! Two guards keep the result at or below the one-op-per-issue
//! baseline. Each op cluster must beat the separate-issue cost of its
//! members plus the conversions fused into them (the issue itself is
//! the widest member plus a CONV rider when members carry fused mask
//! bits). The block as a whole is then re-modeled with its VEN/VDS and
//! PEN/PDS wrappers and the block-start CONV included; while it costs
//! more than the baseline block, the least valuable cluster is
//! dissolved back into singles.

use crate::ir::{block_baseline_cost, IrBlock, IrProgram};
use crate::isa::{ConvMask, CostTable, Opcode, SdtKind};

use super::config::{CompilerConfig, HW_OP_CAP};
use super::fuse::{hazard, Slot, SlotKind};

/// One issue unit of the final schedule, over slot indexes.
#[derive(Debug, Clone, PartialEq)]
pub(super) enum Unit {
    Single(usize),
    LoadCluster { lane: SdtKind, members: Vec<usize> },
    OpCluster { members: Vec<usize> },
}

/// Schedule of one block.
#[derive(Debug, Clone)]
pub(super) struct BlockSchedule {
    pub units: Vec<Unit>,
    /// Union of every slot's fused mask bits; the mask all CONV
    /// instructions in this block carry.
    pub mask: ConvMask,
}

/// Issue cost of an op cluster: the widest member plus a CONV rider if
/// any member carries fused mask bits. Past the hardware issue width
/// the machine falls back to sequential issue, so the model does too.
fn op_issue_cost(slots: &[Slot], members: &[usize], table: &CostTable) -> u64 {
    let rider = members.iter().any(|&m| slots[m].mask != ConvMask::EMPTY);
    let costs = members.iter().map(|&m| slots[m].cost as u64);
    let body = if members.len() <= HW_OP_CAP {
        costs.max().unwrap_or(0)
    } else {
        costs.sum()
    };
    body + if rider { table.cost(Opcode::Conv) as u64 } else { 0 }
}

/// Candidate acceptance for cluster growth: kind fits, independent of
/// every accepted member, and independent of every unscheduled slot it
/// would be hoisted over.
fn eligible(
    slots: &[Slot],
    done: &[bool],
    members: &[usize],
    q: usize,
    want_load: Option<SdtKind>,
) -> bool {
    let cand = &slots[q];
    let kind_ok = match (want_load, cand.kind) {
        (Some(lane), SlotKind::Load { lane: l }) => l == lane,
        (None, SlotKind::Compute { .. }) => true,
        _ => false,
    };
    if !kind_ok {
        return false;
    }
    if members.iter().any(|&m| hazard(&slots[m], cand)) {
        return false;
    }
    let head = members[0];
    (head + 1..q).all(|r| done[r] || members.contains(&r) || !hazard(&slots[r], cand))
}

/// Grow a vector load cluster from the head slot `p`.
fn grow_load(
    slots: &[Slot],
    done: &[bool],
    p: usize,
    lane: SdtKind,
    config: &CompilerConfig,
) -> Option<Vec<usize>> {
    let mut members = vec![p];
    let mut last = p;
    for q in p + 1..slots.len() {
        if members.len() == config.load_cap {
            break;
        }
        if q - last > config.window {
            break;
        }
        if !done[q] && eligible(slots, done, &members, q, Some(lane)) {
            members.push(q);
            last = q;
        }
    }
    (members.len() >= 2).then_some(members)
}

/// Whether a lane sequence stays all-same or all-distinct after `next`.
fn lanes_ok(lanes: &[SdtKind], next: SdtKind) -> bool {
    let all_same = lanes.iter().all(|&l| l == lanes[0]);
    if all_same && next == lanes[0] {
        return true;
    }
    // Distinct path: no lane may repeat, including the would-be pairs
    // left behind by a same-lane prefix longer than one.
    lanes.len() == lanes.iter().collect::<std::collections::BTreeSet<_>>().len()
        && !lanes.contains(&next)
}

/// Grow a parallel op cluster from the head slot `p`, then shrink it
/// from the tail until it strictly beats separate issue.
fn grow_op(
    slots: &[Slot],
    done: &[bool],
    p: usize,
    lane: SdtKind,
    config: &CompilerConfig,
    table: &CostTable,
) -> Option<Vec<usize>> {
    let mut members = vec![p];
    let mut lanes = vec![lane];
    let mut last = p;
    for q in p + 1..slots.len() {
        if members.len() == config.op_cap {
            break;
        }
        if q - last > config.window {
            break;
        }
        let SlotKind::Compute { lane: l } = slots[q].kind else { continue };
        if !done[q] && lanes_ok(&lanes, l) && eligible(slots, done, &members, q, None) {
            members.push(q);
            lanes.push(l);
            last = q;
        }
    }
    loop {
        if members.len() < 2 {
            return None;
        }
        let separate: u64 = members
            .iter()
            .map(|&m| (slots[m].cost + slots[m].fused_cost) as u64)
            .sum();
        if op_issue_cost(slots, &members, table) < separate {
            return Some(members);
        }
        members.pop();
        lanes.pop();
    }
}

/// Modeled emitted cost of a block under a candidate unit list,
/// wrappers and mask instructions included.
fn modeled_cost(slots: &[Slot], units: &[Unit], table: &CostTable) -> u64 {
    let mut total: u64 = 0;
    let mut masked_single = false;
    for unit in units {
        match unit {
            Unit::Single(s) => {
                total += slots[*s].cost as u64;
                masked_single |= slots[*s].mask != ConvMask::EMPTY;
            }
            Unit::LoadCluster { members, .. } => {
                let widest =
                    members.iter().map(|&m| slots[m].cost as u64).max().unwrap_or(0);
                total += table.cost(Opcode::Ven) as u64 + widest + table.cost(Opcode::Vds) as u64;
            }
            Unit::OpCluster { members } => {
                total += table.cost(Opcode::Pen) as u64
                    + op_issue_cost(slots, members, table)
                    + table.cost(Opcode::Pds) as u64;
            }
        }
    }
    if masked_single {
        total += table.cost(Opcode::Conv) as u64;
    }
    total
}

/// Replace the cluster at `at` with its members as singles, in order.
pub(super) fn dissolved(units: &[Unit], at: usize) -> Vec<Unit> {
    let mut out = Vec::with_capacity(units.len() + 3);
    for (i, unit) in units.iter().enumerate() {
        match unit {
            Unit::LoadCluster { members, .. } | Unit::OpCluster { members } if i == at => {
                out.extend(members.iter().map(|&m| Unit::Single(m)));
            }
            other => out.push(other.clone()),
        }
    }
    out
}

/// Schedule one block's slots into issue units.
pub(super) fn schedule_block(
    prog: &IrProgram,
    block: &IrBlock,
    slots: &[Slot],
    table: &CostTable,
    config: &CompilerConfig,
) -> BlockSchedule {
    let n = slots.len();
    let mut done = vec![false; n];
    let mut units: Vec<Unit> = Vec::new();
    let mut head = 0;
    while head < n {
        if done[head] {
            head += 1;
            continue;
        }
        done[head] = true;
        let grown = if config.no_cluster {
            None
        } else {
            match slots[head].kind {
                SlotKind::Load { lane } => grow_load(slots, &done, head, lane, config)
                    .map(|members| Unit::LoadCluster { lane, members }),
                SlotKind::Compute { lane } => grow_op(slots, &done, head, lane, config, table)
                    .map(|members| Unit::OpCluster { members }),
                _ => None,
            }
        };
        match grown {
            Some(unit) => {
                let members = match &unit {
                    Unit::LoadCluster { members, .. } | Unit::OpCluster { members } => members,
                    Unit::Single(_) => unreachable!("growth yields clusters"),
                };
                for &m in members {
                    done[m] = true;
                }
                units.push(unit);
            }
            None => units.push(Unit::Single(head)),
        }
    }

    // Block-level guard: wrappers and the block CONV are real cycles,
    // so dissolve marginal clusters until the block stops losing.
    let baseline = block_baseline_cost(prog, block, table);
    loop {
        if modeled_cost(slots, &units, table) <= baseline {
            break;
        }
        let clusters: Vec<usize> = units
            .iter()
            .enumerate()
            .filter(|(_, u)| !matches!(u, Unit::Single(_)))
            .map(|(i, _)| i)
            .collect();
        if clusters.is_empty() {
            break;
        }
        // Dissolve the cluster whose removal helps most; ties go to the
        // latest cluster.
        let best = clusters
            .iter()
            .map(|&c| (modeled_cost(slots, &dissolved(&units, c), table), c))
            .min_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .map(|(_, c)| c)
            .expect("nonempty cluster list");
        units = dissolved(&units, best);
    }

    let mask = slots
        .iter()
        .fold(ConvMask::EMPTY, |acc, s| acc.union(s.mask));
    BlockSchedule { units, mask }
}
