//! Execution traces.
//!
//! One [`IssueRecord`] per issued group, in order, with enough
//! information to recompute every report metric without re-running:
//! per-issue cost and kind, how many source-level ops the issue
//! covers, and how many of those were loads, arithmetic, or handled
//! by the traditional lane.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::isa::{Imm, SdtKind};

/// What kind of issue a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IssueKind {
    LoadCluster,
    OpCluster,
    Scalar,
    Traditional,
    Control,
}

/// One issued group of work and its cycle accounting.
///
/// `members` counts the source-level operations the issue covers,
/// including conversions absorbed into member operands as cross-lane
/// reads; control issues cover none. `loads` and `ariths` count the
/// member loads and arithmetic/logical/compare ops; `miss_handled`
/// counts members that executed on the traditional lane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueRecord {
    pub cycle_start: u64,
    pub cost: u32,
    pub kind: IssueKind,
    pub members: u32,
    pub lanes: Vec<SdtKind>,
    pub loads: u32,
    pub ariths: u32,
    pub miss_handled: u32,
}

/// A serialized run: issue records plus final program outputs.
///
/// Outputs map each non-internal global to its final memory words,
/// one entry per declared element.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExecTrace {
    pub issues: Vec<IssueRecord>,
    pub cycles: u64,
    pub outputs: BTreeMap<String, Vec<Imm>>,
}

impl ExecTrace {
    /// Check the in-order invariant: records tile the cycle counter.
    pub fn is_contiguous(&self) -> bool {
        let mut at = 0u64;
        for rec in &self.issues {
            if rec.cycle_start != at {
                return false;
            }
            at += rec.cost as u64;
        }
        at == self.cycles
    }

    pub fn total_members(&self) -> u64 {
        self.issues.iter().map(|r| r.members as u64).sum()
    }

    /// Issue records serialized as JSON lines, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.issues {
            writeln!(out, "{}", serde_json::to_string(rec).expect("serializable record"))
                .unwrap();
        }
        out
    }

    /// Parse records back from JSON lines (outputs are not carried).
    pub fn from_jsonl(text: &str) -> Result<Vec<IssueRecord>, serde_json::Error> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect()
    }

    /// Bit-exact output equality, elementwise per global.
    pub fn outputs_match(&self, other: &ExecTrace) -> bool {
        if self.outputs.len() != other.outputs.len() {
            return false;
        }
        self.outputs.iter().zip(other.outputs.iter()).all(|((na, va), (nb, vb))| {
            na == nb && va.len() == vb.len() && va.iter().zip(vb).all(|(a, b)| a.bits_eq(*b))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(cycle_start: u64, cost: u32) -> IssueRecord {
        IssueRecord {
            cycle_start,
            cost,
            kind: IssueKind::Scalar,
            members: 1,
            lanes: vec![SdtKind::Int],
            loads: 0,
            ariths: 1,
            miss_handled: 0,
        }
    }

    #[test]
    fn contiguity_checks_tiling() {
        let mut t = ExecTrace { issues: vec![rec(0, 3), rec(3, 1)], cycles: 4, ..Default::default() };
        assert!(t.is_contiguous());
        t.issues[1].cycle_start = 4;
        assert!(!t.is_contiguous());
    }

    #[test]
    fn jsonl_round_trips() {
        let t = ExecTrace { issues: vec![rec(0, 3), rec(3, 12)], cycles: 15, ..Default::default() };
        let text = t.to_jsonl();
        assert_eq!(text.lines().count(), 2);
        let back = ExecTrace::from_jsonl(&text).unwrap();
        assert_eq!(back, t.issues);
    }

    #[test]
    fn output_comparison_is_bitwise() {
        let mut a = ExecTrace::default();
        a.outputs.insert("x".into(), vec![Imm::Float(0.0)]);
        let mut b = ExecTrace::default();
        b.outputs.insert("x".into(), vec![Imm::Float(-0.0)]);
        assert!(!a.outputs_match(&b));
        let mut c = ExecTrace::default();
        c.outputs.insert("x".into(), vec![Imm::Float(0.0)]);
        assert!(a.outputs_match(&c));
    }
}
