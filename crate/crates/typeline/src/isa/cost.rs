//! Cycle cost table.

use std::collections::BTreeMap;

use thiserror::Error;

use super::{Instruction, Opcode};

/// Extra cycles an operation pays when the traditional lane executes it
/// instead of a typed lane.
pub const DEFAULT_TRADITIONAL_OVERHEAD: u32 = 2;

/// Per-opcode cycle costs plus the traditional-lane overhead.
///
/// The defaults: loads and stores 3, moves/logic/compares/shifts 1,
/// int and char add/sub 1, `MUL.in` 7, `DIV.in` 20, float and double
/// add/sub/mul 4, `DIV.ft` 12, every control opcode 1, `OBJ.n` 10,
/// `OBJ.r` 5. Two constraints always hold: `CONV` costs exactly 1 and
/// `ADD.in` costs less than `DIV.ft`, which the cluster cost accounting
/// relies on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CostTable {
    entries: BTreeMap<Opcode, u32>,
    pub traditional_overhead: u32,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostTableError {
    #[error("cost table is not a JSON object")]
    NotAnObject,
    #[error("unknown mnemonic {0:?} in cost table")]
    UnknownMnemonic(String),
    #[error("cost for {0} must be a positive integer")]
    NonPositiveCost(String),
    #[error("cost(CONV) must be 1, got {0}")]
    ConvCostNotOne(u32),
    #[error("cost(ADD.in) = {add} must be less than cost(DIV.ft) = {div}")]
    AddNotBelowFloatDiv { add: u32, div: u32 },
    #[error("no cost entry for {0}")]
    MissingEntry(&'static str),
}

impl Default for CostTable {
    fn default() -> CostTable {
        let entries = Opcode::ALL.iter().map(|&op| (op, op.default_cost())).collect();
        CostTable { entries, traditional_overhead: DEFAULT_TRADITIONAL_OVERHEAD }
    }
}

impl CostTable {
    /// Load overrides from a JSON object mapping mnemonics to positive
    /// integers. Keys not in the opcode table are rejected; omitted
    /// opcodes keep their defaults. The table-wide constraints are
    /// re-checked after applying overrides.
    pub fn from_json(text: &str) -> Result<CostTable, CostTableError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|_| CostTableError::NotAnObject)?;
        let obj = value.as_object().ok_or(CostTableError::NotAnObject)?;
        let mut table = CostTable::default();
        for (key, v) in obj {
            let op = Opcode::from_mnemonic(key)
                .ok_or_else(|| CostTableError::UnknownMnemonic(key.clone()))?;
            let cost = v
                .as_u64()
                .filter(|&c| c > 0 && c <= u32::MAX as u64)
                .ok_or_else(|| CostTableError::NonPositiveCost(key.clone()))?;
            table.entries.insert(op, cost as u32);
        }
        table.check()?;
        Ok(table)
    }

    /// Validate the table constraints. [`CostTable::from_json`] calls
    /// this; direct mutation through [`CostTable::set`] defers the check
    /// to the caller.
    pub fn check(&self) -> Result<(), CostTableError> {
        let conv = self.get(Opcode::Conv).ok_or(CostTableError::MissingEntry("CONV"))?;
        if conv != 1 {
            return Err(CostTableError::ConvCostNotOne(conv));
        }
        let add = self.get(Opcode::AddIn).ok_or(CostTableError::MissingEntry("ADD.in"))?;
        let div = self.get(Opcode::DivFt).ok_or(CostTableError::MissingEntry("DIV.ft"))?;
        if add >= div {
            return Err(CostTableError::AddNotBelowFloatDiv { add, div });
        }
        Ok(())
    }

    pub fn get(&self, op: Opcode) -> Option<u32> {
        self.entries.get(&op).copied()
    }

    /// Cost of an opcode, falling back to its built-in default. Only a
    /// hand-built table can miss entries.
    pub fn cost(&self, op: Opcode) -> u32 {
        self.get(op).unwrap_or_else(|| op.default_cost())
    }

    pub fn set(&mut self, op: Opcode, cost: u32) {
        self.entries.insert(op, cost);
    }
}

/// Cycle cost of one instruction under a table.
pub fn instruction_cost(instr: &Instruction, table: &CostTable) -> Result<u32, CostTableError> {
    table
        .get(instr.opcode)
        .ok_or(CostTableError::MissingEntry(instr.opcode.mnemonic()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_costs_pinned() {
        let t = CostTable::default();
        assert_eq!(t.cost(Opcode::LdIn), 3);
        assert_eq!(t.cost(Opcode::StDb), 3);
        assert_eq!(t.cost(Opcode::MovCh), 1);
        assert_eq!(t.cost(Opcode::AddIn), 1);
        assert_eq!(t.cost(Opcode::AddCh), 1);
        assert_eq!(t.cost(Opcode::MulIn), 7);
        assert_eq!(t.cost(Opcode::DivIn), 20);
        assert_eq!(t.cost(Opcode::AddFt), 4);
        assert_eq!(t.cost(Opcode::MulDb), 4);
        assert_eq!(t.cost(Opcode::DivFt), 12);
        assert_eq!(t.cost(Opcode::Conv), 1);
        assert_eq!(t.cost(Opcode::Ven), 1);
        assert_eq!(t.cost(Opcode::ObjN), 10);
        assert_eq!(t.cost(Opcode::ObjR), 5);
        assert_eq!(t.traditional_overhead, 2);
        assert!(t.check().is_ok());
    }

    #[test]
    fn json_overrides_subset() {
        let t = CostTable::from_json(r#"{"MUL.in": 5, "LD.ft": 2}"#).unwrap();
        assert_eq!(t.cost(Opcode::MulIn), 5);
        assert_eq!(t.cost(Opcode::LdFt), 2);
        assert_eq!(t.cost(Opcode::DivIn), 20);
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let err = CostTable::from_json(r#"{"DIV.db": 9}"#).unwrap_err();
        assert_eq!(err, CostTableError::UnknownMnemonic("DIV.db".into()));
    }

    #[test]
    fn json_rejects_non_positive() {
        assert!(matches!(
            CostTable::from_json(r#"{"ADD.in": 0}"#),
            Err(CostTableError::NonPositiveCost(_))
        ));
        assert!(matches!(
            CostTable::from_json(r#"{"ADD.in": -3}"#),
            Err(CostTableError::NonPositiveCost(_))
        ));
    }

    #[test]
    fn conv_cost_pinned_to_one() {
        assert_eq!(
            CostTable::from_json(r#"{"CONV": 2}"#).unwrap_err(),
            CostTableError::ConvCostNotOne(2)
        );
    }

    #[test]
    fn add_must_stay_below_float_div() {
        assert_eq!(
            CostTable::from_json(r#"{"ADD.in": 12}"#).unwrap_err(),
            CostTableError::AddNotBelowFloatDiv { add: 12, div: 12 }
        );
    }

    #[test]
    fn instruction_cost_uses_opcode() {
        let t = CostTable::default();
        let i = Instruction::new(Opcode::DivFt, vec![]);
        assert_eq!(instruction_cost(&i, &t).unwrap(), 12);
    }
}
