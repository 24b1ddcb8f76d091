//! Clustering compiler from typed IR to machine assembly.
//!
//! The pipeline has three stages. Fusion plans how every conversion is
//! realized (folded into its consumer under a mask bit, absorbed by a
//! traditional compute op, or materialized as a cross-lane move) and
//! turns each block into a stream of costed slots. Scheduling grows
//! load and op clusters over those slots under a hoisting window and
//! dissolves any cluster arrangement that would cost more than issuing
//! every slot alone. Emission assigns lane registers by linear scan,
//! spilling long-lived values to internal globals when a lane runs out,
//! and prints the final wrapped instruction stream.

mod config;
mod emit;
mod fuse;
mod schedule;

pub use config::{CompilerConfig, ConfigError, HW_LOAD_CAP, HW_OP_CAP, RELAXED_OP_CAP};

use thiserror::Error;

use crate::ir::IrProgram;
use crate::isa::{CostTable, Program};

/// Compilation failure.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    /// The input program failed its structural checks.
    #[error("malformed program: {0}")]
    BadIr(String),
}

/// Compile typed IR into a clustered machine program.
///
/// The result validates cleanly, computes the same outputs as the
/// baseline interpretation of `prog`, and on the default cost table and
/// configuration never takes more cycles than the baseline.
pub fn compile(
    prog: &IrProgram,
    config: &CompilerConfig,
    table: &CostTable,
) -> Result<Program, CompileError> {
    prog.check().map_err(CompileError::BadIr)?;
    let eff = fuse::effective_program(prog, config);
    let slots = fuse::plan_program(&eff, table);
    let scheds: Vec<_> = eff
        .blocks
        .iter()
        .zip(&slots)
        .map(|(block, s)| schedule::schedule_block(&eff, block, s, table, config))
        .collect();
    Ok(emit::emit_program(&eff, &slots, &scheds))
}
