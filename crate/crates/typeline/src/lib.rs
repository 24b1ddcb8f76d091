//! Toolchain for a four-lane typed datatype architecture.
//!
//! The machine model has one typed process line per selected datatype
//! (int, float, double, char), each with its own 32-entry register file
//! and execution unit, plus a traditional fallback lane for everything
//! the typed lanes cannot express. A type conversion unit sits on the
//! datapath between register files and is configured by an 8-bit mask.
//!
//! The crate is organized as a pipeline:
//!
//! * [`frontend`] parses MiniC source, type-checks it, and lowers it to
//!   a typed three-address IR.
//! * [`analyzer`] collects per-unit datatype and feature statistics and
//!   selects the datatype set worth dedicating lanes to.
//! * [`compiler`] schedules IR into load and op clusters and emits
//!   assembly for the typed machine.
//! * [`isa`] defines the instruction set, its textual assembly form,
//!   the cost table, and the program validator.
//! * [`machine`] executes assembly (and, for baselines, raw IR) with
//!   cycle accounting and an execution trace.
//! * [`metrics`] turns traces into parallelism and cycle-reduction
//!   reports.

pub mod analyzer;
pub mod compiler;
pub mod frontend;
pub mod ir;
pub mod isa;
pub mod machine;
