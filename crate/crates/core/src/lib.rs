//! Event-point scheduling models with sequence-dependent changeovers.
//!
//! Instances are compiled into a solver-independent [`LinearModel`] using
//! either the pairwise changeover formulation ([`legacy`]) or the
//! first-active-task formulation ([`compact`]). Models can be exported as
//! MPS/LP text, solved exactly with the built-in lexicographic
//! branch-and-bound ([`solver`]) and compared with the [`harness`].

pub mod compact;
pub mod compile;
pub mod core_constraints;
pub mod generate;
pub mod harness;
pub mod instance;
pub mod legacy;
pub mod model;
pub mod mps;
pub mod solver;

pub use compile::{compile, CompileError, CompileOptions, Compiled, Formulation, WindowMode};
pub use core_constraints::CoreBuild;
pub use generate::{generate_family, FamilyParams};
pub use instance::{
    load, validate, Changeover, Direction, Instance, LoadError, State, StnArc, Task, TaskKind, Unit, Violation,
    WindowSet,
};
pub use model::{count, CountReport, LinearModel, ModelError, Sense, VarId, VarKind};
pub use mps::{export_lp, export_mps, parse_mps, MpsError};
pub use solver::{decode, solve, Limits, Schedule, SolveResult, SolveStatus, Tolerances};
