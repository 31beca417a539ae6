//! Exact slot/PRB allocation.
//!
//! Robots need fixed uplink and downlink PRB totals inside a TDD frame; the
//! realized schedule determines each robot's end-to-end and allocation
//! delays, which map to QoC through the table. [`solve`] is the native exact
//! optimizer (branch-and-bound over uplink brackets and per-robot downlink
//! windows), [`brute_force`] the independent enumeration oracle it is checked
//! against, [`validate`] the solver-independent constraint checker and
//! [`export_milp`] the LP-format model emitter for off-the-shelf MILP
//! solvers.

pub mod corpus;
mod instance;
mod milp;
mod packing;
mod solve;
mod validate;

pub use instance::{AllocationInstance, AllocationSolution, Scheme};
pub use milp::export_milp;
pub use solve::{brute_force, solve, solve_with_stats, SolveStats};
pub use validate::{validate, validate_with_scheme, Violation};

use thiserror::Error;

/// Errors raised by the allocation layer.
#[derive(Debug, Error)]
pub enum AllocError {
    #[error("invalid allocation instance: {0}")]
    InvalidInstance(String),
    #[error("infeasible: {constraint}")]
    Infeasible { constraint: String },
    #[error("no allocation gives every robot a positive QoC")]
    Scheme4Infeasible,
    #[error("search space of {combos} window assignments exceeds the {limit} guard")]
    SearchSpaceTooLarge { combos: u128, limit: u128 },
    #[error("the QoC table has no entry for the delay pair ({e2e_slots}, {alloc_slots}) slots")]
    DelayPairMissing { e2e_slots: usize, alloc_slots: usize },
    #[error("malformed solution matrices: {0}")]
    MatrixShape(String),
}
