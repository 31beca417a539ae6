//! Tradeoff sweeps and the discretized QoC table.
//!
//! The sweeps reproduce the delay/reliability tradeoff curves; the table
//! discretizes them at slot granularity into the QoC values the allocator
//! optimizes over.

mod build;
mod io;
mod sweep;

pub use build::{
    build_qoc_table, build_qoc_table_seq, QocCell, QocTable, TableEntry, TableMode, TableParams,
};
pub use io::{read_table, read_table_file, table_to_string, write_table};
pub use sweep::{
    sweep_deterministic, sweep_reliability, sweep_stochastic, sweep_stochastic_resampled,
    SweepKind, SweepResult,
};

use thiserror::Error;

/// Errors raised while sweeping or building tables.
#[derive(Debug, Error)]
pub enum TableError {
    #[error("invalid sweep axis: {0}")]
    InvalidAxis(String),
    #[error("no realizable (e2e, alloc) delay pair under this frame")]
    EmptyRealizableSet,
    #[error("all table entries are unstable; the QoC normalizer is undefined")]
    DegenerateNormalizer,
    #[error("table parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Net(#[from] crate::net::NetError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
