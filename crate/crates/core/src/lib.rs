//! Consensus quality-of-control toolkit.
//!
//! The crate simulates multi-robot consensus loops that are closed over a
//! lossy, delayed network, derives a quality-of-control (QoC) table
//! parameterized by loop latency and reliability, and allocates TDD slot
//! resources to robots with an exact integer optimizer.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`sim`]: discrete-time consensus simulation and disagreement/AUC metrics,
//!   plus the deterministic Monte-Carlo harness.
//! - [`net`]: backend delay distribution, loop reliability, TDD frame
//!   expansion and the PRB requirement calculator.
//! - [`table`]: tradeoff sweeps and the discretized QoC table consumed by the
//!   allocator.
//! - [`allocator`]: exact slot/PRB allocation (native branch-and-bound,
//!   brute-force oracle, solution validator and LP-format model export).
//!
//! With the `parallel` feature (default) Monte-Carlo runs and QoC table cells
//! are computed on a rayon pool; results are reduced in a fixed order so that
//! outputs are bit-identical regardless of thread count. Without the feature
//! the same code paths run sequentially.

pub mod allocator;
pub(crate) mod exec;
pub mod net;
pub mod seed;
pub mod sim;
pub mod table;
