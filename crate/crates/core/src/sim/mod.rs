//! Discrete-time simulation of networked consensus.
//!
//! N single-integrator robots exchange state through an edge controller once
//! per control period. Each robot's loop iteration succeeds with a given
//! probability; on success the edge refreshes its state copy and the new
//! control command reaches the robot after the end-to-end delay, where it is
//! held until the next successful update. Positions integrate by explicit
//! Euler.

mod config;
mod disagreement;
mod engine;
mod monte_carlo;

pub use config::{LoopCondition, SimConfig};
pub use disagreement::{disagreement_series, DisagreementSeries};
pub use engine::{simulate_run, simulate_run_resampled, Trajectory};
pub use monte_carlo::{monte_carlo_auc, monte_carlo_auc_resampled, monte_carlo_auc_seq, AucEstimate};

use thiserror::Error;

/// Errors raised by the simulation layer.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("invalid loop condition: {0}")]
    InvalidCondition(String),
    #[error("horizon must be positive, got {0} ms")]
    ZeroHorizon(f64),
    #[error("trajectory ends at {covered_ms} ms, before the requested horizon {horizon_ms} ms")]
    TrajectoryTooShort { covered_ms: f64, horizon_ms: f64 },
    #[error("all robots start at the consensus point; no disagreement to normalize")]
    AllAtConsensus,
    #[error("network model error: {0}")]
    Net(#[from] crate::net::NetError),
}
