//! Network model: backend delay distribution, loop reliability, TDD frame
//! expansion and PRB requirement calculation.

mod delay;
mod mcs;
mod prb;
mod tdd;

pub use delay::DelayModel;
pub use mcs::{McsEntry, McsTable};
pub use prb::{LinkBudget, PrbRequirement, SUBCARRIERS_PER_PRB, SYMBOLS_PER_SLOT};
pub use tdd::{Slot, SlotKind, TddFrame};

use thiserror::Error;

/// Errors raised by network-model validation and parsing.
#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid delay model: {0}")]
    InvalidDelayModel(String),
    #[error("invalid TDD frame: {0}")]
    InvalidFrame(String),
    #[error("invalid link budget: {0}")]
    InvalidBudget(String),
    #[error("PRB requirement {required} exceeds the {max_prbs}-PRB carrier limit; the message does not fit in one slot")]
    RequirementExceedsCapacity { required: u32, max_prbs: u32 },
    #[error("MCS table parse error at line {line}: {reason}")]
    McsParse { line: usize, reason: String },
    #[error("MCS index {0} not present in the table")]
    UnknownMcs(u8),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}
