use serde::{Deserialize, Serialize};

use super::{McsTable, NetError};

/// Subcarriers per PRB.
pub const SUBCARRIERS_PER_PRB: u32 = 12;
/// OFDM symbols per slot.
pub const SYMBOLS_PER_SLOT: u32 = 14;

/// Throughput parameters for one link direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Message size in bits.
    pub packet_bits: u32,
    /// Message periodicity in ms (carried for reporting; the per-slot PRB
    /// requirement below does not depend on it).
    pub periodicity_ms: f64,
    pub mcs_index: u8,
    /// Bits per symbol (Qm), resolved from the MCS table.
    pub modulation_order: u8,
    /// Code rate in (0, 1), resolved from the MCS table.
    pub code_rate: f64,
    /// Direction-specific overhead fraction (OH).
    pub overhead: f64,
    /// MIMO layers (v).
    pub n_layers: u8,
    /// Scaling factor (f).
    pub scaling: f64,
    /// Aggregated component carriers (J).
    pub n_carriers: u8,
    /// Carrier PRB budget; a requirement above this is an error.
    pub max_prbs: u32,
}

/// Result of the PRB calculation for one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrbRequirement {
    /// PRBs needed to carry one message within a single slot.
    pub prbs: u32,
    /// Payload bits one PRB carries in one slot under this budget.
    pub bits_per_prb_slot: f64,
}

impl LinkBudget {
    /// Builds a budget, resolving `(modulation_order, code_rate)` for
    /// `mcs_index` from `table`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_mcs(
        table: &McsTable,
        mcs_index: u8,
        packet_bits: u32,
        periodicity_ms: f64,
        overhead: f64,
        n_layers: u8,
        scaling: f64,
        n_carriers: u8,
        max_prbs: u32,
    ) -> Result<Self, NetError> {
        let entry = table.lookup(mcs_index)?;
        let budget = Self {
            packet_bits,
            periodicity_ms,
            mcs_index,
            modulation_order: entry.modulation_order,
            code_rate: entry.code_rate(),
            overhead,
            n_layers,
            scaling,
            n_carriers,
            max_prbs,
        };
        budget.validate()?;
        Ok(budget)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.packet_bits == 0 {
            return Err(NetError::InvalidBudget("packet_bits must be positive".into()));
        }
        if !(self.periodicity_ms > 0.0) {
            return Err(NetError::InvalidBudget("periodicity must be positive".into()));
        }
        if !(self.code_rate > 0.0 && self.code_rate < 1.0) {
            return Err(NetError::InvalidBudget(format!(
                "code rate must be in (0, 1), got {}",
                self.code_rate
            )));
        }
        if !(0.0..1.0).contains(&self.overhead) {
            return Err(NetError::InvalidBudget(format!(
                "overhead must be in [0, 1), got {}",
                self.overhead
            )));
        }
        if self.n_layers == 0 || self.n_carriers == 0 {
            return Err(NetError::InvalidBudget("layers and carriers must be positive".into()));
        }
        if !(self.scaling > 0.0 && self.scaling <= 1.0) {
            return Err(NetError::InvalidBudget(format!(
                "scaling factor must be in (0, 1], got {}",
                self.scaling
            )));
        }
        if self.max_prbs == 0 {
            return Err(NetError::InvalidBudget("max_prbs must be positive".into()));
        }
        Ok(())
    }

    /// Payload bits one PRB carries in one slot:
    /// `12 subcarriers · 14 symbols · Qm · code_rate · v · f · (1 − OH)`.
    pub fn bits_per_prb_slot(&self) -> f64 {
        f64::from(SUBCARRIERS_PER_PRB * SYMBOLS_PER_SLOT)
            * f64::from(self.modulation_order)
            * self.code_rate
            * f64::from(self.n_layers)
            * self.scaling
            * (1.0 - self.overhead)
    }

    /// PRBs needed to carry one message within a single slot.
    ///
    /// Errors when the message cannot be served inside one slot of the
    /// carrier (`requirement > max_prbs`).
    pub fn prb_requirement(&self) -> Result<PrbRequirement, NetError> {
        self.validate()?;
        let bits_per_prb_slot = self.bits_per_prb_slot();
        let prbs = (f64::from(self.packet_bits) / bits_per_prb_slot).ceil() as u32;
        if prbs > self.max_prbs {
            return Err(NetError::RequirementExceedsCapacity { required: prbs, max_prbs: self.max_prbs });
        }
        Ok(PrbRequirement { prbs, bits_per_prb_slot })
    }
}
