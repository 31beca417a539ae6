use serde::{Deserialize, Serialize};

use super::NetError;

/// Direction of a TDD slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    Uplink,
    Downlink,
}

impl SlotKind {
    pub fn letter(self) -> char {
        match self {
            SlotKind::Uplink => 'U',
            SlotKind::Downlink => 'D',
        }
    }
}

/// One slot of the expanded frame. Indices are 1-based; slot `j` spans
/// `[(j-1)·slot_ms, j·slot_ms)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slot {
    pub index: usize,
    pub kind: SlotKind,
    pub start_ms: f64,
}

/// A TDD pattern repeated over the frame, with per-slot PRB capacity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TddFrame {
    pattern: Vec<SlotKind>,
    repetitions: u32,
    numerology: u8,
    /// PRBs available per slot (R).
    pub capacity_prbs: u32,
}

impl TddFrame {
    pub fn new(
        pattern: Vec<SlotKind>,
        repetitions: u32,
        numerology: u8,
        capacity_prbs: u32,
    ) -> Result<Self, NetError> {
        if pattern.is_empty() {
            return Err(NetError::InvalidFrame("pattern is empty".into()));
        }
        if !pattern.contains(&SlotKind::Uplink) {
            return Err(NetError::InvalidFrame("pattern has no uplink slot".into()));
        }
        if !pattern.contains(&SlotKind::Downlink) {
            return Err(NetError::InvalidFrame("pattern has no downlink slot".into()));
        }
        if repetitions == 0 {
            return Err(NetError::InvalidFrame("repetitions must be positive".into()));
        }
        if capacity_prbs == 0 {
            return Err(NetError::InvalidFrame("slot capacity must be positive".into()));
        }
        if numerology > 6 {
            return Err(NetError::InvalidFrame(format!(
                "numerology {numerology} out of range 0..=6"
            )));
        }
        Ok(Self { pattern, repetitions, numerology, capacity_prbs })
    }

    /// Parses a pattern string such as `"UDUUD"`.
    pub fn from_pattern_str(
        pattern: &str,
        repetitions: u32,
        numerology: u8,
        capacity_prbs: u32,
    ) -> Result<Self, NetError> {
        let kinds = pattern
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'U' => Ok(SlotKind::Uplink),
                'D' => Ok(SlotKind::Downlink),
                other => Err(NetError::InvalidFrame(format!(
                    "unknown slot kind '{other}' in pattern \"{pattern}\""
                ))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(kinds, repetitions, numerology, capacity_prbs)
    }

    /// Slot duration in ms: `1 / 2^numerology`.
    pub fn slot_ms(&self) -> f64 {
        1.0 / f64::from(1u32 << self.numerology)
    }

    pub fn numerology(&self) -> u8 {
        self.numerology
    }

    pub fn repetitions(&self) -> u32 {
        self.repetitions
    }

    /// Total number of slots φ in the expanded frame.
    pub fn num_slots(&self) -> usize {
        self.pattern.len() * self.repetitions as usize
    }

    pub fn pattern_string(&self) -> String {
        self.pattern.iter().map(|k| k.letter()).collect()
    }

    /// Kind of 1-based slot `j`.
    pub fn kind_of(&self, j: usize) -> SlotKind {
        self.pattern[(j - 1) % self.pattern.len()]
    }

    /// Expands the repeated pattern into the full ordered slot sequence.
    pub fn expand(&self) -> Vec<Slot> {
        let slot_ms = self.slot_ms();
        (1..=self.num_slots())
            .map(|j| Slot {
                index: j,
                kind: self.kind_of(j),
                start_ms: (j - 1) as f64 * slot_ms,
            })
            .collect()
    }

    /// 1-based indices of all uplink slots.
    pub fn uplink_slots(&self) -> Vec<usize> {
        (1..=self.num_slots()).filter(|&j| self.kind_of(j) == SlotKind::Uplink).collect()
    }

    /// 1-based indices of all downlink slots.
    pub fn downlink_slots(&self) -> Vec<usize> {
        (1..=self.num_slots()).filter(|&j| self.kind_of(j) == SlotKind::Downlink).collect()
    }
}
