use serde::{Deserialize, Serialize};

use super::AllocError;
use crate::net::TddFrame;
use crate::table::QocTable;

/// The four optimization objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Maximize total QoC.
    MaxQoc,
    /// Minimize total end-to-end delay.
    MinDelay,
    /// Maximize total end-to-end delay (the "maximize reliability" scheme:
    /// the longest allocation gap buys the highest backend success).
    MaxDelay,
    /// Minimize total end-to-end delay subject to every robot keeping a
    /// positive QoC.
    MinDelayStable,
}

impl Scheme {
    pub fn all() -> [Scheme; 4] {
        [Scheme::MaxQoc, Scheme::MinDelay, Scheme::MaxDelay, Scheme::MinDelayStable]
    }

    pub fn label(self) -> &'static str {
        match self {
            Scheme::MaxQoc => "max-qoc",
            Scheme::MinDelay => "min-delay",
            Scheme::MaxDelay => "max-delay",
            Scheme::MinDelayStable => "min-delay-stable",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "max-qoc" => Some(Scheme::MaxQoc),
            "min-delay" => Some(Scheme::MinDelay),
            "max-delay" => Some(Scheme::MaxDelay),
            "min-delay-stable" => Some(Scheme::MinDelayStable),
            _ => None,
        }
    }

    /// Whether lower objective values are better.
    pub fn minimizes(self) -> bool {
        matches!(self, Scheme::MinDelay | Scheme::MinDelayStable)
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scheme::from_label(s).ok_or_else(|| {
            format!("unknown scheme \"{s}\" (expected max-qoc, min-delay, max-delay or min-delay-stable)")
        })
    }
}

/// One allocation problem: the frame, per-robot PRB needs and the QoC table.
#[derive(Debug, Clone)]
pub struct AllocationInstance {
    pub frame: TddFrame,
    pub n_robots: usize,
    /// Uplink PRBs each robot must receive (U).
    pub ul_need: u32,
    /// Downlink PRBs each robot must receive (D).
    pub dl_need: u32,
    pub table: QocTable,
    /// Big-M constant for the exported model; at least φ + 1.
    pub big_m: u32,
}

/// Aggregate capacity precondition: the robots' total demand per direction
/// must fit inside the frame. Cheap; can run before a table is built.
pub fn aggregate_feasible(
    frame: &TddFrame,
    n_robots: usize,
    ul_need: u32,
    dl_need: u32,
) -> Result<(), AllocError> {
    let r = u64::from(frame.capacity_prbs);
    let n = n_robots as u64;
    let ul_cap = r * frame.uplink_slots().len() as u64;
    if n * u64::from(ul_need) > ul_cap {
        return Err(AllocError::Infeasible {
            constraint: format!(
                "aggregate uplink demand {} exceeds frame capacity {}",
                n * u64::from(ul_need),
                ul_cap
            ),
        });
    }
    let dl_cap = r * frame.downlink_slots().len() as u64;
    if n * u64::from(dl_need) > dl_cap {
        return Err(AllocError::Infeasible {
            constraint: format!(
                "aggregate downlink demand {} exceeds frame capacity {}",
                n * u64::from(dl_need),
                dl_cap
            ),
        });
    }
    Ok(())
}

impl AllocationInstance {
    pub fn new(
        frame: TddFrame,
        n_robots: usize,
        ul_need: u32,
        dl_need: u32,
        table: QocTable,
    ) -> Result<Self, AllocError> {
        let big_m = frame.num_slots() as u32 + 1;
        let instance = Self { frame, n_robots, ul_need, dl_need, table, big_m };
        instance.validate()?;
        Ok(instance)
    }

    pub fn validate(&self) -> Result<(), AllocError> {
        if self.n_robots == 0 {
            return Err(AllocError::InvalidInstance("n_robots must be positive".into()));
        }
        if self.ul_need == 0 || self.dl_need == 0 {
            return Err(AllocError::InvalidInstance("PRB needs must be positive".into()));
        }
        if self.big_m < self.frame.num_slots() as u32 + 1 {
            return Err(AllocError::InvalidInstance(format!(
                "big_m must be at least {} (slots + 1), got {}",
                self.frame.num_slots() + 1,
                self.big_m
            )));
        }
        if (self.table.slot_ms - self.frame.slot_ms()).abs() > 1e-9 {
            return Err(AllocError::InvalidInstance(format!(
                "table slot duration {} ms does not match the frame's {} ms",
                self.table.slot_ms,
                self.frame.slot_ms()
            )));
        }
        aggregate_feasible(&self.frame, self.n_robots, self.ul_need, self.dl_need)
    }
}

/// A complete allocation: PRB matrices, schedule indicators, per-robot
/// first/last slots and delays, selected table entries, QoC values and the
/// scheme objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSolution {
    /// `ul_alloc[i][j-1]`: uplink PRBs for robot i in slot j.
    pub ul_alloc: Vec<Vec<u32>>,
    pub dl_alloc: Vec<Vec<u32>>,
    /// Schedule indicators; true exactly where the allocation is positive.
    pub ul_sched: Vec<Vec<bool>>,
    pub dl_sched: Vec<Vec<bool>>,
    /// 1-based slot indices.
    pub first_ul: Vec<usize>,
    pub last_ul: Vec<usize>,
    pub first_dl: Vec<usize>,
    pub last_dl: Vec<usize>,
    pub e2e_delay_ms: Vec<f64>,
    pub alloc_delay_ms: Vec<f64>,
    /// Index of the selected QoC-table entry per robot.
    pub delay_choice: Vec<usize>,
    pub qoc: Vec<f64>,
    pub objective_value: f64,
}

impl AllocationSolution {
    /// Derives the full solution record from allocation matrices: schedule
    /// indicators, first/last slots, the two delays, the table lookup and the
    /// scheme objective. Both the native solver and the brute-force oracle
    /// construct their results through this single path.
    pub fn from_matrices(
        instance: &AllocationInstance,
        scheme: Scheme,
        ul_alloc: Vec<Vec<u32>>,
        dl_alloc: Vec<Vec<u32>>,
    ) -> Result<Self, AllocError> {
        let n = instance.n_robots;
        let phi = instance.frame.num_slots();
        for (name, m) in [("ul_alloc", &ul_alloc), ("dl_alloc", &dl_alloc)] {
            if m.len() != n || m.iter().any(|row| row.len() != phi) {
                return Err(AllocError::MatrixShape(format!(
                    "{name} must be {n} x {phi}"
                )));
            }
        }

        let span = |row: &[u32]| -> Option<(usize, usize)> {
            let first = row.iter().position(|&v| v > 0)? + 1;
            let last = row.iter().rposition(|&v| v > 0)? + 1;
            Some((first, last))
        };
        let mut first_ul = Vec::with_capacity(n);
        let mut last_ul = Vec::with_capacity(n);
        let mut first_dl = Vec::with_capacity(n);
        let mut last_dl = Vec::with_capacity(n);
        for i in 0..n {
            let (fu, lu) = span(&ul_alloc[i]).ok_or_else(|| {
                AllocError::MatrixShape(format!("robot {i} has no uplink allocation"))
            })?;
            let (fd, ld) = span(&dl_alloc[i]).ok_or_else(|| {
                AllocError::MatrixShape(format!("robot {i} has no downlink allocation"))
            })?;
            first_ul.push(fu);
            last_ul.push(lu);
            first_dl.push(fd);
            last_dl.push(ld);
        }
        let g_fu = *first_ul.iter().min().unwrap();
        let g_lu = *last_ul.iter().max().unwrap();

        let slot_ms = instance.frame.slot_ms();
        let mut e2e_delay_ms = Vec::with_capacity(n);
        let mut alloc_delay_ms = Vec::with_capacity(n);
        let mut delay_choice = Vec::with_capacity(n);
        let mut qoc = Vec::with_capacity(n);
        for i in 0..n {
            if first_dl[i] <= g_lu {
                return Err(AllocError::MatrixShape(format!(
                    "robot {i} receives downlink in slot {} before the uplink phase ends in slot {g_lu}",
                    first_dl[i]
                )));
            }
            let e2e_slots = last_dl[i] - g_fu;
            let alloc_slots = first_dl[i] - g_lu;
            let entry = lookup_entry(&instance.table, e2e_slots, alloc_slots)
                .ok_or(AllocError::DelayPairMissing { e2e_slots, alloc_slots })?;
            e2e_delay_ms.push(e2e_slots as f64 * slot_ms);
            alloc_delay_ms.push(alloc_slots as f64 * slot_ms);
            delay_choice.push(entry.0);
            qoc.push(entry.1);
        }

        let objective_value = objective_from_parts(scheme, slot_ms, &first_dl, &last_dl, &qoc, g_fu);

        let sched = |m: &[Vec<u32>]| -> Vec<Vec<bool>> {
            m.iter().map(|row| row.iter().map(|&v| v > 0).collect()).collect()
        };
        Ok(Self {
            ul_sched: sched(&ul_alloc),
            dl_sched: sched(&dl_alloc),
            ul_alloc,
            dl_alloc,
            first_ul,
            last_ul,
            first_dl,
            last_dl,
            e2e_delay_ms,
            alloc_delay_ms,
            delay_choice,
            qoc,
            objective_value,
        })
    }

    /// Total end-to-end delay in slots (the tie-breaking quantity).
    pub fn total_e2e_slots(&self, slot_ms: f64) -> i64 {
        self.e2e_delay_ms.iter().map(|&ms| (ms / slot_ms).round() as i64).sum()
    }
}

/// Looks up `(entry index, qoc)` for a delay pair in slots, honoring the
/// table mode.
pub(crate) fn lookup_entry(
    table: &QocTable,
    e2e_slots: usize,
    alloc_slots: usize,
) -> Option<(usize, f64)> {
    table.qoc_slots(e2e_slots, alloc_slots)?;
    // resolve the entry index through the deterministic enumeration
    let entries = table.entries();
    match table.params.mode {
        crate::table::TableMode::Paired => entries
            .iter()
            .find(|e| e.e2e_slots == e2e_slots && e.alloc_slots == alloc_slots)
            .map(|e| (e.index, e.qoc)),
        crate::table::TableMode::SingleIndex => {
            entries.iter().find(|e| e.e2e_slots == e2e_slots).map(|e| (e.index, e.qoc))
        }
    }
}

/// Canonical objective computation. QoC contributions are summed in
/// `(first_dl, last_dl)` order so that any solver producing the same
/// assignment multiset reports the bit-identical objective; delay objectives
/// sum integer slot counts before a single conversion to ms.
pub(crate) fn objective_from_parts(
    scheme: Scheme,
    slot_ms: f64,
    first_dl: &[usize],
    last_dl: &[usize],
    qoc: &[f64],
    g_fu: usize,
) -> f64 {
    match scheme {
        Scheme::MaxQoc => {
            let mut parts: Vec<(usize, usize, f64)> = first_dl
                .iter()
                .zip(last_dl)
                .zip(qoc)
                .map(|((&fd, &ld), &q)| (fd, ld, q))
                .collect();
            parts.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
            parts.iter().map(|p| p.2).fold(0.0, |acc, q| acc + q)
        }
        _ => {
            let slots: i64 = last_dl.iter().map(|&ld| (ld - g_fu) as i64).sum();
            slots as f64 * slot_ms
        }
    }
}
