use serde::{Deserialize, Serialize};

use super::TableError;
use crate::net::{DelayModel, TddFrame};
use crate::seed::{derive_seed, CELL_STREAM};
use crate::sim::{monte_carlo_auc, monte_carlo_auc_seq, AucEstimate, LoopCondition, SimConfig};

/// How the realizable delay pairs are enumerated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableMode {
    /// Full two-index table over all pairs `alloc <= e2e` at slot
    /// granularity. Reliability follows the allocation delay, control
    /// staleness the end-to-end delay, so only the pair pins a condition.
    Paired,
    /// Single-index variant keyed by the end-to-end delay alone, with the
    /// allocation delay pinned one slot below it. Lookups ignore the actual
    /// allocation delay.
    SingleIndex,
}

impl TableMode {
    pub fn label(self) -> &'static str {
        match self {
            TableMode::Paired => "paired",
            TableMode::SingleIndex => "single-index",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "paired" => Some(TableMode::Paired),
            "single-index" => Some(TableMode::SingleIndex),
            _ => None,
        }
    }
}

/// One table cell: simulated AUC statistics and the normalized QoC value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QocCell {
    pub auc: f64,
    pub stderr: f64,
    pub qoc: f64,
}

/// Provenance recorded with a table (and serialized into its header).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableParams {
    pub pattern: String,
    pub repetitions: u32,
    pub capacity_prbs: u32,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub p_ul: f64,
    pub p_dl: f64,
    pub seed: u64,
    pub n_runs: u32,
    pub mode: TableMode,
}

/// Discretized QoC map keyed by the `(e2e delay, allocation delay)` pair at
/// slot granularity.
///
/// Stable cells carry `qoc = (max_auc - auc) / max_auc`; cells whose AUC
/// reaches 1 are pinned to zero. `max_auc` is the largest stable AUC, raised
/// to the stationary cap 1.0 whenever any unstable cell exists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QocTable {
    pub slot_ms: f64,
    /// Candidate end-to-end delays, ascending multiples of `slot_ms`.
    pub e2e_delays_ms: Vec<f64>,
    /// Candidate allocation delays, same grid.
    pub alloc_delays_ms: Vec<f64>,
    /// `cells[e][a]` for e2e index `e` and alloc index `a`; `None` where the
    /// pair is not realizable under the mode.
    pub cells: Vec<Vec<Option<QocCell>>>,
    pub max_auc: f64,
    pub params: TableParams,
}

/// One realizable table entry in the deterministic enumeration order used by
/// the optimizer (its delay-selection index space).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub index: usize,
    pub e2e_slots: usize,
    pub alloc_slots: usize,
    pub e2e_ms: f64,
    pub alloc_ms: f64,
    pub auc: f64,
    pub qoc: f64,
}

impl QocTable {
    /// Number of slot positions covered by the delay grid.
    pub fn num_slots(&self) -> usize {
        self.e2e_delays_ms.len()
    }

    pub fn cell(&self, e2e_idx: usize, alloc_idx: usize) -> Option<&QocCell> {
        self.cells.get(e2e_idx)?.get(alloc_idx)?.as_ref()
    }

    /// QoC for a delay pair given in slots, honoring the table mode
    /// (single-index tables ignore `alloc_slots`).
    pub fn qoc_slots(&self, e2e_slots: usize, alloc_slots: usize) -> Option<f64> {
        if e2e_slots == 0 || e2e_slots > self.num_slots() {
            return None;
        }
        match self.params.mode {
            TableMode::Paired => {
                if alloc_slots == 0 || alloc_slots > e2e_slots {
                    return None;
                }
                self.cell(e2e_slots - 1, alloc_slots - 1).map(|c| c.qoc)
            }
            TableMode::SingleIndex => {
                if e2e_slots < 2 {
                    return None;
                }
                self.cell(e2e_slots - 1, e2e_slots - 2).map(|c| c.qoc)
            }
        }
    }

    /// AUC for a delay pair given in slots (same indexing as
    /// [`qoc_slots`](Self::qoc_slots)).
    pub fn auc_slots(&self, e2e_slots: usize, alloc_slots: usize) -> Option<f64> {
        if e2e_slots == 0 || e2e_slots > self.num_slots() {
            return None;
        }
        match self.params.mode {
            TableMode::Paired => {
                if alloc_slots == 0 || alloc_slots > e2e_slots {
                    return None;
                }
                self.cell(e2e_slots - 1, alloc_slots - 1).map(|c| c.auc)
            }
            TableMode::SingleIndex => {
                if e2e_slots < 2 {
                    return None;
                }
                self.cell(e2e_slots - 1, e2e_slots - 2).map(|c| c.auc)
            }
        }
    }

    /// All realizable entries in deterministic (e2e-major) order.
    pub fn entries(&self) -> Vec<TableEntry> {
        let mut out = Vec::new();
        for (e, row) in self.cells.iter().enumerate() {
            for (a, cell) in row.iter().enumerate() {
                if let Some(c) = cell {
                    out.push(TableEntry {
                        index: out.len(),
                        e2e_slots: e + 1,
                        alloc_slots: a + 1,
                        e2e_ms: self.e2e_delays_ms[e],
                        alloc_ms: self.alloc_delays_ms[a],
                        auc: c.auc,
                        qoc: c.qoc,
                    });
                }
            }
        }
        out
    }

    /// Builds a table from raw per-cell AUC statistics, applying the
    /// normalization rule. Used for synthetic tables in tests and corpora and
    /// by the deserializer.
    pub fn from_parts(
        slot_ms: f64,
        cells_auc: Vec<Vec<Option<(f64, f64)>>>,
        params: TableParams,
    ) -> Result<Self, TableError> {
        let n = cells_auc.len();
        if n == 0 || cells_auc.iter().all(|row| row.iter().all(Option::is_none)) {
            return Err(TableError::EmptyRealizableSet);
        }
        let (max_auc, cells) = normalize(&cells_auc)?;
        Ok(Self {
            slot_ms,
            e2e_delays_ms: (1..=n).map(|k| k as f64 * slot_ms).collect(),
            alloc_delays_ms: (1..=n).map(|k| k as f64 * slot_ms).collect(),
            cells,
            max_auc,
            params,
        })
    }
}

/// Applies the QoC normalization: `max_auc` over stable cells plus the cap
/// 1.0 if any cell is unstable; unstable cells get QoC 0.
fn normalize(
    cells_auc: &[Vec<Option<(f64, f64)>>],
) -> Result<(f64, Vec<Vec<Option<QocCell>>>), TableError> {
    let mut stable_max = f64::NEG_INFINITY;
    let mut any_unstable = false;
    for row in cells_auc {
        for cell in row.iter().flatten() {
            if cell.0 >= 1.0 {
                any_unstable = true;
            } else {
                stable_max = stable_max.max(cell.0);
            }
        }
    }
    let max_auc = if stable_max.is_finite() {
        if any_unstable {
            stable_max.max(1.0)
        } else {
            stable_max
        }
    } else if any_unstable {
        1.0
    } else {
        return Err(TableError::EmptyRealizableSet);
    };
    if !(max_auc > 0.0) {
        return Err(TableError::DegenerateNormalizer);
    }
    let cells = cells_auc
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| {
                    cell.map(|(auc, stderr)| QocCell {
                        auc,
                        stderr,
                        qoc: if auc >= 1.0 { 0.0 } else { (max_auc - auc) / max_auc },
                    })
                })
                .collect()
        })
        .collect();
    Ok((max_auc, cells))
}

fn realizable_pairs(frame: &TddFrame, config: &SimConfig, mode: TableMode) -> Vec<(usize, usize)> {
    let slot_ms = frame.slot_ms();
    let phi = frame.num_slots();
    // the simulator rejects delays beyond the period, so the grid stops there
    let cap = phi.min((config.period_ms / slot_ms + 1e-9).floor() as usize);
    let mut pairs = Vec::new();
    match mode {
        TableMode::Paired => {
            for e in 1..=cap {
                for a in 1..=e {
                    pairs.push((e, a));
                }
            }
        }
        TableMode::SingleIndex => {
            for e in 2..=cap {
                pairs.push((e, e - 1));
            }
        }
    }
    pairs
}

fn build_impl(
    config: &SimConfig,
    model: &DelayModel,
    frame: &TddFrame,
    n_runs: u32,
    mode: TableMode,
    sequential: bool,
) -> Result<QocTable, TableError> {
    config.validate()?;
    model.validate()?;
    let slot_ms = frame.slot_ms();
    let pairs = realizable_pairs(frame, config, mode);
    if pairs.is_empty() {
        return Err(TableError::EmptyRealizableSet);
    }
    let cap = pairs.iter().map(|&(e, _)| e).max().unwrap();

    let run_cell = |cell_idx: usize| -> Result<AucEstimate, TableError> {
        let (e2e_slots, alloc_slots) = pairs[cell_idx];
        let mut cell_config = config.clone();
        cell_config.seed = derive_seed(config.seed, CELL_STREAM, cell_idx as u64);
        let condition = LoopCondition {
            e2e_delay_ms: e2e_slots as f64 * slot_ms,
            success_prob: model.loop_reliability(alloc_slots as f64 * slot_ms),
        };
        let est = if sequential {
            monte_carlo_auc_seq(&cell_config, &condition, n_runs)?
        } else {
            monte_carlo_auc(&cell_config, &condition, n_runs)?
        };
        Ok(est)
    };
    let results: Vec<Result<AucEstimate, TableError>> = if sequential {
        crate::exec::map_indices_seq(pairs.len(), run_cell)
    } else {
        crate::exec::map_indices(pairs.len(), run_cell)
    };

    let mut cells_auc: Vec<Vec<Option<(f64, f64)>>> = vec![vec![None; cap]; cap];
    for (idx, result) in results.into_iter().enumerate() {
        let est = result?;
        let (e, a) = pairs[idx];
        cells_auc[e - 1][a - 1] = Some((est.mean, est.stderr));
    }

    let params = TableParams {
        pattern: frame.pattern_string(),
        repetitions: frame.repetitions(),
        capacity_prbs: frame.capacity_prbs,
        mean_ms: model.mean_ms,
        std_ms: model.std_ms,
        p_ul: model.p_ul,
        p_dl: model.p_dl,
        seed: config.seed,
        n_runs,
        mode,
    };
    QocTable::from_parts(slot_ms, cells_auc, params)
}

/// Builds the QoC table for a frame: every realizable `(e2e, alloc)` pair is
/// simulated with `monte_carlo_auc` under the condition
/// `(e2e delay, loop_reliability(model, alloc delay))`, then normalized.
///
/// Cells use seeds derived from `(config.seed, cell index)` and assembly is
/// ordered, so the table is bit-identical across thread counts.
pub fn build_qoc_table(
    config: &SimConfig,
    model: &DelayModel,
    frame: &TddFrame,
    n_runs: u32,
    mode: TableMode,
) -> Result<QocTable, TableError> {
    build_impl(config, model, frame, n_runs, mode, false)
}

/// Sequential reference for [`build_qoc_table`]; produces the identical table.
pub fn build_qoc_table_seq(
    config: &SimConfig,
    model: &DelayModel,
    frame: &TddFrame,
    n_runs: u32,
    mode: TableMode,
) -> Result<QocTable, TableError> {
    build_impl(config, model, frame, n_runs, mode, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn small_config() -> SimConfig {
        SimConfig {
            n_robots: 4,
            gain_per_s: 2.5,
            period_ms: 10.0,
            horizon_ms: 500.0,
            step_ms: 0.5,
            initial_positions: SimConfig::grid_positions(4),
            seed: 42,
        }
    }

    fn small_frame() -> TddFrame {
        TddFrame::from_pattern_str("UDUUD", 2, 1, 8).unwrap()
    }

    pub(crate) fn synthetic_params(mode: TableMode) -> TableParams {
        TableParams {
            pattern: "UD".into(),
            repetitions: 1,
            capacity_prbs: 1,
            mean_ms: 0.5,
            std_ms: 1.0,
            p_ul: 0.99,
            p_dl: 0.99,
            seed: 0,
            n_runs: 0,
            mode,
        }
    }

    #[test]
    fn build_fills_the_triangle_and_normalizes() {
        let cfg = small_config();
        let model = DelayModel::new(0.5, 1.0, 10.0, 0.99, 0.99).unwrap();
        let table = build_qoc_table(&cfg, &model, &small_frame(), 16, TableMode::Paired).unwrap();
        assert_eq!(table.num_slots(), 10);
        for e in 1..=10usize {
            for a in 1..=10usize {
                let cell = table.cell(e - 1, a - 1);
                assert_eq!(cell.is_some(), a <= e, "cell ({e},{a})");
            }
        }
        // every QoC in [0,1] and recomputable from the stored AUC
        for entry in table.entries() {
            assert!((0.0..=1.0).contains(&entry.qoc));
            let expect = if entry.auc >= 1.0 {
                0.0
            } else {
                (table.max_auc - entry.auc) / table.max_auc
            };
            assert_eq!(entry.qoc, expect);
        }
    }

    #[test]
    fn builds_are_bit_identical_and_match_sequential() {
        let cfg = small_config();
        let model = DelayModel::new(0.5, 1.0, 10.0, 0.99, 0.99).unwrap();
        let frame = small_frame();
        let a = build_qoc_table(&cfg, &model, &frame, 8, TableMode::Paired).unwrap();
        let b = build_qoc_table(&cfg, &model, &frame, 8, TableMode::Paired).unwrap();
        assert_eq!(a, b);
        let s = build_qoc_table_seq(&cfg, &model, &frame, 8, TableMode::Paired).unwrap();
        assert_eq!(a, s);
    }

    #[test]
    fn unstable_entries_get_zero_qoc_and_cap_the_normalizer() {
        let cells = vec![
            vec![Some((1.2, 0.0)), None],
            vec![Some((0.4, 0.0)), Some((0.2, 0.0))],
        ];
        let t = QocTable::from_parts(0.5, cells, synthetic_params(TableMode::Paired)).unwrap();
        assert_eq!(t.max_auc, 1.0);
        assert_eq!(t.qoc_slots(1, 1), Some(0.0)); // unstable pinned to zero
        assert_eq!(t.qoc_slots(2, 1), Some(0.6));
        assert_eq!(t.qoc_slots(2, 2), Some(0.8));
    }

    #[test]
    fn stable_maximum_gets_zero_qoc_without_unstable_entries() {
        let cells = vec![
            vec![Some((0.9, 0.0)), None],
            vec![Some((0.5, 0.0)), Some((0.3, 0.0))],
        ];
        let t = QocTable::from_parts(0.5, cells, synthetic_params(TableMode::Paired)).unwrap();
        assert_eq!(t.max_auc, 0.9);
        assert_eq!(t.qoc_slots(1, 1), Some(0.0));
        // minimal AUC attains the maximal QoC (max - min) / max
        let best = t.entries().iter().map(|e| e.qoc).fold(0.0f64, f64::max);
        assert_eq!(best, (0.9 - 0.3) / 0.9);
    }

    #[test]
    fn single_index_mode_keys_by_e2e_alone() {
        let cfg = small_config();
        let model = DelayModel::new(0.5, 1.0, 10.0, 0.99, 0.99).unwrap();
        let table =
            build_qoc_table(&cfg, &model, &small_frame(), 4, TableMode::SingleIndex).unwrap();
        // only the (e, e-1) diagonal is realizable
        assert!(table.qoc_slots(1, 1).is_none());
        let q = table.qoc_slots(5, 4);
        assert!(q.is_some());
        assert_eq!(table.qoc_slots(5, 1), q);
        assert_eq!(table.qoc_slots(5, 5), q);
        assert_eq!(table.entries().len(), table.num_slots() - 1);
    }

    #[test]
    fn auc_monotone_in_e2e_per_alloc_column() {
        // at a fixed allocation delay (fixed reliability), staleness can only
        // raise the AUC, up to Monte-Carlo tolerance
        let cfg = small_config();
        let model = DelayModel::new(0.5, 1.0, 10.0, 0.99, 0.99).unwrap();
        let table = build_qoc_table(&cfg, &model, &small_frame(), 100, TableMode::Paired).unwrap();
        for a in 0..table.num_slots() {
            let mut prev: Option<&QocCell> = None;
            for e in a..table.num_slots() {
                let cell = table.cell(e, a).unwrap();
                if let Some(p) = prev {
                    let tol = 2.0 * (cell.stderr * cell.stderr + p.stderr * p.stderr).sqrt();
                    assert!(
                        cell.auc >= p.auc - tol,
                        "column {a}: auc dropped from {} to {} at e2e index {e}",
                        p.auc,
                        cell.auc
                    );
                }
                prev = Some(cell);
            }
        }
    }

    #[test]
    fn entries_enumeration_is_stable() {
        let cells = vec![
            vec![Some((0.5, 0.0)), None],
            vec![Some((0.4, 0.0)), Some((0.3, 0.0))],
        ];
        let t = QocTable::from_parts(0.5, cells, synthetic_params(TableMode::Paired)).unwrap();
        let entries = t.entries();
        assert_eq!(entries.len(), 3);
        assert_eq!((entries[0].e2e_slots, entries[0].alloc_slots), (1, 1));
        assert_eq!((entries[1].e2e_slots, entries[1].alloc_slots), (2, 1));
        assert_eq!((entries[2].e2e_slots, entries[2].alloc_slots), (2, 2));
        assert!(entries.iter().enumerate().all(|(k, e)| e.index == k));
    }

    #[test]
    fn empty_table_is_rejected() {
        assert!(matches!(
            QocTable::from_parts(0.5, vec![], synthetic_params(TableMode::Paired)),
            Err(TableError::EmptyRealizableSet)
        ));
    }
}
