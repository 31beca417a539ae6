use super::instance::lookup_entry;
use super::packing::{flow_pack, pack_ul_bracket, pack_windows, ul_bracket_feasible, windows_feasible};
use super::{AllocError, AllocationInstance, AllocationSolution, Scheme};

/// Search effort counters; deterministic for a given instance and scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub brackets: u64,
}

#[derive(Debug, Clone, Copy)]
struct Window {
    fd: usize,
    ld: usize,
    e2e_slots: usize,
    value: f64,
}

struct Incumbent {
    value: f64,
    e2e_total: i64,
    bracket: (usize, usize),
    windows: Vec<Window>,
    counts: Vec<u32>,
}

/// Per-robot objective contribution of a window under a scheme, in the
/// maximization sense used internally. Delay contributions are integer slot
/// counts (exact in f64); QoC contributions come straight from the table.
fn window_value(scheme: Scheme, qoc: f64, e2e_slots: usize) -> f64 {
    match scheme {
        Scheme::MaxQoc => qoc,
        Scheme::MinDelay | Scheme::MinDelayStable => -(e2e_slots as f64),
        Scheme::MaxDelay => e2e_slots as f64,
    }
}

/// Exact solve: enumerates uplink brackets (the global first/last uplink
/// slots), and per bracket assigns robots to downlink windows by
/// branch-and-bound with capacity feasibility checks.
///
/// Ties break deterministically: best scheme objective, then lowest total
/// end-to-end delay, then the first assignment in canonical enumeration
/// order (brackets by ascending slots, window counts lexicographically
/// descending over `(first_dl, last_dl)`-ordered windows), which prefers the
/// lowest robot-major slot indices.
pub fn solve(instance: &AllocationInstance, scheme: Scheme) -> Result<AllocationSolution, AllocError> {
    solve_with_stats(instance, scheme).map(|(solution, _)| solution)
}

/// [`solve`] plus search statistics.
pub fn solve_with_stats(
    instance: &AllocationInstance,
    scheme: Scheme,
) -> Result<(AllocationSolution, SolveStats), AllocError> {
    instance.validate()?;
    let ul = instance.frame.uplink_slots();
    let dl = instance.frame.downlink_slots();
    let n = instance.n_robots;
    let capacity = instance.frame.capacity_prbs;
    let phi = instance.frame.num_slots();

    let mut stats = SolveStats::default();
    let mut incumbent: Option<Incumbent> = None;

    for (ai, &a) in ul.iter().enumerate() {
        for (bi, &b) in ul.iter().enumerate().skip(ai) {
            let bracket_slots = &ul[ai..=bi];
            if !ul_bracket_feasible(bracket_slots, n, instance.ul_need, capacity) {
                continue;
            }
            stats.brackets += 1;

            // candidate downlink windows after the uplink phase, canonical
            // (fd, ld) order
            let mut windows = Vec::new();
            for (fi, &fd) in dl.iter().enumerate() {
                if fd <= b {
                    continue;
                }
                for &ld in &dl[fi..] {
                    if fd != ld && instance.dl_need < 2 {
                        continue;
                    }
                    let e2e_slots = ld - a;
                    let alloc_slots = fd - b;
                    let Some((_, qoc)) = lookup_entry(&instance.table, e2e_slots, alloc_slots)
                    else {
                        continue;
                    };
                    if scheme == Scheme::MinDelayStable && !(qoc > 0.0) {
                        continue;
                    }
                    windows.push(Window {
                        fd,
                        ld,
                        e2e_slots,
                        value: window_value(scheme, qoc, e2e_slots),
                    });
                }
            }
            if windows.is_empty() {
                continue;
            }

            assign_counts(
                &windows,
                n,
                instance.dl_need,
                capacity,
                &dl,
                (a, b),
                &mut incumbent,
                &mut stats.nodes,
            );
        }
    }

    let best = incumbent.ok_or_else(|| match scheme {
        Scheme::MinDelayStable => AllocError::Scheme4Infeasible,
        _ => AllocError::Infeasible {
            constraint: "no feasible uplink bracket with downlink windows after it".into(),
        },
    })?;

    let (a, b) = best.bracket;
    let bracket_slots: Vec<usize> = ul.iter().copied().filter(|&j| j >= a && j <= b).collect();
    let ul_alloc = pack_ul_bracket(&bracket_slots, n, instance.ul_need, capacity, phi)
        .expect("uplink bracket was checked feasible");
    let mut robot_windows = Vec::with_capacity(n);
    for (w, &c) in best.windows.iter().zip(&best.counts) {
        for _ in 0..c {
            robot_windows.push((w.fd, w.ld));
        }
    }
    let dl_alloc = pack_windows(&dl, &robot_windows, instance.dl_need, capacity, phi)
        .expect("downlink counts were checked feasible");

    let solution = AllocationSolution::from_matrices(instance, scheme, ul_alloc, dl_alloc)?;
    Ok((solution, stats))
}

/// Branch-and-bound over window counts for one bracket. Maintains the global
/// incumbent: a candidate replaces it only when strictly better under
/// (value desc, total e2e asc); ties keep the first find, which the
/// enumeration order makes canonical.
#[allow(clippy::too_many_arguments)]
fn assign_counts(
    windows: &[Window],
    n_robots: usize,
    need: u32,
    capacity: u32,
    dl_slots: &[usize],
    bracket: (usize, usize),
    incumbent: &mut Option<Incumbent>,
    nodes: &mut u64,
) {
    let w = windows.len();
    // suffix bests for bounding
    let mut suffix_best = vec![f64::NEG_INFINITY; w + 1];
    let mut suffix_min_e2e = vec![i64::MAX; w + 1];
    for idx in (0..w).rev() {
        suffix_best[idx] = suffix_best[idx + 1].max(windows[idx].value);
        suffix_min_e2e[idx] = suffix_min_e2e[idx + 1].min(windows[idx].e2e_slots as i64);
    }

    let mut counts = vec![0u32; w];
    let mut expanded: Vec<(usize, usize)> = Vec::with_capacity(n_robots);

    // DFS stack replaced by recursion for clarity; depth <= w
    fn recurse(
        windows: &[Window],
        idx: usize,
        remaining: u32,
        counts: &mut Vec<u32>,
        expanded: &mut Vec<(usize, usize)>,
        cur_value: f64,
        cur_e2e: i64,
        suffix_best: &[f64],
        suffix_min_e2e: &[i64],
        need: u32,
        capacity: u32,
        dl_slots: &[usize],
        bracket: (usize, usize),
        incumbent: &mut Option<Incumbent>,
        nodes: &mut u64,
    ) {
        *nodes += 1;
        if remaining == 0 {
            let better = match incumbent {
                None => true,
                Some(inc) => {
                    cur_value > inc.value || (cur_value == inc.value && cur_e2e < inc.e2e_total)
                }
            };
            if better {
                *incumbent = Some(Incumbent {
                    value: cur_value,
                    e2e_total: cur_e2e,
                    bracket,
                    windows: windows.to_vec(),
                    counts: counts.clone(),
                });
            }
            return;
        }
        if idx == windows.len() {
            return;
        }
        // exact bound: robot-wise accumulation mirrors how leaf values build
        // up, so float rounding cannot let a pruned subtree beat the bound
        if let Some(inc) = incumbent {
            let mut ub = cur_value;
            for _ in 0..remaining {
                ub += suffix_best[idx];
            }
            if ub < inc.value {
                return;
            }
            if ub == inc.value {
                let lb_e2e = cur_e2e + i64::from(remaining) * suffix_min_e2e[idx];
                if lb_e2e >= inc.e2e_total {
                    return;
                }
            }
        }
        for c in (0..=remaining).rev() {
            counts[idx] = c;
            let mut feasible = true;
            if c > 0 {
                for _ in 0..c {
                    expanded.push((windows[idx].fd, windows[idx].ld));
                }
                feasible = windows_feasible(dl_slots, expanded, need, capacity);
            }
            if feasible {
                let mut value = cur_value;
                for _ in 0..c {
                    value += windows[idx].value;
                }
                let e2e = cur_e2e + i64::from(c) * windows[idx].e2e_slots as i64;
                recurse(
                    windows,
                    idx + 1,
                    remaining - c,
                    counts,
                    expanded,
                    value,
                    e2e,
                    suffix_best,
                    suffix_min_e2e,
                    need,
                    capacity,
                    dl_slots,
                    bracket,
                    incumbent,
                    nodes,
                );
            }
            for _ in 0..c {
                expanded.pop();
            }
            counts[idx] = 0;
        }
    }

    recurse(
        windows,
        0,
        n_robots as u32,
        &mut counts,
        &mut expanded,
        0.0,
        0,
        &suffix_best,
        &suffix_min_e2e,
        need,
        capacity,
        dl_slots,
        bracket,
        incumbent,
        nodes,
    );
}

/// Exhaustive oracle: enumerates every per-robot `(uplink window, downlink
/// window)` assignment, checks packing feasibility by max-flow, and keeps the
/// optimum under (objective, total e2e delay, robot-major window indices).
/// Reference semantics for [`solve`].
pub fn brute_force(
    instance: &AllocationInstance,
    scheme: Scheme,
) -> Result<AllocationSolution, AllocError> {
    const LIMIT: u128 = 10_000_000;
    instance.validate()?;
    let ul = instance.frame.uplink_slots();
    let dl = instance.frame.downlink_slots();
    let n = instance.n_robots;
    let capacity = instance.frame.capacity_prbs;
    let phi = instance.frame.num_slots();

    let mut ul_windows = Vec::new();
    for (fi, &f) in ul.iter().enumerate() {
        for &l in &ul[fi..] {
            if f == l || instance.ul_need >= 2 {
                ul_windows.push((f, l));
            }
        }
    }
    let mut dl_windows = Vec::new();
    for (fi, &f) in dl.iter().enumerate() {
        for &l in &dl[fi..] {
            if f == l || instance.dl_need >= 2 {
                dl_windows.push((f, l));
            }
        }
    }
    let per_robot = ul_windows.len() as u128 * dl_windows.len() as u128;
    if per_robot == 0 {
        return Err(AllocError::Infeasible { constraint: "no usable windows in the frame".into() });
    }
    let combos = per_robot.checked_pow(n as u32).unwrap_or(u128::MAX);
    if combos > LIMIT {
        return Err(AllocError::SearchSpaceTooLarge { combos, limit: LIMIT });
    }

    // value lookup grid indexed by (e2e_slots, alloc_slots)
    let max_slots = phi;
    let mut qoc_grid = vec![vec![None; max_slots + 1]; max_slots + 1];
    for (e, row) in qoc_grid.iter_mut().enumerate().skip(1) {
        for (al, cell) in row.iter_mut().enumerate().skip(1) {
            *cell = lookup_entry(&instance.table, e, al).map(|(_, q)| q);
        }
    }

    struct Best {
        value: f64,
        e2e_total: i64,
        key: Vec<usize>,
        assignment: Vec<(usize, usize, usize, usize)>,
    }
    let mut best: Option<Best> = None;

    let mut combo = vec![0usize; n];
    let options = per_robot as usize;
    'outer: loop {
        // decode robot windows
        let assignment: Vec<(usize, usize, usize, usize)> = combo
            .iter()
            .map(|&c| {
                let (fu, lu) = ul_windows[c / dl_windows.len()];
                let (fd, ld) = dl_windows[c % dl_windows.len()];
                (fu, lu, fd, ld)
            })
            .collect();

        let g_fu = assignment.iter().map(|t| t.0).min().unwrap();
        let g_lu = assignment.iter().map(|t| t.1).max().unwrap();
        if assignment.iter().all(|t| t.2 > g_lu) {
            let mut qocs = Vec::with_capacity(n);
            let mut ok = true;
            for t in &assignment {
                match qoc_grid[t.3 - g_fu][t.2 - g_lu] {
                    Some(q) if scheme != Scheme::MinDelayStable || q > 0.0 => qocs.push(q),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                // canonical objective: QoC contributions in (fd, ld) order,
                // delays as integer slot sums
                let mut parts: Vec<(usize, usize, f64)> = assignment
                    .iter()
                    .zip(&qocs)
                    .map(|(t, &q)| (t.2, t.3, q))
                    .collect();
                parts.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
                let e2e_total: i64 = assignment.iter().map(|t| (t.3 - g_fu) as i64).sum();
                let value = match scheme {
                    Scheme::MaxQoc => parts.iter().fold(0.0, |acc, p| acc + p.2),
                    Scheme::MinDelay | Scheme::MinDelayStable => -(e2e_total as f64),
                    Scheme::MaxDelay => e2e_total as f64,
                };
                let key: Vec<usize> = assignment
                    .iter()
                    .flat_map(|&(fu, lu, fd, ld)| [fu, lu, fd, ld])
                    .collect();
                let improves = match &best {
                    None => true,
                    Some(b) => {
                        value > b.value
                            || (value == b.value
                                && (e2e_total < b.e2e_total
                                    || (e2e_total == b.e2e_total && key < b.key)))
                    }
                };
                if improves {
                    let ulw: Vec<(usize, usize)> = assignment.iter().map(|t| (t.0, t.1)).collect();
                    let dlw: Vec<(usize, usize)> = assignment.iter().map(|t| (t.2, t.3)).collect();
                    let feasible = flow_pack(&ul, &ulw, instance.ul_need, capacity, phi).is_some()
                        && flow_pack(&dl, &dlw, instance.dl_need, capacity, phi).is_some();
                    if feasible {
                        best = Some(Best { value, e2e_total, key, assignment });
                    }
                }
            }
        }

        // odometer
        for pos in (0..n).rev() {
            combo[pos] += 1;
            if combo[pos] < options {
                continue 'outer;
            }
            combo[pos] = 0;
        }
        break;
    }

    let best = best.ok_or_else(|| match scheme {
        Scheme::MinDelayStable => AllocError::Scheme4Infeasible,
        _ => AllocError::Infeasible {
            constraint: "no feasible window assignment enumerated".into(),
        },
    })?;
    let ulw: Vec<(usize, usize)> = best.assignment.iter().map(|t| (t.0, t.1)).collect();
    let dlw: Vec<(usize, usize)> = best.assignment.iter().map(|t| (t.2, t.3)).collect();
    let ul_alloc = flow_pack(&ul, &ulw, instance.ul_need, capacity, phi).expect("checked feasible");
    let dl_alloc = flow_pack(&dl, &dlw, instance.dl_need, capacity, phi).expect("checked feasible");
    AllocationSolution::from_matrices(instance, scheme, ul_alloc, dl_alloc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::validate;
    use crate::net::TddFrame;
    use crate::table::{QocTable, TableMode, TableParams};

    fn params() -> TableParams {
        TableParams {
            pattern: String::new(),
            repetitions: 1,
            capacity_prbs: 0,
            mean_ms: 0.5,
            std_ms: 1.0,
            p_ul: 1.0,
            p_dl: 1.0,
            seed: 0,
            n_runs: 0,
            mode: TableMode::Paired,
        }
    }

    /// Table whose QoC strictly rewards allocation delay, with `auc[e][a]`
    /// shaped so longer gaps help and longer e2e hurts mildly.
    fn reward_table(phi: usize, slot_ms: f64) -> QocTable {
        let cells = (1..=phi)
            .map(|e| {
                (1..=phi)
                    .map(|a| {
                        (a <= e).then(|| {
                            let auc = 0.9 - 0.08 * a as f64 + 0.01 * e as f64;
                            (auc.max(0.05), 0.0)
                        })
                    })
                    .collect()
            })
            .collect();
        QocTable::from_parts(slot_ms, cells, params()).unwrap()
    }

    /// Table with the minimal-delay entry unstable (QoC zero).
    fn zeroed_min_table(phi: usize, slot_ms: f64) -> QocTable {
        let cells = (1..=phi)
            .map(|e| {
                (1..=phi)
                    .map(|a| {
                        (a <= e).then(|| {
                            if a == 1 {
                                (1.5, 0.0) // unstable
                            } else {
                                (0.3 + 0.01 * e as f64, 0.0)
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        QocTable::from_parts(slot_ms, cells, params()).unwrap()
    }

    #[test]
    fn single_robot_min_delay_picks_the_first_pair() {
        let frame = TddFrame::from_pattern_str("UD", 2, 1, 1).unwrap();
        let table = reward_table(4, frame.slot_ms());
        let instance = AllocationInstance::new(frame, 1, 1, 1, table).unwrap();
        let sol = solve(&instance, Scheme::MinDelay).unwrap();
        assert_eq!(sol.first_ul, vec![1]);
        assert_eq!(sol.last_ul, vec![1]);
        assert_eq!(sol.first_dl, vec![2]);
        assert_eq!(sol.last_dl, vec![2]);
        assert_eq!(sol.e2e_delay_ms, vec![0.5]);
        assert_eq!(sol.alloc_delay_ms, vec![0.5]);
        let oracle = brute_force(&instance, Scheme::MinDelay).unwrap();
        assert_eq!(sol.objective_value, oracle.objective_value);
        assert_eq!(sol.first_ul, oracle.first_ul);
        assert_eq!(sol.first_dl, oracle.first_dl);
    }

    #[test]
    fn saturated_frame_forces_the_same_allocation_for_every_scheme() {
        // R large enough that all robots share slot 1 and slot 2; the frame
        // only has that one UD pair plus a later one, but min/max/qoc all
        // collapse to the same unique minimal structure when windows after
        // the uplink are a single slot pair
        let frame = TddFrame::from_pattern_str("UD", 1, 1, 10).unwrap();
        let table = reward_table(2, frame.slot_ms());
        let instance = AllocationInstance::new(frame, 3, 2, 2, table).unwrap();
        let mut firsts = Vec::new();
        for scheme in Scheme::all() {
            let sol = solve(&instance, scheme).unwrap();
            assert!(validate(&sol, &instance).is_empty());
            assert_eq!(sol.first_ul, vec![1, 1, 1]);
            assert_eq!(sol.first_dl, vec![2, 2, 2]);
            firsts.push(sol);
        }
        assert!(firsts.windows(2).all(|p| p[0].ul_alloc == p[1].ul_alloc));
    }

    #[test]
    fn max_qoc_beats_min_delay_on_a_zeroed_table() {
        let frame = TddFrame::from_pattern_str("UDUUD", 2, 1, 2).unwrap();
        let table = zeroed_min_table(10, frame.slot_ms());
        let instance = AllocationInstance::new(frame, 2, 2, 2, table).unwrap();
        let qoc_total = |s: &AllocationSolution| s.qoc.iter().sum::<f64>();
        let max_qoc = solve(&instance, Scheme::MaxQoc).unwrap();
        let min_delay = solve(&instance, Scheme::MinDelay).unwrap();
        assert!(qoc_total(&max_qoc) > qoc_total(&min_delay));
        // exactness against the oracle on both schemes
        for scheme in [Scheme::MaxQoc, Scheme::MinDelay] {
            let fast = solve(&instance, scheme).unwrap();
            let slow = brute_force(&instance, scheme).unwrap();
            assert_eq!(fast.objective_value, slow.objective_value, "{scheme:?}");
        }
    }

    #[test]
    fn infeasible_aggregate_is_the_same_verdict_in_both_solvers() {
        let frame = TddFrame::from_pattern_str("UD", 1, 1, 1).unwrap();
        let table = reward_table(2, frame.slot_ms());
        let instance = AllocationInstance { n_robots: 2, ..AllocationInstance::new(frame, 1, 1, 1, table).unwrap() };
        assert!(matches!(
            solve(&instance, Scheme::MinDelay),
            Err(AllocError::Infeasible { .. })
        ));
        assert!(matches!(
            brute_force(&instance, Scheme::MinDelay),
            Err(AllocError::Infeasible { .. })
        ));
    }

    #[test]
    fn scheme_four_reports_infeasibility_when_everything_is_unstable() {
        let frame = TddFrame::from_pattern_str("UD", 1, 1, 4).unwrap();
        // only one realizable pair (e2e 1, alloc 1) and it is unstable
        let cells = vec![vec![Some((1.2, 0.0))]];
        let table = QocTable::from_parts(frame.slot_ms(), cells, params()).unwrap();
        let instance = AllocationInstance::new(frame, 2, 1, 1, table).unwrap();
        assert!(matches!(solve(&instance, Scheme::MinDelayStable), Err(AllocError::Scheme4Infeasible)));
        assert!(matches!(
            brute_force(&instance, Scheme::MinDelayStable),
            Err(AllocError::Scheme4Infeasible)
        ));
        // the unconstrained schemes still solve
        assert!(solve(&instance, Scheme::MinDelay).is_ok());
    }

    #[test]
    fn solve_is_deterministic() {
        let frame = TddFrame::from_pattern_str("UDUUD", 2, 1, 3).unwrap();
        let table = reward_table(10, frame.slot_ms());
        let instance = AllocationInstance::new(frame, 3, 2, 2, table).unwrap();
        for scheme in Scheme::all() {
            let a = solve(&instance, scheme).unwrap();
            let b = solve(&instance, scheme).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn single_index_tables_key_by_e2e_alone() {
        let frame = TddFrame::from_pattern_str("UDUUD", 2, 1, 4).unwrap();
        let phi = 10usize;
        // only the (e, e-1) diagonal is realizable; lookups ignore the
        // realized allocation delay
        let cells = (1..=phi)
            .map(|e| {
                (1..=phi)
                    .map(|a| (a + 1 == e).then(|| (0.1 + 0.05 * e as f64, 0.0)))
                    .collect()
            })
            .collect();
        let mut p = params();
        p.mode = TableMode::SingleIndex;
        let table = QocTable::from_parts(frame.slot_ms(), cells, p).unwrap();
        let instance = AllocationInstance::new(frame, 2, 2, 2, table).unwrap();
        for scheme in Scheme::all() {
            let fast = solve(&instance, scheme).unwrap();
            let slow = brute_force(&instance, scheme).unwrap();
            assert_eq!(fast.objective_value, slow.objective_value, "{scheme:?}");
            assert!(validate(&fast, &instance).is_empty());
            // every robot's QoC matches the e2e-keyed entry regardless of its
            // allocation delay
            for i in 0..2 {
                let e = (fast.e2e_delay_ms[i] / instance.frame.slot_ms()).round() as usize;
                assert_eq!(fast.qoc[i], instance.table.qoc_slots(e, 1).unwrap());
            }
        }
    }

    #[test]
    fn search_space_guard_trips() {
        let frame = TddFrame::from_pattern_str("UDUUDUDUUD", 2, 1, 50).unwrap();
        let table = reward_table(20, frame.slot_ms());
        let instance = AllocationInstance::new(frame, 10, 2, 2, table).unwrap();
        assert!(matches!(
            brute_force(&instance, Scheme::MaxQoc),
            Err(AllocError::SearchSpaceTooLarge { .. })
        ));
    }
}
