//! Capacity feasibility and PRB packing.
//!
//! Every robot must place its PRB total inside a contiguous slot window of
//! one direction, with at least one PRB on each window endpoint (so that the
//! realized first/last slots equal the window ends); slots have a shared
//! capacity. Two independent routes decide feasibility: an interval Hall
//! condition (used by the native solver) and an explicit max-flow (used by
//! the brute-force oracle). Tests cross-check them against each other.

/// Per-robot end reservations: all `need` units on a single-slot window,
/// otherwise one unit on each end. Returns `None` when a window cannot host
/// its ends (spread window with `need < 2`, or reserved demand above
/// capacity).
fn reserve(
    positions: &[(usize, usize)], // windows in direction-position space
    need: u32,
    capacity: u32,
    n_positions: usize,
) -> Option<(Vec<u32>, Vec<u32>)> {
    let mut reserved = vec![0u32; n_positions];
    let mut free = Vec::with_capacity(positions.len());
    for &(pf, pl) in positions {
        if pf == pl {
            reserved[pf] = reserved[pf].checked_add(need)?;
            free.push(0);
        } else {
            if need < 2 {
                return None;
            }
            reserved[pf] += 1;
            reserved[pl] += 1;
            free.push(need - 2);
        }
    }
    if reserved.iter().any(|&r| r > capacity) {
        return None;
    }
    Some((reserved, free))
}

fn to_positions(dir_slots: &[usize], windows: &[(usize, usize)]) -> Option<Vec<(usize, usize)>> {
    let pos_of = |slot: usize| dir_slots.iter().position(|&s| s == slot);
    windows
        .iter()
        .map(|&(f, l)| Some((pos_of(f)?, pos_of(l)?)))
        .collect()
}

/// Interval Hall condition: per-robot windows over one direction's slots are
/// packable iff, after end reservations, every contiguous position range has
/// enough residual capacity for the free units of the windows it contains.
///
/// Feasibility is monotone in the window multiset: dropping robots keeps a
/// feasible set feasible.
pub(crate) fn windows_feasible(
    dir_slots: &[usize],
    windows: &[(usize, usize)],
    need: u32,
    capacity: u32,
) -> bool {
    if windows.is_empty() {
        return true;
    }
    let Some(positions) = to_positions(dir_slots, windows) else {
        return false;
    };
    let k = dir_slots.len();
    let Some((reserved, free)) = reserve(&positions, need, capacity, k) else {
        return false;
    };
    // prefix sums of residual capacity
    let mut residual_prefix = vec![0u64; k + 1];
    for p in 0..k {
        residual_prefix[p + 1] = residual_prefix[p] + u64::from(capacity - reserved[p]);
    }
    for p in 0..k {
        for q in p..k {
            let demand: u64 = positions
                .iter()
                .zip(&free)
                .filter(|(&(pf, pl), _)| pf >= p && pl <= q)
                .map(|(_, &f)| u64::from(f))
                .sum();
            if demand > residual_prefix[q + 1] - residual_prefix[p] {
                return false;
            }
        }
    }
    true
}

/// Earliest-deadline-first packing of per-robot windows. Returns per-robot
/// PRB rows over all `num_slots` absolute slots, or `None` when the set is
/// infeasible. Succeeds whenever [`windows_feasible`] holds.
pub(crate) fn pack_windows(
    dir_slots: &[usize],
    windows: &[(usize, usize)],
    need: u32,
    capacity: u32,
    num_slots: usize,
) -> Option<Vec<Vec<u32>>> {
    let positions = to_positions(dir_slots, windows)?;
    let k = dir_slots.len();
    let (reserved, free) = reserve(&positions, need, capacity, k)?;
    let mut remaining: Vec<u32> = (0..k).map(|p| capacity - reserved[p]).collect();

    let mut alloc = vec![vec![0u32; num_slots]; windows.len()];
    for (r, &(pf, pl)) in positions.iter().enumerate() {
        if pf == pl {
            alloc[r][dir_slots[pf] - 1] += need;
        } else {
            alloc[r][dir_slots[pf] - 1] += 1;
            alloc[r][dir_slots[pl] - 1] += 1;
        }
    }

    // free units in deadline order, leftmost placement
    let mut order: Vec<usize> = (0..windows.len()).collect();
    order.sort_by_key(|&r| (positions[r].1, positions[r].0, r));
    for &r in &order {
        let mut units = free[r];
        let (pf, pl) = positions[r];
        let mut p = pf;
        while units > 0 && p <= pl {
            let take = units.min(remaining[p]);
            alloc[r][dir_slots[p] - 1] += take;
            remaining[p] -= take;
            units -= take;
            p += 1;
        }
        if units > 0 {
            return None;
        }
    }
    Some(alloc)
}

/// Max-flow feasibility and packing for per-robot windows: the independent
/// route used by the brute-force oracle. Semantics match [`pack_windows`].
pub(crate) fn flow_pack(
    dir_slots: &[usize],
    windows: &[(usize, usize)],
    need: u32,
    capacity: u32,
    num_slots: usize,
) -> Option<Vec<Vec<u32>>> {
    let positions = to_positions(dir_slots, windows)?;
    let k = dir_slots.len();
    let (reserved, free) = reserve(&positions, need, capacity, k)?;

    // nodes: 0 source, 1..=n robots, n+1..=n+k slots, n+k+1 sink
    let n = windows.len();
    let nodes = n + k + 2;
    let sink = nodes - 1;
    let mut cap = vec![vec![0i64; nodes]; nodes];
    let mut total_free = 0i64;
    for r in 0..n {
        cap[0][1 + r] = i64::from(free[r]);
        total_free += i64::from(free[r]);
        let (pf, pl) = positions[r];
        for p in pf..=pl {
            cap[1 + r][1 + n + p] = i64::MAX / 4;
        }
    }
    for p in 0..k {
        cap[1 + n + p][sink] = i64::from(capacity - reserved[p]);
    }

    // Edmonds-Karp
    let mut flow = vec![vec![0i64; nodes]; nodes];
    let mut pushed = 0i64;
    loop {
        let mut parent = vec![usize::MAX; nodes];
        parent[0] = 0;
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..nodes {
                if parent[v] == usize::MAX && cap[u][v] - flow[u][v] > 0 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[sink] == usize::MAX {
            break;
        }
        let mut bottleneck = i64::MAX;
        let mut v = sink;
        while v != 0 {
            let u = parent[v];
            bottleneck = bottleneck.min(cap[u][v] - flow[u][v]);
            v = u;
        }
        let mut v = sink;
        while v != 0 {
            let u = parent[v];
            flow[u][v] += bottleneck;
            flow[v][u] -= bottleneck;
            v = u;
        }
        pushed += bottleneck;
    }
    if pushed < total_free {
        return None;
    }

    let mut alloc = vec![vec![0u32; num_slots]; n];
    for (r, &(pf, pl)) in positions.iter().enumerate() {
        if pf == pl {
            alloc[r][dir_slots[pf] - 1] += need;
        } else {
            alloc[r][dir_slots[pf] - 1] += 1;
            alloc[r][dir_slots[pl] - 1] += 1;
            for p in pf..=pl {
                alloc[r][dir_slots[p] - 1] += flow[1 + r][1 + n + p] as u32;
            }
        }
    }
    Some(alloc)
}

/// Aggregate uplink feasibility for a bracket `[a, b]` of uplink slots: the
/// robots may use any slots inside the bracket, as long as the bracket ends
/// are occupied by someone.
pub(crate) fn ul_bracket_feasible(
    bracket_slots: &[usize],
    n_robots: usize,
    need: u32,
    capacity: u32,
) -> bool {
    let total = n_robots as u64 * u64::from(need);
    if total > u64::from(capacity) * bracket_slots.len() as u64 {
        return false;
    }
    if bracket_slots.len() > 1 && total < 2 {
        // a single PRB cannot occupy two distinct end slots
        return false;
    }
    true
}

/// Greedy packing for a feasible uplink bracket: one PRB of the last robot is
/// pinned to the bracket's last slot, everything else fills leftmost-first,
/// which pins the bracket's first slot through robot 0.
pub(crate) fn pack_ul_bracket(
    bracket_slots: &[usize],
    n_robots: usize,
    need: u32,
    capacity: u32,
    num_slots: usize,
) -> Option<Vec<Vec<u32>>> {
    let w = bracket_slots.len();
    let mut remaining = vec![capacity; w];
    remaining[w - 1] = remaining[w - 1].checked_sub(1)?;
    let mut alloc = vec![vec![0u32; num_slots]; n_robots];
    for (i, row) in alloc.iter_mut().enumerate() {
        let mut units = need - u32::from(i == n_robots - 1);
        for (p, &slot) in bracket_slots.iter().enumerate() {
            if units == 0 {
                break;
            }
            let take = units.min(remaining[p]);
            row[slot - 1] += take;
            remaining[p] -= take;
            units -= take;
        }
        if units > 0 {
            return None;
        }
    }
    alloc[n_robots - 1][bracket_slots[w - 1] - 1] += 1;
    Some(alloc)
}
