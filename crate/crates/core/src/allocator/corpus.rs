//! Randomized small allocation instances.
//!
//! The corpus stays inside the brute-force guard (N ≤ 3, φ ≤ 10) so that
//! every instance can be cross-checked against the enumeration oracle. QoC
//! tables are synthetic: random AUC values pushed through the normalization
//! rule, with a slice of instances deliberately zeroing the minimal-delay
//! entries to separate the schemes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AllocationInstance;
use crate::net::TddFrame;
use crate::table::{QocTable, TableMode, TableParams};

const PATTERNS: &[&str] = &["UD", "UDU", "UDD", "DUD", "UDUUD", "UUDUD", "UUDD", "UUUDD"];

/// Deterministically generates `count` randomized instances from `seed`.
pub fn corpus(count: usize, seed: u64) -> Vec<AllocationInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        if let Some(instance) = try_instance(&mut rng, out.len()) {
            out.push(instance);
        }
    }
    out
}

fn try_instance(rng: &mut ChaCha8Rng, index: usize) -> Option<AllocationInstance> {
    let pattern = PATTERNS[rng.random_range(0..PATTERNS.len())];
    let max_reps = (10 / pattern.len()).clamp(1, 2) as u32;
    let reps = rng.random_range(1..=max_reps);
    let capacity = rng.random_range(1..=4u32);
    let frame = TddFrame::from_pattern_str(pattern, reps, 1, capacity).ok()?;
    let phi = frame.num_slots();

    let n_robots = rng.random_range(1..=3usize);
    let ul_need = rng.random_range(1..=3u32);
    let dl_need = rng.random_range(1..=3u32);

    // keep the brute-force enumeration small
    let windows = |k: usize, need: u32| -> u128 {
        if need >= 2 {
            (k * (k + 1) / 2) as u128
        } else {
            k as u128
        }
    };
    let per_robot = windows(frame.uplink_slots().len(), ul_need)
        * windows(frame.downlink_slots().len(), dl_need);
    if per_robot == 0 || per_robot.pow(n_robots as u32) > 2_000_000 {
        return None;
    }
    // some downlink capacity must come after an uplink slot
    let first_ul = *frame.uplink_slots().first()?;
    if !frame.downlink_slots().iter().any(|&j| j > first_ul) {
        return None;
    }

    let slot_ms = frame.slot_ms();
    let zero_min_delay = index % 4 == 3;
    let cells: Vec<Vec<Option<(f64, f64)>>> = (1..=phi)
        .map(|e| {
            (1..=phi)
                .map(|a| {
                    (a <= e).then(|| {
                        let auc = if zero_min_delay && a == 1 {
                            1.0 + rng.random::<f64>() * 0.4
                        } else {
                            0.05 + rng.random::<f64>() * 1.2
                        };
                        (auc, 0.0)
                    })
                })
                .collect()
        })
        .collect();
    let table = QocTable::from_parts(
        slot_ms,
        cells,
        TableParams {
            pattern: pattern.to_string(),
            repetitions: reps,
            capacity_prbs: capacity,
            mean_ms: 0.5,
            std_ms: 1.0,
            p_ul: 0.99,
            p_dl: 0.99,
            seed: 0,
            n_runs: 0,
            mode: TableMode::Paired,
        },
    )
    .ok()?;

    AllocationInstance::new(frame, n_robots, ul_need, dl_need, table).ok()
}
