use super::instance::{lookup_entry, objective_from_parts};
use super::{AllocationInstance, AllocationSolution};
use crate::net::SlotKind;

/// One violated solution invariant. Each variant names the rule and the
/// offending robot/slot so hand-built solutions fail loudly.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Shape { detail: String },
    WrongKindAllocation { robot: usize, slot: usize, direction: SlotKind },
    SlotCapacityExceeded { slot: usize, direction: SlotKind, used: u64, capacity: u32 },
    TotalMismatch { robot: usize, direction: SlotKind, got: u64, need: u32 },
    ScheduleLinkMismatch { robot: usize, slot: usize, direction: SlotKind },
    EndpointMismatch { robot: usize, which: &'static str, stored: usize, actual: usize },
    EdgeGatingViolated { robot: usize, first_dl: usize, global_last_ul: usize },
    DelayMismatch { robot: usize, which: &'static str, stored_ms: f64, actual_ms: f64 },
    DelayChoiceMismatch { robot: usize, stored: usize, actual: Option<usize> },
    QocMismatch { robot: usize, stored: f64, table: Option<f64> },
    ObjectiveMismatch { stored: f64, recomputed: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Shape { detail } => write!(f, "malformed solution: {detail}"),
            Violation::WrongKindAllocation { robot, slot, direction } => write!(
                f,
                "robot {robot} holds {direction:?} resources in slot {slot}, which is not a {direction:?} slot"
            ),
            Violation::SlotCapacityExceeded { slot, direction, used, capacity } => write!(
                f,
                "per-slot capacity exceeded: {used} > {capacity} {direction:?} PRBs in slot {slot}"
            ),
            Violation::TotalMismatch { robot, direction, got, need } => write!(
                f,
                "robot {robot} {direction:?} total is {got}, the per-robot requirement is {need}"
            ),
            Violation::ScheduleLinkMismatch { robot, slot, direction } => write!(
                f,
                "schedule indicator and allocation disagree for robot {robot}, {direction:?} slot {slot}"
            ),
            Violation::EndpointMismatch { robot, which, stored, actual } => write!(
                f,
                "robot {robot} {which} marker is {stored}, the allocation realizes {actual}"
            ),
            Violation::EdgeGatingViolated { robot, first_dl, global_last_ul } => write!(
                f,
                "robot {robot} first downlink slot {first_dl} does not follow the global last uplink slot {global_last_ul}"
            ),
            Violation::DelayMismatch { robot, which, stored_ms, actual_ms } => write!(
                f,
                "robot {robot} {which} delay is stored as {stored_ms} ms but realizes {actual_ms} ms"
            ),
            Violation::DelayChoiceMismatch { robot, stored, actual } => write!(
                f,
                "robot {robot} delay choice {stored} does not match the table entry {actual:?} for its delays"
            ),
            Violation::QocMismatch { robot, stored, table } => write!(
                f,
                "robot {robot} QoC {stored} does not match the table value {table:?}"
            ),
            Violation::ObjectiveMismatch { stored, recomputed } => write!(
                f,
                "objective value {stored} does not match the recomputed {recomputed}"
            ),
        }
    }
}

/// Checks every solution invariant independently of how the solution was
/// produced. An empty list means the solution is valid. The objective check
/// uses the scheme stored implicitly through `objective_value`; callers pass
/// the scheme they solved for.
pub fn validate(solution: &AllocationSolution, instance: &AllocationInstance) -> Vec<Violation> {
    validate_for(solution, instance, None)
}

/// [`validate`] with an explicit scheme to re-derive the objective. Without a
/// scheme the objective check is skipped.
pub fn validate_with_scheme(
    solution: &AllocationSolution,
    instance: &AllocationInstance,
    scheme: super::Scheme,
) -> Vec<Violation> {
    validate_for(solution, instance, Some(scheme))
}

fn validate_for(
    solution: &AllocationSolution,
    instance: &AllocationInstance,
    scheme: Option<super::Scheme>,
) -> Vec<Violation> {
    let mut v = Vec::new();
    let n = instance.n_robots;
    let phi = instance.frame.num_slots();

    let dims_ok = |m: &[Vec<u32>]| m.len() == n && m.iter().all(|row| row.len() == phi);
    let bdims_ok = |m: &[Vec<bool>]| m.len() == n && m.iter().all(|row| row.len() == phi);
    if !dims_ok(&solution.ul_alloc)
        || !dims_ok(&solution.dl_alloc)
        || !bdims_ok(&solution.ul_sched)
        || !bdims_ok(&solution.dl_sched)
        || [
            solution.first_ul.len(),
            solution.last_ul.len(),
            solution.first_dl.len(),
            solution.last_dl.len(),
            solution.e2e_delay_ms.len(),
            solution.alloc_delay_ms.len(),
            solution.delay_choice.len(),
            solution.qoc.len(),
        ]
        .iter()
        .any(|&len| len != n)
    {
        v.push(Violation::Shape { detail: format!("expected {n} robots x {phi} slots") });
        return v;
    }

    for (direction, alloc, sched, need) in [
        (SlotKind::Uplink, &solution.ul_alloc, &solution.ul_sched, instance.ul_need),
        (SlotKind::Downlink, &solution.dl_alloc, &solution.dl_sched, instance.dl_need),
    ] {
        // allocations confined to slots of the right kind
        for (i, row) in alloc.iter().enumerate() {
            for (j0, &x) in row.iter().enumerate() {
                if x > 0 && instance.frame.kind_of(j0 + 1) != direction {
                    v.push(Violation::WrongKindAllocation { robot: i, slot: j0 + 1, direction });
                }
            }
        }
        // per-slot shared capacity
        for j0 in 0..phi {
            if instance.frame.kind_of(j0 + 1) != direction {
                continue;
            }
            let used: u64 = alloc.iter().map(|row| u64::from(row[j0])).sum();
            if used > u64::from(instance.frame.capacity_prbs) {
                v.push(Violation::SlotCapacityExceeded {
                    slot: j0 + 1,
                    direction,
                    used,
                    capacity: instance.frame.capacity_prbs,
                });
            }
        }
        // per-robot totals
        for (i, row) in alloc.iter().enumerate() {
            let got: u64 = row.iter().map(|&x| u64::from(x)).sum();
            if got != u64::from(need) {
                v.push(Violation::TotalMismatch { robot: i, direction, got, need });
            }
        }
        // indicator linking
        for i in 0..n {
            for j0 in 0..phi {
                if (alloc[i][j0] > 0) != sched[i][j0] {
                    v.push(Violation::ScheduleLinkMismatch { robot: i, slot: j0 + 1, direction });
                }
            }
        }
    }

    // first/last markers
    let realized = |row: &[u32]| -> Option<(usize, usize)> {
        let first = row.iter().position(|&x| x > 0)? + 1;
        let last = row.iter().rposition(|&x| x > 0)? + 1;
        Some((first, last))
    };
    let mut realized_last_ul_max = 0usize;
    let mut realized_first_ul_min = usize::MAX;
    for i in 0..n {
        for (which, stored, realized_value) in [
            ("first uplink", solution.first_ul[i], realized(&solution.ul_alloc[i]).map(|t| t.0)),
            ("last uplink", solution.last_ul[i], realized(&solution.ul_alloc[i]).map(|t| t.1)),
            ("first downlink", solution.first_dl[i], realized(&solution.dl_alloc[i]).map(|t| t.0)),
            ("last downlink", solution.last_dl[i], realized(&solution.dl_alloc[i]).map(|t| t.1)),
        ] {
            match realized_value {
                Some(actual) => {
                    if actual != stored {
                        v.push(Violation::EndpointMismatch { robot: i, which, stored, actual });
                    }
                }
                None => v.push(Violation::Shape {
                    detail: format!("robot {i} has an empty allocation for its {which} marker"),
                }),
            }
        }
        if let Some((fu, lu)) = realized(&solution.ul_alloc[i]) {
            realized_first_ul_min = realized_first_ul_min.min(fu);
            realized_last_ul_max = realized_last_ul_max.max(lu);
        }
    }
    if realized_first_ul_min == usize::MAX {
        return v; // nothing else is checkable
    }

    // edge gating and delay definitions
    let slot_ms = instance.frame.slot_ms();
    for i in 0..n {
        let (Some((_, _)), Some((fd, ld))) =
            (realized(&solution.ul_alloc[i]), realized(&solution.dl_alloc[i]))
        else {
            continue;
        };
        if fd <= realized_last_ul_max {
            v.push(Violation::EdgeGatingViolated {
                robot: i,
                first_dl: fd,
                global_last_ul: realized_last_ul_max,
            });
            continue;
        }
        let e2e_slots = ld - realized_first_ul_min;
        let alloc_slots = fd - realized_last_ul_max;
        let e2e_ms = e2e_slots as f64 * slot_ms;
        let alloc_ms = alloc_slots as f64 * slot_ms;
        if (solution.e2e_delay_ms[i] - e2e_ms).abs() > 1e-9 {
            v.push(Violation::DelayMismatch {
                robot: i,
                which: "end-to-end",
                stored_ms: solution.e2e_delay_ms[i],
                actual_ms: e2e_ms,
            });
        }
        if (solution.alloc_delay_ms[i] - alloc_ms).abs() > 1e-9 {
            v.push(Violation::DelayMismatch {
                robot: i,
                which: "allocation",
                stored_ms: solution.alloc_delay_ms[i],
                actual_ms: alloc_ms,
            });
        }
        // unique delay choice mapping to the table entry and QoC
        match lookup_entry(&instance.table, e2e_slots, alloc_slots) {
            Some((entry, qoc)) => {
                if solution.delay_choice[i] != entry {
                    v.push(Violation::DelayChoiceMismatch {
                        robot: i,
                        stored: solution.delay_choice[i],
                        actual: Some(entry),
                    });
                }
                if solution.qoc[i].to_bits() != qoc.to_bits() {
                    v.push(Violation::QocMismatch { robot: i, stored: solution.qoc[i], table: Some(qoc) });
                }
            }
            None => {
                v.push(Violation::DelayChoiceMismatch {
                    robot: i,
                    stored: solution.delay_choice[i],
                    actual: None,
                });
                v.push(Violation::QocMismatch { robot: i, stored: solution.qoc[i], table: None });
            }
        }
    }

    if let Some(scheme) = scheme {
        let recomputed = objective_from_parts(
            scheme,
            slot_ms,
            &solution.first_dl,
            &solution.last_dl,
            &solution.qoc,
            realized_first_ul_min,
        );
        if recomputed.to_bits() != solution.objective_value.to_bits() {
            v.push(Violation::ObjectiveMismatch {
                stored: solution.objective_value,
                recomputed,
            });
        }
    }

    v
}
