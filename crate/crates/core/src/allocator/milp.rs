use std::fmt::Write as _;

use super::{AllocError, AllocationInstance, Scheme};
use crate::net::SlotKind;
use crate::table::TableMode;

/// A linear row under construction: terms, comparison and right-hand side.
struct Row {
    name: String,
    terms: Vec<(f64, String)>,
    op: &'static str,
    rhs: f64,
}

fn fmt_coef(c: f64) -> String {
    if c.fract() == 0.0 && c.abs() < 9.0e15 {
        format!("{}", c as i64)
    } else {
        format!("{c:.17e}")
    }
}

fn write_terms(out: &mut String, terms: &[(f64, String)]) {
    let mut first = true;
    for (coef, var) in terms {
        if *coef == 0.0 {
            continue;
        }
        let mag = coef.abs();
        if first {
            if *coef < 0.0 {
                out.push_str("- ");
            }
            first = false;
        } else if *coef < 0.0 {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if mag == 1.0 {
            out.push_str(var);
        } else {
            let _ = write!(out, "{} {}", fmt_coef(mag), var);
        }
    }
    if first {
        out.push('0'); // degenerate all-zero row
    }
}

/// Emits the full linearized model in LP format.
///
/// The first/last slot markers use selector binaries (`w`, one per candidate
/// slot, summing to one and dominated by the schedule indicator) pinned to
/// the marker through an equality, plus big-M rows forcing the marker to the
/// minimum/maximum scheduled slot. The same selector construction recovers
/// the global first-uplink/last-uplink slots that the delay definitions
/// subtract. Any MILP solver fed this file reproduces [`super::solve`]'s
/// objective value (delay objectives are in slots; multiply by the slot
/// duration for ms).
pub fn export_milp(instance: &AllocationInstance, scheme: Scheme) -> Result<String, AllocError> {
    instance.validate()?;
    let n = instance.n_robots;
    let phi = instance.frame.num_slots();
    let m = f64::from(instance.big_m);
    let ul = instance.frame.uplink_slots();
    let dl = instance.frame.downlink_slots();
    let entries = instance.table.entries();
    let u = f64::from(instance.ul_need);
    let d = f64::from(instance.dl_need);
    let r = f64::from(instance.frame.capacity_prbs);
    let paired = instance.table.params.mode == TableMode::Paired;

    let x = |i: usize, j: usize| format!("x_{i}_{j}");
    let y = |i: usize, j: usize| format!("y_{i}_{j}");
    let zu = |i: usize, j: usize| format!("zu_{i}_{j}");
    let zd = |i: usize, j: usize| format!("zd_{i}_{j}");
    let th = |i: usize, l: usize| format!("th_{i}_{l}");
    let robots = 1..=n;

    let mut rows: Vec<Row> = Vec::new();
    let mut row = |name: String, terms: Vec<(f64, String)>, op: &'static str, rhs: f64| {
        rows.push(Row { name, terms, op, rhs });
    };

    // per-slot capacity
    for &j in &ul {
        row(
            format!("cap_ul_{j}"),
            robots.clone().map(|i| (1.0, x(i, j))).collect(),
            "<=",
            r,
        );
    }
    for &j in &dl {
        row(
            format!("cap_dl_{j}"),
            robots.clone().map(|i| (1.0, y(i, j))).collect(),
            "<=",
            r,
        );
    }
    // per-robot totals
    for i in robots.clone() {
        row(format!("tot_ul_{i}"), ul.iter().map(|&j| (1.0, x(i, j))).collect(), "=", u);
        row(format!("tot_dl_{i}"), dl.iter().map(|&j| (1.0, y(i, j))).collect(), "=", d);
    }
    // indicator linking
    for i in robots.clone() {
        for &j in &ul {
            row(format!("link_ub_ul_{i}_{j}"), vec![(1.0, x(i, j)), (-u, zu(i, j))], "<=", 0.0);
            row(format!("link_lb_ul_{i}_{j}"), vec![(1.0, zu(i, j)), (-1.0, x(i, j))], "<=", 0.0);
        }
        for &j in &dl {
            row(format!("link_ub_dl_{i}_{j}"), vec![(1.0, y(i, j)), (-d, zd(i, j))], "<=", 0.0);
            row(format!("link_lb_dl_{i}_{j}"), vec![(1.0, zd(i, j)), (-1.0, y(i, j))], "<=", 0.0);
        }
    }
    // first/last markers via selector binaries and big-M brackets
    struct Marker<'a> {
        tag: &'static str,
        slots: &'a [usize],
        z: Box<dyn Fn(usize, usize) -> String>,
        s: Box<dyn Fn(usize) -> String>,
        is_min: bool,
    }
    let markers = [
        Marker { tag: "fu", slots: &ul, z: Box::new(zu), s: Box::new(|i| format!("s_fu_{i}")), is_min: true },
        Marker { tag: "lu", slots: &ul, z: Box::new(zu), s: Box::new(|i| format!("s_lu_{i}")), is_min: false },
        Marker { tag: "fd", slots: &dl, z: Box::new(zd), s: Box::new(|i| format!("s_fd_{i}")), is_min: true },
        Marker { tag: "ld", slots: &dl, z: Box::new(zd), s: Box::new(|i| format!("s_ld_{i}")), is_min: false },
    ];
    for marker in &markers {
        for i in robots.clone() {
            let w = |j: usize| format!("w_{}_{i}_{j}", marker.tag);
            row(
                format!("selone_{}_{i}", marker.tag),
                marker.slots.iter().map(|&j| (1.0, w(j))).collect(),
                "=",
                1.0,
            );
            for &j in marker.slots {
                row(
                    format!("selsub_{}_{i}_{j}", marker.tag),
                    vec![(1.0, w(j)), (-1.0, (marker.z)(i, j))],
                    "<=",
                    0.0,
                );
            }
            let mut eq_terms = vec![(1.0, (marker.s)(i))];
            for &j in marker.slots {
                eq_terms.push((-(j as f64), w(j)));
            }
            row(format!("seleq_{}_{i}", marker.tag), eq_terms, "=", 0.0);
            for &j in marker.slots {
                if marker.is_min {
                    // s <= j + M (1 - z)
                    row(
                        format!("bound_{}_{i}_{j}", marker.tag),
                        vec![(1.0, (marker.s)(i)), (m, (marker.z)(i, j))],
                        "<=",
                        j as f64 + m,
                    );
                } else {
                    // s >= j - M (1 - z)
                    row(
                        format!("bound_{}_{i}_{j}", marker.tag),
                        vec![(1.0, (marker.s)(i)), (-m, (marker.z)(i, j))],
                        ">=",
                        j as f64 - m,
                    );
                }
            }
        }
    }
    // global first-uplink minimum and last-uplink maximum
    for i in robots.clone() {
        row(format!("gfu_le_{i}"), vec![(1.0, "gfu".into()), (-1.0, format!("s_fu_{i}"))], "<=", 0.0);
        row(
            format!("gfu_ge_{i}"),
            vec![(1.0, "gfu".into()), (-1.0, format!("s_fu_{i}")), (-m, format!("vmin_{i}"))],
            ">=",
            -m,
        );
        row(format!("glu_ge_{i}"), vec![(1.0, "glu".into()), (-1.0, format!("s_lu_{i}"))], ">=", 0.0);
        row(
            format!("glu_le_{i}"),
            vec![(1.0, "glu".into()), (-1.0, format!("s_lu_{i}")), (m, format!("vmax_{i}"))],
            "<=",
            m,
        );
    }
    row("gfu_one".into(), robots.clone().map(|i| (1.0, format!("vmin_{i}"))).collect(), "=", 1.0);
    row("glu_one".into(), robots.clone().map(|i| (1.0, format!("vmax_{i}"))).collect(), "=", 1.0);
    // the edge computes after all uplinks: first downlink after the global
    // last uplink
    for i in robots.clone() {
        row(format!("gate_{i}"), vec![(1.0, format!("s_fd_{i}")), (-1.0, "glu".into())], ">=", 1.0);
    }
    // delay definitions (slot units)
    for i in robots.clone() {
        row(
            format!("de2e_def_{i}"),
            vec![(1.0, format!("de2e_{i}")), (-1.0, format!("s_ld_{i}")), (1.0, "gfu".into())],
            "=",
            0.0,
        );
        row(
            format!("dalloc_def_{i}"),
            vec![(1.0, format!("dalloc_{i}")), (-1.0, format!("s_fd_{i}")), (1.0, "glu".into())],
            "=",
            0.0,
        );
    }
    // delay-index selection and QoC mapping
    for i in robots.clone() {
        row(
            format!("thone_{i}"),
            entries.iter().map(|e| (1.0, th(i, e.index + 1))).collect(),
            "=",
            1.0,
        );
        for e in &entries {
            let l = e.index + 1;
            let delta = e.e2e_slots as f64;
            row(
                format!("the2e_ub_{i}_{l}"),
                vec![(1.0, format!("de2e_{i}")), (phi as f64 - delta, th(i, l))],
                "<=",
                phi as f64,
            );
            row(
                format!("the2e_lb_{i}_{l}"),
                vec![(1.0, format!("de2e_{i}")), (-delta, th(i, l))],
                ">=",
                0.0,
            );
            if paired {
                let da = e.alloc_slots as f64;
                row(
                    format!("thal_ub_{i}_{l}"),
                    vec![(1.0, format!("dalloc_{i}")), (phi as f64 - da, th(i, l))],
                    "<=",
                    phi as f64,
                );
                row(
                    format!("thal_lb_{i}_{l}"),
                    vec![(1.0, format!("dalloc_{i}")), (-da, th(i, l))],
                    ">=",
                    0.0,
                );
            }
        }
        let mut qmap = vec![(1.0, format!("q_{i}"))];
        for e in &entries {
            qmap.push((-e.qoc, th(i, e.index + 1)));
        }
        row(format!("qmap_{i}"), qmap, "=", 0.0);
        if scheme == Scheme::MinDelayStable {
            let zero_terms: Vec<(f64, String)> = entries
                .iter()
                .filter(|e| e.qoc == 0.0)
                .map(|e| (1.0, th(i, e.index + 1)))
                .collect();
            if !zero_terms.is_empty() {
                row(format!("stable_{i}"), zero_terms, "=", 0.0);
            }
        }
    }

    // assemble the document
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ slot allocation model: scheme {}, {} robots, {} slots, {} table entries",
        scheme.label(),
        n,
        phi,
        entries.len()
    );
    let _ = writeln!(out, "\\ frame {} x{}, capacity {} PRBs/slot, U={} D={}, M={}",
        instance.frame.pattern_string(),
        instance.frame.repetitions(),
        instance.frame.capacity_prbs,
        instance.ul_need,
        instance.dl_need,
        instance.big_m
    );
    let sense = match scheme {
        Scheme::MaxQoc | Scheme::MaxDelay => "Maximize",
        Scheme::MinDelay | Scheme::MinDelayStable => "Minimize",
    };
    let _ = writeln!(out, "{sense}");
    let objective: Vec<(f64, String)> = match scheme {
        Scheme::MaxQoc => robots.clone().map(|i| (1.0, format!("q_{i}"))).collect(),
        _ => robots.clone().map(|i| (1.0, format!("de2e_{i}"))).collect(),
    };
    out.push_str(" obj: ");
    write_terms(&mut out, &objective);
    out.push('\n');
    out.push_str("Subject To\n");
    for r in &rows {
        let _ = write!(out, " {}: ", r.name);
        write_terms(&mut out, &r.terms);
        let _ = writeln!(out, " {} {}", r.op, fmt_coef(r.rhs));
    }

    out.push_str("Bounds\n");
    let mut generals: Vec<String> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    for i in robots.clone() {
        for j in 1..=phi {
            let is_ul = instance.frame.kind_of(j) == SlotKind::Uplink;
            if is_ul {
                let _ = writeln!(out, " 0 <= {} <= {}", x(i, j), fmt_coef(u));
                let _ = writeln!(out, " {} = 0", y(i, j));
                let _ = writeln!(out, " {} = 0", zd(i, j));
            } else {
                let _ = writeln!(out, " {} = 0", x(i, j));
                let _ = writeln!(out, " 0 <= {} <= {}", y(i, j), fmt_coef(d));
                let _ = writeln!(out, " {} = 0", zu(i, j));
            }
            generals.push(x(i, j));
            generals.push(y(i, j));
            binaries.push(zu(i, j));
            binaries.push(zd(i, j));
        }
        for s in ["fu", "lu", "fd", "ld"] {
            let _ = writeln!(out, " 1 <= s_{s}_{i} <= {phi}");
            generals.push(format!("s_{s}_{i}"));
        }
        for marker in &markers {
            for &j in marker.slots {
                binaries.push(format!("w_{}_{i}_{j}", marker.tag));
            }
        }
        binaries.push(format!("vmin_{i}"));
        binaries.push(format!("vmax_{i}"));
        let _ = writeln!(out, " 0 <= de2e_{i} <= {phi}");
        let _ = writeln!(out, " 0 <= dalloc_{i} <= {phi}");
        let _ = writeln!(out, " 0 <= q_{i} <= 1");
        for e in &entries {
            binaries.push(th(i, e.index + 1));
        }
    }
    let _ = writeln!(out, " 1 <= gfu <= {phi}");
    let _ = writeln!(out, " 1 <= glu <= {phi}");
    generals.push("gfu".into());
    generals.push("glu".into());

    out.push_str("Generals\n");
    for chunk in generals.chunks(12) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("Binaries\n");
    for chunk in binaries.chunks(12) {
        let _ = writeln!(out, " {}", chunk.join(" "));
    }
    out.push_str("End\n");
    Ok(out)
}
