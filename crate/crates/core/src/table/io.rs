use std::io::Write;
use std::path::Path;

use super::{QocTable, TableError, TableMode, TableParams};

/// Formats a float with 12 significant digits, the fixed width used by every
/// emitted artifact so reruns stay byte-identical.
pub(crate) fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

/// Serializes a table to the structured text format: `# key = value` header
/// lines followed by CSV rows `(e2e_ms, alloc_ms, auc, stderr, qoc)` in
/// enumeration order.
pub fn table_to_string(table: &QocTable) -> String {
    let p = &table.params;
    let mut out = String::new();
    out.push_str("# qoc-table v1\n");
    out.push_str(&format!("# pattern = {}\n", p.pattern));
    out.push_str(&format!("# repetitions = {}\n", p.repetitions));
    out.push_str(&format!("# capacity_prbs = {}\n", p.capacity_prbs));
    out.push_str(&format!("# slot_ms = {}\n", fmt_sig(table.slot_ms)));
    out.push_str(&format!("# mean_ms = {}\n", fmt_sig(p.mean_ms)));
    out.push_str(&format!("# std_ms = {}\n", fmt_sig(p.std_ms)));
    out.push_str(&format!("# p_ul = {}\n", fmt_sig(p.p_ul)));
    out.push_str(&format!("# p_dl = {}\n", fmt_sig(p.p_dl)));
    out.push_str(&format!("# seed = {}\n", p.seed));
    out.push_str(&format!("# n_runs = {}\n", p.n_runs));
    out.push_str(&format!("# mode = {}\n", p.mode.label()));
    out.push_str(&format!("# max_auc = {}\n", fmt_sig(table.max_auc)));
    out.push_str("e2e_ms,alloc_ms,auc,stderr,qoc\n");
    for (e, row) in table.cells.iter().enumerate() {
        for (a, cell) in row.iter().enumerate() {
            if let Some(c) = cell {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt_sig(table.e2e_delays_ms[e]),
                    fmt_sig(table.alloc_delays_ms[a]),
                    fmt_sig(c.auc),
                    fmt_sig(c.stderr),
                    fmt_sig(c.qoc),
                ));
            }
        }
    }
    out
}

pub fn write_table(table: &QocTable, path: &Path) -> Result<(), TableError> {
    let mut file = std::fs::File::create(path)?;
    file.write_all(table_to_string(table).as_bytes())?;
    Ok(())
}

/// Parses the text format back into a table.
///
/// Values reload at the serialized 12-digit precision; QoC values are
/// recomputed from the reloaded AUCs through the same normalization rule.
pub fn read_table(text: &str) -> Result<QocTable, TableError> {
    let mut pattern = None;
    let mut repetitions = None;
    let mut capacity = None;
    let mut slot_ms = None;
    let mut mean_ms = None;
    let mut std_ms = None;
    let mut p_ul = None;
    let mut p_dl = None;
    let mut seed = None;
    let mut n_runs = None;
    let mut mode = None;
    let mut max_auc = None;
    let mut rows: Vec<(f64, f64, f64, f64, f64)> = Vec::new();

    let bad = |line: usize, reason: &str| TableError::Parse { line, reason: reason.into() };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some((key, value)) = rest.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                let fparse = |v: &str| {
                    v.parse::<f64>().map_err(|_| bad(lineno, &format!("bad float \"{v}\"")))
                };
                match key {
                    "pattern" => pattern = Some(value.to_string()),
                    "repetitions" => {
                        repetitions =
                            Some(value.parse::<u32>().map_err(|_| bad(lineno, "bad repetitions"))?)
                    }
                    "capacity_prbs" => {
                        capacity =
                            Some(value.parse::<u32>().map_err(|_| bad(lineno, "bad capacity"))?)
                    }
                    "slot_ms" => slot_ms = Some(fparse(value)?),
                    "mean_ms" => mean_ms = Some(fparse(value)?),
                    "std_ms" => std_ms = Some(fparse(value)?),
                    "p_ul" => p_ul = Some(fparse(value)?),
                    "p_dl" => p_dl = Some(fparse(value)?),
                    "seed" => {
                        seed = Some(value.parse::<u64>().map_err(|_| bad(lineno, "bad seed"))?)
                    }
                    "n_runs" => {
                        n_runs = Some(value.parse::<u32>().map_err(|_| bad(lineno, "bad n_runs"))?)
                    }
                    "mode" => {
                        mode = Some(
                            TableMode::from_label(value)
                                .ok_or_else(|| bad(lineno, &format!("unknown mode \"{value}\"")))?,
                        )
                    }
                    "max_auc" => max_auc = Some(fparse(value)?),
                    _ => {} // ignore unknown header keys
                }
            }
            continue;
        }
        if line.starts_with("e2e_ms") {
            continue; // column header
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad(lineno, &format!("expected 5 fields, got {}", fields.len())));
        }
        let mut vals = [0.0f64; 5];
        for (k, f) in fields.iter().enumerate() {
            vals[k] =
                f.trim().parse::<f64>().map_err(|_| bad(lineno, &format!("bad float \"{f}\"")))?;
        }
        rows.push((vals[0], vals[1], vals[2], vals[3], vals[4]));
    }

    let slot_ms = slot_ms.ok_or_else(|| bad(0, "missing slot_ms header"))?;
    if !(slot_ms > 0.0) {
        return Err(bad(0, "slot_ms must be positive"));
    }
    if rows.is_empty() {
        return Err(TableError::EmptyRealizableSet);
    }
    let to_slots = |ms: f64, lineno: usize| -> Result<usize, TableError> {
        let k = ms / slot_ms;
        let r = k.round();
        if (k - r).abs() > 1e-6 || r < 1.0 {
            return Err(bad(lineno, &format!("delay {ms} ms is not a positive slot multiple")));
        }
        Ok(r as usize)
    };
    let max_auc = max_auc.ok_or_else(|| bad(0, "missing max_auc header"))?;
    let mut max_e2e = 0usize;
    let mut parsed = Vec::with_capacity(rows.len());
    for (k, &(e2e_ms, alloc_ms, auc, stderr, qoc)) in rows.iter().enumerate() {
        let e = to_slots(e2e_ms, k + 1)?;
        let a = to_slots(alloc_ms, k + 1)?;
        if a > e {
            return Err(bad(k + 1, "allocation delay exceeds the e2e delay"));
        }
        max_e2e = max_e2e.max(e);
        parsed.push((e, a, auc, stderr, qoc));
    }
    let mut cells: Vec<Vec<Option<super::QocCell>>> = vec![vec![None; max_e2e]; max_e2e];
    for (e, a, auc, stderr, qoc) in parsed {
        cells[e - 1][a - 1] = Some(super::QocCell { auc, stderr, qoc });
    }

    let params = TableParams {
        pattern: pattern.unwrap_or_default(),
        repetitions: repetitions.unwrap_or(1),
        capacity_prbs: capacity.unwrap_or(0),
        mean_ms: mean_ms.unwrap_or(0.0),
        std_ms: std_ms.unwrap_or(0.0),
        p_ul: p_ul.unwrap_or(0.0),
        p_dl: p_dl.unwrap_or(0.0),
        seed: seed.unwrap_or(0),
        n_runs: n_runs.unwrap_or(0),
        mode: mode.unwrap_or(TableMode::Paired),
    };
    // the stored cells are kept verbatim (at file precision) so that a
    // reloaded table re-serializes byte-identically
    Ok(QocTable {
        slot_ms,
        e2e_delays_ms: (1..=max_e2e).map(|k| k as f64 * slot_ms).collect(),
        alloc_delays_ms: (1..=max_e2e).map(|k| k as f64 * slot_ms).collect(),
        cells,
        max_auc,
        params,
    })
}

/// Loads a table from a file.
pub fn read_table_file(path: &Path) -> Result<QocTable, TableError> {
    read_table(&std::fs::read_to_string(path)?)
}
