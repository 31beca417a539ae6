use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use qoc_core::allocator::{solve_with_stats, AllocError, AllocationInstance, AllocationSolution, Scheme};
use qoc_core::net::TddFrame;
use qoc_core::table::{
    build_qoc_table, sweep_deterministic, sweep_reliability, sweep_stochastic, table_to_string,
    write_table, QocTable, SweepResult, TableError,
};

use crate::config::ExperimentConfig;
use crate::output::{fmt_sig, write_csv, write_json, Sidecar};
use crate::CliError;

fn run_error(e: TableError) -> CliError {
    CliError::Run(e.to_string())
}

fn alloc_error(e: AllocError) -> CliError {
    match e {
        AllocError::Infeasible { .. } | AllocError::Scheme4Infeasible => {
            CliError::Infeasible(e.to_string())
        }
        other => CliError::Run(other.to_string()),
    }
}

pub struct Context {
    pub config: ExperimentConfig,
    pub profile: String,
    pub out_dir: PathBuf,
}

impl Context {
    fn sidecar(&self, command: &str) -> Sidecar {
        Sidecar::new(
            command,
            &self.profile,
            self.config.sim.seed,
            self.config.experiment.n_runs,
            &self.config.canonical_toml(),
        )
    }

    fn build_table(&self) -> Result<QocTable, CliError> {
        let sim = self.config.sim_config()?;
        let model = self.config.delay_model()?;
        let frame = self.config.frame()?;
        let mode = self.config.table_mode()?;
        build_qoc_table(&sim, &model, &frame, self.config.experiment.n_runs, mode)
            .map_err(run_error)
    }

    fn instance_for(&self, frame: TddFrame, table: QocTable) -> Result<AllocationInstance, CliError> {
        let ul = self.config.link_budget(&self.config.link.uplink)?;
        let dl = self.config.link_budget(&self.config.link.downlink)?;
        let ul_need = ul.prb_requirement().map_err(|e| CliError::Config(e.to_string()))?.prbs;
        let dl_need = dl.prb_requirement().map_err(|e| CliError::Config(e.to_string()))?.prbs;
        AllocationInstance::new(frame, self.config.sim.n_robots, ul_need, dl_need, table)
            .map_err(alloc_error)
    }
}

fn sweep_csv(path: &Path, sweep: &SweepResult, n_runs: u32, seed: u64) -> Result<(), CliError> {
    write_csv(
        path,
        "axis_value,auc_mean,auc_stderr,n_runs,seed",
        sweep.axis.iter().zip(&sweep.auc).zip(&sweep.stderr).map(|((&x, &auc), &se)| {
            vec![fmt_sig(x), fmt_sig(auc), fmt_sig(se), n_runs.to_string(), seed.to_string()]
        }),
    )
}

/// `tradeoff`: the three AUC curves against delay and reliability.
pub fn cmd_tradeoff(ctx: &Context) -> Result<(), CliError> {
    let sim = ctx.config.sim_config()?;
    let model = ctx.config.delay_model()?;
    let delays = ctx.config.delay_axis()?;
    let reliabilities = ctx.config.reliability_axis()?;
    let n_runs = ctx.config.experiment.n_runs;

    let det = sweep_deterministic(&sim, &delays, n_runs).map_err(run_error)?;
    let rel = sweep_reliability(&sim, &reliabilities, n_runs).map_err(run_error)?;
    let sto = sweep_stochastic(&sim, &model, &delays, n_runs).map_err(run_error)?;

    let sidecar = ctx.sidecar("tradeoff");
    for (name, sweep) in [
        ("tradeoff_deterministic.csv", &det),
        ("tradeoff_reliability.csv", &rel),
        ("tradeoff_stochastic.csv", &sto),
    ] {
        let path = ctx.out_dir.join(name);
        sweep_csv(&path, sweep, n_runs, sim.seed)?;
        sidecar.write_for(&path)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SchemeReport {
    pub scheme: String,
    pub objective_value: f64,
    pub total_qoc: f64,
    pub mean_qoc: f64,
    pub mean_e2e_ms: f64,
    pub mean_alloc_ms: f64,
    pub mean_auc: f64,
    pub solve_nodes: u64,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub schemes: Vec<SchemeReport>,
    /// total QoC of A over total QoC of B, for every ordered scheme pair
    pub qoc_ratios: BTreeMap<String, f64>,
    /// mean AUC of A over mean AUC of B: the energy-expenditure comparison
    /// (half the AUC means half the energy spent towards consensus)
    pub mean_auc_ratios: BTreeMap<String, f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn scheme_report(
    scheme: Scheme,
    solution: &AllocationSolution,
    nodes: u64,
    table: &QocTable,
    slot_ms: f64,
) -> SchemeReport {
    let aucs: Vec<f64> = solution
        .e2e_delay_ms
        .iter()
        .zip(&solution.alloc_delay_ms)
        .map(|(&e2e, &alloc)| {
            let e = (e2e / slot_ms).round() as usize;
            let a = (alloc / slot_ms).round() as usize;
            table.auc_slots(e, a).unwrap_or(f64::NAN)
        })
        .collect();
    SchemeReport {
        scheme: scheme.label().to_string(),
        objective_value: solution.objective_value,
        total_qoc: solution.qoc.iter().sum(),
        mean_qoc: mean(&solution.qoc),
        mean_e2e_ms: mean(&solution.e2e_delay_ms),
        mean_alloc_ms: mean(&solution.alloc_delay_ms),
        mean_auc: mean(&aucs),
        solve_nodes: nodes,
    }
}

pub fn solve_all_schemes(
    ctx: &Context,
    frame: &TddFrame,
    table: &QocTable,
) -> Result<Vec<(Scheme, SchemeReport)>, CliError> {
    let schemes = ctx.config.schemes()?;
    let slot_ms = frame.slot_ms();
    let mut reports = Vec::with_capacity(schemes.len());
    for scheme in schemes {
        let instance = ctx.instance_for(frame.clone(), table.clone())?;
        let started = Instant::now();
        let (solution, stats) = solve_with_stats(&instance, scheme).map_err(|e| match e {
            AllocError::Scheme4Infeasible => {
                CliError::Infeasible(format!("scheme {} is infeasible: {e}", scheme.label()))
            }
            AllocError::Infeasible { .. } => {
                CliError::Infeasible(format!("scheme {} is infeasible: {e}", scheme.label()))
            }
            other => CliError::Run(other.to_string()),
        })?;
        // wall time is logged, never written into artifacts
        eprintln!(
            "solved {} in {:.1} ms ({} nodes)",
            scheme.label(),
            started.elapsed().as_secs_f64() * 1e3,
            stats.nodes
        );
        reports.push((scheme, scheme_report(scheme, &solution, stats.nodes, table, slot_ms)));
    }
    Ok(reports)
}

fn ratios(reports: &[(Scheme, SchemeReport)], f: impl Fn(&SchemeReport) -> f64) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (sa, ra) in reports {
        for (sb, rb) in reports {
            if sa != sb {
                out.insert(format!("{}/{}", sa.label(), sb.label()), f(ra) / f(rb));
            }
        }
    }
    out
}

/// `compare-schemes`: build the table, solve every scheme, report.
pub fn cmd_compare_schemes(ctx: &Context) -> Result<(), CliError> {
    let schemes = ctx.config.schemes()?;
    if schemes.len() < 2 {
        return Err(CliError::Config("compare-schemes needs at least two schemes".into()));
    }
    let frame = ctx.config.frame()?;
    let table = ctx.build_table()?;
    let reports = solve_all_schemes(ctx, &frame, &table)?;

    let report = CompareReport {
        qoc_ratios: ratios(&reports, |r| r.total_qoc),
        mean_auc_ratios: ratios(&reports, |r| r.mean_auc),
        schemes: reports.into_iter().map(|(_, r)| r).collect(),
    };
    let sidecar = ctx.sidecar("compare-schemes");
    let json_path = ctx.out_dir.join("compare_schemes.json");
    write_json(&json_path, &report)?;
    sidecar.write_for(&json_path)?;

    let csv_path = ctx.out_dir.join("compare_schemes.csv");
    write_csv(
        &csv_path,
        "scheme,objective_value,total_qoc,mean_qoc,mean_e2e_ms,mean_alloc_ms,mean_auc,solve_nodes",
        report.schemes.iter().map(|r| {
            vec![
                r.scheme.clone(),
                fmt_sig(r.objective_value),
                fmt_sig(r.total_qoc),
                fmt_sig(r.mean_qoc),
                fmt_sig(r.mean_e2e_ms),
                fmt_sig(r.mean_alloc_ms),
                fmt_sig(r.mean_auc),
                r.solve_nodes.to_string(),
            ]
        }),
    )?;
    sidecar.write_for(&csv_path)?;
    Ok(())
}

/// `tdd-sweep`: rebuild the table per pattern and solve every scheme. A
/// single-pattern list degenerates to the compare-schemes core columns.
pub fn cmd_tdd_sweep(ctx: &Context, patterns: &[String]) -> Result<(), CliError> {
    if patterns.is_empty() {
        return Err(CliError::Config("tdd-sweep needs at least one pattern".into()));
    }
    let sim = ctx.config.sim_config()?;
    let model = ctx.config.delay_model()?;
    let mode = ctx.config.table_mode()?;
    let mut rows = Vec::new();
    for pattern in patterns {
        let frame = ctx.config.frame_for(pattern)?;
        let table = build_qoc_table(&sim, &model, &frame, ctx.config.experiment.n_runs, mode)
            .map_err(run_error)?;
        for (scheme, report) in solve_all_schemes(ctx, &frame, &table)? {
            rows.push(vec![
                pattern.clone(),
                scheme.label().to_string(),
                fmt_sig(report.mean_qoc),
                fmt_sig(report.mean_e2e_ms),
            ]);
        }
    }
    let path = ctx.out_dir.join("tdd_sweep.csv");
    write_csv(&path, "pattern,scheme,mean_qoc,mean_e2e_ms", rows)?;
    ctx.sidecar("tdd-sweep").write_for(&path)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct PrbDirectionReport {
    prbs: u32,
    bits_per_prb_slot: f64,
    robots_per_slot: u32,
}

#[derive(Debug, Serialize)]
struct PrbReport {
    uplink: PrbDirectionReport,
    downlink: PrbDirectionReport,
}

/// `prb`: per-direction PRB requirements from the link budgets.
pub fn cmd_prb(ctx: &Context) -> Result<(), CliError> {
    let capacity = ctx.config.frame()?.capacity_prbs;
    let mut directions = Vec::new();
    for section in [&ctx.config.link.uplink, &ctx.config.link.downlink] {
        let budget = ctx.config.link_budget(section)?;
        let req = budget.prb_requirement().map_err(|e| CliError::Config(e.to_string()))?;
        directions.push(PrbDirectionReport {
            prbs: req.prbs,
            bits_per_prb_slot: req.bits_per_prb_slot,
            robots_per_slot: capacity / req.prbs,
        });
    }
    let report = PrbReport {
        downlink: directions.pop().unwrap(),
        uplink: directions.pop().unwrap(),
    };
    let path = ctx.out_dir.join("prb.json");
    write_json(&path, &report)?;
    ctx.sidecar("prb").write_for(&path)?;
    println!(
        "uplink: {} PRBs/robot ({} robots/slot), downlink: {} PRBs/robot ({} robots/slot)",
        report.uplink.prbs,
        report.uplink.robots_per_slot,
        report.downlink.prbs,
        report.downlink.robots_per_slot
    );
    Ok(())
}

/// `allocate`: one raw solve, serialized in full.
pub fn cmd_allocate(ctx: &Context, scheme: Scheme, table_path: Option<&Path>) -> Result<(), CliError> {
    let frame = ctx.config.frame()?;
    let table = match table_path {
        Some(path) => qoc_core::table::read_table_file(path).map_err(run_error)?,
        None => ctx.build_table()?,
    };
    let instance = ctx.instance_for(frame, table)?;
    let (solution, stats) = solve_with_stats(&instance, scheme).map_err(alloc_error)?;
    eprintln!("solved {} ({} nodes)", scheme.label(), stats.nodes);
    let path = ctx.out_dir.join(format!("allocation_{}.json", scheme.label()));
    write_json(&path, &solution)?;
    ctx.sidecar("allocate").write_for(&path)?;
    Ok(())
}

/// `build-table`: build and serialize the QoC table.
pub fn cmd_build_table(ctx: &Context) -> Result<(), CliError> {
    let table = ctx.build_table()?;
    let path = ctx.out_dir.join("qoc_table.txt");
    write_table(&table, &path).map_err(run_error)?;
    ctx.sidecar("build-table").write_for(&path)?;
    // the serialized form reloads to the identical artifact
    debug_assert_eq!(
        table_to_string(&qoc_core::table::read_table(&table_to_string(&table)).unwrap()),
        table_to_string(&table)
    );
    Ok(())
}
