use super::{disagreement_series, simulate_run, simulate_run_resampled, LoopCondition, SimConfig, SimError};
use crate::net::DelayModel;
use crate::seed::{derive_seed, RUN_STREAM};

/// Mean AUC over independent runs with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AucEstimate {
    pub mean: f64,
    pub stderr: f64,
    /// Requested batch size (see the collapse note on [`monte_carlo_auc`]).
    pub n_runs: u32,
}

fn validate_n_runs(n_runs: u32) -> Result<(), SimError> {
    if n_runs == 0 {
        return Err(SimError::InvalidConfig("n_runs must be at least 1".into()));
    }
    Ok(())
}

fn aggregate(aucs: &[f64], n_runs: u32) -> AucEstimate {
    let n = aucs.len() as f64;
    let mean = aucs.iter().sum::<f64>() / n;
    let stderr = if aucs.len() > 1 {
        let ss: f64 = aucs.iter().map(|a| (a - mean) * (a - mean)).sum();
        (ss / (n * (n - 1.0))).sqrt()
    } else {
        0.0
    };
    AucEstimate { mean, stderr, n_runs }
}

fn run_once(config: &SimConfig, condition: &LoopCondition, run_index: u64) -> Result<f64, SimError> {
    let run_seed = derive_seed(config.seed, RUN_STREAM, run_index);
    let traj = simulate_run(config, condition, run_seed)?;
    Ok(disagreement_series(&traj, config.horizon_ms)?.auc_mean)
}

fn collect(results: Vec<Result<f64, SimError>>) -> Result<Vec<f64>, SimError> {
    results.into_iter().collect()
}

/// Whether the Bernoulli draws cannot influence the run: every trial
/// succeeds, or every trial fails (the stationary all-drops case, whose AUC
/// is exactly 1).
fn degenerate(condition: &LoopCondition) -> bool {
    condition.success_prob >= 1.0 || condition.success_prob <= 0.0
}

/// Averages the mean AUC over `n_runs` independent runs.
///
/// Run k uses a seed derived from `(config.seed, k)` and results are reduced
/// in run order, so the estimate is bit-identical across repeated calls and
/// thread counts. When the success probability is 0 or 1 no randomness can
/// alter the run, every run is identical and the batch collapses to a single
/// simulation (mean = that run's AUC, stderr = 0).
pub fn monte_carlo_auc(
    config: &SimConfig,
    condition: &LoopCondition,
    n_runs: u32,
) -> Result<AucEstimate, SimError> {
    validate_n_runs(n_runs)?;
    config.validate()?;
    condition.validate(config)?;
    if degenerate(condition) {
        let auc = run_once(config, condition, 0)?;
        return Ok(AucEstimate { mean: auc, stderr: 0.0, n_runs });
    }
    let results = crate::exec::map_indices(n_runs as usize, |k| run_once(config, condition, k as u64));
    Ok(aggregate(&collect(results)?, n_runs))
}

/// Sequential reference for [`monte_carlo_auc`]; used by benches and the
/// determinism tests. Always produces the identical estimate.
pub fn monte_carlo_auc_seq(
    config: &SimConfig,
    condition: &LoopCondition,
    n_runs: u32,
) -> Result<AucEstimate, SimError> {
    validate_n_runs(n_runs)?;
    config.validate()?;
    condition.validate(config)?;
    if degenerate(condition) {
        let auc = run_once(config, condition, 0)?;
        return Ok(AucEstimate { mean: auc, stderr: 0.0, n_runs });
    }
    let results =
        crate::exec::map_indices_seq(n_runs as usize, |k| run_once(config, condition, k as u64));
    Ok(aggregate(&collect(results)?, n_runs))
}

/// Monte-Carlo batch for the per-iteration delay-resampling mode (see
/// [`simulate_run_resampled`]).
pub fn monte_carlo_auc_resampled(
    config: &SimConfig,
    model: &DelayModel,
    e2e_delay_ms: f64,
    gate_delay_ms: f64,
    n_runs: u32,
) -> Result<AucEstimate, SimError> {
    validate_n_runs(n_runs)?;
    config.validate()?;
    model.validate()?;
    let results = crate::exec::map_indices(n_runs as usize, |k| {
        let run_seed = derive_seed(config.seed, RUN_STREAM, k as u64);
        let traj = simulate_run_resampled(config, model, e2e_delay_ms, gate_delay_ms, run_seed)?;
        Ok(disagreement_series(&traj, config.horizon_ms)?.auc_mean)
    });
    Ok(aggregate(&collect(results)?, n_runs))
}
