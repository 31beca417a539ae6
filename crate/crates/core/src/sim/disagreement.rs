use super::{SimError, Trajectory};

/// Normalized squared disagreement per robot plus the time-normalized area
/// under it (AUC).
///
/// AUC 1.0 is the stationary (never-updated) level; values above 1 signal
/// divergence. Robots that start at the consensus point have nothing to
/// normalize by; they are excluded from `auc_mean` and flagged through
/// `included`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisagreementSeries {
    /// `per_robot_normalized[i][m]` = δ_i(t_m)² / δ_i(0)²; zeros for excluded
    /// robots.
    pub per_robot_normalized: Vec<Vec<f64>>,
    /// Time-normalized AUC per robot; zero for excluded robots.
    pub auc_per_robot: Vec<f64>,
    /// Mean AUC over the included robots.
    pub auc_mean: f64,
    /// Whether robot i participates in the average.
    pub included: Vec<bool>,
}

/// Computes disagreement and AUC over `[0, horizon_ms]` by trapezoidal
/// quadrature on the stored samples, normalized by the horizon.
pub fn disagreement_series(traj: &Trajectory, horizon_ms: f64) -> Result<DisagreementSeries, SimError> {
    if !(horizon_ms > 0.0) {
        return Err(SimError::ZeroHorizon(horizon_ms));
    }
    let covered = *traj.times_ms.last().unwrap_or(&0.0);
    if covered < horizon_ms - 1e-9 {
        return Err(SimError::TrajectoryTooShort { covered_ms: covered, horizon_ms });
    }
    // index of the sample sitting on the horizon (uniform grid)
    let step = traj.times_ms.get(1).map(|t1| t1 - traj.times_ms[0]).unwrap_or(0.0);
    if !(step > 0.0) {
        return Err(SimError::TrajectoryTooShort { covered_ms: covered, horizon_ms });
    }
    let last = (horizon_ms / step).round() as usize;
    if last == 0
        || last >= traj.times_ms.len()
        || (traj.times_ms[last] - horizon_ms).abs() > 1e-6 * step
    {
        return Err(SimError::InvalidConfig(format!(
            "horizon {horizon_ms} ms does not sit on the trajectory sample grid (step {step} ms)"
        )));
    }

    let n = traj.positions.len();
    let x_c = traj.consensus_point;
    let delta0: Vec<f64> = (0..n).map(|i| traj.positions[i][0] - x_c).collect();
    let spread = delta0.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    if spread == 0.0 {
        return Err(SimError::AllAtConsensus);
    }
    // robots starting (numerically) at the consensus point are excluded
    let included: Vec<bool> = delta0.iter().map(|d| d.abs() > 1e-9 * spread).collect();
    if included.iter().all(|v| !v) {
        return Err(SimError::AllAtConsensus);
    }

    let mut per_robot_normalized = vec![vec![0.0f64; last + 1]; n];
    let mut auc_per_robot = vec![0.0f64; n];
    for i in 0..n {
        if !included[i] {
            continue;
        }
        let d0sq = delta0[i] * delta0[i];
        for m in 0..=last {
            let d = traj.positions[i][m] - x_c;
            per_robot_normalized[i][m] = d * d / d0sq;
        }
        // trapezoid on the uniform grid, divided by the horizon: the weighted
        // sample sum over the sample count, which keeps the stationary case
        // at exactly 1.0
        let row = &per_robot_normalized[i];
        let mut acc = 0.5 * row[0];
        for &f in &row[1..last] {
            acc += f;
        }
        acc += 0.5 * row[last];
        auc_per_robot[i] = acc / last as f64;
    }

    let mut count = 0usize;
    let mut sum = 0.0f64;
    for i in 0..n {
        if included[i] {
            sum += auc_per_robot[i];
            count += 1;
        }
    }
    let auc_mean = sum / count as f64;

    Ok(DisagreementSeries { per_robot_normalized, auc_per_robot, auc_mean, included })
}
