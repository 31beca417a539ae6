use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{LoopCondition, SimConfig, SimError};
use crate::net::DelayModel;

/// A simulated run: uniform sample times, per-robot positions and the control
/// held by each robot at each sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Sample times in ms, spaced by the integration step.
    pub times_ms: Vec<f64>,
    /// `positions[i][m]` is robot i's position at `times_ms[m]`.
    pub positions: Vec<Vec<f64>>,
    /// `controls[i][m]` is the zero-order-held control in effect on
    /// `[times_ms[m], times_ms[m+1])`.
    pub controls: Vec<Vec<f64>>,
    /// Consensus point: the arithmetic mean of the initial positions.
    pub consensus_point: f64,
}

/// Snaps an absolute time to the first grid index at or after it.
fn grid_index(t_ms: f64, step_ms: f64) -> usize {
    (t_ms / step_ms - 1e-9).ceil().max(0.0) as usize
}

/// Simulates one run under a fixed loop condition.
///
/// At every sampling instant `k·period` each robot draws one Bernoulli trial
/// with the condition's success probability (robot order 0..N-1, one draw per
/// robot per period). On success the edge refreshes its copy of that robot's
/// state, recomputes the robot's consensus control from the refreshed copies,
/// and the command takes effect at `k·period + e2e_delay` (held until the
/// next successful update). On failure the edge keeps the stale copy and the
/// robot keeps its current command. Controls are zero until a first command
/// arrives. Identical inputs, including `run_seed`, give bit-identical
/// trajectories.
pub fn simulate_run(
    config: &SimConfig,
    condition: &LoopCondition,
    run_seed: u64,
) -> Result<Trajectory, SimError> {
    config.validate()?;
    condition.validate(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    let p = condition.success_prob;
    run_engine(config, condition.e2e_delay_ms, &mut rng, |rng, _robot| {
        rng.random::<f64>() < p
    })
}

/// Like [`simulate_run`], but the per-loop success is decided by resampling
/// the backend delay every iteration: the loop succeeds when a fresh clipped
/// draw fits inside `gate_delay_ms` and an independent trial passes the
/// combined radio success probability. Commands still take effect at
/// `e2e_delay_ms` after sampling. Both draws are consumed every iteration so
/// the stream layout does not depend on outcomes.
pub fn simulate_run_resampled(
    config: &SimConfig,
    model: &DelayModel,
    e2e_delay_ms: f64,
    gate_delay_ms: f64,
    run_seed: u64,
) -> Result<Trajectory, SimError> {
    config.validate()?;
    model.validate()?;
    let condition = LoopCondition { e2e_delay_ms, success_prob: 1.0 };
    condition.validate(config)?;
    let radio = model.p_ul * model.p_dl;
    let mut rng = ChaCha8Rng::seed_from_u64(run_seed);
    run_engine(config, e2e_delay_ms, &mut rng, |rng, _robot| {
        let backend = model.sample_backend_delay(rng);
        let radio_ok = rng.random::<f64>() < radio;
        backend <= gate_delay_ms && radio_ok
    })
}

fn run_engine<F>(
    config: &SimConfig,
    e2e_delay_ms: f64,
    rng: &mut ChaCha8Rng,
    mut draw: F,
) -> Result<Trajectory, SimError>
where
    F: FnMut(&mut ChaCha8Rng, usize) -> bool,
{
    let n = config.n_robots;
    let h = config.step_ms;
    let h_s = h / 1000.0;
    let steps = config.steps()?;
    let gain = config.gain_per_s;

    let mut x = config.initial_positions.clone();
    // The edge starts from the known initial configuration; stale entries are
    // refreshed only by successful uplinks.
    let mut x_hat = config.initial_positions.clone();
    let mut u_held = vec![0.0f64; n];
    let mut pending: Vec<VecDeque<(usize, f64)>> = vec![VecDeque::new(); n];
    let mut success = vec![false; n];

    let consensus_point = x.iter().sum::<f64>() / n as f64;

    let mut times_ms = Vec::with_capacity(steps + 1);
    let mut positions: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); n];
    let mut controls: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); n];

    let mut k: u64 = 0; // sampling-instant counter
    let mut next_sample = Some(0usize);

    for m in 0..=steps {
        // sampling events due at this grid point
        while next_sample == Some(m) {
            let t_sample = k as f64 * config.period_ms;
            for (i, s) in success.iter_mut().enumerate() {
                *s = draw(rng, i);
            }
            for i in 0..n {
                if success[i] {
                    x_hat[i] = x[i];
                }
            }
            let sum_hat: f64 = x_hat.iter().sum();
            let apply_at = grid_index(t_sample + e2e_delay_ms, h);
            for i in 0..n {
                if success[i] && apply_at <= steps {
                    let u = gain * (sum_hat - n as f64 * x_hat[i]);
                    pending[i].push_back((apply_at, u));
                }
            }
            k += 1;
            let t_next = k as f64 * config.period_ms;
            next_sample = if t_next <= config.horizon_ms + 1e-9 {
                Some(grid_index(t_next, h))
            } else {
                None
            };
        }

        // commands taking effect now
        for i in 0..n {
            while pending[i].front().is_some_and(|&(due, _)| due == m) {
                u_held[i] = pending[i].pop_front().unwrap().1;
            }
        }

        times_ms.push(m as f64 * h);
        for i in 0..n {
            positions[i].push(x[i]);
            controls[i].push(u_held[i]);
        }

        if m < steps {
            for i in 0..n {
                x[i] += h_s * u_held[i];
            }
        }
    }

    Ok(Trajectory { times_ms, positions, controls, consensus_point })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize, gain: f64, period: f64, horizon: f64, step: f64) -> SimConfig {
        SimConfig {
            n_robots: n,
            gain_per_s: gain,
            period_ms: period,
            horizon_ms: horizon,
            step_ms: step,
            initial_positions: SimConfig::grid_positions(n),
            seed: 42,
        }
    }

    #[test]
    fn symmetric_pair_converges_to_zero() {
        let cfg = config(2, 5.0, 10.0, 2000.0, 0.5);
        let cond = LoopCondition { e2e_delay_ms: 0.0, success_prob: 1.0 };
        let traj = simulate_run(&cfg, &cond, 1).unwrap();
        assert_eq!(traj.consensus_point, 0.0);
        for i in 0..2 {
            let last = *traj.positions[i].last().unwrap();
            assert!(last.abs() < 1e-3, "robot {i} ended at {last}");
        }
    }

    #[test]
    fn zero_success_leaves_positions_frozen() {
        let cfg = config(4, 1.0, 10.0, 100.0, 0.5);
        let cond = LoopCondition { e2e_delay_ms: 3.0, success_prob: 0.0 };
        let traj = simulate_run(&cfg, &cond, 9).unwrap();
        for i in 0..4 {
            for (m, &p) in traj.positions[i].iter().enumerate() {
                assert_eq!(p, cfg.initial_positions[i], "robot {i} moved at sample {m}");
            }
            assert!(traj.controls[i].iter().all(|&u| u == 0.0));
        }
    }

    #[test]
    fn perfect_network_matches_exponential_decay_with_euler_error() {
        // With period == step the loop is the explicit-Euler discretization of
        // the disagreement decay; the defect against e^(-2κNt) is O(h) and
        // halves when h does.
        let measure = |h: f64| -> f64 {
            let mut cfg = config(10, 1.0, h, 2000.0, h);
            cfg.period_ms = h;
            let cond = LoopCondition { e2e_delay_ms: 0.0, success_prob: 1.0 };
            let traj = simulate_run(&cfg, &cond, 3).unwrap();
            let kn = cfg.gain_per_s * cfg.n_robots as f64;
            let mut worst: f64 = 0.0;
            for i in 0..cfg.n_robots {
                let d0 = cfg.initial_positions[i] - traj.consensus_point;
                if d0.abs() < 1e-12 {
                    continue;
                }
                for (m, &t) in traj.times_ms.iter().enumerate() {
                    let d = traj.positions[i][m] - traj.consensus_point;
                    let normalized = (d / d0) * (d / d0);
                    let exact = (-2.0 * kn * t / 1000.0).exp();
                    worst = worst.max((normalized - exact).abs());
                }
            }
            worst
        };
        let e_h = measure(0.5);
        let e_half = measure(0.25);
        assert!(e_h < 2e-3, "error {e_h} unexpectedly large");
        let ratio = e_h / e_half;
        assert!((1.7..=2.3).contains(&ratio), "halving ratio {ratio} outside [1.7, 2.3]");
    }

    #[test]
    fn mean_position_is_conserved_under_perfect_network() {
        let cfg = config(10, 1.0, 10.0, 500.0, 0.5);
        let cond = LoopCondition { e2e_delay_ms: 0.0, success_prob: 1.0 };
        let traj = simulate_run(&cfg, &cond, 5).unwrap();
        let n = cfg.n_robots;
        let tol = 10.0 * f64::EPSILON * n as f64;
        let mut prev = (0..n).map(|i| traj.positions[i][0]).sum::<f64>() / n as f64;
        for m in 1..traj.times_ms.len() {
            let mean = (0..n).map(|i| traj.positions[i][m]).sum::<f64>() / n as f64;
            assert!(
                (mean - prev).abs() <= tol,
                "mean drifted by {} at sample {m}",
                (mean - prev).abs()
            );
            prev = mean;
        }
    }

    #[test]
    fn identical_seeds_give_bit_identical_trajectories() {
        let cfg = config(6, 1.0, 10.0, 300.0, 0.5);
        let cond = LoopCondition { e2e_delay_ms: 4.0, success_prob: 0.7 };
        let a = simulate_run(&cfg, &cond, 1234).unwrap();
        let b = simulate_run(&cfg, &cond, 1234).unwrap();
        assert_eq!(a, b);
        let c = simulate_run(&cfg, &cond, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn delayed_commands_take_effect_on_schedule() {
        let cfg = config(2, 1.0, 10.0, 30.0, 0.5);
        let cond = LoopCondition { e2e_delay_ms: 3.0, success_prob: 1.0 };
        let traj = simulate_run(&cfg, &cond, 7).unwrap();
        // before 3 ms no command has arrived
        for m in 0..6 {
            assert_eq!(traj.controls[0][m], 0.0, "control active at t={} ms", traj.times_ms[m]);
        }
        // from 3 ms the first command is held
        assert_ne!(traj.controls[0][6], 0.0);
        // positions stay frozen until the first command applies
        assert_eq!(traj.positions[0][6], cfg.initial_positions[0]);
        assert_ne!(traj.positions[0][7], cfg.initial_positions[0]);
    }

    #[test]
    fn resampled_mode_with_tight_gate_never_updates() {
        let cfg = config(3, 1.0, 10.0, 100.0, 0.5);
        let model = DelayModel::new(5.0, 0.1, 10.0, 0.99, 0.99).unwrap();
        // the gate is far below the distribution's support
        let traj = simulate_run_resampled(&cfg, &model, 1.0, 0.5, 11).unwrap();
        for i in 0..3 {
            assert!(traj.positions[i].iter().all(|&p| p == cfg.initial_positions[i]));
        }
    }

    #[test]
    fn resampled_mode_with_wide_gate_matches_bernoulli_shape() {
        let cfg = config(3, 1.0, 10.0, 400.0, 0.5);
        let model = DelayModel::new(0.5, 0.1, 10.0, 1.0, 1.0).unwrap();
        // gate far above the distribution: every loop succeeds
        let traj = simulate_run_resampled(&cfg, &model, 0.0, 9.0, 11).unwrap();
        let reference = simulate_run(
            &cfg,
            &LoopCondition { e2e_delay_ms: 0.0, success_prob: 1.0 },
            11,
        )
        .unwrap();
        assert_eq!(traj.positions, reference.positions);
    }
}
