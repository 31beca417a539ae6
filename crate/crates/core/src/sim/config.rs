use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;
use crate::seed::{derive_seed, INIT_STREAM};

/// Parameters of one consensus simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Number of robots N (at least 2).
    pub n_robots: usize,
    /// Control gain κ in 1/s.
    pub gain_per_s: f64,
    /// Control/update period τ in ms.
    pub period_ms: f64,
    /// Simulation horizon T in ms.
    pub horizon_ms: f64,
    /// Euler integration step h in ms.
    pub step_ms: f64,
    /// Initial 1-D positions, one per robot.
    pub initial_positions: Vec<f64>,
    /// Base seed; per-run streams derive from it.
    pub seed: u64,
}

/// The loop condition a run is simulated under: a fixed end-to-end delay and
/// a fixed per-loop delivery success probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopCondition {
    pub e2e_delay_ms: f64,
    pub success_prob: f64,
}

const MAX_STEPS: usize = 100_000_000;

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let fail = |msg: String| Err(SimError::InvalidConfig(msg));
        if self.n_robots < 2 {
            return fail(format!("n_robots must be at least 2, got {}", self.n_robots));
        }
        if !(self.gain_per_s > 0.0) {
            return fail(format!("gain must be positive, got {}", self.gain_per_s));
        }
        if !(self.step_ms > 0.0 && self.step_ms <= self.period_ms && self.period_ms <= self.horizon_ms) {
            return fail(format!(
                "need 0 < step <= period <= horizon, got step={} period={} horizon={}",
                self.step_ms, self.period_ms, self.horizon_ms
            ));
        }
        if !(self.gain_per_s * self.n_robots as f64 * self.step_ms / 1000.0 < 1.0) {
            return fail(format!(
                "gain * n_robots * step violates the explicit-Euler contraction bound: {} * {} * {} ms >= 1000 ms",
                self.gain_per_s, self.n_robots, self.step_ms
            ));
        }
        if self.initial_positions.len() != self.n_robots {
            return fail(format!(
                "initial_positions has {} entries for {} robots",
                self.initial_positions.len(),
                self.n_robots
            ));
        }
        let lo = self.initial_positions.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.initial_positions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(hi > lo) {
            return fail("initial positions are all equal; no robot starts away from consensus".into());
        }
        self.steps()?;
        Ok(())
    }

    /// Number of Euler steps; the horizon must sit on the integration grid.
    pub(crate) fn steps(&self) -> Result<usize, SimError> {
        let ratio = self.horizon_ms / self.step_ms;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-6 {
            return Err(SimError::InvalidConfig(format!(
                "horizon ({} ms) must be an integer multiple of the step ({} ms)",
                self.horizon_ms, self.step_ms
            )));
        }
        let steps = steps as usize;
        if steps == 0 || steps > MAX_STEPS {
            return Err(SimError::InvalidConfig(format!(
                "horizon/step yields {steps} integration steps; supported range is 1..={MAX_STEPS}"
            )));
        }
        Ok(steps)
    }

    /// Deterministic default initial layout: a uniform grid on [-1, +1].
    pub fn grid_positions(n_robots: usize) -> Vec<f64> {
        if n_robots == 1 {
            return vec![0.0];
        }
        (0..n_robots)
            .map(|i| -1.0 + 2.0 * i as f64 / (n_robots - 1) as f64)
            .collect()
    }

    /// Random-uniform initial layout on [lo, hi], drawn from a stream derived
    /// from `seed` so configs stay reproducible.
    pub fn uniform_positions(n_robots: usize, lo: f64, hi: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, INIT_STREAM, 0));
        (0..n_robots).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect()
    }
}

impl LoopCondition {
    pub fn validate(&self, config: &SimConfig) -> Result<(), SimError> {
        if !(self.e2e_delay_ms >= 0.0 && self.e2e_delay_ms <= config.period_ms) {
            return Err(SimError::InvalidCondition(format!(
                "e2e delay must lie in [0, period] = [0, {} ms], got {} ms",
                config.period_ms, self.e2e_delay_ms
            )));
        }
        if !(0.0..=1.0).contains(&self.success_prob) {
            return Err(SimError::InvalidCondition(format!(
                "success probability must lie in [0, 1], got {}",
                self.success_prob
            )));
        }
        Ok(())
    }
}
