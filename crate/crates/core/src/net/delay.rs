use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf;

use super::NetError;

/// Backend (core + edge processing) delay distribution together with the
/// per-direction radio packet-success probabilities.
///
/// The delay is Gaussian with the given mean and standard deviation,
/// restricted to `[lower, upper]`. Two restrictions coexist on purpose:
///
/// - [`backend_cdf`](Self::backend_cdf) renormalizes the density over the
///   interval. This is a proper continuous CDF (`F(lower) = 0`,
///   `F(upper) = 1`) and feeds the allocator-facing reliability.
/// - [`sample_backend_delay`](Self::sample_backend_delay) clips raw draws to
///   the interval, leaving point masses at the boundaries. This feeds the
///   per-iteration delay-resampling simulation mode.
///
/// `p_ul`/`p_dl` are per-direction packet-success probabilities (the source
/// material labels the same 0.99 figures "PER" but multiplies them as success
/// factors; we keep the success-probability reading).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    pub mean_ms: f64,
    pub std_ms: f64,
    /// Lower truncation bound; always 0.
    pub lower_ms: f64,
    /// Upper truncation bound; the control period τ.
    pub upper_ms: f64,
    pub p_ul: f64,
    pub p_dl: f64,
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erf::erfc(-x / std::f64::consts::SQRT_2)
}

impl DelayModel {
    /// Builds a model truncated to `[0, upper_ms]`.
    pub fn new(mean_ms: f64, std_ms: f64, upper_ms: f64, p_ul: f64, p_dl: f64) -> Result<Self, NetError> {
        let model = Self { mean_ms, std_ms, lower_ms: 0.0, upper_ms, p_ul, p_dl };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if !(self.std_ms > 0.0) {
            return Err(NetError::InvalidDelayModel(format!(
                "std must be positive, got {}",
                self.std_ms
            )));
        }
        if self.lower_ms != 0.0 || !(self.upper_ms > self.lower_ms) {
            return Err(NetError::InvalidDelayModel(format!(
                "bounds must satisfy 0 = lower < upper, got [{}, {}]",
                self.lower_ms, self.upper_ms
            )));
        }
        for (name, p) in [("p_ul", self.p_ul), ("p_dl", self.p_dl)] {
            if !(p > 0.0 && p <= 1.0) {
                return Err(NetError::InvalidDelayModel(format!(
                    "{name} must be in (0, 1], got {p}"
                )));
            }
        }
        Ok(())
    }

    /// CDF of the truncated-renormalized backend delay, evaluated at `d_ms`.
    ///
    /// Monotone non-decreasing with `F(lower) = 0` and `F(upper) = 1`;
    /// arguments outside the interval clamp to those values.
    pub fn backend_cdf(&self, d_ms: f64) -> f64 {
        if d_ms <= self.lower_ms {
            return 0.0;
        }
        if d_ms >= self.upper_ms {
            return 1.0;
        }
        let a = std_normal_cdf((self.lower_ms - self.mean_ms) / self.std_ms);
        let b = std_normal_cdf((self.upper_ms - self.mean_ms) / self.std_ms);
        let f = std_normal_cdf((d_ms - self.mean_ms) / self.std_ms);
        ((f - a) / (b - a)).clamp(0.0, 1.0)
    }

    /// End-to-end loop reliability for an allocation delay `d_alloc_ms`:
    /// the probability that the backend finishes within the allocated gap
    /// times the uplink and downlink packet-success probabilities.
    pub fn loop_reliability(&self, d_alloc_ms: f64) -> f64 {
        self.backend_cdf(d_alloc_ms) * self.p_ul * self.p_dl
    }

    /// Draws one backend delay: a Gaussian sample clipped (not rejected) to
    /// `[lower, upper]`, so boundary values carry point masses.
    pub fn sample_backend_delay<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.mean_ms + self.std_ms * z).clamp(self.lower_ms, self.upper_ms)
    }

    /// CDF of the clipped sampling distribution (with its boundary atoms);
    /// the reference law for [`sample_backend_delay`](Self::sample_backend_delay).
    pub fn clipped_cdf(&self, d_ms: f64) -> f64 {
        if d_ms < self.lower_ms {
            return 0.0;
        }
        if d_ms >= self.upper_ms {
            return 1.0;
        }
        std_normal_cdf((d_ms - self.mean_ms) / self.std_ms)
    }
}
