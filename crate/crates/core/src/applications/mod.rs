//! End-to-end noisy-ensemble drivers for the three applications:
//! Hamiltonian simulation, quantum linear systems, and ground-state
//! preparation, each with exact-probability post-selection statistics.
//!
//! Error budgets follow the balanced convention: when a problem carries a
//! single total budget `eps`, the algorithmic (polynomial approximation) and
//! implementation (ensemble Monte Carlo) parts each get `eps / 2`.

mod gsp;
mod hsim;
mod qlsp;

pub use gsp::{gsp_observable, gsp_prepare_state, qetu_cosine_encoding, GSPProblem, GspPipeline};
pub use hsim::{
    hsim_encode, hsim_observable, hsim_observable_split, hsim_prepare_state, HamSimProblem,
    HsimPipeline,
};
pub use qlsp::{qlsp_observable, qlsp_prepare_state, QLSPProblem, QlspPipeline};

use crate::error::{CoreError, Result};
use crate::noise::StreamKey;

/// Repeat-until-success bookkeeping for simulated post-selection.
#[derive(Debug, Clone)]
pub struct PostSelectStats {
    pub attempts: u64,
    pub successes: u64,
    /// Exact per-attempt success probability of the simulated measurement.
    pub exact_probability: f64,
    /// The analytic lower bound the run is checked against.
    pub predicted_lower_bound: f64,
}

impl PostSelectStats {
    pub fn empirical_rate(&self) -> f64 {
        if self.attempts == 0 {
            0.0
        } else {
            self.successes as f64 / self.attempts as f64
        }
    }

    /// Repetition budget implied by the lower bound: `ln(1/delta) / p`.
    pub fn repetition_budget(p_lower: f64, delta: f64) -> u64 {
        ((1.0 / delta).ln() / p_lower).ceil().max(1.0) as u64
    }

    /// The quadratically improved count amplitude amplification would give,
    /// reported analytically only: `ln(1/delta) / sqrt(p)`.
    pub fn amplified_budget(&self, delta: f64) -> u64 {
        ((1.0 / delta).ln() / self.predicted_lower_bound.sqrt())
            .ceil()
            .max(1.0) as u64
    }
}

/// Bernoulli attempts at the exact success probability until the first
/// success or until the budget runs out. Attempt `k` draws from
/// `key.with_sample(k)`.
pub(crate) fn repeat_until_success(
    success_probability: f64,
    budget: u64,
    predicted_lower_bound: f64,
    key: StreamKey,
) -> Result<PostSelectStats> {
    use rand::Rng;
    if !(0.0..=1.0 + 1e-12).contains(&success_probability) {
        return Err(CoreError::InvalidParameter(format!(
            "success probability {success_probability} outside [0, 1]"
        )));
    }
    let p = success_probability.min(1.0);
    for attempt in 1..=budget {
        let u: f64 = key.with_sample(attempt).rng().random();
        if u < p {
            return Ok(PostSelectStats {
                attempts: attempt,
                successes: 1,
                exact_probability: p,
                predicted_lower_bound,
            });
        }
    }
    Err(CoreError::BudgetExhausted { attempts: budget })
}

pub(crate) fn validate_budgets(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidParameter(format!(
            "error budgets must lie in (0, 1): eps={eps}, delta={delta}"
        )));
    }
    Ok(())
}
