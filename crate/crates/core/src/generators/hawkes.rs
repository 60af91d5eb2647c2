use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_horizon, event_sequence, exp_wait};
use crate::error::{RenalError, Result};
use crate::rng::rng_from_seed;
use crate::sequence::ObservationSequence;

/// Self-exciting process `λ(t) = mu + alpha Σ_{t_i < t} exp(-beta (t - t_i))`
/// on `[0, horizon)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HawkesSpec {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Hard cap on the thinning bound.
    pub lambda_bar: f64,
    pub horizon: f64,
}

impl Default for HawkesSpec {
    fn default() -> Self {
        Self {
            mu: 1.0,
            alpha: 1.0,
            beta: 1.25,
            lambda_bar: 100.0,
            horizon: 100.0,
        }
    }
}

impl HawkesSpec {
    pub fn validate(&self) -> Result<()> {
        check_horizon(self.horizon)?;
        if !(self.mu > 0.0 && self.alpha >= 0.0 && self.beta > 0.0) {
            return Err(RenalError::Config("Hawkes needs mu > 0, alpha >= 0, beta > 0".into()));
        }
        if self.alpha / self.beta >= 1.0 {
            return Err(RenalError::Config(format!(
                "alpha/beta = {} is not subcritical",
                self.alpha / self.beta
            )));
        }
        if !(self.lambda_bar >= self.mu) {
            return Err(RenalError::Config("lambda_bar must be at least mu".into()));
        }
        Ok(())
    }

    /// Stationary event rate `mu / (1 - alpha/beta)`.
    pub fn stationary_rate(&self) -> f64 {
        self.mu / (1.0 - self.alpha / self.beta)
    }
}

/// Conditional intensity at `t` given event times (only `t_i < t` count).
pub fn hawkes_intensity(spec: &HawkesSpec, events: &[f64], t: f64) -> f64 {
    spec.mu
        + spec.alpha
            * events
                .iter()
                .take_while(|&&ti| ti < t)
                .map(|ti| (-spec.beta * (t - ti)).exp())
                .sum::<f64>()
}

/// Ogata thinning. Between events the intensity only decays, so its value
/// right after the current time bounds it until the next acceptance.
pub fn simulate_hawkes_se(spec: &HawkesSpec, seed: u64) -> Result<ObservationSequence> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut events = Vec::new();
    let mut t = 0.0;
    // Σ exp(-beta (t - t_i)) over accepted events, including one at t.
    let mut excite = 0.0;
    loop {
        let bound = spec.mu + spec.alpha * excite;
        if bound > spec.lambda_bar {
            return Err(RenalError::BoundViolation {
                time: t,
                intensity: bound,
                bound: spec.lambda_bar,
            });
        }
        let w = exp_wait(&mut rng, bound);
        t += w;
        if t >= spec.horizon {
            break;
        }
        excite *= (-spec.beta * w).exp();
        let lambda = spec.mu + spec.alpha * excite;
        if rng.random::<f64>() * bound <= lambda {
            events.push(t);
            excite += 1.0;
        }
    }
    event_sequence(events, Vec::new(), 0, "self-exciting simulation")
}
