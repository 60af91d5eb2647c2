use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_horizon, event_sequence, exp_wait};
use crate::error::{RenalError, Result};
use crate::rng::rng_from_seed;
use crate::sequence::ObservationSequence;

/// Self-correcting process `λ(t) = exp(mu + alpha t - beta N(t-))` on
/// `[0, horizon)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelfCorrectingSpec {
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub lambda_bar: f64,
    pub horizon: f64,
}

impl Default for SelfCorrectingSpec {
    fn default() -> Self {
        Self {
            mu: 2.5,
            alpha: 0.05,
            beta: 0.25,
            lambda_bar: 100.0,
            horizon: 100.0,
        }
    }
}

/// Length of the look-ahead segment over which one bound is used.
const SEGMENT: f64 = 1.0;

impl SelfCorrectingSpec {
    pub fn validate(&self) -> Result<()> {
        check_horizon(self.horizon)?;
        if !(self.mu.is_finite() && self.alpha > 0.0 && self.alpha.is_finite() && self.beta > 0.0 && self.beta.is_finite()) {
            return Err(RenalError::Config("self-correcting needs finite mu, alpha > 0, beta > 0".into()));
        }
        if !(self.lambda_bar > 0.0) {
            return Err(RenalError::Config("lambda_bar must be positive".into()));
        }
        Ok(())
    }
}

/// `log λ(t)` given event times (only `t_i < t` count).
pub fn sc_log_intensity(spec: &SelfCorrectingSpec, events: &[f64], t: f64) -> f64 {
    let n = events.iter().take_while(|&&ti| ti < t).count();
    spec.mu + spec.alpha * t - spec.beta * n as f64
}

/// Thinning with a per-segment bound: the intensity increases between
/// events, so its value at the segment end bounds the segment. Segments stop
/// early where the intensity would reach `lambda_bar`.
pub fn simulate_self_correcting(spec: &SelfCorrectingSpec, seed: u64) -> Result<ObservationSequence> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut events = Vec::new();
    let mut t = 0.0;
    let log_cap = spec.lambda_bar.ln();
    let log_at = |t: f64, n: usize| spec.mu + spec.alpha * t - spec.beta * n as f64;
    while t < spec.horizon {
        let n = events.len();
        // The cap is reached once the segment up to it has shrunk to nothing.
        let cap_time = (log_cap - spec.mu + spec.beta * n as f64) / spec.alpha;
        if cap_time <= t {
            return Err(RenalError::BoundViolation {
                time: t,
                intensity: log_at(t, n).exp(),
                bound: spec.lambda_bar,
            });
        }
        let mut end = (t + SEGMENT).min(spec.horizon);
        let mut log_bound = log_at(end, n);
        if end > cap_time {
            end = cap_time;
            log_bound = log_cap;
        }
        let bound = log_bound.exp();
        let cand = t + exp_wait(&mut rng, bound);
        if cand >= end {
            t = end;
            continue;
        }
        t = cand;
        if rng.random::<f64>() * bound <= log_at(t, n).exp() {
            events.push(t);
        }
    }
    event_sequence(events, Vec::new(), 0, "self-correcting simulation")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_intensity_shape() {
        let spec = SelfCorrectingSpec::default();
        let s = simulate_self_correcting(&spec, 2).unwrap();
        let ev = s.timestamps();
        for w in ev.windows(2).take(10) {
            let before = sc_log_intensity(&spec, ev, w[0]);
            let after = sc_log_intensity(&spec, ev, w[0] + 1e-12);
            assert!((before - after - spec.beta).abs() < 1e-9);
            // Linear with slope alpha strictly between events.
            let (a, b) = (w[0] + 0.25 * (w[1] - w[0]), w[0] + 0.75 * (w[1] - w[0]));
            let slope = (sc_log_intensity(&spec, ev, b) - sc_log_intensity(&spec, ev, a)) / (b - a);
            assert!((slope - spec.alpha).abs() < 1e-6);
        }
    }

    #[test]
    fn default_horizon_gives_a_few_dozen_events() {
        // Once settled the rate is alpha/beta, so the log-intensity sits near
        // ln 0.2 and N(100) is close to (2.5 + 5 - ln 0.2) / 0.25 ≈ 36.4.
        let mean = (0..50).map(|s| simulate_self_correcting(&SelfCorrectingSpec::default(), s).unwrap().len()).sum::<usize>() as f64 / 50.0;
        assert!((33.0..40.0).contains(&mean), "{mean}");
    }

    #[test]
    fn cap_limits_segments() {
        let spec = SelfCorrectingSpec { mu: 4.0, alpha: 1.0, beta: 0.01, lambda_bar: 60.0, horizon: 10.0 };
        assert!(matches!(simulate_self_correcting(&spec, 0), Err(RenalError::BoundViolation { .. })));
    }
}
