use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::check_length;
use crate::error::{RenalError, Result};
use crate::rng::rng_from_seed;
use crate::sequence::ObservationSequence;

const BURN_IN: usize = 500;

/// GARCH(1,1) with an asymmetric leverage term:
///
/// ```text
/// x_i  = mu + η_i,   η_i = σ_i ε_i,   ε_i ~ N(0, 1)
/// σ_i² = omega + alpha η_{i-1}² + beta σ_{i-1}² + gamma η_{i-1}² 1(η_{i-1} < 0)
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GarchSpec {
    pub mu: f64,
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Default for GarchSpec {
    fn default() -> Self {
        Self {
            mu: 0.03,
            omega: 0.04,
            alpha: 0.04,
            beta: 0.9,
            gamma: 0.02,
        }
    }
}

impl GarchSpec {
    pub fn validate(&self) -> Result<()> {
        let all = [self.mu, self.omega, self.alpha, self.beta, self.gamma];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(RenalError::Config("GARCH parameters must be finite".into()));
        }
        if self.omega <= 0.0 || self.alpha < 0.0 || self.beta < 0.0 || self.gamma < 0.0 {
            return Err(RenalError::Config(
                "GARCH needs omega > 0 and non-negative alpha, beta, gamma".into(),
            ));
        }
        if self.persistence() >= 1.0 {
            return Err(RenalError::Config(format!(
                "alpha + beta + gamma/2 = {} must be below 1",
                self.persistence()
            )));
        }
        Ok(())
    }

    fn persistence(&self) -> f64 {
        self.alpha + self.beta + 0.5 * self.gamma
    }

    /// `omega / (1 - alpha - beta - gamma/2)`.
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }
}

/// Simulated observations with their conditional variances.
#[derive(Clone, Debug)]
pub struct GarchPath {
    pub values: Vec<f64>,
    pub variances: Vec<f64>,
}

pub fn simulate_garch_path(spec: &GarchSpec, n: usize, seed: u64) -> Result<GarchPath> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut values = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n);
    let mut s2 = spec.unconditional_variance();
    let mut eta: f64 = 0.0;
    for i in 0..BURN_IN + n {
        if i > 0 {
            let lev = if eta < 0.0 { spec.gamma * eta * eta } else { 0.0 };
            s2 = spec.omega + spec.alpha * eta * eta + spec.beta * s2 + lev;
        }
        let e: f64 = StandardNormal.sample(&mut rng);
        eta = s2.sqrt() * e;
        if i >= BURN_IN {
            values.push(spec.mu + eta);
            variances.push(s2);
        }
    }
    Ok(GarchPath { values, variances })
}

pub fn simulate_garch(spec: &GarchSpec, n: usize, dt: f64, seed: u64) -> Result<ObservationSequence> {
    check_length(n)?;
    ObservationSequence::regular(simulate_garch_path(spec, n, seed)?.values, 1, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_the_experiment_spec() {
        let s = GarchSpec::default();
        s.validate().unwrap();
        assert!((s.unconditional_variance() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        for s in [
            GarchSpec { omega: 0.0, ..Default::default() },
            GarchSpec { alpha: -0.1, ..Default::default() },
            GarchSpec { beta: 0.95, ..Default::default() },
            GarchSpec { mu: f64::NAN, ..Default::default() },
        ] {
            assert!(matches!(s.validate(), Err(RenalError::Config(_))), "{s:?}");
        }
    }

    #[test]
    fn iid_case_has_constant_variance() {
        let s = GarchSpec { mu: 0.0, omega: 0.04, alpha: 0.0, beta: 0.0, gamma: 0.0 };
        let p = simulate_garch_path(&s, 100_000, 1).unwrap();
        assert!(p.variances.iter().all(|v| *v == 0.04));
        let n = p.values.len() as f64;
        let mean = p.values.iter().sum::<f64>() / n;
        let var = p.values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!((var / 0.04 - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn variances_positive_and_seeded() {
        let p = simulate_garch_path(&GarchSpec::default(), 5000, 3).unwrap();
        assert!(p.variances.iter().all(|v| *v > 0.0));
        let q = simulate_garch_path(&GarchSpec::default(), 5000, 3).unwrap();
        assert_eq!(p.values, q.values);
    }
}
