use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::check_length;
use crate::error::{RenalError, Result};
use crate::rng::rng_from_seed;
use crate::sequence::ObservationSequence;

/// `x_i = Σ ar_j x_{i-j} + ε_i + Σ ma_j ε_{i-j}`, `ε ~ N(0, sigma²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmaSpec {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sigma: f64,
}

impl ArmaSpec {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, sigma: f64) -> Result<Self> {
        let spec = Self { ar, ma, sigma };
        spec.validate()?;
        Ok(spec)
    }

    /// ARMA(2,1), φ = (0.5, 0.4), θ = 0.65, σ = 1.
    pub fn arma1() -> Self {
        Self {
            ar: vec![0.5, 0.4],
            ma: vec![0.65],
            sigma: 1.0,
        }
    }

    /// ARMA(2,2), φ = (0.5, -0.4), θ = (0.3, -0.2), σ = 1.
    pub fn arma2() -> Self {
        Self {
            ar: vec![0.5, -0.4],
            ma: vec![0.3, -0.2],
            sigma: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.ar.iter().chain(&self.ma).all(|c| c.is_finite()) {
            return Err(RenalError::Config("ARMA coefficients must be finite".into()));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(RenalError::Config(format!("ARMA sigma must be non-negative, got {}", self.sigma)));
        }
        if !is_stationary(&self.ar) {
            return Err(RenalError::Config(format!(
                "AR polynomial with coefficients {:?} has a root on or inside the unit circle",
                self.ar
            )));
        }
        Ok(())
    }

    pub fn burn_in(&self) -> usize {
        200.max(10 * (self.ar.len() + self.ma.len()))
    }
}

/// Step-down recursion: the AR part is stationary iff every reflection
/// coefficient has modulus below one.
fn is_stationary(ar: &[f64]) -> bool {
    let mut a = ar.to_vec();
    while let Some(&k) = a.last() {
        if k.abs() >= 1.0 {
            return false;
        }
        let p = a.len();
        let denom = 1.0 - k * k;
        a = (0..p - 1).map(|j| (a[j] + k * a[p - 2 - j]) / denom).collect();
    }
    true
}

/// Regular series of length `n` with spacing `dt`, after the spec's burn-in.
pub fn simulate_arma(spec: &ArmaSpec, n: usize, dt: f64, seed: u64) -> Result<ObservationSequence> {
    spec.validate()?;
    check_length(n)?;
    let mut rng = rng_from_seed(seed);
    let (p, q) = (spec.ar.len(), spec.ma.len());
    let total = spec.burn_in() + n;
    let mut x = vec![0.0; total];
    let mut eps = vec![0.0; total];
    for i in 0..total {
        let e: f64 = StandardNormal.sample(&mut rng);
        eps[i] = spec.sigma * e;
        let mut v = eps[i];
        for j in 1..=p.min(i) {
            v += spec.ar[j - 1] * x[i - j];
        }
        for j in 1..=q.min(i) {
            v += spec.ma[j - 1] * eps[i - j];
        }
        x[i] = v;
    }
    ObservationSequence::regular(x.split_off(total - n), 1, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationarity_check() {
        assert!(is_stationary(&[0.5, 0.4]));
        assert!(is_stationary(&[0.5, -0.4]));
        assert!(is_stationary(&[]));
        assert!(!is_stationary(&[1.0]));
        assert!(!is_stationary(&[0.6, 0.4])); // unit root at z = 1
        assert!(!is_stationary(&[0.0, 1.1]));
        assert!(!is_stationary(&[1.5, -0.5]));
        assert!(matches!(ArmaSpec::new(vec![0.7, 0.35], vec![], 1.0), Err(RenalError::Config(_))));
    }

    #[test]
    fn stationarity_agrees_with_roots_for_ar2() {
        // AR(2) is stationary iff φ2 + φ1 < 1, φ2 - φ1 < 1, |φ2| < 1.
        for i in -20..=20 {
            for j in -10..=10 {
                let (a, b) = (i as f64 * 0.1 + 0.013, j as f64 * 0.1 + 0.007);
                let triangle = b + a < 1.0 && b - a < 1.0 && b.abs() < 1.0;
                assert_eq!(is_stationary(&[a, b]), triangle, "{a} {b}");
            }
        }
    }

    #[test]
    fn zero_noise_is_zero() {
        let spec = ArmaSpec::new(vec![0.5, 0.4], vec![0.65], 0.0).unwrap();
        let s = simulate_arma(&spec, 50, 0.1, 3).unwrap();
        assert!(s.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn seeded_and_shaped() {
        let a = simulate_arma(&ArmaSpec::arma1(), 500, 0.1, 9).unwrap();
        let b = simulate_arma(&ArmaSpec::arma1(), 500, 0.1, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        assert!((a.timestamps()[499] - 49.9).abs() < 1e-9);
        assert_ne!(a, simulate_arma(&ArmaSpec::arma1(), 500, 0.1, 10).unwrap());
        assert_eq!(ArmaSpec::arma2().burn_in(), 200);
        assert_eq!(ArmaSpec::new(vec![0.04; 20], vec![0.0; 5], 1.0).unwrap().burn_in(), 250);
    }
}
