use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{check_horizon, event_sequence, exp_wait};
use crate::error::{RenalError, Result};
use crate::rng::rng_from_seed;
use crate::sequence::ObservationSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StppKernel {
    /// Isotropic diffusion around the parent location.
    Standard,
    /// Shifted, possibly correlated diffusion.
    Gaussian,
}

/// Spatio-temporal self-exciting process on `[0, horizon) × [0,1)²` with
/// intensity `mu + Σ_{t_i < t} h(t - t_i, s - s_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StppSpec {
    pub kernel: StppKernel,
    pub mu: f64,
    pub c: f64,
    pub beta: f64,
    pub sigma_x: f64,
    pub sigma_y: f64,
    #[serde(default)]
    pub mu_x: f64,
    #[serde(default)]
    pub mu_y: f64,
    #[serde(default)]
    pub rho: f64,
    pub lambda_bar: f64,
    pub horizon: f64,
}

impl StppSpec {
    /// Standard diffusion: μ = 1, σ_x = σ_y = 0.5, β = 0.25, C = 1.
    pub fn standard() -> Self {
        Self {
            kernel: StppKernel::Standard,
            mu: 1.0,
            c: 1.0,
            beta: 0.25,
            sigma_x: 0.5,
            sigma_y: 0.5,
            mu_x: 0.0,
            mu_y: 0.0,
            rho: 0.0,
            lambda_bar: 1e4,
            horizon: 1.0,
        }
    }

    /// Gaussian diffusion: μ = 2.5, μ_x = μ_y = 0.1, σ_x = σ_y = 1, ρ = 0,
    /// β = 1, C = 1.
    pub fn gaussian() -> Self {
        Self {
            kernel: StppKernel::Gaussian,
            mu: 2.5,
            c: 1.0,
            beta: 1.0,
            sigma_x: 1.0,
            sigma_y: 1.0,
            mu_x: 0.1,
            mu_y: 0.1,
            rho: 0.0,
            lambda_bar: 1e4,
            horizon: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_horizon(self.horizon)?;
        let all = [self.mu, self.c, self.beta, self.sigma_x, self.sigma_y, self.mu_x, self.mu_y, self.rho, self.lambda_bar];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(RenalError::Config("STPP parameters must be finite".into()));
        }
        if !(self.sigma_x > 0.0 && self.sigma_y > 0.0) {
            return Err(RenalError::Config("STPP needs sigma_x, sigma_y > 0".into()));
        }
        if self.rho.abs() >= 1.0 {
            return Err(RenalError::Config(format!("|rho| must be below 1, got {}", self.rho)));
        }
        if !(self.mu > 0.0 && self.c >= 0.0 && self.lambda_bar >= self.mu) {
            return Err(RenalError::Config("STPP needs mu > 0, c >= 0, lambda_bar >= mu".into()));
        }
        Ok(())
    }

    /// Triggering kernel at lag `dt > 0` and displacement `(dx, dy)`.
    pub fn kernel_value(&self, dt: f64, dx: f64, dy: f64) -> f64 {
        if dt <= 0.0 {
            return 0.0;
        }
        let (sx, sy) = (self.sigma_x, self.sigma_y);
        let decay = self.c * (-self.beta * dt).exp();
        match self.kernel {
            StppKernel::Standard => {
                let q = dx * dx / (sx * sx) + dy * dy / (sy * sy);
                decay / (2.0 * PI * sx * sy * dt) * (-q / (2.0 * dt)).exp()
            }
            StppKernel::Gaussian => {
                let one_m = 1.0 - self.rho * self.rho;
                let (ux, uy) = (dx - self.mu_x, dy - self.mu_y);
                let q = ux * ux / (sx * sx) + uy * uy / (sy * sy) - 2.0 * self.rho * ux * uy / (sx * sy);
                decay / (2.0 * PI * sx * sy * dt * one_m.sqrt()) * (-q / (2.0 * dt * one_m)).exp()
            }
        }
    }
}

/// Conditional intensity at `(t, x, y)`. `locations` holds `(x, y)` pairs
/// aligned with `times`; only events with `t_i < t` count.
pub fn stpp_intensity(spec: &StppSpec, times: &[f64], locations: &[f64], t: f64, x: f64, y: f64) -> f64 {
    let mut lambda = spec.mu;
    for (i, &ti) in times.iter().enumerate() {
        if ti >= t {
            break;
        }
        lambda += spec.kernel_value(t - ti, x - locations[2 * i], y - locations[2 * i + 1]);
    }
    lambda
}

/// Thinning against the constant bound `lambda_bar` with proposals uniform
/// over the unit square, so every accepted location lies inside it.
pub fn simulate_stpp(spec: &StppSpec, seed: u64) -> Result<ObservationSequence> {
    spec.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut times = Vec::new();
    let mut locs = Vec::new();
    let mut t = 0.0;
    loop {
        t += exp_wait(&mut rng, spec.lambda_bar);
        if t >= spec.horizon {
            break;
        }
        let (x, y): (f64, f64) = (rng.random(), rng.random());
        let lambda = stpp_intensity(spec, &times, &locs, t, x, y);
        if lambda > spec.lambda_bar {
            return Err(RenalError::BoundViolation {
                time: t,
                intensity: lambda,
                bound: spec.lambda_bar,
            });
        }
        if rng.random::<f64>() * spec.lambda_bar <= lambda {
            times.push(t);
            locs.extend([x, y]);
        }
    }
    event_sequence(times, locs, 2, "spatio-temporal simulation")
}
