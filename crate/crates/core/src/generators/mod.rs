//! Seeded simulators for the synthetic processes used in the experiments.
//!
//! Every simulator is a pure function of its spec and seed.

mod arma;
mod garch;
mod hawkes;
mod markov;
mod self_correcting;
mod stpp;

pub use arma::{simulate_arma, ArmaSpec};
pub use garch::{simulate_garch, simulate_garch_path, GarchPath, GarchSpec};
pub use hawkes::{hawkes_intensity, simulate_hawkes_se, HawkesSpec};
pub use markov::simulate_markov_chain;
pub use self_correcting::{sc_log_intensity, simulate_self_correcting, SelfCorrectingSpec};
pub use stpp::{simulate_stpp, stpp_intensity, StppKernel, StppSpec};

use rand_distr::{Distribution, Exp};

use crate::error::{RenalError, Result};
use crate::rng::Rng;
use crate::sequence::{ObservationSequence, SequenceKind};

/// Exponential waiting time with the given rate.
pub(crate) fn exp_wait(rng: &mut Rng, rate: f64) -> f64 {
    Exp::new(rate).expect("positive finite rate").sample(rng)
}

/// Wraps simulated event times (and optional locations) into a sequence,
/// failing when fewer than two events occurred.
pub(crate) fn event_sequence(times: Vec<f64>, values: Vec<f64>, dim: usize, what: &str) -> Result<ObservationSequence> {
    if times.len() < 2 {
        return Err(RenalError::InsufficientData(format!(
            "{what} produced {} event(s); at least 2 are needed",
            times.len()
        )));
    }
    ObservationSequence::new(times, values, dim, SequenceKind::Event)
}

pub(crate) fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        Err(RenalError::Config(format!("horizon must be positive and finite, got {horizon}")))
    }
}

pub(crate) fn check_length(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(RenalError::invalid(format!("sequence length must be at least 2, got {n}")))
    }
}
