use std::path::PathBuf;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{RenalError, Result};
use crate::generators::{
    simulate_arma, simulate_garch, simulate_hawkes_se, simulate_self_correcting, simulate_stpp, ArmaSpec, GarchSpec,
    HawkesSpec, SelfCorrectingSpec, StppSpec,
};
use crate::rng::rng_from_seed;
use crate::sequence::{load_csv, ObservationSequence, SequenceKind};

const SERIES_LEN: usize = 500;
const SERIES_DT: f64 = 0.1;
const CSV_WINDOW: usize = 400;

/// Where a trial's sequences come from: a simulator or windows of a CSV file.
///
/// In JSON either a preset name (`"se"`, `"sc"`, `"arma1"`, `"arma2"`,
/// `"garch"`, `"stpp-std"`, `"stpp-gau"`) or an object tagged by
/// `"process"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "process", rename_all = "snake_case", try_from = "ProcessInput")]
pub enum ProcessSpec {
    Arma {
        ar: Vec<f64>,
        ma: Vec<f64>,
        sigma: f64,
        n: usize,
        dt: f64,
    },
    Garch {
        mu: f64,
        omega: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        n: usize,
        dt: f64,
    },
    SelfExciting(HawkesSpec),
    SelfCorrecting(SelfCorrectingSpec),
    Stpp(StppSpec),
    Csv {
        path: PathBuf,
        kind: SequenceKind,
        #[serde(default = "default_window")]
        window: usize,
    },
}

fn default_window() -> usize {
    CSV_WINDOW
}

/// Mirror of `ProcessSpec` used only for deserialisation.
#[derive(Deserialize)]
#[serde(tag = "process", rename_all = "snake_case", deny_unknown_fields)]
enum TaggedSpec {
    Arma {
        ar: Vec<f64>,
        ma: Vec<f64>,
        sigma: f64,
        #[serde(default = "series_len")]
        n: usize,
        #[serde(default = "series_dt")]
        dt: f64,
    },
    Garch {
        mu: f64,
        omega: f64,
        alpha: f64,
        beta: f64,
        gamma: f64,
        #[serde(default = "series_len")]
        n: usize,
        #[serde(default = "series_dt")]
        dt: f64,
    },
    SelfExciting(HawkesSpec),
    SelfCorrecting(SelfCorrectingSpec),
    Stpp(StppSpec),
    Csv {
        path: PathBuf,
        kind: SequenceKind,
        #[serde(default = "default_window")]
        window: usize,
    },
}

fn series_len() -> usize {
    SERIES_LEN
}

fn series_dt() -> f64 {
    SERIES_DT
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ProcessInput {
    Preset(String),
    Spec(TaggedSpec),
}

impl TryFrom<ProcessInput> for ProcessSpec {
    type Error = RenalError;

    fn try_from(input: ProcessInput) -> Result<Self> {
        Ok(match input {
            ProcessInput::Preset(name) => ProcessSpec::preset(&name)?,
            ProcessInput::Spec(t) => match t {
                TaggedSpec::Arma { ar, ma, sigma, n, dt } => ProcessSpec::Arma { ar, ma, sigma, n, dt },
                TaggedSpec::Garch { mu, omega, alpha, beta, gamma, n, dt } => {
                    ProcessSpec::Garch { mu, omega, alpha, beta, gamma, n, dt }
                }
                TaggedSpec::SelfExciting(s) => ProcessSpec::SelfExciting(s),
                TaggedSpec::SelfCorrecting(s) => ProcessSpec::SelfCorrecting(s),
                TaggedSpec::Stpp(s) => ProcessSpec::Stpp(s),
                TaggedSpec::Csv { path, kind, window } => ProcessSpec::Csv { path, kind, window },
            },
        })
    }
}

impl ProcessSpec {
    pub const PRESETS: [&'static str; 7] = ["se", "sc", "arma1", "arma2", "garch", "stpp-std", "stpp-gau"];

    pub fn preset(name: &str) -> Result<Self> {
        let arma = |s: ArmaSpec| ProcessSpec::Arma {
            ar: s.ar,
            ma: s.ma,
            sigma: s.sigma,
            n: SERIES_LEN,
            dt: SERIES_DT,
        };
        Ok(match name {
            "se" => ProcessSpec::SelfExciting(HawkesSpec::default()),
            "sc" => ProcessSpec::SelfCorrecting(SelfCorrectingSpec::default()),
            "arma1" => arma(ArmaSpec::arma1()),
            "arma2" => arma(ArmaSpec::arma2()),
            "garch" => {
                let g = GarchSpec::default();
                ProcessSpec::Garch {
                    mu: g.mu,
                    omega: g.omega,
                    alpha: g.alpha,
                    beta: g.beta,
                    gamma: g.gamma,
                    n: SERIES_LEN,
                    dt: SERIES_DT,
                }
            }
            "stpp-std" => ProcessSpec::Stpp(StppSpec::standard()),
            "stpp-gau" => ProcessSpec::Stpp(StppSpec::gaussian()),
            other => {
                return Err(RenalError::Config(format!(
                    "unknown process `{other}` (expected one of {})",
                    Self::PRESETS.join(", ")
                )))
            }
        })
    }

    fn arma_spec(&self) -> Option<ArmaSpec> {
        match self {
            ProcessSpec::Arma { ar, ma, sigma, .. } => Some(ArmaSpec { ar: ar.clone(), ma: ma.clone(), sigma: *sigma }),
            _ => None,
        }
    }

    fn garch_spec(&self) -> Option<GarchSpec> {
        match *self {
            ProcessSpec::Garch { mu, omega, alpha, beta, gamma, .. } => Some(GarchSpec { mu, omega, alpha, beta, gamma }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessSpec::Arma { n, dt, .. } | ProcessSpec::Garch { n, dt, .. } => {
                if *n < 2 || !(*dt > 0.0 && dt.is_finite()) {
                    return Err(RenalError::Config(format!("series need n >= 2 and dt > 0, got n = {n}, dt = {dt}")));
                }
                match self.arma_spec() {
                    Some(s) => s.validate(),
                    None => self.garch_spec().map_or(Ok(()), |g| g.validate()),
                }
            }
            ProcessSpec::SelfExciting(s) => s.validate(),
            ProcessSpec::SelfCorrecting(s) => s.validate(),
            ProcessSpec::Stpp(s) => s.validate(),
            ProcessSpec::Csv { window, .. } => {
                if *window < 2 {
                    Err(RenalError::Config(format!("CSV window must be at least 2, got {window}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Loads CSV files once; simulators are used as they are.
    pub fn resolve(&self) -> Result<DataSource> {
        self.validate()?;
        let loaded = match self {
            ProcessSpec::Csv { path, kind, window } => {
                let seq = load_csv(path, *kind)?;
                if seq.len() < *window {
                    return Err(RenalError::InsufficientData(format!(
                        "{} has {} rows, fewer than the window of {window}",
                        path.display(),
                        seq.len()
                    )));
                }
                Some(seq)
            }
            _ => None,
        };
        Ok(DataSource { spec: self.clone(), loaded })
    }
}

/// A process ready to produce sequences.
#[derive(Clone, Debug)]
pub struct DataSource {
    spec: ProcessSpec,
    loaded: Option<ObservationSequence>,
}

impl DataSource {
    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn kind(&self) -> SequenceKind {
        match &self.spec {
            ProcessSpec::Arma { .. } | ProcessSpec::Garch { .. } => SequenceKind::Regular,
            ProcessSpec::SelfExciting(_) | ProcessSpec::SelfCorrecting(_) | ProcessSpec::Stpp(_) => SequenceKind::Event,
            ProcessSpec::Csv { kind, .. } => *kind,
        }
    }

    /// Number of value columns per observation.
    pub fn dim(&self) -> usize {
        match &self.spec {
            ProcessSpec::Arma { .. } | ProcessSpec::Garch { .. } => 1,
            ProcessSpec::SelfExciting(_) | ProcessSpec::SelfCorrecting(_) => 0,
            ProcessSpec::Stpp(_) => 2,
            ProcessSpec::Csv { .. } => self.loaded.as_ref().map_or(0, |s| s.dim()),
        }
    }

    /// One sequence; CSV sources return a uniformly placed contiguous window.
    pub fn sample(&self, seed: u64) -> Result<ObservationSequence> {
        match &self.spec {
            ProcessSpec::Arma { n, dt, .. } => simulate_arma(&self.spec.arma_spec().unwrap(), *n, *dt, seed),
            ProcessSpec::Garch { n, dt, .. } => simulate_garch(&self.spec.garch_spec().unwrap(), *n, *dt, seed),
            ProcessSpec::SelfExciting(s) => simulate_hawkes_se(s, seed),
            ProcessSpec::SelfCorrecting(s) => simulate_self_correcting(s, seed),
            ProcessSpec::Stpp(s) => simulate_stpp(s, seed),
            ProcessSpec::Csv { window, .. } => {
                let seq = self.loaded.as_ref().expect("CSV sources are loaded on resolve");
                let start = rng_from_seed(seed).random_range(0..=seq.len() - window);
                seq.window(start, *window)
            }
        }
    }
}
