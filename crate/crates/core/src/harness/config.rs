use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::source::ProcessSpec;
use crate::baselines::MmdConfig;
use crate::embedding::TrainConfig;
use crate::error::{RenalError, Result};
use crate::gof::BinSelectionConfig;
use crate::sequence::SequenceKind;

/// Test applied in every trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// Adaptive grid on trained embeddings.
    Renal,
    /// Kernel two-sample test on raw windows.
    Mmd,
    /// Fixed `m` equal-width bins per embedding dimension.
    Ewd(usize),
    /// Scott's rule bin counts on embeddings.
    Scott,
}

impl Method {
    pub fn needs_embedding(&self) -> bool {
        !matches!(self, Method::Mmd)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Renal => f.write_str("renal"),
            Method::Mmd => f.write_str("mmd"),
            Method::Ewd(m) => write!(f, "ewd:{m}"),
            Method::Scott => f.write_str("scott"),
        }
    }
}

impl FromStr for Method {
    type Err = RenalError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || RenalError::Config(format!("unknown method `{s}` (expected renal, mmd, ewd:<m> or scott)"));
        match s {
            "renal" => Ok(Method::Renal),
            "mmd" => Ok(Method::Mmd),
            "scott" => Ok(Method::Scott),
            _ => {
                let m: usize = s.strip_prefix("ewd:").ok_or_else(bad)?.parse().map_err(|_| bad())?;
                if m < 2 {
                    return Err(RenalError::Config(format!("EWD needs at least 2 bins, got {m}")));
                }
                Ok(Method::Ewd(m))
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Everything one accuracy experiment needs.
///
/// Each trial draws a reference sequence from `null_process`, tests it
/// against a fresh `null_process` sample (null scenario) and against an
/// `alt_process` sample (alternative scenario).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub null_process: ProcessSpec,
    pub alt_process: ProcessSpec,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Embedding width; 0 picks the default for the data kind.
    #[serde(default)]
    pub hidden_dim: usize,
    #[serde(default)]
    pub train_cfg: Option<TrainConfig>,
    #[serde(default)]
    pub bin_cfg: Option<BinSelectionConfig>,
    #[serde(default)]
    pub mmd_cfg: MmdConfig,
    #[serde(default)]
    pub seed: u64,
}

fn default_method() -> Method {
    Method::Renal
}

fn default_trials() -> usize {
    100
}

fn default_alpha() -> f64 {
    0.05
}

/// Network and grid defaults per data family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DataFamily {
    TimeSeries,
    PointProcess,
    SpatioTemporal,
}

impl DataFamily {
    pub fn of(kind: SequenceKind, dim: usize) -> Self {
        match (kind, dim) {
            (SequenceKind::Regular, _) => DataFamily::TimeSeries,
            (SequenceKind::Event, 0) => DataFamily::PointProcess,
            (SequenceKind::Event, _) => DataFamily::SpatioTemporal,
        }
    }

    pub fn hidden_dim(self) -> usize {
        match self {
            DataFamily::TimeSeries => 6,
            _ => 4,
        }
    }

    pub fn train_cfg(self) -> TrainConfig {
        match self {
            DataFamily::TimeSeries => TrainConfig::time_series(),
            DataFamily::PointProcess => TrainConfig::temporal_point_process(),
            DataFamily::SpatioTemporal => TrainConfig::spatio_temporal(),
        }
    }

    pub fn bin_cfg(self) -> BinSelectionConfig {
        match self {
            DataFamily::TimeSeries => BinSelectionConfig::time_series(),
            _ => BinSelectionConfig::event_data(),
        }
    }
}

impl ExperimentConfig {
    /// Config for two named processes with defaults for their data family.
    pub fn for_processes(null: &str, alt: &str) -> Result<Self> {
        let mut cfg = Self {
            null_process: ProcessSpec::preset(null)?,
            alt_process: ProcessSpec::preset(alt)?,
            method: Method::Renal,
            trials: default_trials(),
            alpha: default_alpha(),
            hidden_dim: 0,
            train_cfg: None,
            bin_cfg: None,
            mmd_cfg: MmdConfig::default(),
            seed: 0,
        };
        cfg.fill_defaults()?;
        Ok(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RenalError::Config(format!("experiment config: {e}")))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| RenalError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Fills `hidden_dim`, `train_cfg` and `bin_cfg` from the data family of
    /// the null process when they are unset. CSV sources are loaded to find
    /// their dimension.
    pub fn fill_defaults(&mut self) -> Result<()> {
        let src = self.null_process.resolve()?;
        let family = DataFamily::of(src.kind(), src.dim());
        if self.hidden_dim == 0 {
            self.hidden_dim = family.hidden_dim();
        }
        self.train_cfg.get_or_insert_with(|| family.train_cfg());
        self.bin_cfg.get_or_insert_with(|| family.bin_cfg());
        Ok(())
    }

    pub fn train_cfg(&self) -> TrainConfig {
        self.train_cfg.clone().unwrap_or_default()
    }

    pub fn bin_cfg(&self) -> BinSelectionConfig {
        self.bin_cfg.clone().unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(RenalError::Config("trials must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(RenalError::Config(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.hidden_dim == 0 {
            return Err(RenalError::Config("hidden_dim is unset".into()));
        }
        if let Some(t) = &self.train_cfg {
            t.validate()?;
        }
        if let Some(b) = &self.bin_cfg {
            b.validate()?;
        }
        self.mmd_cfg.validate()?;
        self.null_process.validate()?;
        self.alt_process.validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_strings() {
        for (s, m) in [("renal", Method::Renal), ("mmd", Method::Mmd), ("ewd:4", Method::Ewd(4)), ("scott", Method::Scott)] {
            assert_eq!(s.parse::<Method>().unwrap(), m);
            assert_eq!(m.to_string(), s);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{s}\""));
        }
        for bad in ["ewd", "ewd:1", "ewd:x", "ks"] {
            assert!(matches!(bad.parse::<Method>(), Err(RenalError::Config(_))));
        }
    }

    #[test]
    fn family_defaults() {
        let c = ExperimentConfig::for_processes("se", "sc").unwrap();
        assert_eq!(c.hidden_dim, 4);
        assert_eq!(c.train_cfg(), TrainConfig::temporal_point_process());
        assert_eq!(c.bin_cfg().lambda, 0.08);
        let c = ExperimentConfig::for_processes("arma1", "garch").unwrap();
        assert_eq!(c.hidden_dim, 6);
        assert_eq!(c.bin_cfg(), BinSelectionConfig::time_series());
        let c = ExperimentConfig::for_processes("stpp-std", "stpp-gau").unwrap();
        assert_eq!(c.train_cfg(), TrainConfig::spatio_temporal());
    }

    #[test]
    fn json_config() {
        let mut c = ExperimentConfig::from_json(r#"{"null_process":"se","alt_process":"sc","method":"ewd:6","trials":7,"seed":3}"#).unwrap();
        c.fill_defaults().unwrap();
        c.validate().unwrap();
        assert_eq!((c.trials, c.method, c.seed), (7, Method::Ewd(6), 3));
        let echo = serde_json::to_string(&c).unwrap();
        assert_eq!(ExperimentConfig::from_json(&echo).unwrap(), c);

        assert!(matches!(ExperimentConfig::from_json(r#"{"null_process":"se"}"#), Err(RenalError::Config(_))));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"null_process":"se","alt_process":"sc","trails":3}"#),
            Err(RenalError::Config(_))
        ));
        let zero = ExperimentConfig { trials: 0, ..c.clone() };
        assert!(zero.validate().is_err());
        let bad_alpha = ExperimentConfig { alpha: 1.0, ..c };
        assert!(bad_alpha.validate().is_err());
    }
}
