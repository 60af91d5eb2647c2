use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::source::DataSource;
use crate::baselines::{ewd_test, mmd_test, scott_test};
use crate::embedding::{train, EmbeddingModel};
use crate::error::{RenalError, Result};
use crate::gof::{run_renal_test, TestReport};
use crate::rng::derive_seed;
use crate::sequence::{fmt17, ObservationSequence};

pub const REPORT_VERSION: u32 = 1;

const ROLE_REFERENCE: u64 = 0;
const ROLE_NULL: u64 = 1;
const ROLE_ALT: u64 = 2;
const ROLE_TRAIN: u64 = 3;
const ROLE_PERMUTE: u64 = 4;

/// Which hypothesis holds for a test within a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Reference against a fresh sample of the same process.
    Null,
    /// Reference against a sample of the alternative process.
    Alternative,
}

impl Scenario {
    fn as_str(self) -> &'static str {
        match self {
            Scenario::Null => "null",
            Scenario::Alternative => "alternative",
        }
    }
}

/// One test within one trial. Excluded tests carry `error` and no decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub scenario: Scenario,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statistic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dof: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub diverged: bool,
}

impl TrialRecord {
    fn excluded(trial: usize, scenario: Scenario, err: &RenalError) -> Self {
        Self {
            trial,
            scenario,
            statistic: None,
            dof: None,
            p_value: None,
            reject: None,
            bins: None,
            error: Some(err.to_string()),
            diverged: matches!(err, RenalError::Divergence { .. }),
        }
    }

    fn from_test(trial: usize, scenario: Scenario, r: TestReport) -> Self {
        Self {
            trial,
            scenario,
            statistic: Some(r.statistic),
            dof: Some(r.dof),
            p_value: Some(r.p_value),
            reject: Some(r.reject),
            bins: Some(r.selected_bins.bins().to_vec()),
            error: None,
            diverged: false,
        }
    }

    /// Whether the decision was right, for tests that reached one.
    pub fn correct(&self) -> Option<bool> {
        self.reject.map(|r| match self.scenario {
            Scenario::Null => !r,
            Scenario::Alternative => r,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub version: u32,
    pub config_echo: ExperimentConfig,
    /// Fraction of null-scenario tests that accepted.
    pub type1_accuracy: Option<f64>,
    /// Fraction of alternative-scenario tests that rejected.
    pub type2_accuracy: Option<f64>,
    /// Fraction of correct decisions over both scenarios.
    pub average_accuracy: Option<f64>,
    pub null_trials: usize,
    pub alternative_trials: usize,
    /// Tests without a decision; null + alternative + excluded = 2 × trials.
    pub excluded_trials: usize,
    /// Trainings that diverged once and were rerun with a perturbed seed.
    pub retried_trainings: usize,
    pub per_trial: Vec<TrialRecord>,
}

impl AccuracyReport {
    fn tally(config_echo: ExperimentConfig, per_trial: Vec<TrialRecord>, retried_trainings: usize) -> Self {
        let count = |s: Scenario| per_trial.iter().filter(|r| r.scenario == s && r.reject.is_some()).count();
        let right = |s: Scenario| per_trial.iter().filter(|r| r.scenario == s && r.correct() == Some(true)).count();
        let ratio = |a: usize, b: usize| (b > 0).then(|| a as f64 / b as f64);
        let (n0, n1) = (count(Scenario::Null), count(Scenario::Alternative));
        let (c0, c1) = (right(Scenario::Null), right(Scenario::Alternative));
        Self {
            version: REPORT_VERSION,
            type1_accuracy: ratio(c0, n0),
            type2_accuracy: ratio(c1, n1),
            average_accuracy: ratio(c0 + c1, n0 + n1),
            null_trials: n0,
            alternative_trials: n1,
            excluded_trials: per_trial.len() - n0 - n1,
            retried_trainings,
            config_echo,
            per_trial,
        }
    }

    /// Rejection rate in one scenario (1 - type1 for the null scenario).
    pub fn rejection_rate(&self, scenario: Scenario) -> Option<f64> {
        match scenario {
            Scenario::Null => self.type1_accuracy.map(|a| 1.0 - a),
            Scenario::Alternative => self.type2_accuracy,
        }
    }

    /// True when every test was excluded and at least one training diverged.
    pub fn all_diverged(&self) -> bool {
        self.null_trials + self.alternative_trials == 0 && self.per_trial.iter().any(|r| r.diverged)
    }

    /// Pretty JSON with keys in sorted order.
    pub fn to_canonical_json(&self) -> Result<String> {
        let value = serde_json::to_value(self)?;
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        let mut out = String::from("trial,scenario,statistic,dof,p_value,reject,error\n");
        for r in &self.per_trial {
            let error = r.error.as_deref().unwrap_or("").replace('"', "'");
            out.push_str(&format!(
                "{},{},{},{},{},{},\"{}\"\n",
                r.trial,
                r.scenario.as_str(),
                opt(r.statistic),
                r.dof.map(|d| d.to_string()).unwrap_or_default(),
                opt(r.p_value),
                r.reject.map(|b| b.to_string()).unwrap_or_default(),
                error
            ));
        }
        out
    }
}

/// Writes the JSON report, plus its flat CSV twin when `csv` is given.
pub fn emit_report(report: &AccuracyReport, path: impl AsRef<Path>, csv: Option<&Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report.to_canonical_json()?).map_err(|e| RenalError::io(path, e))?;
    if let Some(csv) = csv {
        std::fs::write(csv, report.to_csv()).map_err(|e| RenalError::io(csv, e))?;
    }
    Ok(())
}

struct Sources {
    null: DataSource,
    alt: DataSource,
}

/// Trains on the reference, retrying once with a perturbed seed on divergence.
fn train_reference(cfg: &ExperimentConfig, d0: &ObservationSequence, trial: u64) -> (Result<EmbeddingModel>, bool) {
    let mut tc = cfg.train_cfg();
    tc.seed = derive_seed(cfg.seed, &[trial, ROLE_TRAIN]);
    match train(d0, cfg.hidden_dim, &tc) {
        Ok((m, _)) => (Ok(m), false),
        Err(RenalError::Divergence { epoch, loss }) => {
            log::warn!("trial {trial}: training diverged at epoch {epoch} (loss {loss}); retrying");
            tc.seed = derive_seed(cfg.seed, &[trial, ROLE_TRAIN, 1]);
            (train(d0, cfg.hidden_dim, &tc).map(|(m, _)| m), true)
        }
        Err(e) => (Err(e), false),
    }
}

fn test_pair(
    cfg: &ExperimentConfig,
    d0: &ObservationSequence,
    d1: &ObservationSequence,
    model: Option<&EmbeddingModel>,
    trial: usize,
    scenario: Scenario,
) -> Result<TrialRecord> {
    let report = match cfg.method {
        Method::Mmd => {
            let seed = derive_seed(cfg.seed, &[trial as u64, ROLE_PERMUTE, scenario as u64]);
            let r = mmd_test(d0, d1, &cfg.mmd_cfg, cfg.alpha, seed)?;
            return Ok(TrialRecord {
                trial,
                scenario,
                statistic: Some(r.statistic),
                dof: None,
                p_value: Some(r.p_value),
                reject: Some(r.reject),
                bins: None,
                error: None,
                diverged: false,
            });
        }
        Method::Renal => run_renal_test(d0, d1, model.expect("embedding methods train a model"), &cfg.bin_cfg(), cfg.alpha)?,
        Method::Ewd(m) => {
            let model = model.expect("embedding methods train a model");
            ewd_test(&model.embed_sequence(d0)?, &model.embed_sequence(d1)?, m, cfg.alpha)?
        }
        Method::Scott => {
            let model = model.expect("embedding methods train a model");
            scott_test(&model.embed_sequence(d0)?, &model.embed_sequence(d1)?, cfg.alpha)?
        }
    };
    Ok(TrialRecord::from_test(trial, scenario, report))
}

/// Both tests of one trial, and whether training needed a retry.
fn run_trial(cfg: &ExperimentConfig, src: &Sources, trial: usize) -> (Vec<TrialRecord>, bool) {
    let t = trial as u64;
    let scenarios = [Scenario::Null, Scenario::Alternative];
    let fail_all = |e: &RenalError| scenarios.iter().map(|&s| TrialRecord::excluded(trial, s, e)).collect();

    let d0 = match src.null.sample(derive_seed(cfg.seed, &[t, ROLE_REFERENCE])) {
        Ok(d) => d,
        Err(e) => return (fail_all(&e), false),
    };
    let (model, retried) = if cfg.method.needs_embedding() {
        match train_reference(cfg, &d0, t) {
            (Ok(m), r) => (Some(m), r),
            (Err(e), r) => return (fail_all(&e), r),
        }
    } else {
        (None, false)
    };

    let records = scenarios
        .iter()
        .map(|&scenario| {
            let (source, role) = match scenario {
                Scenario::Null => (&src.null, ROLE_NULL),
                Scenario::Alternative => (&src.alt, ROLE_ALT),
            };
            source
                .sample(derive_seed(cfg.seed, &[t, role]))
                .and_then(|d1| test_pair(cfg, &d0, &d1, model.as_ref(), trial, scenario))
                .unwrap_or_else(|e| {
                    log::debug!("trial {trial} {}: excluded: {e}", scenario.as_str());
                    TrialRecord::excluded(trial, scenario, &e)
                })
        })
        .collect();
    (records, retried)
}

/// Runs `cfg.trials` independent trials in parallel. The report does not
/// depend on the number of worker threads.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AccuracyReport> {
    let mut cfg = cfg.clone();
    cfg.fill_defaults()?;
    cfg.validate()?;
    let src = Sources {
        null: cfg.null_process.resolve()?,
        alt: cfg.alt_process.resolve()?,
    };
    if (src.null.kind(), src.null.dim()) != (src.alt.kind(), src.alt.dim()) {
        return Err(RenalError::Config(format!(
            "null process yields {} data with {} value column(s), alternative yields {} data with {}",
            src.null.kind(),
            src.null.dim(),
            src.alt.kind(),
            src.alt.dim()
        )));
    }
    log::info!("running {} trials of {} (seed {})", cfg.trials, cfg.method, cfg.seed);
    let outcomes: Vec<(Vec<TrialRecord>, bool)> = (0..cfg.trials).into_par_iter().map(|t| run_trial(&cfg, &src, t)).collect();
    let retried = outcomes.iter().filter(|o| o.1).count();
    let per_trial = outcomes.into_iter().flat_map(|o| o.0).collect();
    Ok(AccuracyReport::tally(cfg, per_trial, retried))
}

/// One point of a λ sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    pub lambda: f64,
    pub report: AccuracyReport,
}

/// Repeats the experiment for each smoothness weight. All points share the
/// seed, so they see the same simulated data and trained networks.
pub fn run_lambda_ablation(base: &ExperimentConfig, lambdas: &[f64]) -> Result<Vec<AblationPoint>> {
    if lambdas.is_empty() {
        return Err(RenalError::Config("no lambda values to sweep".into()));
    }
    let mut base = base.clone();
    base.fill_defaults()?;
    lambdas
        .iter()
        .map(|&lambda| {
            let mut cfg = base.clone();
            let mut bins = cfg.bin_cfg();
            bins.lambda = lambda;
            cfg.bin_cfg = Some(bins);
            Ok(AblationPoint { lambda, report: run_experiment(&cfg)? })
        })
        .collect()
}

/// Plot-ready `lambda,type1,type2` rows.
pub fn ablation_csv(points: &[AblationPoint]) -> String {
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let mut out = String::from("lambda,type1,type2\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{}\n",
            fmt17(p.lambda),
            opt(p.report.type1_accuracy),
            opt(p.report.type2_accuracy)
        ));
    }
    out
}
