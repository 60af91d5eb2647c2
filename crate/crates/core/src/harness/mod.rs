//! Repeated-trial accuracy experiments, λ sweeps and their reports.

mod config;
mod run;
mod source;

pub use config::{DataFamily, ExperimentConfig, Method};
pub use run::{
    ablation_csv, emit_report, run_experiment, run_lambda_ablation, AblationPoint, AccuracyReport, Scenario, TrialRecord,
    REPORT_VERSION,
};
pub use source::{DataSource, ProcessSpec};
