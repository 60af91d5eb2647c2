use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use renal::baselines::{ewd_test, mmd_test, scott_test, MmdConfig};
use renal::embedding::TrainConfig;
use renal::harness::{
    ablation_csv, emit_report, run_experiment, run_lambda_ablation, DataFamily, ExperimentConfig, Method,
    ProcessSpec,
};
use renal::rng::derive_seed;
use renal::sequence::{load_csv, save_csv, write_csv, ObservationSequence, SequenceKind};
use renal::{run_renal_test, EmbeddingModel, RenalError};

/// Goodness-of-fit testing for time-series generative models.
#[derive(Parser)]
#[command(name = "renal", version)]
struct Cli {
    /// Worker threads for trial-parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one sequence from a process and write it as CSV.
    Simulate {
        /// Preset name or a JSON file holding a process spec.
        #[arg(long)]
        process: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the embedding network to a CSV sequence and save it as JSON.
    Train {
        /// Training data (CSV with header `t,x1,...,xd`).
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "regular")]
        kind: SequenceKind,
        /// Embedding width (default depends on the data family).
        #[arg(long)]
        hidden: Option<usize>,
        /// JSON training config; defaults depend on the data family.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two-sample test of a candidate sequence against a reference.
    Test {
        /// Reference CSV; the embedding is trained on it unless `--model` is given.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, default_value = "regular")]
        kind: SequenceKind,
        /// Pre-trained model JSON.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long, default_value = "renal")]
        method: Method,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeated-trial accuracy experiment.
    Experiment {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Report JSON (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flat per-trial CSV twin of the report.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Sweep the bin-selection smoothness weight.
    Ablate {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// Comma-separated λ values.
        #[arg(long, value_delimiter = ',', default_values_t = [0.001, 0.015, 0.06])]
        lambdas: Vec<f64>,
        /// JSON with one report per λ (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// `lambda,type1,type2` CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config. Flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Null process preset (needed without `--config`).
    #[arg(long)]
    null: Option<String>,
    /// Alternative process preset (needed without `--config`).
    #[arg(long)]
    alt: Option<String>,
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ExperimentArgs {
    fn resolve(&self) -> renal::Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.null, &self.alt) {
            (Some(path), _, _) => ExperimentConfig::load(path)?,
            (None, Some(null), Some(alt)) => ExperimentConfig::for_processes(null, alt)?,
            _ => return Err(RenalError::Config("give --config, or both --null and --alt".into())),
        };
        if self.config.is_some() {
            if let Some(null) = &self.null {
                cfg.null_process = ProcessSpec::preset(null)?;
            }
            if let Some(alt) = &self.alt {
                cfg.alt_process = ProcessSpec::preset(alt)?;
            }
        }
        if let Some(m) = self.method {
            cfg.method = m;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

fn exit_code(e: &RenalError) -> u8 {
    match e {
        RenalError::Divergence { .. } => 4,
        e if e.is_data_error() => 3,
        RenalError::BoundViolation { .. } => 3,
        _ => 2,
    }
}

fn write_out(path: Option<&Path>, text: &str) -> renal::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| RenalError::Io { path: p.into(), source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> renal::Result<String> {
    let value = serde_json::to_value(v)?;
    Ok(serde_json::to_string_pretty(&value)? + "\n")
}

fn parse_process(arg: &str) -> renal::Result<ProcessSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| RenalError::Io { path: path.into(), source: e })?;
        serde_json::from_str(&text).map_err(|e| RenalError::Config(format!("{arg}: {e}")))
    } else {
        ProcessSpec::preset(arg)
    }
}

fn family_of(seq: &ObservationSequence) -> DataFamily {
    DataFamily::of(seq.kind(), seq.dim())
}

fn train_model(
    seq: &ObservationSequence,
    hidden: Option<usize>,
    cfg: Option<TrainConfig>,
    seed: Option<u64>,
) -> renal::Result<EmbeddingModel> {
    let family = family_of(seq);
    let mut cfg = cfg.unwrap_or_else(|| family.train_cfg());
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (model, losses) = renal::train(seq, hidden.unwrap_or(family.hidden_dim()), &cfg)?;
    if let (Some(first), Some(last)) = (losses.first(), losses.last()) {
        log::info!("trained {} epochs: loss {first:.6} -> {last:.6}", losses.len());
    }
    Ok(model)
}

fn run(cli: Cli) -> renal::Result<u8> {
    match cli.command {
        Command::Simulate { process, seed, out } => {
            let seq = parse_process(&process)?.resolve()?.sample(seed)?;
            match out {
                Some(p) => save_csv(&seq, &p)?,
                None => write_csv(&seq, &mut std::io::stdout().lock()).map_err(|e| RenalError::Io {
                    path: "<stdout>".into(),
                    source: e,
                })?,
            }
        }
        Command::Train { data, kind, hidden, config, seed, out } => {
            let seq = load_csv(&data, kind)?;
            let cfg = match config {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| RenalError::Io { path: p.clone(), source: e })?;
                    let cfg: TrainConfig =
                        serde_json::from_str(&text).map_err(|e| RenalError::Config(format!("{}: {e}", p.display())))?;
                    cfg.validate()?;
                    Some(cfg)
                }
                None => None,
            };
            train_model(&seq, hidden, cfg, seed)?.save(&out)?;
        }
        Command::Test { reference, candidate, kind, model, hidden, method, alpha, seed, out } => {
            let d0 = load_csv(&reference, kind)?;
            let d1 = load_csv(&candidate, kind)?;
            let text = if method == Method::Mmd {
                to_json(&mmd_test(&d0, &d1, &MmdConfig::default(), alpha, seed)?)?
            } else {
                let model = match model {
                    Some(p) => EmbeddingModel::load(p)?,
                    None => train_model(&d0, hidden, None, Some(derive_seed(seed, &[3])))?,
                };
                let report = match method {
                    Method::Renal => run_renal_test(&d0, &d1, &model, &family_of(&d0).bin_cfg(), alpha)?,
                    Method::Ewd(m) => ewd_test(&model.embed_sequence(&d0)?, &model.embed_sequence(&d1)?, m, alpha)?,
                    Method::Scott => scott_test(&model.embed_sequence(&d0)?, &model.embed_sequence(&d1)?, alpha)?,
                    Method::Mmd => unreachable!(),
                };
                to_json(&report)?
            };
            write_out(out.as_deref(), &text)?;
        }
        Command::Experiment { exp, out, csv } => {
            let report = run_experiment(&exp.resolve()?)?;
            match out {
                Some(p) => emit_report(&report, &p, csv.as_deref())?,
                None => {
                    print!("{}", report.to_canonical_json()?);
                    if let Some(c) = csv {
                        write_out(Some(&c), &report.to_csv())?;
                    }
                }
            }
            if report.all_diverged() {
                log::error!("every trial was excluded after training diverged");
                return Ok(4);
            }
        }
        Command::Ablate { exp, lambdas, out, csv } => {
            let points = run_lambda_ablation(&exp.resolve()?, &lambdas)?;
            write_out(out.as_deref(), &to_json(&points)?)?;
            if let Some(c) = csv {
                write_out(Some(&c), &ablation_csv(&points))?;
            }
            if points.iter().any(|p| p.report.all_diverged()) {
                return Ok(4);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
