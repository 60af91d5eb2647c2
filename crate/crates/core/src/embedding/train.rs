use serde::{Deserialize, Serialize};

use super::cell;
use super::layout::Layout;
use super::{EmbeddingModel, Prepared};
use crate::error::{RenalError, Result};
use crate::sequence::ObservationSequence;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

impl std::str::FromStr for Optimizer {
    type Err = RenalError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(Optimizer::Sgd),
            "adam" => Ok(Optimizer::Adam),
            other => Err(RenalError::Config(format!("unknown optimizer `{other}` (expected `sgd` or `adam`)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Truncation length of backpropagation through time. Sequences shorter
    /// than `bptt_window + 1` train on a single window spanning the whole
    /// sequence.
    pub bptt_window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::time_series()
    }
}

impl TrainConfig {
    /// Adam at 0.001 for 100 epochs.
    pub fn time_series() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 100,
            optimizer: Optimizer::Adam,
            seed: 0,
            bptt_window: 32,
        }
    }

    /// Plain SGD at 0.00025 for 150 epochs.
    pub fn temporal_point_process() -> Self {
        Self {
            learning_rate: 0.00025,
            epochs: 150,
            optimizer: Optimizer::Sgd,
            ..Self::time_series()
        }
    }

    /// Plain SGD at 0.0005 for 200 epochs.
    pub fn spatio_temporal() -> Self {
        Self {
            learning_rate: 0.0005,
            epochs: 200,
            optimizer: Optimizer::Sgd,
            ..Self::time_series()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(RenalError::Config(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(RenalError::Config("epochs must be at least 1".into()));
        }
        if self.bptt_window == 0 {
            return Err(RenalError::Config("bptt_window must be at least 1".into()));
        }
        Ok(())
    }
}

/// Mean squared one-step error over steps `start..start + len`, starting
/// from hidden state `h_start`. Step `k` consumes input `k` and predicts
/// input `k + 1`. With `grad` set, the parameter gradient of the returned
/// loss is added into it.
pub(crate) fn window_loss(
    layout: &Layout,
    params: &[f64],
    data: &Prepared,
    start: usize,
    len: usize,
    h_start: &[f64],
    grad: Option<&mut [f64]>,
) -> (f64, Vec<f64>) {
    debug_assert!(len >= 1 && start + len < data.len());
    let scale = 1.0 / len as f64;
    let mut caches = Vec::with_capacity(if grad.is_some() { len } else { 0 });
    let mut errors = Vec::with_capacity(if grad.is_some() { len } else { 0 });
    let mut h = h_start.to_vec();
    let mut loss = 0.0;
    for k in start..start + len {
        let c = cell::step(layout, params, data.row(k), &h, data.dt[k]);
        let pred = cell::decode(layout, params, &c.h);
        let err: Vec<f64> = pred.iter().zip(data.row(k + 1)).map(|(a, b)| a - b).collect();
        loss += err.iter().map(|e| e * e).sum::<f64>();
        h.clone_from(&c.h);
        if grad.is_some() {
            caches.push(c);
            errors.push(err);
        }
    }
    if let Some(grad) = grad {
        let mut carry = vec![0.0; layout.hidden_dim];
        for (c, err) in caches.iter().zip(&errors).rev() {
            let dy: Vec<f64> = err.iter().map(|e| 2.0 * scale * e).collect();
            let mut dh = cell::decode_backward(layout, params, &c.h, &dy, grad);
            for (a, b) in dh.iter_mut().zip(&carry) {
                *a += b;
            }
            carry = cell::step_backward(layout, params, c, &dh, grad);
        }
    }
    (loss * scale, h)
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Adam {
    fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = BETA1 * self.m[i] + (1.0 - BETA1) * grad[i];
            self.v[i] = BETA2 * self.v[i] + (1.0 - BETA2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= lr * mh / (vh.sqrt() + ADAM_EPS);
        }
    }
}

/// Fits a fresh model to `seq` by one-step prediction with truncated
/// backpropagation through time.
///
/// The hidden state is carried across consecutive windows within an epoch
/// and reset to `h0` at each epoch start. One parameter update per window.
/// The returned curve holds the step-weighted mean window loss of each epoch.
pub fn train(
    seq: &ObservationSequence,
    hidden_dim: usize,
    cfg: &TrainConfig,
) -> Result<(EmbeddingModel, Vec<f64>)> {
    cfg.validate()?;
    let mut model = EmbeddingModel::initialize(seq, hidden_dim, cfg.seed)?;
    let data = model.prepare(seq)?;
    let steps = data.len() - 1;
    let window = cfg.bptt_window.min(steps);
    if window < cfg.bptt_window {
        log::debug!("sequence has {steps} steps, truncating bptt window to {window}");
    }

    let n = model.params.len();
    let mut grad = vec![0.0; n];
    let mut adam = (cfg.optimizer == Optimizer::Adam).then(|| Adam::new(n));
    let mut curve = Vec::with_capacity(cfg.epochs);

    for epoch in 1..=cfg.epochs {
        let mut h = model.h0.clone();
        let mut total = 0.0;
        let mut start = 0;
        while start < steps {
            let len = window.min(steps - start);
            grad.fill(0.0);
            let (loss, h_end) = window_loss(&model.layout, &model.params, &data, start, len, &h, Some(&mut grad));
            if !loss.is_finite() || !grad.iter().all(|g| g.is_finite()) {
                return Err(RenalError::Divergence { epoch, loss });
            }
            match adam.as_mut() {
                Some(a) => a.step(&mut model.params, &grad, cfg.learning_rate),
                None => {
                    for (w, g) in model.params.iter_mut().zip(&grad) {
                        *w -= cfg.learning_rate * g;
                    }
                }
            }
            total += loss * len as f64;
            h = h_end;
            start += len;
        }
        let loss = total / steps as f64;
        if !model.params.iter().all(|w| w.is_finite()) {
            return Err(RenalError::Divergence { epoch, loss });
        }
        curve.push(loss);
    }
    log::debug!(
        "trained hidden={} epochs={} final loss {:.6}",
        hidden_dim,
        cfg.epochs,
        curve.last().copied().unwrap_or(f64::NAN)
    );
    Ok((model, curve))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use crate::sequence::SequenceKind;
    use rand_distr::{Distribution, StandardNormal};

    /// ARMA(2,1) with φ = (0.5, 0.4), θ = 0.65, unit noise; a local copy so
    /// these tests do not depend on the generators module.
    fn arma21(n: usize, seed: u64) -> ObservationSequence {
        let mut rng = rng_from_seed(seed);
        let mut x = vec![0.0f64; n + 300];
        let mut e_prev = 0.0;
        for i in 2..x.len() {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[i] = 0.5 * x[i - 1] + 0.4 * x[i - 2] + e + 0.65 * e_prev;
            e_prev = e;
        }
        ObservationSequence::regular(x[300..].to_vec(), 1, 0.1).unwrap()
    }

    #[test]
    fn presets() {
        let ts = TrainConfig::time_series();
        assert_eq!((ts.learning_rate, ts.epochs, ts.optimizer), (0.001, 100, Optimizer::Adam));
        let tpp = TrainConfig::temporal_point_process();
        assert_eq!((tpp.learning_rate, tpp.epochs, tpp.optimizer), (0.00025, 150, Optimizer::Sgd));
        let st = TrainConfig::spatio_temporal();
        assert_eq!((st.learning_rate, st.epochs, st.optimizer), (0.0005, 200, Optimizer::Sgd));
        assert_eq!(ts.bptt_window, 32);
    }

    #[test]
    fn invalid_configs() {
        let seq = arma21(50, 0);
        for cfg in [
            TrainConfig { learning_rate: 0.0, ..Default::default() },
            TrainConfig { learning_rate: f64::NAN, ..Default::default() },
            TrainConfig { epochs: 0, ..Default::default() },
            TrainConfig { bptt_window: 0, ..Default::default() },
        ] {
            assert!(matches!(train(&seq, 2, &cfg), Err(RenalError::Config(_))));
        }
        let bad: std::result::Result<TrainConfig, _> = serde_json::from_str(r#"{"epochs": 3, "lr": 1}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn constant_sequence_is_learned() {
        let seq = ObservationSequence::regular(vec![3.25; 200], 1, 1.0).unwrap();
        let (m, curve) = train(&seq, 6, &TrainConfig::time_series()).unwrap();
        assert_eq!(curve.len(), 100);
        let mse = m.predictive_mse(&seq).unwrap();
        assert!(mse < 1e-4, "{mse}");
    }

    #[test]
    fn same_seed_same_parameters() {
        let seq = arma21(200, 1);
        let cfg = TrainConfig { epochs: 5, ..TrainConfig::time_series().with_seed(42) };
        let (a, ca) = train(&seq, 3, &cfg).unwrap();
        let (b, cb) = train(&seq, 3, &cfg).unwrap();
        assert_eq!(a.params(), b.params());
        assert_eq!(ca, cb);
        let (c, _) = train(&seq, 3, &cfg.clone().with_seed(43)).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn loss_mostly_decreases_on_arma() {
        let seq = arma21(500, 7);
        let (_, curve) = train(&seq, 6, &TrainConfig::time_series()).unwrap();
        let down = curve.windows(2).filter(|w| w[1] <= w[0]).count();
        assert!(down * 10 >= (curve.len() - 1) * 9, "{down}/{} non-increasing", curve.len() - 1);
        assert!(curve.last().unwrap() < &curve[0]);
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let seq = arma21(200, 2);
        let cfg = TrainConfig {
            learning_rate: 1e300,
            optimizer: Optimizer::Sgd,
            epochs: 5,
            ..Default::default()
        };
        match train(&seq, 3, &cfg) {
            Err(RenalError::Divergence { epoch, .. }) => assert!((1..=5).contains(&epoch)),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn short_sequences_use_one_window() {
        let times: Vec<f64> = (1..=12).map(|i| i as f64 * 0.7 + (i as f64).sin() * 0.2).collect();
        let seq = ObservationSequence::new(times, vec![], 0, SequenceKind::Event).unwrap();
        let cfg = TrainConfig { epochs: 3, ..TrainConfig::temporal_point_process() };
        let (m, curve) = train(&seq, 4, &cfg).unwrap();
        assert_eq!(curve.len(), 3);
        assert_eq!(m.input_dim(), 1);
    }

    #[test]
    fn trained_model_predicts_held_out_data_better() {
        let mut wins = 0;
        for run in 0..10u64 {
            let train_seq = arma21(500, 100 + run);
            let held_out = arma21(500, 1000 + run);
            let cfg = TrainConfig::time_series().with_seed(run);
            let (trained, _) = train(&train_seq, 6, &cfg).unwrap();
            let untrained = EmbeddingModel::initialize(&train_seq, 6, run).unwrap();
            if trained.predictive_mse(&held_out).unwrap() < untrained.predictive_mse(&held_out).unwrap() {
                wins += 1;
            }
        }
        assert_eq!(wins, 10);
    }
}
