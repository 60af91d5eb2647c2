//! Recurrent history embedding and its one-step predictive training.
//!
//! A single gated cell serves both regular series and event data. Event
//! sequences switch on an exponential decay of the hidden state over the
//! inter-event gap, and feed the gap itself as an extra input channel.

mod cell;
mod gradcheck;
mod io;
mod layout;
mod train;

pub use gradcheck::{analytic_gradient, gradient_check};
pub use layout::{Block, Layout};
pub use train::{train, Optimizer, TrainConfig};

use rand::Rng as _;

use crate::error::{RenalError, Result};
use crate::gof::Embeddings;
use crate::rng::{derive_seed, rng_from_seed};
use crate::sequence::{ObservationSequence, SequenceKind};

const INIT_STREAM: u64 = 0x1a17;

/// Cell and decoder weights plus the input normalisation fitted on the
/// reference sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    kind: SequenceKind,
    layout: Layout,
    params: Vec<f64>,
    input_mean: Vec<f64>,
    input_scale: Vec<f64>,
    time_scale: f64,
    h0: Vec<f64>,
}

/// Standardised inputs and scaled time steps of one sequence.
#[derive(Clone, Debug)]
pub(crate) struct Prepared {
    pub x: Vec<f64>,
    pub dt: Vec<f64>,
    pub width: usize,
}

impl Prepared {
    pub fn len(&self) -> usize {
        self.dt.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.width..(i + 1) * self.width]
    }
}

impl EmbeddingModel {
    /// All-zero weights with identity normalisation.
    pub fn new(kind: SequenceKind, input_dim: usize, hidden_dim: usize) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(RenalError::invalid(format!(
                "input_dim and hidden_dim must be positive, got {input_dim} and {hidden_dim}"
            )));
        }
        let layout = Layout::new(input_dim, hidden_dim, kind == SequenceKind::Event);
        Ok(Self {
            kind,
            params: vec![0.0; layout.len],
            layout,
            input_mean: vec![0.0; input_dim],
            input_scale: vec![1.0; input_dim],
            time_scale: 1.0,
            h0: vec![0.0; hidden_dim],
        })
    }

    /// Untrained model for `seq`: normalisation from `seq`, weights drawn
    /// uniformly in `±1/sqrt(fan_in)`.
    pub fn initialize(seq: &ObservationSequence, hidden_dim: usize, seed: u64) -> Result<Self> {
        let mut model = Self::new(seq.kind(), seq.feature_dim(), hidden_dim)?;
        model.fit_normalization(seq);
        model.randomize(seed);
        Ok(model)
    }

    /// Redraws every weight from `seed`.
    pub fn randomize(&mut self, seed: u64) {
        let mut rng = rng_from_seed(derive_seed(seed, &[INIT_STREAM]));
        for block in self.layout.blocks() {
            let bound = 1.0 / (self.layout.fan_in(&block) as f64).sqrt();
            for w in &mut self.params[block.range()] {
                *w = rng.random_range(-bound..=bound);
            }
        }
    }

    /// Per-dimension mean and population standard deviation of the features
    /// of `seq`, plus the mean time step. Constant dimensions keep scale 1.
    pub fn fit_normalization(&mut self, seq: &ObservationSequence) {
        let f = seq.features();
        let n = f.len() as f64;
        for j in 0..f.width {
            let mean = (0..f.len()).map(|i| f.row(i)[j]).sum::<f64>() / n;
            let var = (0..f.len()).map(|i| (f.row(i)[j] - mean).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            self.input_mean[j] = mean;
            self.input_scale[j] = if sd > 1e-12 * mean.abs().max(1.0) { sd } else { 1.0 };
        }
        let mean_step = f.steps.iter().sum::<f64>() / n;
        self.time_scale = if mean_step > 0.0 { mean_step } else { 1.0 };
    }

    pub fn kind(&self) -> SequenceKind {
        self.kind
    }

    pub fn input_dim(&self) -> usize {
        self.layout.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.layout.hidden_dim
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param(&self, name: &str) -> Option<&[f64]> {
        self.layout.block(name).map(|b| &self.params[b.range()])
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut [f64]> {
        let b = self.layout.block(name)?;
        Some(&mut self.params[b.range()])
    }

    pub fn input_mean(&self) -> &[f64] {
        &self.input_mean
    }

    pub fn input_scale(&self) -> &[f64] {
        &self.input_scale
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    pub fn h0(&self) -> &[f64] {
        &self.h0
    }

    fn check_compatible(&self, seq: &ObservationSequence) -> Result<()> {
        if seq.kind() != self.kind {
            return Err(RenalError::invalid(format!(
                "model was built for {} data, sequence is {}",
                self.kind,
                seq.kind()
            )));
        }
        if seq.feature_dim() != self.input_dim() {
            return Err(RenalError::invalid(format!(
                "model expects {} input features, sequence provides {}",
                self.input_dim(),
                seq.feature_dim()
            )));
        }
        Ok(())
    }

    fn standardize_into(&self, x: &[f64], out: &mut Vec<f64>) {
        out.extend(
            x.iter()
                .zip(&self.input_mean)
                .zip(&self.input_scale)
                .map(|((v, m), s)| (v - m) / s),
        );
    }

    pub(crate) fn prepare(&self, seq: &ObservationSequence) -> Result<Prepared> {
        self.check_compatible(seq)?;
        let f = seq.features();
        let mut x = Vec::with_capacity(f.data.len());
        for i in 0..f.len() {
            self.standardize_into(f.row(i), &mut x);
        }
        let dt = f.steps.iter().map(|s| s / self.time_scale).collect();
        Ok(Prepared {
            x,
            dt,
            width: f.width,
        })
    }

    /// One application of the cell. `x` is a raw feature vector (for event
    /// data: gap first, then the marks) and `dt` the raw time step; both are
    /// normalised with the model's reference statistics.
    pub fn forward_step(&self, x: &[f64], h: &[f64], dt: f64) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() || h.len() != self.hidden_dim() {
            return Err(RenalError::invalid(format!(
                "forward_step expects x of length {} and h of length {}, got {} and {}",
                self.input_dim(),
                self.hidden_dim(),
                x.len(),
                h.len()
            )));
        }
        if !x.iter().chain(h).all(|v| v.is_finite()) || !dt.is_finite() {
            return Err(RenalError::invalid("forward_step inputs must be finite"));
        }
        let mut xs = Vec::with_capacity(x.len());
        self.standardize_into(x, &mut xs);
        Ok(cell::step(&self.layout, &self.params, &xs, h, dt / self.time_scale).h)
    }

    /// Decoder output for hidden state `h`, in normalised input units.
    pub fn decode(&self, h: &[f64]) -> Result<Vec<f64>> {
        if h.len() != self.hidden_dim() {
            return Err(RenalError::invalid(format!(
                "decode expects h of length {}, got {}",
                self.hidden_dim(),
                h.len()
            )));
        }
        Ok(cell::decode(&self.layout, &self.params, h))
    }

    /// Hidden states after consuming each observation in turn, starting from `h0`.
    pub fn embed_sequence(&self, seq: &ObservationSequence) -> Result<Embeddings> {
        let data = self.prepare(seq)?;
        let p = self.hidden_dim();
        let mut out = Vec::with_capacity(data.len() * p);
        let mut h = self.h0.clone();
        for i in 0..data.len() {
            h = cell::step(&self.layout, &self.params, data.row(i), &h, data.dt[i]).h;
            out.extend_from_slice(&h);
        }
        Embeddings::new(p, out)
    }

    /// Mean over steps of the squared one-step prediction error, summed over
    /// feature dimensions, in normalised units.
    pub fn predictive_mse(&self, seq: &ObservationSequence) -> Result<f64> {
        let data = self.prepare(seq)?;
        let (loss, _) = train::window_loss(&self.layout, &self.params, &data, 0, data.len() - 1, &self.h0, None);
        Ok(loss)
    }
}
