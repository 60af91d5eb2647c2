use super::train::window_loss;
use super::EmbeddingModel;
use crate::error::Result;
use crate::sequence::ObservationSequence;

/// Full-sequence one-step loss and its exact parameter gradient (no
/// truncation).
pub fn analytic_gradient(model: &EmbeddingModel, seq: &ObservationSequence) -> Result<(f64, Vec<f64>)> {
    let data = model.prepare(seq)?;
    let mut grad = vec![0.0; model.params.len()];
    let (loss, _) = window_loss(&model.layout, &model.params, &data, 0, data.len() - 1, &model.h0, Some(&mut grad));
    Ok((loss, grad))
}

/// Largest relative gap between the analytic gradient and central finite
/// differences with step `epsilon`, over every parameter.
///
/// The relative gap is `|a - f| / max(|a|, |f|, 1e-6)`.
pub fn gradient_check(model: &EmbeddingModel, seq: &ObservationSequence, epsilon: f64) -> Result<f64> {
    let data = model.prepare(seq)?;
    let (_, analytic) = analytic_gradient(model, seq)?;
    let steps = data.len() - 1;
    let mut params = model.params.clone();
    let mut worst = 0.0f64;
    for i in 0..params.len() {
        let w = params[i];
        params[i] = w + epsilon;
        let (up, _) = window_loss(&model.layout, &params, &data, 0, steps, &model.h0, None);
        params[i] = w - epsilon;
        let (down, _) = window_loss(&model.layout, &params, &data, 0, steps, &model.h0, None);
        params[i] = w;
        let fd = (up - down) / (2.0 * epsilon);
        let a = analytic[i];
        let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-6);
        worst = worst.max(rel);
    }
    Ok(worst)
}
