//! Gated recurrent cell with an optional exponential time-decay gate.
//!
//! ```text
//! ĥ  = h ⊙ exp(-softplus(a) · dt)          (time-gated cells only; else ĥ = h)
//! z  = σ(W_z x + U_z ĥ + b_z)
//! r  = σ(W_r x + U_r ĥ + b_r)
//! c  = tanh(W_c x + U_c (r ⊙ ĥ) + b_c)
//! h' = (1 - z) ⊙ ĥ + z ⊙ c
//! x̂  = W_out h' + b_out
//! ```

use super::layout::Layout;

pub(crate) fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn softplus(v: f64) -> f64 {
    if v > 30.0 {
        v
    } else {
        v.exp().ln_1p()
    }
}

/// `out += W v` for a row-major `rows × v.len()` block of `params` at `offset`.
#[inline]
fn mat_vec_acc(params: &[f64], offset: usize, v: &[f64], out: &mut [f64]) {
    let cols = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        let row = &params[offset + i * cols..offset + (i + 1) * cols];
        *o += row.iter().zip(v).map(|(w, x)| w * x).sum::<f64>();
    }
}

/// `out += Wᵀ g` for a row-major `g.len() × out.len()` block.
#[inline]
fn mat_t_vec_acc(params: &[f64], offset: usize, g: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (i, gi) in g.iter().enumerate() {
        if *gi == 0.0 {
            continue;
        }
        let row = &params[offset + i * cols..offset + (i + 1) * cols];
        for (o, w) in out.iter_mut().zip(row) {
            *o += w * gi;
        }
    }
}

/// `grad[block] += g vᵀ`.
#[inline]
fn outer_acc(grad: &mut [f64], offset: usize, g: &[f64], v: &[f64]) {
    let cols = v.len();
    for (i, gi) in g.iter().enumerate() {
        let row = &mut grad[offset + i * cols..offset + (i + 1) * cols];
        for (r, x) in row.iter_mut().zip(v) {
            *r += gi * x;
        }
    }
}

/// Intermediate values of one step, kept for the backward pass.
#[derive(Clone, Debug)]
pub(crate) struct StepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub dt: f64,
    pub decay: Vec<f64>,
    pub h_hat: Vec<f64>,
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub c: Vec<f64>,
    pub h: Vec<f64>,
}

pub(crate) fn step(layout: &Layout, params: &[f64], x: &[f64], h_prev: &[f64], dt: f64) -> StepCache {
    let p = layout.hidden_dim;
    let decay: Vec<f64> = match layout.decay {
        Some(o) => (0..p).map(|i| (-softplus(params[o + i]) * dt).exp()).collect(),
        None => vec![1.0; p],
    };
    let h_hat: Vec<f64> = h_prev.iter().zip(&decay).map(|(h, e)| h * e).collect();

    let mut z = params[layout.b_z..layout.b_z + p].to_vec();
    mat_vec_acc(params, layout.w_z, x, &mut z);
    mat_vec_acc(params, layout.u_z, &h_hat, &mut z);
    z.iter_mut().for_each(|v| *v = sigmoid(*v));

    let mut r = params[layout.b_r..layout.b_r + p].to_vec();
    mat_vec_acc(params, layout.w_r, x, &mut r);
    mat_vec_acc(params, layout.u_r, &h_hat, &mut r);
    r.iter_mut().for_each(|v| *v = sigmoid(*v));

    let rh: Vec<f64> = r.iter().zip(&h_hat).map(|(a, b)| a * b).collect();
    let mut c = params[layout.b_c..layout.b_c + p].to_vec();
    mat_vec_acc(params, layout.w_c, x, &mut c);
    mat_vec_acc(params, layout.u_c, &rh, &mut c);
    c.iter_mut().for_each(|v| *v = v.tanh());

    let h = (0..p).map(|i| (1.0 - z[i]) * h_hat[i] + z[i] * c[i]).collect();
    StepCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        dt,
        decay,
        h_hat,
        z,
        r,
        c,
        h,
    }
}

pub(crate) fn decode(layout: &Layout, params: &[f64], h: &[f64]) -> Vec<f64> {
    let d = layout.input_dim;
    let mut out = params[layout.b_out..layout.b_out + d].to_vec();
    mat_vec_acc(params, layout.w_out, h, &mut out);
    out
}

/// Decoder backward: accumulates decoder gradients for output error `dy`
/// and returns `∂L/∂h`.
pub(crate) fn decode_backward(layout: &Layout, params: &[f64], h: &[f64], dy: &[f64], grad: &mut [f64]) -> Vec<f64> {
    outer_acc(grad, layout.w_out, dy, h);
    for (g, d) in grad[layout.b_out..layout.b_out + dy.len()].iter_mut().zip(dy) {
        *g += d;
    }
    let mut dh = vec![0.0; layout.hidden_dim];
    mat_t_vec_acc(params, layout.w_out, dy, &mut dh);
    dh
}

/// Cell backward: accumulates parameter gradients for `∂L/∂h'` and returns
/// `∂L/∂h_prev`.
pub(crate) fn step_backward(layout: &Layout, params: &[f64], cache: &StepCache, dh: &[f64], grad: &mut [f64]) -> Vec<f64> {
    let p = layout.hidden_dim;
    let StepCache { x, h_prev, dt, decay, h_hat, z, r, c, .. } = cache;

    let mut dh_hat: Vec<f64> = (0..p).map(|i| dh[i] * (1.0 - z[i])).collect();
    let dz_pre: Vec<f64> = (0..p).map(|i| dh[i] * (c[i] - h_hat[i]) * z[i] * (1.0 - z[i])).collect();
    let dc_pre: Vec<f64> = (0..p).map(|i| dh[i] * z[i] * (1.0 - c[i] * c[i])).collect();

    // Candidate.
    let rh: Vec<f64> = r.iter().zip(h_hat).map(|(a, b)| a * b).collect();
    outer_acc(grad, layout.w_c, &dc_pre, x);
    outer_acc(grad, layout.u_c, &dc_pre, &rh);
    for (g, d) in grad[layout.b_c..layout.b_c + p].iter_mut().zip(&dc_pre) {
        *g += d;
    }
    let mut drh = vec![0.0; p];
    mat_t_vec_acc(params, layout.u_c, &dc_pre, &mut drh);
    let dr_pre: Vec<f64> = (0..p).map(|i| drh[i] * h_hat[i] * r[i] * (1.0 - r[i])).collect();
    for i in 0..p {
        dh_hat[i] += drh[i] * r[i];
    }

    // Update and reset gates.
    outer_acc(grad, layout.w_z, &dz_pre, x);
    outer_acc(grad, layout.u_z, &dz_pre, h_hat);
    for (g, d) in grad[layout.b_z..layout.b_z + p].iter_mut().zip(&dz_pre) {
        *g += d;
    }
    mat_t_vec_acc(params, layout.u_z, &dz_pre, &mut dh_hat);

    outer_acc(grad, layout.w_r, &dr_pre, x);
    outer_acc(grad, layout.u_r, &dr_pre, h_hat);
    for (g, d) in grad[layout.b_r..layout.b_r + p].iter_mut().zip(&dr_pre) {
        *g += d;
    }
    mat_t_vec_acc(params, layout.u_r, &dr_pre, &mut dh_hat);

    // Decay gate: ĥ = h ⊙ exp(-softplus(a) dt).
    match layout.decay {
        Some(o) => {
            for i in 0..p {
                let ds = -dh_hat[i] * h_hat[i] * dt;
                grad[o + i] += ds * sigmoid(params[o + i]);
            }
            (0..p).map(|i| dh_hat[i] * decay[i]).collect()
        }
        None => {
            debug_assert!(h_prev.len() == p);
            dh_hat
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_and_softplus_are_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(softplus(100.0), 100.0);
    }
}
