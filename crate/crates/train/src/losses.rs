//! Graph builders for the supervised and unsupervised objectives.
//!
//! Every `||.||^2` here is the *mean* of squared errors, so the default
//! weights behave the same at any resolution. Enhancement inside the
//! forward loss uses the floored inversion without clamping the output,
//! keeping the whole objective differentiable.

use ndarray::{Array2, ArrayD, IxDyn};
use uie_core::filter::gaussian_blur_2d;
use uie_core::DEFAULT_T_FLOOR;

use uie_net::autodiff::{Graph, Tensor};
use uie_net::{net_forward, Bindings, NetConfig, ParameterStore};

use crate::config::LossWeights;
use crate::data::BatchSample;
use crate::error::{cfg_err, dim_err, Result};

/// Kernel cutoff for the ambient-supervision blur, in sigmas.
pub const BLUR_TRUNCATE: f64 = 4.0;

/// Reads a 0-d scalar result back out of the graph.
pub fn scalar(g: &Graph, t: Tensor) -> f64 {
    let v = g.value(t);
    debug_assert_eq!(v.ndim(), 0, "expected a scalar tensor");
    *v.iter().next().expect("scalar tensor")
}

/// Mean squared error over every element.
pub fn mse(g: &mut Graph, a: Tensor, b: Tensor) -> Tensor {
    let d = g.sub(a, b);
    let sq = g.mul(d, d);
    g.mean_all(sq)
}

/// Inverts the formation model on the tape: `(I - (1 - t') A) / t'` with
/// `t' = max(t, t_floor)` and no output clamp.
pub fn enhance_on_graph(
    g: &mut Graph,
    input: Tensor,
    t_hat: Tensor,
    a_hat: Tensor,
    t_floor: f64,
) -> Tensor {
    let (h, w) = {
        let s = g.value(input).shape();
        (s[2], s[3])
    };
    let a_sp = g.broadcast_spatial(a_hat, h, w);
    let tp = g.clamp_min(t_hat, t_floor);
    let one_minus_t = g.scalar_affine(tp, -1.0, 1.0);
    let background = g.mul(one_minus_t, a_sp);
    let direct = g.sub(input, background);
    g.div(direct, tp)
}

/// Applies the formation model on the tape: `J t + (1 - t) A`.
pub fn degrade_on_graph(g: &mut Graph, clean: Tensor, t_hat: Tensor, a_hat: Tensor) -> Tensor {
    let (h, w) = {
        let s = g.value(clean).shape();
        (s[2], s[3])
    };
    let a_sp = g.broadcast_spatial(a_hat, h, w);
    let attenuated = g.mul(clean, t_hat);
    let one_minus_t = g.scalar_affine(t_hat, -1.0, 1.0);
    let background = g.mul(one_minus_t, a_sp);
    g.add(attenuated, background)
}

/// Sum over channels of the squared deviation of each channel mean from 0.5.
pub fn gray_world_loss(g: &mut Graph, j_hat: Tensor) -> Tensor {
    let means = g.channel_mean(j_hat);
    let centered = g.add_scalar(means, -0.5);
    let sq = g.mul(centered, centered);
    g.sum_all(sq)
}

/// `L_fwd + lambda1 L_bwd + lambda2 L_A-sup`.
pub fn combine_sup(
    g: &mut Graph,
    w: &LossWeights,
    l_fwd: Tensor,
    l_bwd: Tensor,
    l_a_sup: Tensor,
) -> Tensor {
    let bwd = g.mul_scalar(l_bwd, w.lambda1);
    let a_sup = g.mul_scalar(l_a_sup, w.lambda2);
    let partial = g.add(l_fwd, bwd);
    g.add(partial, a_sup)
}

/// `L_T + L_A-unsup + lambda3 L_gw`.
pub fn combine_unsup(
    g: &mut Graph,
    w: &LossWeights,
    l_t: Tensor,
    l_a_unsup: Tensor,
    l_gw: Tensor,
) -> Tensor {
    let gw = g.mul_scalar(l_gw, w.lambda3);
    let partial = g.add(l_t, l_a_unsup);
    g.add(partial, gw)
}

/// `L_sup + lambda_unsup L_unsup`.
pub fn combine_semi(g: &mut Graph, w: &LossWeights, l_sup: Tensor, l_unsup: Tensor) -> Tensor {
    let unsup = g.mul_scalar(l_unsup, w.lambda_unsup);
    g.add(l_sup, unsup)
}

/// Gaussian-blurs every plane of a `(B, C, H, W)` batch with replicated
/// edges; the target the ambient estimate is supervised against.
pub fn blur_target(batch: &ArrayD<f64>, sigma: f64) -> ArrayD<f64> {
    let s = batch.shape().to_vec();
    let (b, c, h, w) = (s[0], s[1], s[2], s[3]);
    let mut out = ArrayD::zeros(IxDyn(&s));
    for bi in 0..b {
        for ci in 0..c {
            let plane = Array2::from_shape_fn((h, w), |(i, j)| batch[[bi, ci, i, j]]);
            let blurred = gaussian_blur_2d(&plane, sigma, BLUR_TRUNCATE);
            for i in 0..h {
                for j in 0..w {
                    out[[bi, ci, i, j]] = blurred[(i, j)];
                }
            }
        }
    }
    out
}

/// The three supervised terms plus their weighted combination.
pub struct SupParts {
    pub l_fwd: Tensor,
    pub l_bwd: Tensor,
    pub l_a_sup: Tensor,
    pub total: Tensor,
}

/// Builds the supervised objective for one labeled batch: a forward pass,
/// the forward-enhancement loss against the reference, the backward
/// re-degradation loss against the input, and ambient supervision against
/// the heavily blurred input (`sigma = input_size / 8`).
pub fn supervised_losses(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    cfg: &NetConfig,
    weights: &LossWeights,
    sample: &BatchSample,
) -> Result<SupParts> {
    let reference = sample
        .reference()
        .ok_or_else(|| cfg_err("supervised loss needs a labeled batch"))?;
    let input = g.constant(sample.degraded().clone());
    let pass = net_forward(g, binds, store, cfg, input)?;

    let j_ref = g.constant(reference.clone());
    let j_hat = enhance_on_graph(g, input, pass.t_hat, pass.a_hat, DEFAULT_T_FLOOR);
    let l_fwd = mse(g, j_hat, j_ref);

    let i_hat = degrade_on_graph(g, j_ref, pass.t_hat, pass.a_hat);
    let l_bwd = mse(g, i_hat, input);

    let sigma = cfg.input_size as f64 / 8.0;
    let blurred = g.constant(blur_target(sample.degraded(), sigma));
    let a_sp = g.broadcast_spatial(pass.a_hat, cfg.input_size, cfg.input_size);
    let l_a_sup = mse(g, a_sp, blurred);

    let total = combine_sup(g, weights, l_fwd, l_bwd, l_a_sup);
    Ok(SupParts { l_fwd, l_bwd, l_a_sup, total })
}

/// Deepens a degraded batch: `I2 = alpha I1 + (1 - alpha) A1` per channel,
/// clamped to `[0, 1]`. `i1` is `(B, 3, H, W)`, `a1` is `(B, 3)`.
pub fn unsup_pair(i1: &ArrayD<f64>, a1: &ArrayD<f64>, alpha: f64) -> Result<ArrayD<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(cfg_err(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let s = i1.shape().to_vec();
    if s.len() != 4 || s[1] != 3 {
        return Err(dim_err("(B, 3, H, W)", format!("{s:?}")));
    }
    if a1.shape() != [s[0], 3] {
        return Err(dim_err(format!("({}, 3)", s[0]), format!("{:?}", a1.shape())));
    }
    let mut out = ArrayD::zeros(IxDyn(&s));
    for bi in 0..s[0] {
        for ci in 0..3 {
            let av = (1.0 - alpha) * a1[[bi, ci]];
            for i in 0..s[2] {
                for j in 0..s[3] {
                    out[[bi, ci, i, j]] = (alpha * i1[[bi, ci, i, j]] + av).clamp(0.0, 1.0);
                }
            }
        }
    }
    Ok(out)
}

/// The three unsupervised terms plus their weighted combination.
pub struct UnsupParts {
    pub l_t: Tensor,
    pub l_a_unsup: Tensor,
    pub l_gw: Tensor,
    pub total: Tensor,
}

fn unsup_impl(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    cfg: &NetConfig,
    weights: &LossWeights,
    i1: &ArrayD<f64>,
    alpha: f64,
    fixed_i2: Option<&ArrayD<f64>>,
) -> Result<(UnsupParts, ArrayD<f64>)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(cfg_err(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let input1 = g.constant(i1.clone());
    let pass1 = net_forward(g, binds, store, cfg, input1)?;

    // The deeper image is assembled from the ambient *value*, off the
    // tape: the construction is data, so no gradient reaches a1_hat
    // through it. Consistency losses below still reach both passes.
    let i2 = match fixed_i2 {
        Some(v) => v.clone(),
        None => unsup_pair(i1, g.value(pass1.a_hat), alpha)?,
    };
    let input2 = g.constant(i2.clone());
    let pass2 = net_forward(g, binds, store, cfg, input2)?;

    let t1_scaled = g.mul_scalar(pass1.t_hat, alpha);
    let l_t = mse(g, pass2.t_hat, t1_scaled);
    let l_a_unsup = mse(g, pass2.a_hat, pass1.a_hat);

    let j1_hat = enhance_on_graph(g, input1, pass1.t_hat, pass1.a_hat, DEFAULT_T_FLOOR);
    let l_gw = gray_world_loss(g, j1_hat);

    let total = combine_unsup(g, weights, l_t, l_a_unsup, l_gw);
    Ok((UnsupParts { l_t, l_a_unsup, l_gw, total }, i2))
}

/// Builds the unsupervised objective for one unlabeled batch: two forward
/// passes (on `i1` and on its re-degraded pair), transmission and ambient
/// consistency between them, and the gray-world term on the enhancement of
/// `i1`. Returns the constructed `I2` alongside the losses.
pub fn unsupervised_losses(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    cfg: &NetConfig,
    weights: &LossWeights,
    i1: &ArrayD<f64>,
    alpha: f64,
) -> Result<(UnsupParts, ArrayD<f64>)> {
    unsup_impl(g, binds, store, cfg, weights, i1, alpha, None)
}

/// Same objective with a caller-supplied `I2`. Because `I2` is data to the
/// tape either way, evaluating at a frozen `I2` is how finite differences
/// see exactly the gradient the analytic pass computes.
pub fn unsupervised_losses_fixed(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    cfg: &NetConfig,
    weights: &LossWeights,
    i1: &ArrayD<f64>,
    i2: &ArrayD<f64>,
    alpha: f64,
) -> Result<UnsupParts> {
    unsup_impl(g, binds, store, cfg, weights, i1, alpha, Some(i2)).map(|(parts, _)| parts)
}
