//! Red Channel Tuner: learns one scalar per image and scales the red
//! channel by 2w, so the untrained sigmoid midpoint is the identity.

use crate::autodiff::{Graph, Tensor};
use crate::model::Bindings;

/// Returns the tuned batch and the per-image weights `w` in (0, 1).
pub fn rct_forward(g: &mut Graph, binds: &Bindings, x: Tensor) -> (Tensor, Tensor) {
    let feat = g.conv2d(
        x,
        binds.get("rct.conv.weight"),
        binds.get("rct.conv.bias"),
        1,
    );
    let pooled = g.global_avg_pool(feat); // (B, F)
    let logit = g.linear(pooled, binds.get("rct.fc.weight"), binds.get("rct.fc.bias"));
    let b = g.value(logit).shape()[0];
    let flat = g.reshape(logit, &[b]);
    let w = g.sigmoid(flat);
    let scale = g.mul_scalar(w, 2.0);
    let tuned = g.scale_channel(x, scale, 0);
    (tuned, w)
}
