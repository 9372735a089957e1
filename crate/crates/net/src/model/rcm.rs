//! Residual Communication Module: a zero-initialized 1x1 mixing
//! convolution exchanges information between an encoder level and the
//! spatial tokens, with residual adds on both sides.

use crate::autodiff::{Graph, Tensor};
use crate::config::NetConfig;
use crate::error::{dim_err, NetError};
use crate::model::Bindings;

/// Exchanges features at encoder `level`. The Ambient token passes
/// through untouched; both outputs keep their input shapes.
pub fn rcm_exchange(
    g: &mut Graph,
    binds: &Bindings,
    cfg: &NetConfig,
    level: usize,
    enc: Tensor,
    tokens: Tensor,
) -> Result<(Tensor, Tensor), NetError> {
    let ts = g.value(tokens).shape().to_vec(); // (B, N+1, D)
    let es = g.value(enc).shape().to_vec(); // (B, Ck, eh, ew)
    let (b, d) = (ts[0], ts[2]);
    let grid = cfg.grid();
    let n = grid * grid;
    if ts[1] != n + 1 {
        return Err(dim_err(format!("{} tokens", n + 1), format!("{}", ts[1])));
    }
    let (ck, eh, ew) = (es[1], es[2], es[3]);
    if eh % grid != 0 || ew % grid != 0 {
        return Err(dim_err(
            format!("encoder grid divisible by {grid}"),
            format!("{eh}x{ew}"),
        ));
    }

    let ambient = g.slice_axis(tokens, 1, 0, 1);
    let spatial = g.slice_axis(tokens, 1, 1, n + 1); // (B, N, D)
    let sp_t = g.permute(spatial, &[0, 2, 1]); // (B, D, N)
    let folded = g.reshape(sp_t, &[b, d, grid, grid]);

    let factor = eh / grid;
    let pooled = if factor == 1 { enc } else { g.avgpool(enc, factor) };
    let cat = g.concat(&[pooled, folded], 1); // (B, Ck+D, grid, grid)
    let mixed = g.conv2d(
        cat,
        binds.get(&format!("rcm{level}.conv.weight")),
        binds.get(&format!("rcm{level}.conv.bias")),
        0,
    );

    let enc_part = g.slice_axis(mixed, 1, 0, ck);
    let tok_part = g.slice_axis(mixed, 1, ck, ck + d);

    let enc_up = if factor == 1 {
        enc_part
    } else {
        g.bilinear_resize(enc_part, eh, ew)
    };
    let enc_new = g.add(enc, enc_up);

    let tp_flat = g.reshape(tok_part, &[b, d, n]);
    let tp_seq = g.permute(tp_flat, &[0, 2, 1]); // (B, N, D)
    let sp_new = g.add(spatial, tp_seq);
    let tokens_new = g.concat(&[ambient, sp_new], 1);

    Ok((enc_new, tokens_new))
}
