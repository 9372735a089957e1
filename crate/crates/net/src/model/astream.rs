//! A-Stream: tokenization of Enc_1 features, pre-norm transformer
//! blocks, and the ambient-light head driven by the Ambient token.

use crate::autodiff::{Graph, Tensor};
use crate::config::NetConfig;
use crate::error::{dim_err, NetError};
use crate::model::Bindings;

/// Pools Enc_1 features into non-overlapping patches, projects them to
/// token width, adds positional embeddings, and prepends the Ambient
/// token. Token 0 is always the Ambient token; spatial tokens follow in
/// row-major grid order.
pub fn patchify(
    g: &mut Graph,
    binds: &Bindings,
    cfg: &NetConfig,
    e1: Tensor,
) -> Result<Tensor, NetError> {
    let shape = g.value(e1).shape().to_vec(); // (B, C1, H, W)
    let (b, c, h, w) = (shape[0], shape[1], shape[2], shape[3]);
    if h % cfg.patch_stride != 0 || w % cfg.patch_stride != 0 {
        return Err(dim_err(
            &format!("spatial size divisible by {}", cfg.patch_stride),
            &format!("{h}x{w}"),
        ));
    }
    let pooled = g.avgpool(e1, cfg.patch_stride); // (B, C1, gh, gw)
    let ps = g.value(pooled).shape().to_vec();
    let n = ps[2] * ps[3];
    let flat = g.reshape(pooled, &[b, c, n]);
    let seq = g.permute(flat, &[0, 2, 1]); // (B, N, C1)
    let proj = g.linear(
        seq,
        binds.get("astream.proj.weight"),
        binds.get("astream.proj.bias"),
    );
    let pos = g.broadcast_batch(binds.get("astream.pos"), b);
    let with_pos = g.add(proj, pos);
    let amb = g.broadcast_batch(binds.get("astream.ambient"), b); // (B, 1, D)
    Ok(g.concat(&[amb, with_pos], 1))
}

fn split_heads(g: &mut Graph, t: Tensor, b: usize, n: usize, heads: usize, dh: usize) -> Tensor {
    let r = g.reshape(t, &[b, n, heads, dh]);
    let p = g.permute(r, &[0, 2, 1, 3]); // (B, h, N, dh)
    g.reshape(p, &[b * heads, n, dh])
}

fn mhsa(g: &mut Graph, binds: &Bindings, cfg: &NetConfig, prefix: &str, x: Tensor) -> Tensor {
    let s = g.value(x).shape().to_vec();
    let (b, n, d) = (s[0], s[1], s[2]);
    let heads = cfg.heads;
    let dh = d / heads;

    let get = |name: &str| binds.get(&format!("{prefix}.attn.{name}"));
    let (wq, bq) = (get("wq.weight"), get("wq.bias"));
    let (wk, bk) = (get("wk.weight"), get("wk.bias"));
    let (wv, bv) = (get("wv.weight"), get("wv.bias"));
    let (wo, bo) = (get("wo.weight"), get("wo.bias"));

    let q = g.linear(x, wq, bq);
    let k = g.linear(x, wk, bk);
    let v = g.linear(x, wv, bv);
    let qh = split_heads(g, q, b, n, heads, dh);
    let kh = split_heads(g, k, b, n, heads, dh);
    let vh = split_heads(g, v, b, n, heads, dh);

    let kt = g.permute(kh, &[0, 2, 1]); // (B*h, dh, N)
    let scores = g.bmm(qh, kt);
    let scaled = g.mul_scalar(scores, 1.0 / (dh as f64).sqrt());
    let attn = g.softmax_last(scaled);
    let ctx = g.bmm(attn, vh); // (B*h, N, dh)

    let r = g.reshape(ctx, &[b, heads, n, dh]);
    let p = g.permute(r, &[0, 2, 1, 3]); // (B, N, h, dh)
    let merged = g.reshape(p, &[b, n, d]);
    g.linear(merged, wo, bo)
}

fn mlp(g: &mut Graph, binds: &Bindings, prefix: &str, x: Tensor) -> Tensor {
    let h = g.linear(
        x,
        binds.get(&format!("{prefix}.mlp.fc1.weight")),
        binds.get(&format!("{prefix}.mlp.fc1.bias")),
    );
    let a = g.gelu(h);
    g.linear(
        a,
        binds.get(&format!("{prefix}.mlp.fc2.weight")),
        binds.get(&format!("{prefix}.mlp.fc2.bias")),
    )
}

/// One pre-norm block: x + MHSA(LN(x)), then x + MLP(LN(x)).
pub fn transformer_block(
    g: &mut Graph,
    binds: &Bindings,
    cfg: &NetConfig,
    idx: usize,
    x: Tensor,
) -> Tensor {
    let p = format!("trans{idx}");
    let h1 = g.layer_norm(
        x,
        binds.get(&format!("{p}.ln1.gamma")),
        binds.get(&format!("{p}.ln1.beta")),
    );
    let attn = mhsa(g, binds, cfg, &p, h1);
    let x1 = g.add(x, attn);
    let h2 = g.layer_norm(
        x1,
        binds.get(&format!("{p}.ln2.gamma")),
        binds.get(&format!("{p}.ln2.beta")),
    );
    let m = mlp(g, binds, &p, h2);
    g.add(x1, m)
}

/// Linear + sigmoid on the Ambient token -> (B, 3) ambient light.
pub fn ambient_head(g: &mut Graph, binds: &Bindings, tokens: Tensor) -> Tensor {
    let amb = g.slice_axis(tokens, 1, 0, 1); // (B, 1, D)
    let s = g.value(amb).shape().to_vec();
    let flat = g.reshape(amb, &[s[0], s[2]]);
    let lin = g.linear(flat, binds.get("ahead.weight"), binds.get("ahead.bias"));
    g.sigmoid(lin)
}
