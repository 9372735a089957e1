//! T-Stream building blocks: conv-BN-ReLU pairs, the U-shaped decoder,
//! and the mode-dependent batch normalization dispatch.

use crate::autodiff::{Graph, Tensor};
use crate::model::Bindings;
use crate::store::{Mode, ParameterStore};

/// Batch norm that follows the store's mode flag: batch statistics (and a
/// running-stat update) in training, stored statistics in eval.
pub(crate) fn batch_norm(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    prefix: &str,
    x: Tensor,
) -> Tensor {
    let gamma = binds.get(&format!("{prefix}.gamma"));
    let beta = binds.get(&format!("{prefix}.beta"));
    match store.mode() {
        Mode::Train => {
            let s = g.value(x).shape().to_vec();
            let n = s[0] * s[2] * s[3];
            let (y, mean, var) = g.batch_norm_train(x, gamma, beta);
            store.update_bn_stats(prefix, &mean, &var, n);
            y
        }
        Mode::Eval => {
            let (rm, rv) = store.bn_stats(prefix);
            g.batch_norm_eval(x, gamma, beta, &rm, &rv)
        }
    }
}

/// Two 3x3 conv-BN-ReLU stages; the shared shape of every encoder and
/// decoder block.
pub(crate) fn double_conv(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    prefix: &str,
    x: Tensor,
) -> Tensor {
    let c1 = g.conv2d(
        x,
        binds.get(&format!("{prefix}.conv1.weight")),
        binds.get(&format!("{prefix}.conv1.bias")),
        1,
    );
    let b1 = batch_norm(g, binds, store, &format!("{prefix}.bn1"), c1);
    let r1 = g.relu(b1);
    let c2 = g.conv2d(
        r1,
        binds.get(&format!("{prefix}.conv2.weight")),
        binds.get(&format!("{prefix}.conv2.bias")),
        1,
    );
    let b2 = batch_norm(g, binds, store, &format!("{prefix}.bn2"), c2);
    g.relu(b2)
}

/// Decoder: four (upsample, concat skip, double conv) stages followed by
/// a 1x1 head and sigmoid, producing per-channel transmission maps.
pub(crate) fn decode(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    skips: &[Tensor; 5],
) -> Tensor {
    let mut d = skips[4];
    for j in 1..=4usize {
        let skip = skips[4 - j];
        let (sh, sw) = {
            let s = g.value(skip).shape();
            (s[2], s[3])
        };
        let up = g.bilinear_resize(d, sh, sw);
        let cat = g.concat(&[up, skip], 1);
        d = double_conv(g, binds, store, &format!("dec{j}"), cat);
    }
    let logits = g.conv2d(d, binds.get("thead.weight"), binds.get("thead.bias"), 0);
    g.sigmoid(logits)
}
