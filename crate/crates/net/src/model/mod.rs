//! The assembled network: parameter binding, the interleaved dual-stream
//! forward pass, and Image-typed convenience wrappers.

mod astream;
mod rcm;
mod rct;
mod tstream;

pub use astream::{ambient_head, patchify, transformer_block};
pub use rcm::rcm_exchange;
pub use rct::rct_forward;

use indexmap::IndexMap;
use ndarray::{Array3, ArrayD, IxDyn};
use uie_core::{AmbientLight, Image, TransmissionMaps};

use crate::autodiff::{Graph, Tensor};
use crate::config::NetConfig;
use crate::error::{dim_err, NetError};
use crate::store::{Mode, ParamKind, ParameterStore};

/// Graph leaves for every trainable parameter of one forward (or several
/// forwards sharing gradients, as in the paired unsupervised pass).
pub struct Bindings {
    map: IndexMap<String, Tensor>,
}

impl Bindings {
    pub fn get(&self, name: &str) -> Tensor {
        *self
            .map
            .get(name)
            .unwrap_or_else(|| panic!("unbound parameter {name}"))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Tensor)> {
        self.map.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Creates one leaf per trainable parameter. Buffers (BN running stats)
/// stay outside the graph; eval-mode batch norm reads them directly.
pub fn bind_parameters(g: &mut Graph, store: &ParameterStore) -> Bindings {
    let mut map = IndexMap::new();
    for (name, p) in store.iter() {
        if p.kind == ParamKind::Trainable {
            map.insert(name.to_string(), g.leaf(p.value.clone(), true));
        }
    }
    Bindings { map }
}

/// Raw graph outputs of one forward pass.
pub struct ForwardPass {
    /// (B, 3, H, W), sigmoid-bounded.
    pub t_hat: Tensor,
    /// (B, 3), sigmoid-bounded.
    pub a_hat: Tensor,
    /// (B,) red-channel tuning weights in (0, 1).
    pub rct_weight: Tensor,
    /// Post-exchange encoder features per level, for introspection.
    pub enc_features: [Tensor; 5],
}

/// Full forward pass over an NCHW batch tensor already in the graph.
///
/// In train mode this updates the store's batch-norm running statistics
/// (its only mutation) and requires batch >= 2; eval mode leaves the
/// store untouched.
pub fn net_forward(
    g: &mut Graph,
    binds: &Bindings,
    store: &mut ParameterStore,
    cfg: &NetConfig,
    input: Tensor,
) -> Result<ForwardPass, NetError> {
    let shape = g.value(input).shape().to_vec();
    if shape.len() != 4 || shape[1] != 3 {
        return Err(dim_err("(B, 3, H, W) batch", format!("{shape:?}")));
    }
    let (b, h, w) = (shape[0], shape[2], shape[3]);
    if h != cfg.input_size || w != cfg.input_size {
        return Err(dim_err(
            format!("{0}x{0} input", cfg.input_size),
            format!("{h}x{w}"),
        ));
    }
    if store.mode() == Mode::Train && b < 2 {
        return Err(dim_err("batch >= 2 in train mode", format!("batch {b}")));
    }

    let (tuned, rct_weight) = rct::rct_forward(g, binds, input);
    let e1 = tstream::double_conv(g, binds, store, "enc1", tuned);
    let mut tokens = astream::patchify(g, binds, cfg, e1)?;

    let mut skips = [e1; 5];
    let mut feat = e1;
    for k in 2..=5usize {
        let pooled = g.maxpool2x2(feat);
        let mut ek = tstream::double_conv(g, binds, store, &format!("enc{k}"), pooled);
        let block = k - 1;
        if block <= cfg.transformer_blocks {
            tokens = astream::transformer_block(g, binds, cfg, block, tokens);
        }
        if cfg.rcm_levels.contains(&k) {
            let (e_new, t_new) = rcm::rcm_exchange(g, binds, cfg, k, ek, tokens)?;
            ek = e_new;
            tokens = t_new;
        }
        skips[k - 1] = ek;
        feat = ek;
    }
    for block in 5..=cfg.transformer_blocks {
        tokens = astream::transformer_block(g, binds, cfg, block, tokens);
    }

    let t_hat = tstream::decode(g, binds, store, &skips);
    let a_hat = astream::ambient_head(g, binds, tokens);
    Ok(ForwardPass { t_hat, a_hat, rct_weight, enc_features: skips })
}

/// Estimated degradation parameters for a single image.
pub struct NetOutput {
    pub t_hat: TransmissionMaps,
    pub a_hat: AmbientLight,
    pub rct_weight: f64,
}

/// Stacks same-sized images into an NCHW batch tensor value.
pub fn image_batch(images: &[Image]) -> Result<ArrayD<f64>, NetError> {
    let first = images.first().ok_or_else(|| dim_err("batch >= 1", "0"))?;
    let (h, w) = (first.height(), first.width());
    let mut out = ArrayD::zeros(IxDyn(&[images.len(), 3, h, w]));
    for (bi, img) in images.iter().enumerate() {
        if img.height() != h || img.width() != w {
            return Err(dim_err(
                format!("{h}x{w}"),
                format!("{}x{}", img.height(), img.width()),
            ));
        }
        let d = img.data();
        for i in 0..h {
            for j in 0..w {
                for c in 0..3 {
                    out[IxDyn(&[bi, c, i, j])] = d[(i, j, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Stacks transmission maps into an NCHW batch tensor value.
pub fn tmap_batch(maps: &[TransmissionMaps]) -> Result<ArrayD<f64>, NetError> {
    let first = maps.first().ok_or_else(|| dim_err("batch >= 1", "0"))?;
    let (h, w) = (first.height(), first.width());
    let mut out = ArrayD::zeros(IxDyn(&[maps.len(), 3, h, w]));
    for (bi, m) in maps.iter().enumerate() {
        if m.height() != h || m.width() != w {
            return Err(dim_err(
                format!("{h}x{w}"),
                format!("{}x{}", m.height(), m.width()),
            ));
        }
        let d = m.data();
        for i in 0..h {
            for j in 0..w {
                for c in 0..3 {
                    out[IxDyn(&[bi, c, i, j])] = d[(i, j, c)];
                }
            }
        }
    }
    Ok(out)
}

/// Extracts one image's transmission maps from a (B, 3, H, W) value.
///
/// Sigmoid saturates to exactly 0.0 in double precision for logits below
/// about -745, which the strictly-positive TransmissionMaps type rejects,
/// so values are floored at a tiny epsilon first.
pub fn tmaps_from_batch(batch: &ArrayD<f64>, index: usize) -> Result<TransmissionMaps, NetError> {
    let s = batch.shape();
    let (h, w) = (s[2], s[3]);
    let data = Array3::from_shape_fn((h, w, 3), |(i, j, c)| {
        batch[IxDyn(&[index, c, i, j])].clamp(1e-12, 1.0)
    });
    Ok(TransmissionMaps::new(data)?)
}

/// Eval-mode inference on one image sized to the configured resolution.
pub fn infer_single(
    store: &mut ParameterStore,
    cfg: &NetConfig,
    img: &Image,
) -> Result<NetOutput, NetError> {
    let prev = store.mode();
    store.set_mode(Mode::Eval);
    let result = (|| {
        let mut g = Graph::new();
        let binds = bind_parameters(&mut g, store);
        let batch = image_batch(std::slice::from_ref(img))?;
        let input = g.leaf(batch, false);
        let out = net_forward(&mut g, &binds, store, cfg, input)?;
        let t_hat = tmaps_from_batch(g.value(out.t_hat), 0)?;
        let av = g.value(out.a_hat);
        let a_hat = AmbientLight::new([
            av[IxDyn(&[0, 0])],
            av[IxDyn(&[0, 1])],
            av[IxDyn(&[0, 2])],
        ])?;
        let rct_weight = g.value(out.rct_weight)[IxDyn(&[0])];
        Ok(NetOutput { t_hat, a_hat, rct_weight })
    })();
    store.set_mode(prev);
    result
}
