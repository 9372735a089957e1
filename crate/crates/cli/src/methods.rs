//! Enhancement method dispatch. The dark-channel estimators and the
//! network produce `(t, A)` and go through the formation-model inversion;
//! histogram equalization, Retinex, and gray-world enhance directly and
//! carry no physical parameters.

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use ndarray::Array3;
use uie_core::filter::bilinear_resize_3d;
use uie_core::{enhance, AmbientLight, Image, TransmissionMaps, DEFAULT_T_FLOOR};
use uie_net::{infer_single, NetConfig, ParameterStore};
use uie_priors::{dcp_estimate, gray_world, hist_equalize, retinex_msr, udcp_estimate, DcpParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Dcp,
    Udcp,
    He,
    Retinex,
    Grayworld,
    Pauienet,
}

impl Method {
    /// Whether the method yields `(t, A)` estimates (and therefore
    /// supports `estimate` and transmission/depth correlation).
    pub fn estimates_parameters(self) -> bool {
        matches!(self, Method::Dcp | Method::Udcp | Method::Pauienet)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Dcp => "dcp",
            Method::Udcp => "udcp",
            Method::He => "he",
            Method::Retinex => "retinex",
            Method::Grayworld => "grayworld",
            Method::Pauienet => "pauienet",
        }
    }
}

pub struct MethodCtx {
    pub dcp: DcpParams,
    pub udcp: DcpParams,
    pub he_bins: usize,
    pub retinex_scales: Vec<f64>,
    /// Loaded checkpoint; required for the network method only.
    pub net: Option<(ParameterStore, NetConfig)>,
}

impl Default for MethodCtx {
    fn default() -> Self {
        MethodCtx {
            dcp: DcpParams::default(),
            udcp: DcpParams::default(),
            he_bins: 256,
            retinex_scales: crate::config::DEFAULT_RETINEX_SCALES.to_vec(),
            net: None,
        }
    }
}

pub struct EnhanceOutcome {
    pub enhanced: Image,
    pub t: Option<TransmissionMaps>,
    pub a: Option<AmbientLight>,
}

/// Runs the network at its native resolution and resamples the
/// transmission maps back, so arbitrary image sizes are enhanced at full
/// resolution with the globally estimated ambient light.
fn net_estimate(
    store: &mut ParameterStore,
    cfg: &NetConfig,
    img: &Image,
) -> Result<(TransmissionMaps, AmbientLight)> {
    let s = cfg.input_size;
    let resized = if img.height() == s && img.width() == s {
        img.clone()
    } else {
        Image::new(bilinear_resize_3d(img.data(), s, s)).context("resizing network input")?
    };
    let out = infer_single(store, cfg, &resized)?;
    let t = if img.height() == s && img.width() == s {
        out.t_hat
    } else {
        let up: Array3<f64> = bilinear_resize_3d(out.t_hat.data(), img.height(), img.width());
        TransmissionMaps::new(up).context("resampling transmission maps")?
    };
    Ok((t, out.a_hat))
}

/// `(t, A)` for the parameter-estimating methods; errors on the direct
/// enhancers.
pub fn estimate_one(
    ctx: &mut MethodCtx,
    method: Method,
    img: &Image,
) -> Result<(TransmissionMaps, AmbientLight)> {
    match method {
        Method::Dcp => {
            let est = dcp_estimate(img, &ctx.dcp)?;
            Ok((est.t, est.a))
        }
        Method::Udcp => {
            let est = udcp_estimate(img, &ctx.udcp)?;
            Ok((est.t, est.a))
        }
        Method::Pauienet => {
            let (store, cfg) = ctx
                .net
                .as_mut()
                .ok_or_else(|| anyhow!("method pauienet requires --checkpoint"))?;
            net_estimate(store, cfg, img)
        }
        other => Err(anyhow!(
            "method {} does not estimate (t, A); use dcp, udcp, or pauienet",
            other.name()
        )),
    }
}

pub fn enhance_one(ctx: &mut MethodCtx, method: Method, img: &Image) -> Result<EnhanceOutcome> {
    match method {
        Method::Dcp | Method::Udcp | Method::Pauienet => {
            let floor = match method {
                Method::Dcp => ctx.dcp.t_floor,
                Method::Udcp => ctx.udcp.t_floor,
                _ => DEFAULT_T_FLOOR,
            };
            let (t, a) = estimate_one(ctx, method, img)?;
            let enhanced = enhance(img, &t, &a, floor)?;
            Ok(EnhanceOutcome {
                enhanced,
                t: Some(t),
                a: Some(a),
            })
        }
        Method::He => Ok(EnhanceOutcome {
            enhanced: hist_equalize(img, ctx.he_bins)?,
            t: None,
            a: None,
        }),
        Method::Retinex => Ok(EnhanceOutcome {
            enhanced: retinex_msr(img, &ctx.retinex_scales)?,
            t: None,
            a: None,
        }),
        Method::Grayworld => Ok(EnhanceOutcome {
            enhanced: gray_world(img).image,
            t: None,
            a: None,
        }),
    }
}
