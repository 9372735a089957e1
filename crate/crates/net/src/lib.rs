//! Dual-stream degradation-parameter estimator.
//!
//! A CNN encoder-decoder (T-Stream) predicts per-channel transmission
//! maps while a small transformer (A-Stream) predicts the global ambient
//! light from pooled encoder tokens; zero-initialized residual exchange
//! modules couple the two at matching levels, and a red-channel tuner
//! rescales the most attenuated channel before either stream runs.
//! Everything runs on a self-contained f64 reverse-mode tape, which keeps
//! gradients exactly reproducible across runs and platforms.

pub mod autodiff;
mod checkpoint;
mod config;
mod error;
mod model;
mod store;

pub use checkpoint::{load as load_checkpoint, save as save_checkpoint};
pub use config::NetConfig;
pub use error::{NetError, Result};
pub use model::{
    ambient_head, bind_parameters, image_batch, infer_single, net_forward, patchify,
    rcm_exchange, rct_forward, tmap_batch, tmaps_from_batch, transformer_block, Bindings,
    ForwardPass, NetOutput,
};
pub use store::{parameter_specs, Mode, Param, ParamKind, ParamSpec, ParameterStore, BN_MOMENTUM};
