//! Core of the underwater image enhancement toolkit: the image formation
//! model `I = J t + (1 - t) A`, its inversion, depth-based transmission
//! synthesis, and the controlled re-degradation used by the training side.

pub mod error;
pub mod filter;
pub mod ifm;
pub mod types;

pub use error::{Error, Result};
pub use ifm::{degrade, enhance, synth_degrade, transmission_from_depth, DEFAULT_T_FLOOR};
pub use types::{AmbientLight, AttenuationCoefficients, DepthMap, Image, TransmissionMaps};
