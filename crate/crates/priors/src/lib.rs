//! Classical baselines for underwater enhancement: dark-channel-style
//! parameter estimators (DCP and its underwater variant) that plug into
//! the formation model, plus three direct enhancers (histogram
//! equalization, multi-scale Retinex, gray-world white balance).

pub mod dark;
pub mod dcp;
pub mod error;
pub mod grayworld;
mod guided;
pub mod he;
pub mod retinex;

pub use dark::{dark_channel, dark_channel_gb};
pub use dcp::{dcp_estimate, udcp_estimate, DcpParams, PriorEstimate};
pub use error::{PriorError, Result};
pub use grayworld::{gray_world, GrayWorldResult, MAX_GAIN};
pub use guided::guided_filter;
pub use he::hist_equalize;
pub use retinex::retinex_msr;
