//! Image quality metrics for the enhancement toolkit: full-reference
//! (PSNR, SSIM), no-reference underwater scores (UIQM, UCIQE), and two
//! physics-side diagnostics — transmission/depth correlation and ambient
//! light angular error.
//!
//! All metrics take the crate-wide `(H, W, 3)` f64 image types and are
//! deterministic; nothing here allocates threads or global state.

pub mod angular;
pub mod color;
pub mod error;
pub mod pcc;
pub mod psnr;
pub mod report;
pub mod ssim;
pub mod uciqe;
pub mod uiqm;

pub use angular::{ambient_angular_error_deg, angular_error_deg};
pub use error::{MetricError, Result};
pub use pcc::{pcc_transmission, pearson, Channel};
pub use psnr::{psnr, PSNR_CAP_DB};
pub use report::{mean_report, MetricReport, CSV_HEADER};
pub use ssim::ssim;
pub use uciqe::uciqe;
pub use uiqm::{uiqm, uiqm_breakdown, UiqmBreakdown};
