use uie_core::Image;

use crate::error::{MetricError, Result};

/// Peak signal-to-noise ratio in decibels, peak value 1.0.
///
/// Identical images would divide by zero, so the result is capped at
/// 100 dB, which also serves as the "perfect match" sentinel in reports.
pub const PSNR_CAP_DB: f64 = 100.0;

pub fn psnr(a: &Image, b: &Image) -> Result<f64> {
    if a.data().dim() != b.data().dim() {
        return Err(MetricError::DimensionMismatch(
            a.data().shape().to_vec(),
            b.data().shape().to_vec(),
        ));
    }
    let n = a.data().len() as f64;
    let mse: f64 = a
        .data()
        .iter()
        .zip(b.data().iter())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum::<f64>()
        / n;
    if mse == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok((10.0 * (1.0 / mse).log10()).min(PSNR_CAP_DB))
}
