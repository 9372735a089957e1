use ndarray::Array3;
use uie_core::Image;

use crate::error::{param, Result};

/// Global per-channel histogram equalization: each value maps to its
/// channel's cumulative distribution, v -> CDF(v). A constant channel
/// therefore maps to 1.0 (its single level holds all the mass).
pub fn hist_equalize(img: &Image, bins: usize) -> Result<Image> {
    if bins < 2 {
        return Err(param("bins", format!("need at least 2, got {bins}")));
    }
    let d = img.data();
    let (h, w, _) = d.dim();
    let n = (h * w) as f64;
    let bin_of = |v: f64| ((v * bins as f64) as usize).min(bins - 1);

    let mut out = Array3::zeros((h, w, 3));
    for c in 0..3 {
        let mut hist = vec![0u64; bins];
        for i in 0..h {
            for j in 0..w {
                hist[bin_of(d[(i, j, c)])] += 1;
            }
        }
        let mut cdf = vec![0.0f64; bins];
        let mut run = 0u64;
        for (k, &count) in hist.iter().enumerate() {
            run += count;
            cdf[k] = run as f64 / n;
        }
        for i in 0..h {
            for j in 0..w {
                out[(i, j, c)] = cdf[bin_of(d[(i, j, c)])];
            }
        }
    }
    Ok(Image::new(out)?)
}
