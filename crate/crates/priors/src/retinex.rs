use ndarray::{Array2, Array3};
use uie_core::filter::gaussian_blur_2d;
use uie_core::Image;

use crate::error::{param, Result};

const EPS: f64 = 1e-6;

/// Multi-scale Retinex: per channel, the mean over scales of
/// log(I + eps) - log(blur_sigma(I) + eps), rescaled to [0, 1] by
/// clipping at the channel's 1st/99th percentiles. A channel with no
/// dynamic range comes out as flat 0.5.
pub fn retinex_msr(img: &Image, scales: &[f64]) -> Result<Image> {
    if scales.is_empty() {
        return Err(param("scales", "need at least one scale"));
    }
    for &s in scales {
        if !(s > 0.0 && s.is_finite()) {
            return Err(param("scales", format!("scales must be positive, got {s}")));
        }
    }
    let d = img.data();
    let (h, w, _) = d.dim();
    let mut out = Array3::zeros((h, w, 3));
    for c in 0..3 {
        let plane = Array2::from_shape_fn((h, w), |(i, j)| d[(i, j, c)]);
        let mut response = Array2::<f64>::zeros((h, w));
        for &sigma in scales {
            let blurred = gaussian_blur_2d(&plane, sigma, 3.0);
            for i in 0..h {
                for j in 0..w {
                    response[(i, j)] +=
                        (plane[(i, j)] + EPS).ln() - (blurred[(i, j)] + EPS).ln();
                }
            }
        }
        response.mapv_inplace(|v| v / scales.len() as f64);

        let mut sorted: Vec<f64> = response.iter().copied().collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pct = |p: f64| {
            let pos = p * (sorted.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let fr = pos - lo as f64;
            sorted[lo] + (sorted[pos.ceil() as usize] - sorted[lo]) * fr
        };
        let (p1, p99) = (pct(0.01), pct(0.99));
        if p99 - p1 <= 1e-12 {
            for i in 0..h {
                for j in 0..w {
                    out[(i, j, c)] = 0.5;
                }
            }
        } else {
            for i in 0..h {
                for j in 0..w {
                    out[(i, j, c)] = ((response[(i, j)] - p1) / (p99 - p1)).clamp(0.0, 1.0);
                }
            }
        }
    }
    Ok(Image::new(out)?)
}
