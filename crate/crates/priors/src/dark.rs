use ndarray::{Array2, Array3};
use uie_core::Image;

use crate::error::{param, Result};

fn check_patch(patch: usize) -> Result<()> {
    if patch == 0 || patch % 2 == 0 {
        return Err(param("patch", format!("must be odd and >= 1, got {patch}")));
    }
    Ok(())
}

/// Separable grayscale erosion with replicate borders.
fn min_filter(map: &Array2<f64>, patch: usize) -> Array2<f64> {
    let (h, w) = map.dim();
    let half = patch / 2;
    let mut rows = Array2::zeros((h, w));
    for i in 0..h {
        for j in 0..w {
            let lo = j.saturating_sub(half);
            let hi = (j + half).min(w - 1);
            let mut m = f64::INFINITY;
            for jj in lo..=hi {
                m = m.min(map[(i, jj)]);
            }
            rows[(i, j)] = m;
        }
    }
    let mut out = Array2::zeros((h, w));
    for j in 0..w {
        for i in 0..h {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(h - 1);
            let mut m = f64::INFINITY;
            for ii in lo..=hi {
                m = m.min(rows[(ii, j)]);
            }
            out[(i, j)] = m;
        }
    }
    out
}

fn channel_min(data: &Array3<f64>, channels: &[usize]) -> Array2<f64> {
    let (h, w, _) = data.dim();
    Array2::from_shape_fn((h, w), |(i, j)| {
        channels
            .iter()
            .map(|&c| data[(i, j, c)])
            .fold(f64::INFINITY, f64::min)
    })
}

/// Dark channel over raw data; used internally on A-normalized
/// intensities that may exceed 1.
pub(crate) fn dark_channel_raw(
    data: &Array3<f64>,
    patch: usize,
    channels: &[usize],
) -> Result<Array2<f64>> {
    check_patch(patch)?;
    Ok(min_filter(&channel_min(data, channels), patch))
}

/// Per pixel, the minimum intensity over all three channels within a
/// `patch` x `patch` neighborhood (replicate borders).
pub fn dark_channel(img: &Image, patch: usize) -> Result<Array2<f64>> {
    dark_channel_raw(img.data(), patch, &[0, 1, 2])
}

/// Underwater variant: red light is usually gone already, so the
/// minimum is taken over green and blue only.
pub fn dark_channel_gb(img: &Image, patch: usize) -> Result<Array2<f64>> {
    dark_channel_raw(img.data(), patch, &[1, 2])
}
