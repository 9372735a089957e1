use ndarray::Array2;
use uie_core::Image;

use crate::error::{MetricError, Result};

/// Structural similarity, computed per channel and averaged.
///
/// Standard single-scale SSIM: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, dynamic range 1. Only fully interior window
/// positions contribute, so inputs smaller than 11x11 are rejected.
const WINDOW: usize = 11;
const SIGMA: f64 = 1.5;
const K1: f64 = 0.01;
const K2: f64 = 0.03;

fn window_weights() -> Array2<f64> {
    let half = (WINDOW / 2) as isize;
    let mut w = Array2::zeros((WINDOW, WINDOW));
    let mut sum = 0.0;
    for i in 0..WINDOW {
        for j in 0..WINDOW {
            let dy = i as isize - half;
            let dx = j as isize - half;
            let v = (-((dy * dy + dx * dx) as f64) / (2.0 * SIGMA * SIGMA)).exp();
            w[(i, j)] = v;
            sum += v;
        }
    }
    w.mapv_inplace(|v| v / sum);
    w
}

fn ssim_plane(x: &Array2<f64>, y: &Array2<f64>, win: &Array2<f64>) -> f64 {
    let (h, w) = x.dim();
    let c1 = K1 * K1;
    let c2 = K2 * K2;
    let mut total = 0.0;
    let mut count = 0usize;
    for top in 0..=(h - WINDOW) {
        for left in 0..=(w - WINDOW) {
            let mut mx = 0.0;
            let mut my = 0.0;
            for i in 0..WINDOW {
                for j in 0..WINDOW {
                    let wv = win[(i, j)];
                    mx += wv * x[(top + i, left + j)];
                    my += wv * y[(top + i, left + j)];
                }
            }
            let mut vx = 0.0;
            let mut vy = 0.0;
            let mut cov = 0.0;
            for i in 0..WINDOW {
                for j in 0..WINDOW {
                    let wv = win[(i, j)];
                    let dx = x[(top + i, left + j)] - mx;
                    let dy = y[(top + i, left + j)] - my;
                    vx += wv * dx * dx;
                    vy += wv * dy * dy;
                    cov += wv * dx * dy;
                }
            }
            let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            let den = (mx * mx + my * my + c1) * (vx + vy + c2);
            total += num / den;
            count += 1;
        }
    }
    total / count as f64
}

pub fn ssim(a: &Image, b: &Image) -> Result<f64> {
    if a.data().dim() != b.data().dim() {
        return Err(MetricError::DimensionMismatch(
            a.data().shape().to_vec(),
            b.data().shape().to_vec(),
        ));
    }
    let (h, w, _) = a.data().dim();
    if h < WINDOW || w < WINDOW {
        return Err(MetricError::ImageTooSmall { need: WINDOW, h, w });
    }
    let win = window_weights();
    let mut total = 0.0;
    for c in 0..3 {
        let x = a.data().slice(ndarray::s![.., .., c]).to_owned();
        let y = b.data().slice(ndarray::s![.., .., c]).to_owned();
        total += ssim_plane(&x, &y, &win);
    }
    Ok(total / 3.0)
}
