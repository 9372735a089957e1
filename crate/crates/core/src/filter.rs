//! Shared spatial filtering primitives: Gaussian blur and bilinear resize.
//!
//! Borders are handled by edge replication throughout.

use ndarray::{Array2, Array3};

/// A normalized 1-D Gaussian kernel truncated at `truncate * sigma`.
pub fn gaussian_kernel(sigma: f64, truncate: f64) -> Vec<f64> {
    assert!(sigma > 0.0, "sigma must be positive");
    let radius = (truncate * sigma).ceil().max(1.0) as usize;
    let mut k = Vec::with_capacity(2 * radius + 1);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for i in 0..=2 * radius {
        let d = i as f64 - radius as f64;
        k.push((-d * d * inv).exp());
    }
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

fn convolve_rows(src: &Array2<f64>, kernel: &[f64]) -> Array2<f64> {
    let (h, w) = src.dim();
    let radius = kernel.len() / 2;
    let mut out = Array2::zeros((h, w));
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let jj = (j + k).saturating_sub(radius).min(w - 1);
                acc += kv * src[(i, jj)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

fn convolve_cols(src: &Array2<f64>, kernel: &[f64]) -> Array2<f64> {
    let (h, w) = src.dim();
    let radius = kernel.len() / 2;
    let mut out = Array2::zeros((h, w));
    for i in 0..h {
        for j in 0..w {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                let ii = (i + k).saturating_sub(radius).min(h - 1);
                acc += kv * src[(ii, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Separable Gaussian blur of a single-channel map with replicated edges.
pub fn gaussian_blur_2d(src: &Array2<f64>, sigma: f64, truncate: f64) -> Array2<f64> {
    let kernel = gaussian_kernel(sigma, truncate);
    convolve_cols(&convolve_rows(src, &kernel), &kernel)
}

/// Gaussian blur applied independently to each channel of an `(H, W, C)` array.
pub fn gaussian_blur_3d(src: &Array3<f64>, sigma: f64, truncate: f64) -> Array3<f64> {
    let (h, w, c) = src.dim();
    let mut out = Array3::zeros((h, w, c));
    for ch in 0..c {
        let plane = src.index_axis(ndarray::Axis(2), ch).to_owned();
        let blurred = gaussian_blur_2d(&plane, sigma, truncate);
        out.index_axis_mut(ndarray::Axis(2), ch).assign(&blurred);
    }
    out
}

/// Bilinear resize of a single-channel map (half-pixel-center convention).
pub fn bilinear_resize_2d(src: &Array2<f64>, out_h: usize, out_w: usize) -> Array2<f64> {
    assert!(out_h >= 1 && out_w >= 1);
    let (h, w) = src.dim();
    let sy = h as f64 / out_h as f64;
    let sx = w as f64 / out_w as f64;
    let mut out = Array2::zeros((out_h, out_w));
    for oi in 0..out_h {
        let fy = ((oi as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let y0 = fy.floor() as usize;
        let y1 = (y0 + 1).min(h - 1);
        let wy = fy - y0 as f64;
        for oj in 0..out_w {
            let fx = ((oj as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let x0 = fx.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let wx = fx - x0 as f64;
            out[(oi, oj)] = src[(y0, x0)] * (1.0 - wy) * (1.0 - wx)
                + src[(y0, x1)] * (1.0 - wy) * wx
                + src[(y1, x0)] * wy * (1.0 - wx)
                + src[(y1, x1)] * wy * wx;
        }
    }
    out
}

/// Bilinear resize applied per channel of an `(H, W, C)` array.
pub fn bilinear_resize_3d(src: &Array3<f64>, out_h: usize, out_w: usize) -> Array3<f64> {
    let (_, _, c) = src.dim();
    let mut out = Array3::zeros((out_h, out_w, c));
    for ch in 0..c {
        let plane = src.index_axis(ndarray::Axis(2), ch).to_owned();
        let resized = bilinear_resize_2d(&plane, out_h, out_w);
        out.index_axis_mut(ndarray::Axis(2), ch).assign(&resized);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(2.0, 4.0);
        let sum: f64 = k.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        for i in 0..k.len() / 2 {
            assert!((k[i] - k[k.len() - 1 - i]).abs() < 1e-15);
        }
    }

    #[test]
    fn blur_of_constant_is_constant() {
        let src = Array2::from_elem((9, 7), 0.42);
        let out = gaussian_blur_2d(&src, 1.5, 4.0);
        for &v in &out {
            assert!((v - 0.42).abs() < 1e-12);
        }
    }

    #[test]
    fn resize_identity_when_shapes_match() {
        let src = Array2::from_shape_fn((6, 5), |(i, j)| (i * 5 + j) as f64 / 30.0);
        let out = bilinear_resize_2d(&src, 6, 5);
        for (a, b) in src.iter().zip(out.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resize_preserves_constant() {
        let src = Array2::from_elem((4, 4), 0.7);
        let out = bilinear_resize_2d(&src, 11, 3);
        for &v in &out {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }
}
