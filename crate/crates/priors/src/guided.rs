use ndarray::Array2;

/// Box mean with border-aware window sizes, via a summed-area table.
pub(crate) fn box_mean(src: &Array2<f64>, radius: usize) -> Array2<f64> {
    let (h, w) = src.dim();
    // sat[i][j] = sum of src[0..i][0..j]
    let mut sat = Array2::<f64>::zeros((h + 1, w + 1));
    for i in 0..h {
        for j in 0..w {
            sat[(i + 1, j + 1)] = src[(i, j)] + sat[(i, j + 1)] + sat[(i + 1, j)] - sat[(i, j)];
        }
    }
    Array2::from_shape_fn((h, w), |(i, j)| {
        let top = i.saturating_sub(radius);
        let left = j.saturating_sub(radius);
        let bottom = (i + radius + 1).min(h);
        let right = (j + radius + 1).min(w);
        let sum = sat[(bottom, right)] - sat[(top, right)] - sat[(bottom, left)] + sat[(top, left)];
        sum / ((bottom - top) * (right - left)) as f64
    })
}

/// Single-channel guided filter (He et al. style): the output is locally
/// an affine function of the guide, which smooths the input while
/// following the guide's edges.
pub fn guided_filter(
    guide: &Array2<f64>,
    src: &Array2<f64>,
    radius: usize,
    eps: f64,
) -> Array2<f64> {
    let mean_i = box_mean(guide, radius);
    let mean_p = box_mean(src, radius);
    let mean_ii = box_mean(&(guide * guide), radius);
    let mean_ip = box_mean(&(guide * src), radius);

    let var_i = &mean_ii - &(&mean_i * &mean_i);
    let cov_ip = &mean_ip - &(&mean_i * &mean_p);

    let a = &cov_ip / &var_i.mapv(|v| v + eps);
    let b = &mean_p - &(&a * &mean_i);

    let mean_a = box_mean(&a, radius);
    let mean_b = box_mean(&b, radius);

    &(&mean_a * guide) + &mean_b
}
