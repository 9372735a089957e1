use uie_core::Image;

use crate::color::srgb_to_lab;
use crate::error::Result;

/// Underwater colour image quality evaluator: a weighted sum of chroma
/// standard deviation, luminance contrast, and average saturation in
/// CIELab.
///
/// Chroma and luminance are normalised by 100 before the statistics so
/// the three terms share a comparable range. Luminance contrast is the
/// spread between the 1st and 99th percentiles (linear interpolation)
/// rather than a max-min, which would be dominated by single outlier
/// pixels. Saturation is chroma / sqrt(chroma^2 + L^2), taken as zero
/// for pure black where both vanish.
const W_SIGMA_C: f64 = 0.4680;
const W_CON_L: f64 = 0.2745;
const W_MU_S: f64 = 0.2576;

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p / 100.0 * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

pub fn uciqe(img: &Image) -> Result<f64> {
    let d = img.data();
    let (h, w, _) = d.dim();
    let n = h * w;
    let mut lum = Vec::with_capacity(n);
    let mut chroma = Vec::with_capacity(n);
    let mut sat_sum = 0.0;
    for i in 0..h {
        for j in 0..w {
            let (l, a, b) = srgb_to_lab(d[(i, j, 0)], d[(i, j, 1)], d[(i, j, 2)]);
            let c = (a * a + b * b).sqrt();
            lum.push(l / 100.0);
            chroma.push(c / 100.0);
            let denom = (c * c + l * l).sqrt();
            if denom > 0.0 {
                sat_sum += c / denom;
            }
        }
    }

    let mean_c = chroma.iter().sum::<f64>() / n as f64;
    let sigma_c =
        (chroma.iter().map(|&c| (c - mean_c) * (c - mean_c)).sum::<f64>() / n as f64).sqrt();

    lum.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let con_l = percentile(&lum, 99.0) - percentile(&lum, 1.0);

    let mu_s = sat_sum / n as f64;

    Ok(W_SIGMA_C * sigma_c + W_CON_L * con_l + W_MU_S * mu_s)
}
