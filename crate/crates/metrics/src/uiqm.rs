use ndarray::Array2;
use uie_core::Image;

use crate::error::{MetricError, Result};

/// Underwater image quality measure: a no-reference score combining a
/// colorfulness term (UICM), a sharpness term (UISM), and a contrast term
/// (UIConM).
///
/// Intensities are rescaled to 0..255 before the statistics are taken;
/// the colorfulness term is the only one that is not scale invariant and
/// its published coefficients assume 8-bit magnitudes. Blocks are
/// complete 8x8 tiles only (trailing partial rows/columns are dropped),
/// so whole-block translations of the content leave the score unchanged.
const BLOCK: usize = 8;
const TRIM_FRAC: f64 = 0.1;
const C1: f64 = 0.0282;
const C2: f64 = 0.2953;
const C3: f64 = 3.5753;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UiqmBreakdown {
    pub uicm: f64,
    pub uism: f64,
    pub uiconm: f64,
    pub uiqm: f64,
}

pub fn uiqm(img: &Image) -> Result<f64> {
    Ok(uiqm_breakdown(img)?.uiqm)
}

pub fn uiqm_breakdown(img: &Image) -> Result<UiqmBreakdown> {
    let (h, w, _) = img.data().dim();
    if h < BLOCK || w < BLOCK {
        return Err(MetricError::ImageTooSmall { need: BLOCK, h, w });
    }
    let d = img.data();
    let scale = |c: usize| Array2::from_shape_fn((h, w), |(i, j)| 255.0 * d[(i, j, c)]);
    let r = scale(0);
    let g = scale(1);
    let b = scale(2);

    let uicm = uicm(&r, &g, &b);
    let uism = uism(&r, &g, &b);
    let uiconm = uiconm(&r, &g, &b);
    Ok(UiqmBreakdown {
        uicm,
        uism,
        uiconm,
        uiqm: C1 * uicm + C2 * uism + C3 * uiconm,
    })
}

/// Asymmetric alpha-trimmed mean plus deviation of the two opponent
/// channels RG = R - G and YB = (R + G)/2 - B.
fn uicm(r: &Array2<f64>, g: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let n = r.len();
    let rg: Vec<f64> = r.iter().zip(g.iter()).map(|(&r, &g)| r - g).collect();
    let yb: Vec<f64> = r
        .iter()
        .zip(g.iter())
        .zip(b.iter())
        .map(|((&r, &g), &b)| (r + g) / 2.0 - b)
        .collect();

    let trimmed_mean = |vals: &[f64]| -> f64 {
        let mut sorted = vals.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cut = (TRIM_FRAC * n as f64).floor() as usize;
        let kept = &sorted[cut..n - cut];
        kept.iter().sum::<f64>() / kept.len() as f64
    };
    let mu_rg = trimmed_mean(&rg);
    let mu_yb = trimmed_mean(&yb);
    let var = |vals: &[f64], mu: f64| -> f64 {
        vals.iter().map(|&v| (v - mu) * (v - mu)).sum::<f64>() / n as f64
    };
    let s2_rg = var(&rg, mu_rg);
    let s2_yb = var(&yb, mu_yb);

    -0.0268 * (mu_rg * mu_rg + mu_yb * mu_yb).sqrt() + 0.1586 * (s2_rg + s2_yb).sqrt()
}

fn sobel_magnitude(x: &Array2<f64>) -> Array2<f64> {
    let (h, w) = x.dim();
    let at = |i: isize, j: isize| -> f64 {
        let i = i.clamp(0, h as isize - 1) as usize;
        let j = j.clamp(0, w as isize - 1) as usize;
        x[(i, j)]
    };
    Array2::from_shape_fn((h, w), |(i, j)| {
        let (i, j) = (i as isize, j as isize);
        let gx = at(i - 1, j + 1) + 2.0 * at(i, j + 1) + at(i + 1, j + 1)
            - at(i - 1, j - 1)
            - 2.0 * at(i, j - 1)
            - at(i + 1, j - 1);
        let gy = at(i + 1, j - 1) + 2.0 * at(i + 1, j) + at(i + 1, j + 1)
            - at(i - 1, j - 1)
            - 2.0 * at(i - 1, j)
            - at(i - 1, j + 1);
        (gx * gx + gy * gy).sqrt()
    })
}

/// EME of the Sobel-masked channel, averaged over channels with luma
/// weights. Blocks whose minimum is zero carry no information about the
/// max/min ratio and are skipped.
fn uism(r: &Array2<f64>, g: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let lambda = [0.299, 0.587, 0.114];
    let mut total = 0.0;
    for (c, plane) in [r, g, b].into_iter().enumerate() {
        let edges = sobel_magnitude(plane);
        let masked = &edges * plane;
        total += lambda[c] * eme(&masked);
    }
    total
}

fn eme(x: &Array2<f64>) -> f64 {
    let (h, w) = x.dim();
    let bh = h / BLOCK;
    let bw = w / BLOCK;
    let mut sum = 0.0;
    for bi in 0..bh {
        for bj in 0..bw {
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for i in bi * BLOCK..(bi + 1) * BLOCK {
                for j in bj * BLOCK..(bj + 1) * BLOCK {
                    mn = mn.min(x[(i, j)]);
                    mx = mx.max(x[(i, j)]);
                }
            }
            if mn > 0.0 {
                sum += (mx / mn).ln();
            }
        }
    }
    2.0 / (bh * bw) as f64 * sum
}

/// Entropy-style Michelson contrast over 8x8 blocks spanning all three
/// channels. Flat or all-black blocks contribute zero (the x ln x limit).
fn uiconm(r: &Array2<f64>, g: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let (h, w) = r.dim();
    let bh = h / BLOCK;
    let bw = w / BLOCK;
    let mut sum = 0.0;
    for bi in 0..bh {
        for bj in 0..bw {
            let mut mn = f64::INFINITY;
            let mut mx = f64::NEG_INFINITY;
            for plane in [r, g, b] {
                for i in bi * BLOCK..(bi + 1) * BLOCK {
                    for j in bj * BLOCK..(bj + 1) * BLOCK {
                        mn = mn.min(plane[(i, j)]);
                        mx = mx.max(plane[(i, j)]);
                    }
                }
            }
            if mx + mn > 0.0 {
                let m = (mx - mn) / (mx + mn);
                if m > 0.0 {
                    sum += m * m.ln();
                }
            }
        }
    }
    -sum / (bh * bw) as f64
}
