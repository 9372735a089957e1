use uie_core::{AmbientLight, Image};

use crate::error::{MetricError, Result};

const MIN_NORM: f64 = 1e-8;

fn angle_deg(a: [f64; 3], b: [f64; 3]) -> Option<f64> {
    let na = norm(&a);
    let nb = norm(&b);
    if na < MIN_NORM || nb < MIN_NORM {
        return None;
    }
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    let cos = (dot / (na * nb)).clamp(-1.0, 1.0);
    Some(cos.acos().to_degrees())
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Mean reproduction angular error in degrees.
///
/// Per pixel, the angle between the two RGB vectors; the mean ignores
/// pixels where either vector is shorter than 1e-8, since those have no
/// direction. All pixels excluded (both images essentially black) is an
/// error, not 0.
pub fn angular_error_deg(a: &Image, b: &Image) -> Result<f64> {
    if a.data().dim() != b.data().dim() {
        return Err(MetricError::DimensionMismatch(
            a.data().shape().to_vec(),
            b.data().shape().to_vec(),
        ));
    }
    let (h, w, _) = a.data().dim();
    let ad = a.data();
    let bd = b.data();
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..h {
        for j in 0..w {
            let pa = [ad[(i, j, 0)], ad[(i, j, 1)], ad[(i, j, 2)]];
            let pb = [bd[(i, j, 0)], bd[(i, j, 1)], bd[(i, j, 2)]];
            if let Some(deg) = angle_deg(pa, pb) {
                sum += deg;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(MetricError::NoValidPixels(
            "every pixel pair has a near-zero RGB vector".into(),
        ));
    }
    Ok(sum / count as f64)
}

/// Angle between two ambient-light estimates, for single-vector
/// comparisons (e.g. estimated vs. true background light).
pub fn ambient_angular_error_deg(a: &AmbientLight, b: &AmbientLight) -> Result<f64> {
    angle_deg(a.rgb(), b.rgb()).ok_or_else(|| {
        MetricError::InvalidValue(format!(
            "ambient vector norm below {MIN_NORM:e}; direction undefined"
        ))
    })
}
