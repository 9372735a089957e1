//! The underwater image formation model and its inversion.
//!
//! Degradation composes the scene radiance with the water column:
//! `I^c(x) = J^c(x) t^c(x) + (1 - t^c(x)) A^c`. Enhancement inverts the
//! same relation with a floored transmission to keep the division stable.
//! All functions here are pure and clamp their image outputs to `[0, 1]`.

use ndarray::Array3;

use crate::error::{Error, Result};
use crate::types::{AmbientLight, AttenuationCoefficients, DepthMap, Image, TransmissionMaps};

/// Default transmission floor used when inverting the model.
pub const DEFAULT_T_FLOOR: f64 = 0.05;

fn check_shapes(h1: usize, w1: usize, h2: usize, w2: usize) -> Result<()> {
    if h1 != h2 || w1 != w2 {
        return Err(Error::dim(&[h1, w1], &[h2, w2]));
    }
    Ok(())
}

/// Applies the forward degradation `I = J t + (1 - t) A`, clamped to `[0, 1]`.
pub fn degrade(clean: &Image, t: &TransmissionMaps, a: &AmbientLight) -> Result<Image> {
    check_shapes(clean.height(), clean.width(), t.height(), t.width())?;
    let rgb = a.rgb();
    let td = t.data();
    let jd = clean.data();
    let mut out = Array3::zeros(jd.raw_dim());
    for i in 0..clean.height() {
        for j in 0..clean.width() {
            for c in 0..3 {
                let tv = td[(i, j, c)];
                out[(i, j, c)] = (jd[(i, j, c)] * tv + (1.0 - tv) * rgb[c]).clamp(0.0, 1.0);
            }
        }
    }
    Image::new(out)
}

/// Inverts the degradation: `J = (I - (1 - t') A) / t'` with `t' = max(t, t_floor)`.
///
/// The result is clamped to `[0, 1]`; `t_floor` must lie in `(0, 1)`.
pub fn enhance(
    degraded: &Image,
    t: &TransmissionMaps,
    a: &AmbientLight,
    t_floor: f64,
) -> Result<Image> {
    if !(t_floor > 0.0 && t_floor < 1.0) {
        return Err(Error::param(
            "t_floor",
            format!("must be in (0, 1), got {t_floor}"),
        ));
    }
    check_shapes(degraded.height(), degraded.width(), t.height(), t.width())?;
    let rgb = a.rgb();
    let id = degraded.data();
    let td = t.data();
    let mut out = Array3::zeros(id.raw_dim());
    for i in 0..degraded.height() {
        for j in 0..degraded.width() {
            for c in 0..3 {
                let tp = td[(i, j, c)].max(t_floor);
                let v = (id[(i, j, c)] - (1.0 - tp) * rgb[c]) / tp;
                out[(i, j, c)] = v.clamp(0.0, 1.0);
            }
        }
    }
    Image::new(out)
}

/// Evaluates `t^c(x) = exp(-beta^c d(x))` for every pixel and channel.
///
/// Nonnegative depths guarantee the result lies in `(0, 1]`.
pub fn transmission_from_depth(
    d: &DepthMap,
    beta: &AttenuationCoefficients,
) -> TransmissionMaps {
    let b = beta.beta();
    let dd = d.data();
    let data = Array3::from_shape_fn((d.height(), d.width(), 3), |(i, j, c)| {
        (-b[c] * dd[(i, j)]).exp()
    });
    TransmissionMaps::new(data).expect("exp(-beta d) with d >= 0 lies in (0, 1]")
}

/// Re-degrades an already degraded image: `I2 = alpha I1 + (1 - alpha) A1`.
///
/// If `I1` follows the formation model with transmission `t`, the output
/// follows it with transmission `alpha t`, so this deepens the degradation
/// without needing the clean scene. `alpha` must lie in `(0, 1)`.
pub fn synth_degrade(i1: &Image, a1: &AmbientLight, alpha: f64) -> Result<Image> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(
            "alpha",
            format!("must be in (0, 1), got {alpha}"),
        ));
    }
    let rgb = a1.rgb();
    let id = i1.data();
    let mut out = Array3::zeros(id.raw_dim());
    for i in 0..i1.height() {
        for j in 0..i1.width() {
            for c in 0..3 {
                out[(i, j, c)] = (alpha * id[(i, j, c)] + (1.0 - alpha) * rgb[c]).clamp(0.0, 1.0);
            }
        }
    }
    Image::new(out)
}
