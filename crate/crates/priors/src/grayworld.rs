use uie_core::Image;

/// Documented ceiling on the per-channel gain, hit only on (nearly)
/// empty channels where 0.5 / mean blows up.
pub const MAX_GAIN: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct GrayWorldResult {
    pub image: Image,
    pub scales: [f64; 3],
    /// true where the gain hit `MAX_GAIN`
    pub capped: [bool; 3],
}

/// Gray-world white balance: scales each channel so its mean becomes
/// 0.5, then clamps to [0, 1].
pub fn gray_world(img: &Image) -> GrayWorldResult {
    let d = img.data();
    let (h, w, _) = d.dim();
    let n = (h * w) as f64;

    let mut scales = [0.0f64; 3];
    let mut capped = [false; 3];
    for c in 0..3 {
        let mean = (0..h)
            .flat_map(|i| (0..w).map(move |j| (i, j)))
            .map(|(i, j)| d[(i, j, c)])
            .sum::<f64>()
            / n;
        let raw = if mean > 0.0 { 0.5 / mean } else { f64::INFINITY };
        if raw > MAX_GAIN {
            scales[c] = MAX_GAIN;
            capped[c] = true;
        } else {
            scales[c] = raw;
        }
    }

    let out = ndarray::Array3::from_shape_fn((h, w, 3), |(i, j, c)| {
        (d[(i, j, c)] * scales[c]).clamp(0.0, 1.0)
    });
    GrayWorldResult {
        image: Image::new(out).expect("clamped output is always a valid image"),
        scales,
        capped,
    }
}
