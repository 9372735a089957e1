//! sRGB to CIELab conversion (D65 white point).
//!
//! Stored intensities are interpreted as sRGB-encoded when converting to
//! Lab, which matches how these chroma statistics are conventionally
//! computed on 8-bit imagery.

const M: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// White = M · (1,1,1), i.e. the row sums, so the gray axis lands on
// exactly zero chroma instead of picking up rounding residue from the
// published 7-digit matrix.
const WHITE: [f64; 3] = [
    M[0][0] + M[0][1] + M[0][2],
    M[1][0] + M[1][1] + M[1][2],
    M[2][0] + M[2][1] + M[2][2],
];

fn srgb_linearize(v: f64) -> f64 {
    if v <= 0.04045 {
        v / 12.92
    } else {
        ((v + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB pixel in `[0, 1]` to `(L, a, b)` with `L` in `[0, 100]`.
pub fn srgb_to_lab(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let rl = srgb_linearize(r);
    let gl = srgb_linearize(g);
    let bl = srgb_linearize(b);
    let x = M[0][0] * rl + M[0][1] * gl + M[0][2] * bl;
    let y = M[1][0] * rl + M[1][1] * gl + M[1][2] * bl;
    let z = M[2][0] * rl + M[2][1] * gl + M[2][2] * bl;
    let fx = lab_f(x / WHITE[0]);
    let fy = lab_f(y / WHITE[1]);
    let fz = lab_f(z / WHITE[2]);
    let l = 116.0 * fy - 16.0;
    let a = 500.0 * (fx - fy);
    let bb = 200.0 * (fy - fz);
    (l, a, bb)
}
