//! Domain types for the underwater image formation model.
//!
//! All pixel data is stored as `f64` in channel-last layout `(H, W, 3)`,
//! RGB order, with intensities in `[0, 1]`. Constructors validate the
//! range/finiteness invariants so downstream code can rely on them.

use ndarray::{Array2, Array3};

use crate::error::{Error, Result};

/// An RGB image with linear intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    data: Array3<f64>,
}

impl Image {
    /// Wraps an `(H, W, 3)` array, validating the image invariants.
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (h, w, c) = data.dim();
        if h == 0 || w == 0 || c != 3 {
            return Err(Error::InvalidData(format!(
                "image shape must be (H>=1, W>=1, 3), got ({h}, {w}, {c})"
            )));
        }
        for &v in &data {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "image intensity {v} outside [0, 1]"
                )));
            }
        }
        Ok(Image { data })
    }

    /// Wraps an array after clamping every value into `[0, 1]`.
    ///
    /// Non-finite values are rejected rather than clamped.
    pub fn new_clamped(mut data: Array3<f64>) -> Result<Self> {
        for v in data.iter_mut() {
            if !v.is_finite() {
                return Err(Error::InvalidData("non-finite image intensity".into()));
            }
            *v = v.clamp(0.0, 1.0);
        }
        Image::new(data)
    }

    /// A constant-color image.
    pub fn constant(height: usize, width: usize, rgb: [f64; 3]) -> Result<Self> {
        let mut data = Array3::zeros((height, width, 3));
        for c in 0..3 {
            data.slice_mut(ndarray::s![.., .., c]).fill(rgb[c]);
        }
        Image::new(data)
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        Image::new(Array3::from_shape_fn((height, width, 3), |(i, j, c)| {
            f(i, j, c)
        }))
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array3<f64> {
        self.data
    }

    /// Largest absolute per-pixel difference to another image.
    pub fn max_abs_diff(&self, other: &Image) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Per-channel transmission maps `t^c(x)` with values in `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionMaps {
    data: Array3<f64>,
}

impl TransmissionMaps {
    pub fn new(data: Array3<f64>) -> Result<Self> {
        let (h, w, c) = data.dim();
        if h == 0 || w == 0 || c != 3 {
            return Err(Error::InvalidData(format!(
                "transmission shape must be (H>=1, W>=1, 3), got ({h}, {w}, {c})"
            )));
        }
        for &v in &data {
            if !v.is_finite() || v <= 0.0 || v > 1.0 {
                return Err(Error::InvalidData(format!(
                    "transmission value {v} outside (0, 1]"
                )));
            }
        }
        Ok(TransmissionMaps { data })
    }

    pub fn constant(height: usize, width: usize, t: [f64; 3]) -> Result<Self> {
        let mut data = Array3::zeros((height, width, 3));
        for c in 0..3 {
            data.slice_mut(ndarray::s![.., .., c]).fill(t[c]);
        }
        TransmissionMaps::new(data)
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn into_data(self) -> Array3<f64> {
        self.data
    }
}

/// Spatially constant per-channel ambient light `A^c`, components in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientLight {
    rgb: [f64; 3],
}

impl AmbientLight {
    pub fn new(rgb: [f64; 3]) -> Result<Self> {
        for &v in &rgb {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "ambient component {v} outside [0, 1]"
                )));
            }
        }
        Ok(AmbientLight { rgb })
    }

    pub fn rgb(&self) -> [f64; 3] {
        self.rgb
    }
}

/// Scene distance map `d(x)`, nonnegative, in arbitrary consistent units.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    data: Array2<f64>,
}

impl DepthMap {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        let (h, w) = data.dim();
        if h == 0 || w == 0 {
            return Err(Error::InvalidData("depth map must be non-empty".into()));
        }
        for &v in &data {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidData(format!(
                    "depth value {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(DepthMap { data })
    }

    pub fn height(&self) -> usize {
        self.data.dim().0
    }

    pub fn width(&self) -> usize {
        self.data.dim().1
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }
}

/// Per-channel attenuation factors `beta^c` of the exponential decay model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttenuationCoefficients {
    beta: [f64; 3],
}

impl AttenuationCoefficients {
    pub fn new(beta: [f64; 3]) -> Result<Self> {
        for &v in &beta {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidData(format!(
                    "attenuation factor {v} must be finite and nonnegative"
                )));
            }
        }
        Ok(AttenuationCoefficients { beta })
    }

    /// Whether red attenuates at least as fast as green and blue.
    ///
    /// Underwater this ordering holds physically; the default dataset
    /// synthesizer requires it, general model evaluation does not.
    pub fn red_dominant(&self) -> bool {
        self.beta[0] >= self.beta[1] && self.beta[0] >= self.beta[2]
    }

    pub fn beta(&self) -> [f64; 3] {
        self.beta
    }
}
