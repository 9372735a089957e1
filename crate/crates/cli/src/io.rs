//! Image file handling: everything decodes to linear `[0, 1]` f64 (8-bit
//! values divided by 255, no gamma interpretation) and encodes back to
//! 8-bit PNG, so a write/read round trip moves a channel by at most 1/255.

use std::path::Path;

use anyhow::{Context, Result};
use image::{DynamicImage, ImageBuffer, Rgb};
use ndarray::{Array2, Array3};
use uie_core::{AmbientLight, DepthMap, Image, TransmissionMaps};

pub const IMAGE_EXTENSIONS: [&str; 4] = ["png", "jpg", "jpeg", "bmp"];

pub fn is_image_file(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

pub fn load_image(path: &Path) -> Result<Image> {
    let decoded = image::open(path).with_context(|| format!("decoding {}", path.display()))?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = Array3::from_shape_fn((h as usize, w as usize, 3), |(i, j, c)| {
        rgb.get_pixel(j as u32, i as u32)[c] as f64 / 255.0
    });
    Image::new(data).with_context(|| format!("validating {}", path.display()))
}

pub fn save_image(path: &Path, img: &Image) -> Result<()> {
    let (h, w) = (img.height(), img.width());
    let d = img.data();
    let buf = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let px = |c: usize| (d[(y as usize, x as usize, c)].clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgb([px(0), px(1), px(2)])
    });
    buf.save(path)
        .with_context(|| format!("writing {}", path.display()))
}

/// Depth maps are grayscale files; 8-bit divides by 255, 16-bit by 65535,
/// and anything else goes through luma conversion. `scale` maps the
/// normalized value to scene distance.
pub fn load_depth(path: &Path, scale: f64) -> Result<DepthMap> {
    let decoded = image::open(path).with_context(|| format!("decoding {}", path.display()))?;
    let norm: Array2<f64> = match decoded {
        DynamicImage::ImageLuma16(g) => {
            let (w, h) = g.dimensions();
            Array2::from_shape_fn((h as usize, w as usize), |(i, j)| {
                g.get_pixel(j as u32, i as u32)[0] as f64 / 65535.0
            })
        }
        other => {
            let g = other.to_luma8();
            let (w, h) = g.dimensions();
            Array2::from_shape_fn((h as usize, w as usize), |(i, j)| {
                g.get_pixel(j as u32, i as u32)[0] as f64 / 255.0
            })
        }
    };
    DepthMap::new(norm * scale).with_context(|| format!("validating {}", path.display()))
}

/// A transmission map drawn as an ordinary RGB image (per-channel maps
/// land in the matching color channel).
pub fn tmap_to_image(t: &TransmissionMaps) -> Image {
    Image::new(t.data().clone()).expect("transmission values lie in (0, 1]")
}

/// A small constant swatch showing an ambient-light estimate.
pub fn ambient_swatch(a: &AmbientLight, size: usize) -> Image {
    let rgb = a.rgb();
    Image::new(Array3::from_shape_fn((size, size, 3), |(_, _, c)| rgb[c]))
        .expect("ambient light lies in [0, 1]")
}
