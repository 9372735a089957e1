#![allow(dead_code)]

use std::fs;
use std::path::Path;

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uie_cli::io::save_image;
use uie_core::Image;

pub fn rand_image(seed: u64, h: usize, w: usize) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::new(Array3::from_shape_fn((h, w, 3), |_| rng.gen_range(0.0..1.0))).unwrap()
}

pub fn constant_image(rgb: [f64; 3], h: usize, w: usize) -> Image {
    Image::new(Array3::from_shape_fn((h, w, 3), |(_, _, c)| rgb[c])).unwrap()
}

/// Writes `img` as a PNG, creating parent directories.
pub fn put(path: &Path, img: &Image) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    save_image(path, img).unwrap();
}

/// Gray checkerboard on exact 8-bit levels whose per-channel mean is
/// exactly 0.5, so gray-world is a bit-exact no-op and the PNG
/// round-trips without quantization error.
pub fn balanced_image(h: usize, w: usize) -> Image {
    assert_eq!((h * w) % 2, 0);
    Image::new(Array3::from_shape_fn((h, w, 3), |(i, j, _)| {
        if (i + j) % 2 == 0 {
            100.0 / 255.0
        } else {
            155.0 / 255.0
        }
    }))
    .unwrap()
}

/// Parses a report CSV into (header, rows).
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .unwrap();
    let header = rdr
        .headers()
        .unwrap()
        .iter()
        .map(str::to_string)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

pub fn row_for<'a>(rows: &'a [Vec<String>], id: &str) -> &'a Vec<String> {
    rows.iter()
        .find(|r| r[0] == id)
        .unwrap_or_else(|| panic!("no row for {id}"))
}

pub fn max_abs_diff(a: &Image, b: &Image) -> f64 {
    a.data()
        .iter()
        .zip(b.data().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
