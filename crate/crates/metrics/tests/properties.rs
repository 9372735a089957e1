use ndarray::{Array2, Array3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uie_core::{AttenuationCoefficients, DepthMap, Image, TransmissionMaps};
use uie_metrics::{
    angular_error_deg, pcc_transmission, psnr, ssim, uciqe, uiqm, uiqm_breakdown, Channel,
    MetricError,
};

fn seeded_image(seed: u64, h: usize, w: usize, lo: f64, hi: f64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Image::new(Array3::from_shape_fn((h, w, 3), |_| rng.gen_range(lo..hi))).unwrap()
}

#[test]
fn psnr_identical_hits_the_cap() {
    let a = seeded_image(1, 16, 16, 0.0, 1.0);
    assert_eq!(psnr(&a, &a).unwrap(), 100.0);
}

#[test]
fn psnr_constant_offset_hand_values() {
    let a = Image::constant(8, 8, [0.5; 3]).unwrap();
    let b = Image::constant(8, 8, [0.6; 3]).unwrap();
    assert!((psnr(&a, &b).unwrap() - 20.0).abs() < 1e-9);

    // offset sqrt(1e-3) puts the MSE at exactly 1e-3
    let c = Image::constant(8, 8, [0.5316227766; 3]).unwrap();
    assert!((psnr(&a, &c).unwrap() - 30.0).abs() < 1e-6);
}

#[test]
fn psnr_rejects_shape_mismatch() {
    let a = Image::constant(8, 8, [0.5; 3]).unwrap();
    let b = Image::constant(8, 9, [0.5; 3]).unwrap();
    assert!(matches!(
        psnr(&a, &b),
        Err(MetricError::DimensionMismatch(_, _))
    ));
}

#[test]
fn psnr_decreases_as_noise_grows() {
    let base = seeded_image(2, 24, 24, 0.25, 0.75);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Array3::from_shape_fn((24, 24, 3), |_| rng.gen_range(-1.0..1.0));
    let noisy = |amp: f64| {
        Image::new(
            base.data() + &noise.mapv(|u| amp * u), // amp <= 0.1 stays inside [0,1]
        )
        .unwrap()
    };
    let p1 = psnr(&base, &noisy(0.02)).unwrap();
    let p2 = psnr(&base, &noisy(0.05)).unwrap();
    let p3 = psnr(&base, &noisy(0.1)).unwrap();
    assert!(p1 > p2 && p2 > p3, "psnr not monotone: {p1} {p2} {p3}");
}

#[test]
fn ssim_self_is_one() {
    let a = seeded_image(4, 20, 20, 0.0, 1.0);
    assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn ssim_constant_pair_reduces_to_luminance_term() {
    let a = Image::constant(16, 16, [0.5; 3]).unwrap();
    let b = Image::constant(16, 16, [0.6; 3]).unwrap();
    let c1 = 0.01f64 * 0.01;
    let want = (2.0 * 0.5 * 0.6 + c1) / (0.25 + 0.36 + c1);
    assert!((ssim(&a, &b).unwrap() - want).abs() < 1e-6);
}

#[test]
fn ssim_checkerboard_inversion_is_anticorrelated() {
    let a = Image::from_fn(16, 16, |i, j, _| ((i + j) % 2) as f64).unwrap();
    let b = Image::from_fn(16, 16, |i, j, _| ((i + j + 1) % 2) as f64).unwrap();
    assert!(ssim(&a, &b).unwrap() <= 0.0);
}

#[test]
fn ssim_rejects_small_images() {
    let a = Image::constant(10, 16, [0.5; 3]).unwrap();
    assert!(matches!(
        ssim(&a, &a),
        Err(MetricError::ImageTooSmall { need: 11, .. })
    ));
}

#[test]
fn uiqm_gray_image_is_zero_in_every_component() {
    let gray = Image::constant(24, 24, [0.5; 3]).unwrap();
    let b = uiqm_breakdown(&gray).unwrap();
    assert_eq!(b.uicm, 0.0);
    assert_eq!(b.uism, 0.0);
    assert_eq!(b.uiconm, 0.0);
    assert_eq!(b.uiqm, 0.0);
}

#[test]
fn uciqe_constant_gray_is_zero() {
    let gray = Image::constant(16, 16, [0.42; 3]).unwrap();
    assert!(uciqe(&gray).unwrap().abs() < 1e-12);
}

#[test]
fn uciqe_constant_color_reduces_to_saturation_term() {
    // spread and contrast terms vanish on a constant image
    let img = Image::constant(16, 16, [0.3, 0.5, 0.7]).unwrap();
    let (l, a, b) = uie_metrics::color::srgb_to_lab(0.3, 0.5, 0.7);
    let chroma = (a * a + b * b).sqrt();
    let want = 0.2576 * chroma / (chroma * chroma + l * l).sqrt();
    assert!((uciqe(&img).unwrap() - want).abs() < 1e-9);
}

#[test]
fn uciqe_grayscale_reduces_to_contrast_term() {
    // two-tone grayscale: zero chroma, zero saturation, pure contrast
    let img = Image::from_fn(16, 16, |i, _, _| if i < 8 { 0.2 } else { 0.8 }).unwrap();
    let (l_lo, _, _) = uie_metrics::color::srgb_to_lab(0.2, 0.2, 0.2);
    let (l_hi, _, _) = uie_metrics::color::srgb_to_lab(0.8, 0.8, 0.8);
    let want = 0.2745 * (l_hi - l_lo) / 100.0;
    assert!((uciqe(&img).unwrap() - want).abs() < 1e-9);
}

#[test]
fn pcc_exact_exponential_scores_one() {
    let depth = DepthMap::new(Array2::from_shape_fn((32, 32), |(i, j)| {
        0.1 + (i as f64) * 0.05 + (j as f64) * 0.01
    }))
    .unwrap();
    let beta = AttenuationCoefficients::new([0.8, 0.5, 0.4]).unwrap();
    let t = uie_core::transmission_from_depth(&depth, &beta);
    for ch in [Channel::Red, Channel::Green, Channel::Blue] {
        let r = pcc_transmission(&t, &depth, ch).unwrap();
        assert!((r - 1.0).abs() < 1e-9, "channel {ch:?}: {r}");
    }
}

#[test]
fn pcc_constant_transmission_is_undefined() {
    let depth = DepthMap::new(Array2::from_shape_fn((8, 8), |(i, _)| i as f64)).unwrap();
    let t = TransmissionMaps::constant(8, 8, [0.5; 3]).unwrap();
    assert!(matches!(
        pcc_transmission(&t, &depth, Channel::Red),
        Err(MetricError::UndefinedCorrelation(_))
    ));
}

#[test]
fn angular_hand_values() {
    let red = Image::constant(8, 8, [1.0, 0.0, 0.0]).unwrap();
    let green = Image::constant(8, 8, [0.0, 1.0, 0.0]).unwrap();
    let yellow = Image::constant(8, 8, [1.0, 1.0, 0.0]).unwrap();
    assert!(angular_error_deg(&red, &red).unwrap().abs() < 1e-9);
    assert!((angular_error_deg(&red, &green).unwrap() - 90.0).abs() < 1e-9);
    assert!((angular_error_deg(&yellow, &red).unwrap() - 45.0).abs() < 1e-6);
}

#[test]
fn angular_all_black_is_an_error() {
    let black = Image::constant(8, 8, [0.0; 3]).unwrap();
    let other = seeded_image(5, 8, 8, 0.0, 1.0);
    assert!(matches!(
        angular_error_deg(&black, &other),
        Err(MetricError::NoValidPixels(_))
    ));
}

/// Content moved by a whole number of 8-pixel blocks, with the feature
/// kept away from the image border so edge handling sees the same
/// neighborhoods: the block statistics permute and the scores agree.
#[test]
fn uiqm_uciqe_invariant_under_whole_block_translation() {
    let place = |bi: usize, bj: usize| {
        Image::from_fn(40, 40, |i, j, c| {
            let inside = i / 8 == bi && j / 8 == bj;
            match (inside, c) {
                (true, 0) => 0.8,
                (true, 1) => 0.2,
                _ => 0.5,
            }
        })
        .unwrap()
    };
    let a = place(1, 1);
    let b = place(2, 3);
    assert!((uiqm(&a).unwrap() - uiqm(&b).unwrap()).abs() < 1e-12);
    assert!((uciqe(&a).unwrap() - uciqe(&b).unwrap()).abs() < 1e-12);
}

fn arb_image(h: usize, w: usize) -> impl Strategy<Value = Image> {
    proptest::collection::vec(0.0..1.0f64, h * w * 3).prop_map(move |v| {
        Image::new(Array3::from_shape_vec((h, w, 3), v).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn psnr_is_symmetric(a in arb_image(12, 12), b in arb_image(12, 12)) {
        prop_assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn ssim_self_identity_and_bounds(a in arb_image(12, 12), b in arb_image(12, 12)) {
        prop_assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        let s = ssim(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&s), "ssim out of range: {}", s);
    }

    #[test]
    fn pcc_invariant_under_affine_depth_rescale(scale in 0.1..5.0f64, shift in 0.0..3.0f64) {
        let depth = DepthMap::new(Array2::from_shape_fn((16, 16), |(i, j)| {
            0.2 + 0.1 * (i as f64) + 0.03 * (j as f64)
        })).unwrap();
        let beta = AttenuationCoefficients::new([0.7, 0.5, 0.3]).unwrap();
        let t = uie_core::transmission_from_depth(&depth, &beta);
        let rescaled = DepthMap::new(depth.data().mapv(|d| scale * d + shift)).unwrap();
        let p0 = pcc_transmission(&t, &depth, Channel::Green).unwrap();
        let p1 = pcc_transmission(&t, &rescaled, Channel::Green).unwrap();
        prop_assert!((p0 - p1).abs() < 1e-9, "{} vs {}", p0, p1);
    }

    #[test]
    fn angular_invariant_under_global_scaling(s in 0.05..1.0f64, seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Image::new(Array3::from_shape_fn((6, 6, 3), |_| rng.gen_range(0.1..1.0))).unwrap();
        let b = Image::new(Array3::from_shape_fn((6, 6, 3), |_| rng.gen_range(0.1..1.0))).unwrap();
        let scaled = Image::new(a.data().mapv(|v| v * s)).unwrap();
        let e0 = angular_error_deg(&a, &b).unwrap();
        let e1 = angular_error_deg(&scaled, &b).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-9, "{} vs {}", e0, e1);
    }
}
