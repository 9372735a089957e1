//! Formation-model tests: hand-evaluated cases, round trips, and the
//! re-degradation composition identity.

use ndarray::{Array2, Array3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uie_core::{
    degrade, enhance, synth_degrade, transmission_from_depth, AmbientLight,
    AttenuationCoefficients, DepthMap, Image, TransmissionMaps,
};

fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
    Image::new(Array3::from_shape_fn((h, w, 3), |_| rng.gen_range(0.0..=1.0))).unwrap()
}

fn random_transmission(rng: &mut ChaCha8Rng, h: usize, w: usize, lo: f64) -> TransmissionMaps {
    TransmissionMaps::new(Array3::from_shape_fn((h, w, 3), |_| rng.gen_range(lo..=1.0))).unwrap()
}

#[test]
fn degrade_identity_at_full_transmission() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let j = random_image(&mut rng, 8, 9);
    let t = TransmissionMaps::constant(8, 9, [1.0; 3]).unwrap();
    let a = AmbientLight::new([0.3, 0.7, 0.1]).unwrap();
    let i = degrade(&j, &t, &a).unwrap();
    assert_eq!(i.max_abs_diff(&j), 0.0);
}

#[test]
fn degrade_full_scattering_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let j = random_image(&mut rng, 6, 6);
    let t = TransmissionMaps::constant(6, 6, [1e-6; 3]).unwrap();
    let a = AmbientLight::new([0.3, 0.3, 0.3]).unwrap();
    let i = degrade(&j, &t, &a).unwrap();
    for &v in i.data() {
        assert!((v - 0.3).abs() < 1e-5);
    }
}

#[test]
fn degrade_hand_value() {
    // 0.8 * 0.5 + 0.5 * 0.2 = 0.5
    let j = Image::constant(4, 4, [0.8; 3]).unwrap();
    let t = TransmissionMaps::constant(4, 4, [0.5; 3]).unwrap();
    let a = AmbientLight::new([0.2; 3]).unwrap();
    let i = degrade(&j, &t, &a).unwrap();
    for &v in i.data() {
        assert!((v - 0.5).abs() < 1e-12);
    }
}

#[test]
fn degrade_rejects_shape_mismatch() {
    let j = Image::constant(4, 4, [0.5; 3]).unwrap();
    let t = TransmissionMaps::constant(4, 5, [0.5; 3]).unwrap();
    let a = AmbientLight::new([0.2; 3]).unwrap();
    assert!(degrade(&j, &t, &a).is_err());
}

#[test]
fn enhance_identity_at_full_transmission() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let i = random_image(&mut rng, 7, 5);
    let t = TransmissionMaps::constant(7, 5, [1.0; 3]).unwrap();
    let a = AmbientLight::new([0.9, 0.1, 0.4]).unwrap();
    let j = enhance(&i, &t, &a, 0.05).unwrap();
    assert_eq!(j.max_abs_diff(&i), 0.0);
}

#[test]
fn enhance_hand_value() {
    // (0.5 - 0.5 * 0.2) / 0.5 = 0.8
    let i = Image::constant(4, 4, [0.5; 3]).unwrap();
    let t = TransmissionMaps::constant(4, 4, [0.5; 3]).unwrap();
    let a = AmbientLight::new([0.2; 3]).unwrap();
    let j = enhance(&i, &t, &a, 0.05).unwrap();
    for &v in j.data() {
        assert!((v - 0.8).abs() < 1e-12);
    }
}

#[test]
fn enhance_rejects_bad_floor() {
    let i = Image::constant(4, 4, [0.5; 3]).unwrap();
    let t = TransmissionMaps::constant(4, 4, [0.5; 3]).unwrap();
    let a = AmbientLight::new([0.2; 3]).unwrap();
    assert!(enhance(&i, &t, &a, 0.0).is_err());
    assert!(enhance(&i, &t, &a, 1.0).is_err());
    assert!(enhance(&i, &t, &a, -0.2).is_err());
}

#[test]
fn degrade_enhance_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let j = random_image(&mut rng, 16, 16);
        let t = random_transmission(&mut rng, 16, 16, 0.1);
        let a = AmbientLight::new([
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
        ])
        .unwrap();
        let i = degrade(&j, &t, &a).unwrap();
        let back = enhance(&i, &t, &a, 0.05).unwrap();
        assert!(back.max_abs_diff(&j) <= 1e-6);
    }
}

#[test]
fn transmission_from_zero_depth_is_one() {
    let d = DepthMap::new(Array2::zeros((5, 5))).unwrap();
    let beta = AttenuationCoefficients::new([1.2, 0.7, 0.3]).unwrap();
    let t = transmission_from_depth(&d, &beta);
    for &v in t.data() {
        assert_eq!(v, 1.0);
    }
}

#[test]
fn transmission_with_zero_beta_is_one() {
    let d = DepthMap::new(Array2::from_shape_fn((4, 6), |(i, j)| (i + j) as f64)).unwrap();
    let beta = AttenuationCoefficients::new([0.0, 0.0, 0.0]).unwrap();
    let t = transmission_from_depth(&d, &beta);
    for &v in t.data() {
        assert_eq!(v, 1.0);
    }
}

#[test]
fn transmission_hand_value() {
    let d = DepthMap::new(Array2::from_elem((3, 3), 1.0)).unwrap();
    let beta =
        AttenuationCoefficients::new([2.0f64.ln(), 4.0f64.ln(), 4.0f64.ln()]).unwrap();
    let t = transmission_from_depth(&d, &beta);
    for i in 0..3 {
        for j in 0..3 {
            assert!((t.data()[(i, j, 0)] - 0.5).abs() < 1e-12);
            assert!((t.data()[(i, j, 1)] - 0.25).abs() < 1e-12);
            assert!((t.data()[(i, j, 2)] - 0.25).abs() < 1e-12);
        }
    }
}

#[test]
fn negative_depth_rejected_at_construction() {
    assert!(DepthMap::new(Array2::from_elem((2, 2), -0.1)).is_err());
}

#[test]
fn synth_degrade_near_identity_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let i1 = random_image(&mut rng, 8, 8);
    let a = AmbientLight::new([0.5, 0.5, 0.5]).unwrap();
    let i2 = synth_degrade(&i1, &a, 1.0 - 1e-9).unwrap();
    assert!(i2.max_abs_diff(&i1) <= 1e-8);
}

#[test]
fn synth_degrade_hand_value() {
    // 0.5 * 0.6 + 0.5 * 0.2 = 0.4
    let i1 = Image::constant(4, 4, [0.6; 3]).unwrap();
    let a = AmbientLight::new([0.2; 3]).unwrap();
    let i2 = synth_degrade(&i1, &a, 0.5).unwrap();
    for &v in i2.data() {
        assert!((v - 0.4).abs() < 1e-12);
    }
}

#[test]
fn synth_degrade_rejects_alpha_out_of_range() {
    let i1 = Image::constant(2, 2, [0.5; 3]).unwrap();
    let a = AmbientLight::new([0.2; 3]).unwrap();
    assert!(synth_degrade(&i1, &a, 0.0).is_err());
    assert!(synth_degrade(&i1, &a, 1.0).is_err());
}

#[test]
fn composition_identity_over_alpha_grid() {
    // synth_degrade(degrade(J, t, A), A, alpha) == degrade(J, alpha t, A)
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for rep in 0..20 {
        let j = random_image(&mut rng, 12, 12);
        let t = random_transmission(&mut rng, 12, 12, 0.05);
        let a = AmbientLight::new([
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
            rng.gen_range(0.0..=1.0),
        ])
        .unwrap();
        let i1 = degrade(&j, &t, &a).unwrap();
        for step in 1..=9 {
            let alpha = step as f64 / 10.0;
            let via_synth = synth_degrade(&i1, &a, alpha).unwrap();
            let t_scaled =
                TransmissionMaps::new(t.data().mapv(|v| (alpha * v).max(f64::MIN_POSITIVE)))
                    .unwrap();
            let direct = degrade(&j, &t_scaled, &a).unwrap();
            assert!(
                via_synth.max_abs_diff(&direct) <= 1e-6,
                "rep {rep} alpha {alpha}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn monotone_in_transmission(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = 6;
        let w = 6;
        let j = random_image(&mut rng, h, w);
        // A >= J pointwise: shrinking t must never decrease I.
        let a_hi = AmbientLight::new([1.0, 1.0, 1.0]).unwrap();
        let t_hi = random_transmission(&mut rng, h, w, 0.3);
        let t_lo = TransmissionMaps::new(t_hi.data().mapv(|v| v * 0.5)).unwrap();
        let i_hi = degrade(&j, &t_hi, &a_hi).unwrap();
        let i_lo = degrade(&j, &t_lo, &a_hi).unwrap();
        for (x, y) in i_hi.data().iter().zip(i_lo.data().iter()) {
            prop_assert!(y >= x);
        }
        // A <= J pointwise (A = 0): shrinking t must never increase I.
        let a_lo = AmbientLight::new([0.0, 0.0, 0.0]).unwrap();
        let i_hi = degrade(&j, &t_hi, &a_lo).unwrap();
        let i_lo = degrade(&j, &t_lo, &a_lo).unwrap();
        for (x, y) in i_hi.data().iter().zip(i_lo.data().iter()) {
            prop_assert!(y <= x);
        }
    }

    #[test]
    fn transmission_always_in_unit_interval(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = DepthMap::new(Array2::from_shape_fn((5, 5), |_| rng.gen_range(0.0..50.0)))
            .unwrap();
        let beta = AttenuationCoefficients::new([
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        ])
        .unwrap();
        let t = transmission_from_depth(&d, &beta);
        for &v in t.data() {
            prop_assert!(v > 0.0 && v <= 1.0);
        }
    }
}
