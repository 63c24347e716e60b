//! Pixel-level oracles for the augmentation, blur and noise primitives.

use ferforge::imageops::{
    add_noise, augment, augment_one, feather_mask, gaussian_blur, to_lab, to_srgb, AffineParams,
    AugmentPolicy, FaceBox, Image,
};

fn identity_params() -> AffineParams {
    AffineParams {
        hflip: false,
        rotation_deg: 0.0,
        shear_deg: 0.0,
        translate: [0.0, 0.0],
        scale: 1.0,
        brightness: 1.0,
        contrast: 1.0,
        saturation: 1.0,
    }
}

/// Centroid of the pixels brighter than one half, rounded.
fn brightest(img: &Image) -> (usize, usize) {
    let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.pixel(x, y)[0] > 0.5 {
                sx += x as f64;
                sy += y as f64;
                n += 1.0;
            }
        }
    }
    assert!(n > 0.0, "no marker left");
    ((sx / n).round() as usize, (sy / n).round() as usize)
}

fn marker_image(mx: usize, my: usize) -> Image {
    Image::from_fn(63, 63, |x, y| {
        if x.abs_diff(mx) <= 1 && y.abs_diff(my) <= 1 {
            [1.0; 3]
        } else {
            [0.0; 3]
        }
    })
}

#[test]
fn quarter_turn_moves_marker_clockwise() {
    let img = marker_image(45, 31);
    let p = AffineParams {
        rotation_deg: 90.0,
        ..identity_params()
    };
    let out = augment_one(&img, &p).unwrap();
    // Centre (31, 31); the marker 14 px to the right ends 14 px below.
    assert_eq!(brightest(&out), (31, 45));
    let f = p.forward([45.0, 31.0], 63, 63);
    assert!((f[0] - 31.0).abs() < 1e-9 && (f[1] - 45.0).abs() < 1e-9);
}

#[test]
fn flip_and_translate_follow_forward_map() {
    let img = marker_image(20, 40);
    let p = AffineParams {
        hflip: true,
        translate: [0.1, -0.2],
        ..identity_params()
    };
    let out = augment_one(&img, &p).unwrap();
    let f = p.forward([20.0, 40.0], 63, 63);
    let (x, y) = brightest(&out);
    assert!(
        (x as f64 - f[0]).abs() <= 1.0 && (y as f64 - f[1]).abs() <= 1.0,
        "({x}, {y}) vs {f:?}"
    );
}

#[test]
fn identity_policy_is_a_no_op() {
    let img = Image::from_fn(17, 11, |x, y| [x as f32 / 16.0, y as f32 / 10.0, 0.3]);
    let copies = augment(&img, &AugmentPolicy::identity(), 3).unwrap();
    assert!(copies.iter().all(|c| *c == img));
    assert_eq!(augment_one(&img, &identity_params()).unwrap(), img);
}

#[test]
fn augment_copies_are_seeded() {
    let img = Image::from_fn(32, 32, |x, y| {
        [((x * 7 + y) % 32) as f32 / 31.0, 0.5, y as f32 / 31.0]
    });
    let policy = AugmentPolicy {
        seed: 12,
        ..Default::default()
    };
    let a = augment(&img, &policy, 4).unwrap();
    assert_eq!(a, augment(&img, &policy, 4).unwrap());
    assert_ne!(a[0], a[1]);
    let other = augment(&img, &AugmentPolicy { seed: 13, ..policy }, 4).unwrap();
    assert_ne!(a, other);
    assert!(a
        .iter()
        .flat_map(|i| i.data())
        .all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn blur_keeps_constants_and_interior_ramps() {
    let flat = Image::filled(40, 30, [0.25, 0.5, 0.75]);
    let b = gaussian_blur(&flat, 15, 5.0).unwrap();
    assert!(b
        .data()
        .iter()
        .zip(flat.data())
        .all(|(x, y)| (x - y).abs() < 1e-6));

    // A symmetric kernel reproduces linear functions away from the border.
    let ramp = Image::from_fn(64, 20, |x, _| [x as f32 / 63.0; 3]);
    let b = gaussian_blur(&ramp, 9, 2.0).unwrap();
    for y in 0..20 {
        for x in 4..60 {
            assert!(
                (b.pixel(x, y)[0] - ramp.pixel(x, y)[0]).abs() < 1e-6,
                "({x}, {y})"
            );
        }
    }
}

#[test]
fn blur_rejects_even_kernels() {
    assert!(gaussian_blur(&Image::filled(8, 8, [0.0; 3]), 4, 1.0).is_err());
}

#[test]
fn noise_has_the_requested_spread() {
    let img = Image::filled(256, 256, [0.5; 3]);
    let sigma = 0.05;
    let noisy = add_noise(&img, sigma, 77);
    let d: Vec<f64> = noisy.data().iter().map(|v| *v as f64 - 0.5).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let std = (d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
    // Standard error of the mean is sigma / sqrt(n); 4 of them is generous.
    assert!(mean.abs() < 4.0 * sigma / n.sqrt(), "mean {mean}");
    assert!((std / sigma - 1.0).abs() < 0.02, "std {std}");
    assert_eq!(noisy, add_noise(&img, sigma, 77));
    assert_ne!(noisy, add_noise(&img, sigma, 78));
}

#[test]
fn lab_round_trip_on_an_image() {
    let img = Image::from_fn(20, 20, |x, y| {
        [x as f32 / 19.0, y as f32 / 19.0, ((x + y) % 5) as f32 / 4.0]
    });
    let back = to_srgb(&to_lab(&img).unwrap()).unwrap();
    assert!(back
        .data()
        .iter()
        .zip(img.data())
        .all(|(a, b)| (a - b).abs() < 1e-5));
}

#[test]
fn feather_is_one_deep_inside_and_zero_outside() {
    let fb = FaceBox::new(10, 8, 30, 24);
    let m = feather_mask(50, 40, &fb, 6).unwrap();
    assert_eq!(m.get(25, 20), 1.0);
    assert_eq!(m.get(5, 5), 0.0);
    assert!(m.get(10, 20) < m.get(13, 20));
    assert!(feather_mask(50, 40, &fb, 13).is_err());
}
