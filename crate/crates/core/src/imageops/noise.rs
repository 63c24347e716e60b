use rand::Rng;

use super::image::Image;
use crate::seed;

/// `n` standard normal draws (Box-Muller) from a seeded stream.
pub fn standard_normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(n + 1);
    while out.len() < n {
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let t = 2.0 * std::f64::consts::PI * u2;
        out.push(r * libm::cos(t));
        out.push(r * libm::sin(t));
    }
    out.truncate(n);
    out
}

/// `clamp(in + N(0, sigma^2), 0, 1)` per sample; sigma is in normalized
/// intensity units.
pub fn add_noise(img: &Image, sigma: f64, seed: u64) -> Image {
    let mut out = img.clone();
    if sigma == 0.0 {
        return out;
    }
    let z = standard_normals(seed, out.data().len());
    for (v, z) in out.data_mut().iter_mut().zip(z) {
        *v = (*v as f64 + sigma * z).clamp(0.0, 1.0) as f32;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_sigma_is_identity() {
        let img = Image::from_fn(4, 4, |x, y| [x as f32 / 4.0, y as f32 / 4.0, 0.3]);
        assert_eq!(add_noise(&img, 0.0, 9), img);
    }

    #[test]
    fn seeded() {
        let img = Image::filled(8, 8, [0.5; 3]);
        assert_eq!(add_noise(&img, 0.1, 3), add_noise(&img, 0.1, 3));
        assert_ne!(add_noise(&img, 0.1, 3), add_noise(&img, 0.1, 4));
    }

    #[test]
    fn stays_in_unit_range() {
        let img = Image::filled(16, 16, [0.02, 0.5, 0.98]);
        let out = add_noise(&img, 0.5, 1);
        assert!(out.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn standard_normal_moments() {
        let z = standard_normals(42, 200_000);
        let mean = z.iter().sum::<f64>() / z.len() as f64;
        let var = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / z.len() as f64;
        assert!(mean.abs() < 0.01, "{mean}");
        assert!((var - 1.0).abs() < 0.01, "{var}");
    }
}
