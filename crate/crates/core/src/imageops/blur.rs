use super::image::Image;
use crate::error::{Error, Result};

/// Mirror index into `0..n` without repeating the edge sample
/// (`dcb|abcd|cba`).
pub fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let period = 2 * (n as isize - 1);
    let m = i.rem_euclid(period);
    (if m >= n as isize { period - m } else { m }) as usize
}

/// Sampled, renormalized Gaussian taps. `sigma = 0` or `size = 1` gives the
/// identity kernel.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size == 0 || size.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "kernel size {size} must be odd and positive"
        )));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::invalid(format!("invalid sigma {sigma}")));
    }
    let r = (size / 2) as isize;
    if sigma == 0.0 {
        let mut k = vec![0.0; size];
        k[r as usize] = 1.0;
        return Ok(k);
    }
    let taps: Vec<f64> = (-r..=r)
        .map(|i| libm::exp(-((i * i) as f64) / (2.0 * sigma * sigma)))
        .collect();
    let sum: f64 = taps.iter().sum();
    Ok(taps.into_iter().map(|t| t / sum).collect())
}

/// Separable Gaussian blur with reflect padding, applied to each channel.
pub fn gaussian_blur(img: &Image, size: usize, sigma: f64) -> Result<Image> {
    let k = gaussian_kernel(size, sigma)?;
    if size == 1 || sigma == 0.0 {
        return Ok(img.clone());
    }
    let (w, h) = (img.width(), img.height());
    let r = (size / 2) as isize;
    let src = img.data();

    let mut tmp = vec![0.0f64; w * h * 3];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (t, &kv) in k.iter().enumerate() {
                let sx = reflect_index(x as isize + t as isize - r, w);
                let i = (y * w + sx) * 3;
                for c in 0..3 {
                    acc[c] += kv * src[i + c] as f64;
                }
            }
            tmp[(y * w + x) * 3..(y * w + x) * 3 + 3].copy_from_slice(&acc);
        }
    }

    let mut out = img.clone();
    let dst = out.data_mut();
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0f64; 3];
            for (t, &kv) in k.iter().enumerate() {
                let sy = reflect_index(y as isize + t as isize - r, h);
                let i = (sy * w + x) * 3;
                for c in 0..3 {
                    acc[c] += kv * tmp[i + c];
                }
            }
            for c in 0..3 {
                dst[(y * w + x) * 3 + c] = acc[c] as f32;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reflect_indices() {
        let got: Vec<_> = (-3..8).map(|i| reflect_index(i, 5)).collect();
        assert_eq!(got, [3, 2, 1, 0, 1, 2, 3, 4, 3, 2, 1]);
        assert_eq!(reflect_index(-7, 1), 0);
        // wider than the image: keeps bouncing
        assert_eq!(reflect_index(9, 3), 1);
    }

    #[test]
    fn kernel_properties() {
        let k = gaussian_kernel(15, 5.0).unwrap();
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(k[0], k[14]);
        assert!(k[7] > k[6]);
        assert_eq!(gaussian_kernel(1, 3.0).unwrap(), [1.0]);
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(0, 1.0).is_err());
    }

    #[test]
    fn constant_image_unchanged() {
        let img = Image::filled(9, 7, [0.25, 0.5, 0.75]);
        let out = gaussian_blur(&img, 5, 2.0).unwrap();
        for (a, b) in out.data().iter().zip(img.data()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn size_one_is_identity() {
        let img = Image::from_fn(5, 4, |x, y| [x as f32 / 5.0, y as f32 / 4.0, 0.5]);
        assert_eq!(gaussian_blur(&img, 1, 2.0).unwrap(), img);
    }
}
