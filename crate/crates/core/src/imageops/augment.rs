//! Seeded classical augmentation: one affine warp (flip, rotation, shear,
//! translation, scale) followed by brightness, contrast and saturation jitter.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::blur::reflect_index;
use super::image::{ColorSpace, Image};
use crate::error::{Error, Result};
use crate::seed;

/// Sampling ranges. Ranges are `[lo, hi]`, drawn uniformly; jitter amounts
/// `j` draw a factor from `[1 - j, 1 + j]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentPolicy {
    pub hflip_prob: f64,
    /// Degrees; positive angles rotate clockwise on screen (y points down).
    pub rotation_deg: [f64; 2],
    /// Horizontal shear angle in degrees.
    pub shear_deg: [f64; 2],
    /// Fraction of the image side, applied independently to x and y.
    pub translate_frac: [f64; 2],
    pub scale: [f64; 2],
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
    pub seed: u64,
}

impl Default for AugmentPolicy {
    fn default() -> Self {
        AugmentPolicy {
            hflip_prob: 0.5,
            rotation_deg: [-10.0, 10.0],
            shear_deg: [-10.0, 10.0],
            translate_frac: [-0.1, 0.1],
            scale: [0.85, 1.15],
            brightness: 0.2,
            contrast: 0.2,
            saturation: 0.2,
            seed: 0,
        }
    }
}

impl AugmentPolicy {
    /// Every range collapsed onto its identity value.
    pub fn identity() -> Self {
        AugmentPolicy {
            hflip_prob: 0.0,
            rotation_deg: [0.0, 0.0],
            shear_deg: [0.0, 0.0],
            translate_frac: [0.0, 0.0],
            scale: [1.0, 1.0],
            brightness: 0.0,
            contrast: 0.0,
            saturation: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("rotation_deg", self.rotation_deg),
            ("shear_deg", self.shear_deg),
            ("translate_frac", self.translate_frac),
            ("scale", self.scale),
        ];
        for (name, [lo, hi]) in ranges {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::invalid(format!(
                    "{name} range [{lo}, {hi}] is invalid"
                )));
            }
        }
        if self.scale[0] <= 0.0 {
            return Err(Error::invalid("scale must be positive"));
        }
        if self.shear_deg[0] <= -90.0 || self.shear_deg[1] >= 90.0 {
            return Err(Error::invalid("shear must stay within (-90, 90) degrees"));
        }
        if !(0.0..=1.0).contains(&self.hflip_prob) {
            return Err(Error::invalid("hflip_prob must lie in [0, 1]"));
        }
        for (name, j) in [
            ("brightness", self.brightness),
            ("contrast", self.contrast),
            ("saturation", self.saturation),
        ] {
            if !(0.0..1.0).contains(&j) {
                return Err(Error::invalid(format!(
                    "{name} jitter {j} must lie in [0, 1)"
                )));
            }
        }
        Ok(())
    }

    /// Draws one parameter set. The draw order is fixed.
    pub fn sample(&self, rng: &mut impl Rng) -> AffineParams {
        let mut uniform = |[lo, hi]: [f64; 2]| lo + (hi - lo) * rng.random::<f64>();
        let flip_u = uniform([0.0, 1.0]);
        AffineParams {
            hflip: flip_u < self.hflip_prob,
            rotation_deg: uniform(self.rotation_deg),
            shear_deg: uniform(self.shear_deg),
            translate: [uniform(self.translate_frac), uniform(self.translate_frac)],
            scale: uniform(self.scale),
            brightness: uniform([1.0 - self.brightness, 1.0 + self.brightness]),
            contrast: uniform([1.0 - self.contrast, 1.0 + self.contrast]),
            saturation: uniform([1.0 - self.saturation, 1.0 + self.saturation]),
        }
    }
}

/// One concrete augmentation draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineParams {
    pub hflip: bool,
    pub rotation_deg: f64,
    pub shear_deg: f64,
    /// Fractions of width and height.
    pub translate: [f64; 2],
    pub scale: f64,
    pub brightness: f64,
    pub contrast: f64,
    pub saturation: f64,
}

impl AffineParams {
    /// Forward 2x2 matrix (output = A * (src - c) + c + t):
    /// rotation * shear * scale * flip.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let th = self.rotation_deg.to_radians();
        let (s, c) = (libm::sin(th), libm::cos(th));
        let k = libm::tan(self.shear_deg.to_radians());
        let f = if self.hflip { -1.0 } else { 1.0 };
        let z = self.scale;
        // R * Sh = [[c, c*k - s], [s, s*k + c]], then scale and flip columns.
        [[c * z * f, (c * k - s) * z], [s * z * f, (s * k + c) * z]]
    }

    /// Where the source point `p` lands in the output of a `w x h` image.
    pub fn forward(&self, p: [f64; 2], w: usize, h: usize) -> [f64; 2] {
        let a = self.matrix();
        let cx = (w as f64 - 1.0) / 2.0;
        let cy = (h as f64 - 1.0) / 2.0;
        let d = [p[0] - cx, p[1] - cy];
        [
            a[0][0] * d[0] + a[0][1] * d[1] + cx + self.translate[0] * w as f64,
            a[1][0] * d[0] + a[1][1] * d[1] + cy + self.translate[1] * h as f64,
        ]
    }
}

fn bilinear(img: &Image, x: f64, y: f64) -> [f32; 3] {
    let (w, h) = (img.width(), img.height());
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let xi = [
        reflect_index(x0 as isize, w),
        reflect_index(x0 as isize + 1, w),
    ];
    let yi = [
        reflect_index(y0 as isize, h),
        reflect_index(y0 as isize + 1, h),
    ];
    let p00 = img.pixel(xi[0], yi[0]);
    if fx == 0.0 && fy == 0.0 {
        return p00;
    }
    let p10 = img.pixel(xi[1], yi[0]);
    let p01 = img.pixel(xi[0], yi[1]);
    let p11 = img.pixel(xi[1], yi[1]);
    let mut out = [0.0f32; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - fx) + p10[c] as f64 * fx;
        let bot = p01[c] as f64 * (1.0 - fx) + p11[c] as f64 * fx;
        out[c] = (top * (1.0 - fy) + bot * fy) as f32;
    }
    out
}

fn warp(img: &Image, p: &AffineParams) -> Image {
    let a = p.matrix();
    if a == [[1.0, 0.0], [0.0, 1.0]] && p.translate == [0.0, 0.0] {
        return img.clone();
    }
    let (w, h) = (img.width(), img.height());
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let tx = p.translate[0] * w as f64;
    let ty = p.translate[1] * h as f64;
    let mut out = Image::new(w, h, img.space());
    for y in 0..h {
        for x in 0..w {
            let dx = x as f64 - cx - tx;
            let dy = y as f64 - cy - ty;
            let sx = inv[0][0] * dx + inv[0][1] * dy + cx;
            let sy = inv[1][0] * dx + inv[1][1] * dy + cy;
            out.set(x, y, bilinear(img, sx, sy));
        }
    }
    out
}

fn luma(p: &[f32]) -> f64 {
    0.299 * p[0] as f64 + 0.587 * p[1] as f64 + 0.114 * p[2] as f64
}

fn jitter(img: &mut Image, p: &AffineParams) {
    if p.brightness != 1.0 {
        for v in img.data_mut() {
            *v = (*v as f64 * p.brightness).clamp(0.0, 1.0) as f32;
        }
    }
    if p.contrast != 1.0 {
        let n = (img.width() * img.height()).max(1) as f64;
        let mean = img.data().chunks_exact(3).map(luma).sum::<f64>() / n;
        for v in img.data_mut() {
            *v = ((*v as f64 - mean) * p.contrast + mean).clamp(0.0, 1.0) as f32;
        }
    }
    if p.saturation != 1.0 {
        for px in img.data_mut().chunks_exact_mut(3) {
            let g = luma(px);
            for v in px.iter_mut() {
                *v = ((*v as f64 - g) * p.saturation + g).clamp(0.0, 1.0) as f32;
            }
        }
    }
}

/// Applies one explicit parameter draw.
pub fn augment_one(img: &Image, params: &AffineParams) -> Result<Image> {
    img.require_space(ColorSpace::Srgb)?;
    let mut out = warp(img, params);
    jitter(&mut out, params);
    Ok(out)
}

/// `n` augmented copies; copy `i` uses the stream derived from
/// `(policy.seed, i)`.
pub fn augment(img: &Image, policy: &AugmentPolicy, n: usize) -> Result<Vec<Image>> {
    policy.validate()?;
    (0..n)
        .map(|i| {
            let mut rng = seed::rng(seed::derive_index(policy.seed, "augment", i as u64));
            augment_one(img, &policy.sample(&mut rng))
        })
        .collect()
}
