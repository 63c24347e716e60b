//! sRGB (D65, 2 degree observer) to CIELAB and back, plus mean/variance color
//! transfer in Lab.

use std::sync::LazyLock;

use super::image::{ColorSpace, Image, Mask};
use crate::error::{Error, Result};

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

// Exact inverse of the forward matrix (the published 7-digit inverse is off
// by ~1e-6, enough to break round trips).
static XYZ_TO_RGB: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert(&RGB_TO_XYZ));

fn invert(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof = |r: usize, c: usize| {
        let (r0, r1) = ((r + 1) % 3, (r + 2) % 3);
        let (c0, c1) = ((c + 1) % 3, (c + 2) % 3);
        m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0]
    };
    let det = m[0][0] * cof(0, 0) + m[0][1] * cof(0, 1) + m[0][2] * cof(0, 2);
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = cof(c, r) / det;
        }
    }
    out
}

// Reference white as the image of RGB (1, 1, 1), so white lands on a* = b* = 0.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const DELTA: f64 = 6.0 / 29.0;

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        libm::pow((c + 0.055) / 1.055, 2.4)
    }
}

fn linear_to_srgb(l: f64) -> f64 {
    if l <= 0.0031308 {
        12.92 * l
    } else {
        1.055 * libm::pow(l, 1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        libm::cbrt(t)
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

fn mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

pub fn srgb_to_lab_pixel(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let xyz = mul(&RGB_TO_XYZ, lin);
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Inverse of [`srgb_to_lab_pixel`]; out-of-gamut results are clamped to `[0, 1]`.
pub fn lab_to_srgb_pixel(lab: [f64; 3]) -> [f64; 3] {
    let fy = (lab[0] + 16.0) / 116.0;
    let fx = fy + lab[1] / 500.0;
    let fz = fy - lab[2] / 200.0;
    let xyz = [
        WHITE[0] * lab_f_inv(fx),
        WHITE[1] * lab_f_inv(fy),
        WHITE[2] * lab_f_inv(fz),
    ];
    mul(&XYZ_TO_RGB, xyz).map(|l| linear_to_srgb(l).clamp(0.0, 1.0))
}

fn convert(
    img: &Image,
    from: ColorSpace,
    to: ColorSpace,
    f: fn([f64; 3]) -> [f64; 3],
) -> Result<Image> {
    img.require_space(from)?;
    let mut out = img.clone().with_space(to);
    for px in out.data_mut().chunks_exact_mut(3) {
        let v = f([px[0] as f64, px[1] as f64, px[2] as f64]);
        px[0] = v[0] as f32;
        px[1] = v[1] as f32;
        px[2] = v[2] as f32;
    }
    Ok(out)
}

pub fn to_lab(img: &Image) -> Result<Image> {
    convert(img, ColorSpace::Srgb, ColorSpace::Lab, srgb_to_lab_pixel)
}

pub fn to_srgb(img: &Image) -> Result<Image> {
    convert(img, ColorSpace::Lab, ColorSpace::Srgb, lab_to_srgb_pixel)
}

/// Per-channel mean and population standard deviation over a masked region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionStats {
    pub mean: [f64; 3],
    pub std: [f64; 3],
    pub count: usize,
}

pub fn region_stats(img: &Image, mask: &Mask) -> Result<RegionStats> {
    if !mask.matches(img) {
        return Err(Error::invalid("mask and image sizes differ"));
    }
    let mut n = 0usize;
    let mut sum = [0.0f64; 3];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.contains(x, y) {
                let p = img.pixel(x, y);
                for c in 0..3 {
                    sum[c] += p[c] as f64;
                }
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::invalid("empty region mask"));
    }
    let mean = sum.map(|s| s / n as f64);
    let mut var = [0.0f64; 3];
    for y in 0..img.height() {
        for x in 0..img.width() {
            if mask.contains(x, y) {
                let p = img.pixel(x, y);
                for c in 0..3 {
                    let d = p[c] as f64 - mean[c];
                    var[c] += d * d;
                }
            }
        }
    }
    Ok(RegionStats {
        mean,
        std: var.map(|v| (v / n as f64).sqrt()),
        count: n,
    })
}

/// Maps `edit` so that its statistics over `edit_mask` match those of
/// `context` over `context_mask`, channel by channel:
/// `out = (in - mu_edit) * sigma_ctx / sigma_edit + mu_ctx`.
///
/// The map is applied to every pixel of `edit`; the mask only selects the
/// pixels that define the statistics. A channel with `sigma_edit = 0` maps to
/// the constant `mu_ctx`.
pub fn color_transfer(
    edit: &Image,
    edit_mask: &Mask,
    context: &Image,
    context_mask: &Mask,
) -> Result<Image> {
    edit.require_space(ColorSpace::Lab)?;
    context.require_space(ColorSpace::Lab)?;
    let src = region_stats(edit, edit_mask)?;
    let dst = region_stats(context, context_mask)?;
    let mut out = edit.clone();
    for px in out.data_mut().chunks_exact_mut(3) {
        for (c, v) in px.iter_mut().enumerate() {
            *v = if src.std[c] > 0.0 {
                ((*v as f64 - src.mean[c]) * (dst.std[c] / src.std[c]) + dst.mean[c]) as f32
            } else {
                dst.mean[c] as f32
            };
        }
    }
    Ok(out)
}
