use super::image::{FaceBox, Image, Mask};
use crate::error::{Error, Result};

/// `out = alpha * fg + (1 - alpha) * bg` per pixel and channel. The result is
/// clamped to the `[min(fg, bg), max(fg, bg)]` interval so rounding can never
/// leave it.
pub fn alpha_blend(fg: &Image, bg: &Image, alpha: &Mask) -> Result<Image> {
    if !fg.same_shape(bg) || !alpha.matches(fg) {
        return Err(Error::invalid(format!(
            "blend size mismatch: fg {}x{}, bg {}x{}, mask {}x{}",
            fg.width(),
            fg.height(),
            bg.width(),
            bg.height(),
            alpha.width(),
            alpha.height()
        )));
    }
    if fg.space() != bg.space() {
        return Err(Error::invalid("blend inputs are in different color spaces"));
    }
    let mut out = bg.clone();
    let a = alpha.data();
    for ((o, f), &w) in out
        .data_mut()
        .chunks_exact_mut(3)
        .zip(fg.data().chunks_exact(3))
        .zip(a)
    {
        if w <= 0.0 {
            continue;
        }
        if w >= 1.0 {
            o.copy_from_slice(f);
            continue;
        }
        let w = w as f64;
        for c in 0..3 {
            let (lo, hi) = if f[c] < o[c] {
                (f[c], o[c])
            } else {
                (o[c], f[c])
            };
            let v = (w * f[c] as f64 + (1.0 - w) * o[c] as f64) as f32;
            o[c] = v.clamp(lo, hi);
        }
    }
    Ok(out)
}

/// Soft-edged box mask: 1 deeper than `feather` pixels inside the box, a
/// linear ramp down to 0 at the box edge, 0 outside. `feather = 0` gives a
/// hard binary mask.
pub fn feather_mask(
    width: usize,
    height: usize,
    face_box: &FaceBox,
    feather: usize,
) -> Result<Mask> {
    face_box.check_inside(width, height)?;
    if 2 * feather > face_box.w.min(face_box.h) {
        return Err(Error::invalid(format!(
            "feather width {feather} exceeds half the box side ({}x{})",
            face_box.w, face_box.h
        )));
    }
    Ok(Mask::from_fn(width, height, |x, y| {
        if !face_box.contains(x, y) {
            0.0
        } else if feather == 0 {
            1.0
        } else {
            (face_box.inner_distance(x, y) / feather as f64).min(1.0) as f32
        }
    }))
}
