use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageops::{
    alpha_blend, color_transfer, feather_mask, to_lab, to_srgb, ColorSpace, FaceBox, Image, Mask,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompositeParams {
    /// Width of the linear alpha ramp inside the box.
    pub feather: usize,
    /// Width of the band just outside the box whose colors the edit is
    /// matched to. Clipped at the image border.
    pub context_margin: usize,
}

impl Default for CompositeParams {
    fn default() -> Self {
        CompositeParams {
            feather: 12,
            context_margin: 16,
        }
    }
}

/// Pixels within `margin` of the box but outside it, clipped to the image.
pub fn context_band(width: usize, height: usize, face_box: &FaceBox, margin: usize) -> Mask {
    let x0 = face_box.x.saturating_sub(margin);
    let y0 = face_box.y.saturating_sub(margin);
    let x1 = (face_box.x + face_box.w + margin).min(width);
    let y1 = (face_box.y + face_box.h + margin).min(height);
    Mask::from_fn(width, height, |x, y| {
        let near = (x0..x1).contains(&x) && (y0..y1).contains(&y);
        if near && !face_box.contains(x, y) {
            1.0
        } else {
            0.0
        }
    })
}

/// Pastes an edited face crop into `original`: the crop's Lab statistics are
/// matched to the surrounding band, then blended in under a feathered box
/// mask. Pixels outside the box are returned bit-for-bit.
pub fn paste_back(
    original: &Image,
    edited_crop: &Image,
    face_box: &FaceBox,
    params: &CompositeParams,
) -> Result<Image> {
    original.require_space(ColorSpace::Srgb)?;
    edited_crop.require_space(ColorSpace::Srgb)?;
    face_box.check_inside(original.width(), original.height())?;
    if (edited_crop.width(), edited_crop.height()) != (face_box.w, face_box.h) {
        return Err(Error::invalid(format!(
            "edited crop is {}x{} but the face box is {}x{}",
            edited_crop.width(),
            edited_crop.height(),
            face_box.w,
            face_box.h
        )));
    }
    let (w, h) = (original.width(), original.height());
    let alpha = feather_mask(w, h, face_box, params.feather)?;
    let band = context_band(w, h, face_box, params.context_margin);
    if band.count() == 0 {
        return Err(Error::invalid(format!(
            "face box {face_box:?} leaves no context around it"
        )));
    }
    let crop_lab = to_lab(edited_crop)?;
    let crop_all = Mask::filled(face_box.w, face_box.h, 1.0);
    let matched = to_srgb(&color_transfer(
        &crop_lab,
        &crop_all,
        &to_lab(original)?,
        &band,
    )?)?;
    let mut fg = original.clone();
    fg.paste(&matched, face_box.x, face_box.y)?;
    alpha_blend(&fg, original, &alpha)
}
