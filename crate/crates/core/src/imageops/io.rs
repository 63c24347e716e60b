use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{ExtendedColorType, ImageEncoder};

use super::image::{ColorSpace, Image};
use crate::error::{Error, Result};

/// Decodes an 8-bit PNG or JPEG into a `[0, 1]` sRGB image.
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data = rgb
        .into_raw()
        .into_iter()
        .map(|v| v as f32 / 255.0)
        .collect();
    Image::from_data(w as usize, h as usize, ColorSpace::Srgb, data)
}

fn quantize(img: &Image) -> Vec<u8> {
    img.data()
        .iter()
        .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// 8-bit PNG bytes of an sRGB image.
pub fn encode_png(img: &Image) -> Result<Vec<u8>> {
    img.require_space(ColorSpace::Srgb)?;
    let mut bytes = Vec::new();
    PngEncoder::new(&mut bytes)
        .write_image(
            &quantize(img),
            img.width() as u32,
            img.height() as u32,
            ExtendedColorType::Rgb8,
        )
        .map_err(|e| Error::invalid(format!("png encoding failed: {e}")))?;
    Ok(bytes)
}

pub fn save_png(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    crate::dataset::write_file(path.as_ref(), &encode_png(img)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn png_round_trip_is_exact_on_8bit_values() {
        let img = Image::from_fn(7, 5, |x, y| {
            [
                (x * 30) as f32 / 255.0,
                (y * 50) as f32 / 255.0,
                128.0 / 255.0,
            ]
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.png");
        save_png(&img, &p).unwrap();
        assert_eq!(load_image(&p).unwrap(), img);
        assert_eq!(encode_png(&img).unwrap(), std::fs::read(&p).unwrap());
    }

    #[test]
    fn missing_file_is_io() {
        let err = load_image("/nonexistent/x.png").unwrap_err();
        assert!(err.is_io(), "{err:?}");
    }
}
