//! The pixel primitives on a synthetic portrait: Lab color transfer,
//! feathered blending, blur, noise and seeded augmentation. Writes PNGs to a
//! directory given on the command line (default: a temp dir).
//!
//! cargo run --example image_ops [-- out_dir]

use std::path::PathBuf;

use ferforge::imageops::{
    add_noise, alpha_blend, augment, color_transfer, feather_mask, gaussian_blur, region_stats,
    save_png, to_lab, to_srgb, AugmentPolicy, FaceBox, Image, Mask,
};

fn portrait() -> Image {
    Image::from_fn(128, 128, |x, y| {
        let (dx, dy) = ((x as f32 - 64.0) / 30.0, (y as f32 - 60.0) / 38.0);
        if dx * dx + dy * dy < 1.0 {
            [0.85, 0.68, 0.55]
        } else {
            [
                0.2 + 0.4 * x as f32 / 127.0,
                0.3,
                0.5 - 0.3 * y as f32 / 127.0,
            ]
        }
    })
}

fn main() -> ferforge::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ferforge-image-ops"));
    let img = portrait();
    let face = FaceBox::new(32, 20, 64, 80);

    // A green-tinted "edit" pulled back to the surrounding palette.
    let edit = Image::from_fn(128, 128, |x, y| {
        let p = img.pixel(x, y);
        [p[0] * 0.6, (p[1] + 0.3).min(1.0), p[2] * 0.7]
    });
    let inside = Mask::from_fn(128, 128, |x, y| face.contains(x, y) as u8 as f32);
    let outside = Mask::from_fn(128, 128, |x, y| (!face.contains(x, y)) as u8 as f32);
    let (edit_lab, img_lab) = (to_lab(&edit)?, to_lab(&img)?);
    let matched = color_transfer(&edit_lab, &inside, &img_lab, &outside)?;
    let before = region_stats(&edit_lab, &inside)?;
    let after = region_stats(&matched, &inside)?;
    println!("edit L* mean {:.2} -> {:.2}", before.mean[0], after.mean[0]);

    let alpha = feather_mask(128, 128, &face, 12)?;
    let blended = alpha_blend(&to_srgb(&matched)?, &img, &alpha)?;
    let soft = gaussian_blur(&blended, 15, 5.0)?;
    let grainy = add_noise(&soft, 0.05, 7);

    save_png(&blended, out.join("blended.png"))?;
    save_png(&grainy, out.join("blur_noise.png"))?;
    let policy = AugmentPolicy {
        seed: 3,
        ..Default::default()
    };
    for (i, copy) in augment(&img, &policy, 4)?.iter().enumerate() {
        save_png(copy, out.join(format!("augment_{i}.png")))?;
    }
    println!("wrote PNGs to {}", out.display());
    Ok(())
}
