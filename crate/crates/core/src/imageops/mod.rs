//! Pixel-level primitives for compositing and degradation.
//!
//! Images are interleaved 3-channel float32 buffers. sRGB images hold values in
//! `[0, 1]`; Lab images hold raw `L*a*b*` values and carry the [`ColorSpace`]
//! tag so the two cannot be mixed up. Every operation is a pure function of its
//! inputs and explicit seed. Transcendental functions go through `libm` so
//! results are identical across platforms.

mod augment;
mod blend;
mod blur;
mod color;
mod image;
mod io;
mod mask;
mod noise;

pub use augment::{augment, augment_one, AffineParams, AugmentPolicy};
pub use blend::{alpha_blend, feather_mask};
pub use blur::{gaussian_blur, gaussian_kernel, reflect_index};
pub use color::{
    color_transfer, lab_to_srgb_pixel, region_stats, srgb_to_lab_pixel, to_lab, to_srgb,
    RegionStats,
};
pub use image::{ColorSpace, FaceBox, Image, Mask};
pub use io::{encode_png, load_image, save_png};
pub use mask::RingMask;
pub use noise::{add_noise, standard_normals};
