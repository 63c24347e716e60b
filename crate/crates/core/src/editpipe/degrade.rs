//! Pre-restoration degradation: a strong blur+noise on a band straddling the
//! paste seam, then a light blur+noise over the whole image.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imageops::{add_noise, gaussian_blur, ColorSpace, FaceBox, Image, RingMask};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DegradeRecipe {
    pub ring_width: usize,
    pub local_kernel: usize,
    pub local_sigma: f64,
    pub local_noise: f64,
    pub global_kernel: usize,
    pub global_sigma: f64,
    pub global_noise: f64,
}

impl Default for DegradeRecipe {
    fn default() -> Self {
        DegradeRecipe {
            ring_width: 30,
            local_kernel: 15,
            local_sigma: 5.0,
            local_noise: 0.15,
            global_kernel: 5,
            global_sigma: 2.0,
            global_noise: 0.05,
        }
    }
}

impl DegradeRecipe {
    /// Kernels of size 1 and zero sigmas everywhere.
    pub fn identity() -> Self {
        DegradeRecipe {
            ring_width: 30,
            local_kernel: 1,
            local_sigma: 0.0,
            local_noise: 0.0,
            global_kernel: 1,
            global_sigma: 0.0,
            global_noise: 0.0,
        }
    }

    /// Same recipe with the ring step switched off.
    pub fn global_only(&self) -> Self {
        DegradeRecipe {
            local_kernel: 1,
            local_sigma: 0.0,
            local_noise: 0.0,
            ..*self
        }
    }

    /// Same recipe with the full-image step switched off.
    pub fn local_only(&self) -> Self {
        DegradeRecipe {
            global_kernel: 1,
            global_sigma: 0.0,
            global_noise: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, k) in [
            ("local_kernel", self.local_kernel),
            ("global_kernel", self.global_kernel),
        ] {
            if k % 2 == 0 {
                return Err(Error::invalid(format!("{name} must be odd, got {k}")));
            }
        }
        let sigmas = [
            ("local_sigma", self.local_sigma),
            ("local_noise", self.local_noise),
            ("global_sigma", self.global_sigma),
            ("global_noise", self.global_noise),
        ];
        for (name, s) in sigmas {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::invalid(format!(
                    "{name} must be a finite non-negative number, got {s}"
                )));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let recipe: DegradeRecipe =
            toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        recipe.validate()?;
        Ok(recipe)
    }
}

/// Runs the ring step then the global step. Within each step the blur comes
/// first and noise is added to the blurred result.
pub fn degrade(
    img: &Image,
    face_box: &FaceBox,
    recipe: &DegradeRecipe,
    seed: u64,
) -> Result<Image> {
    recipe.validate()?;
    img.require_space(ColorSpace::Srgb)?;
    face_box.check_inside(img.width(), img.height())?;
    let ring = RingMask::new(*face_box, recipe.ring_width).to_mask(img.width(), img.height())?;

    let local = gaussian_blur(img, recipe.local_kernel, recipe.local_sigma)?;
    let local = add_noise(
        &local,
        recipe.local_noise,
        seed::derive(seed, "degrade/local"),
    );
    let mut stepped = img.clone();
    for (i, (dst, src)) in stepped
        .data_mut()
        .chunks_exact_mut(3)
        .zip(local.data().chunks_exact(3))
        .enumerate()
    {
        if ring.data()[i] == 1.0 {
            dst.copy_from_slice(src);
        }
    }

    let global = gaussian_blur(&stepped, recipe.global_kernel, recipe.global_sigma)?;
    Ok(add_noise(
        &global,
        recipe.global_noise,
        seed::derive(seed, "degrade/global"),
    ))
}
