use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorSpace {
    Srgb,
    Lab,
}

/// Interleaved RGB (or Lab) float image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    space: ColorSpace,
    data: Vec<f32>,
}

impl Image {
    pub fn new(width: usize, height: usize, space: ColorSpace) -> Self {
        Image {
            width,
            height,
            space,
            data: vec![0.0; width * height * 3],
        }
    }

    pub fn from_data(
        width: usize,
        height: usize,
        space: ColorSpace,
        data: Vec<f32>,
    ) -> Result<Self> {
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "{} samples for a {width}x{height} 3-channel image",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("image contains non-finite samples"));
        }
        Ok(Image {
            width,
            height,
            space,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [f32; 3]) -> Self {
        let mut img = Image::new(width, height, ColorSpace::Srgb);
        for px in img.data.chunks_exact_mut(3) {
            px.copy_from_slice(&rgb);
        }
        img
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [f32; 3],
    ) -> Self {
        let mut img = Image::new(width, height, ColorSpace::Srgb);
        for y in 0..height {
            for x in 0..width {
                img.set(x, y, f(x, y));
            }
        }
        img
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub(crate) fn with_space(mut self, space: ColorSpace) -> Self {
        self.space = space;
        self
    }

    pub fn same_shape(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f32; 3] {
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, v: [f32; 3]) {
        let i = (y * self.width + x) * 3;
        self.data[i..i + 3].copy_from_slice(&v);
    }

    pub fn require_space(&self, space: ColorSpace) -> Result<()> {
        if self.space != space {
            return Err(Error::invalid(format!(
                "expected a {space:?} image, got {:?}",
                self.space
            )));
        }
        Ok(())
    }

    pub fn crop(&self, b: &FaceBox) -> Result<Image> {
        b.check_inside(self.width, self.height)?;
        let mut out = Image::new(b.w, b.h, self.space);
        for y in 0..b.h {
            let src = ((b.y + y) * self.width + b.x) * 3;
            let dst = y * b.w * 3;
            out.data[dst..dst + b.w * 3].copy_from_slice(&self.data[src..src + b.w * 3]);
        }
        Ok(out)
    }

    /// Copies `patch` into this image with its top-left corner at `(x, y)`.
    pub fn paste(&mut self, patch: &Image, x: usize, y: usize) -> Result<()> {
        FaceBox::new(x, y, patch.width, patch.height).check_inside(self.width, self.height)?;
        for row in 0..patch.height {
            let dst = ((y + row) * self.width + x) * 3;
            let src = row * patch.width * 3;
            self.data[dst..dst + patch.width * 3]
                .copy_from_slice(&patch.data[src..src + patch.width * 3]);
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().map(|&v| v as f64).sum::<f64>() / self.data.len().max(1) as f64
    }
}

/// Single-channel weight map in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    width: usize,
    height: usize,
    data: Vec<f32>,
}

impl Mask {
    pub fn new(width: usize, height: usize) -> Self {
        Mask {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }

    pub fn filled(width: usize, height: usize, value: f32) -> Self {
        Mask {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let mut m = Mask::new(width, height);
        for y in 0..height {
            for x in 0..width {
                m.data[y * width + x] = f(x, y);
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    /// Region membership: weight of at least one half.
    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.get(x, y) >= 0.5
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&v| v >= 0.5).count()
    }

    pub fn matches(&self, img: &Image) -> bool {
        self.width == img.width() && self.height == img.height()
    }
}

/// Axis-aligned pixel rectangle `[x, x + w) x [y, y + h)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceBox {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl FaceBox {
    pub fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        FaceBox { x, y, w, h }
    }

    pub fn check_inside(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 || self.x + self.w > width || self.y + self.h > height {
            return Err(Error::invalid(format!(
                "box {self:?} does not fit a {width}x{height} image"
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.x + self.w && y >= self.y && y < self.y + self.h
    }

    /// Distance from the centre of pixel `(x, y)` to the nearest box edge,
    /// or 0 outside the box.
    pub fn inner_distance(&self, x: usize, y: usize) -> f64 {
        if !self.contains(x, y) {
            return 0.0;
        }
        let cx = x as f64 + 0.5;
        let cy = y as f64 + 0.5;
        let dx = (cx - self.x as f64).min((self.x + self.w) as f64 - cx);
        let dy = (cy - self.y as f64).min((self.y + self.h) as f64 - cy);
        dx.min(dy)
    }
}
