use serde::{Deserialize, Serialize};

use super::image::{FaceBox, Mask};
use crate::error::{Error, Result};

/// Rectangular band of width `width` centred on the face-box boundary:
/// `width / 2` pixels inside the box, the rest outside.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingMask {
    pub face_box: FaceBox,
    pub width: usize,
}

impl RingMask {
    pub fn new(face_box: FaceBox, width: usize) -> Self {
        RingMask { face_box, width }
    }

    fn inside(&self) -> usize {
        self.width / 2
    }

    fn outside(&self) -> usize {
        self.width - self.width / 2
    }

    /// Outer rectangle of the band; fails if it leaves the image.
    pub fn outer(&self, width: usize, height: usize) -> Result<FaceBox> {
        let b = self.face_box;
        let o = self.outside();
        if b.x < o || b.y < o {
            return Err(Error::invalid(format!(
                "ring of width {} around {b:?} leaves the image",
                self.width
            )));
        }
        let outer = FaceBox::new(b.x - o, b.y - o, b.w + 2 * o, b.h + 2 * o);
        outer.check_inside(width, height).map_err(|_| {
            Error::invalid(format!(
                "ring of width {} around {b:?} leaves the {width}x{height} image",
                self.width
            ))
        })?;
        Ok(outer)
    }

    /// Region strictly inside the band, if any.
    pub fn inner(&self) -> Option<FaceBox> {
        let b = self.face_box;
        let i = self.inside();
        (b.w > 2 * i && b.h > 2 * i)
            .then(|| FaceBox::new(b.x + i, b.y + i, b.w - 2 * i, b.h - 2 * i))
    }

    pub fn to_mask(&self, width: usize, height: usize) -> Result<Mask> {
        let outer = self.outer(width, height)?;
        let inner = self.inner();
        Ok(Mask::from_fn(width, height, |x, y| {
            let on = outer.contains(x, y) && !inner.is_some_and(|b| b.contains(x, y));
            if on {
                1.0
            } else {
                0.0
            }
        }))
    }
}
