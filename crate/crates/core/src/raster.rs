//! Row-major raster containers: depth, intensity images, normals, masks.
//!
//! Invalid depth is encoded as 0 (never NaN) so rasters stay bit-comparable;
//! validity always travels as an explicit flag or mask.

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Per-pixel metric depth in meters. Value 0 marks an invalid pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthMap<S> {
    pub width: u32,
    pub height: u32,
    pub values: Vec<S>,
}

impl<S: Real> DepthMap<S> {
    pub fn new_invalid(width: u32, height: u32) -> Self {
        DepthMap {
            width,
            height,
            values: vec![S::zero(); (width * height) as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, values: Vec<S>) -> Self {
        assert_eq!(values.len(), (width * height) as usize);
        DepthMap {
            width,
            height,
            values,
        }
    }

    #[inline]
    pub fn idx(&self, u: u32, v: u32) -> usize {
        (v * self.width + u) as usize
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> S {
        self.values[self.idx(u, v)]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, d: S) {
        let i = self.idx(u, v);
        self.values[i] = d;
    }

    #[inline]
    pub fn is_valid(&self, u: u32, v: u32) -> bool {
        self.get(u, v) > S::zero()
    }

    pub fn validity_mask(&self) -> PixelMask {
        PixelMask {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|d| *d > S::zero()).collect(),
        }
    }

    pub fn map<T: Real>(&self, f: impl Fn(S) -> T) -> DepthMap<T> {
        DepthMap {
            width: self.width,
            height: self.height,
            values: self.values.iter().map(|v| f(*v)).collect(),
        }
    }

    pub fn cast<T: Real>(&self) -> DepthMap<T> {
        self.map(|v| T::cst(v.to_f64_value()))
    }

    /// Uniform scale; invalid pixels (0) stay invalid.
    pub fn scaled(&self, s: S) -> DepthMap<S> {
        self.map(|d| if d > S::zero() { d * s } else { S::zero() })
    }
}

/// Intensity image, 1 or 3 interleaved channels, values in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer<S> {
    pub width: u32,
    pub height: u32,
    pub channels: u32,
    pub values: Vec<S>,
}

impl<S: Real> ImageBuffer<S> {
    pub fn new(width: u32, height: u32, channels: u32) -> Self {
        assert!(channels == 1 || channels == 3, "channels must be 1 or 3");
        ImageBuffer {
            width,
            height,
            channels,
            values: vec![S::zero(); (width * height * channels) as usize],
        }
    }

    pub fn from_values(width: u32, height: u32, channels: u32, values: Vec<S>) -> Self {
        assert!(channels == 1 || channels == 3);
        assert_eq!(values.len(), (width * height * channels) as usize);
        ImageBuffer {
            width,
            height,
            channels,
            values,
        }
    }

    #[inline]
    pub fn idx(&self, u: u32, v: u32, c: u32) -> usize {
        ((v * self.width + u) * self.channels + c) as usize
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32, c: u32) -> S {
        self.values[self.idx(u, v, c)]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, c: u32, x: S) {
        let i = self.idx(u, v, c);
        self.values[i] = x;
    }

    pub fn cast<T: Real>(&self) -> ImageBuffer<T> {
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: self.channels,
            values: self
                .values
                .iter()
                .map(|v| T::cst(v.to_f64_value()))
                .collect(),
        }
    }
}

/// Which way consistently-oriented normals point relative to the camera.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalOrientation {
    /// `N . (-P) > 0`: the normal faces the camera.
    CameraFacing,
    /// The raw tangent-cross-product orientation: `N . P > 0` for visible
    /// surfaces (points away from the camera). Ground detection against the
    /// +y axis uses this orientation.
    Outward,
}

impl NormalOrientation {
    pub fn flipped(self) -> Self {
        match self {
            NormalOrientation::CameraFacing => NormalOrientation::Outward,
            NormalOrientation::Outward => NormalOrientation::CameraFacing,
        }
    }
}

/// Per-pixel unit normals in camera coordinates plus validity.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalMap<S> {
    pub width: u32,
    pub height: u32,
    pub vectors: Vec<Vec3<S>>,
    pub valid: Vec<bool>,
    pub orientation: NormalOrientation,
}

impl<S: Real> NormalMap<S> {
    pub fn new_invalid(width: u32, height: u32, orientation: NormalOrientation) -> Self {
        NormalMap {
            width,
            height,
            vectors: vec![Vec3::zero(); (width * height) as usize],
            valid: vec![false; (width * height) as usize],
            orientation,
        }
    }

    #[inline]
    pub fn idx(&self, u: u32, v: u32) -> usize {
        (v * self.width + u) as usize
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> Vec3<S> {
        self.vectors[self.idx(u, v)]
    }

    #[inline]
    pub fn is_valid(&self, u: u32, v: u32) -> bool {
        self.valid[self.idx(u, v)]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, n: Vec3<S>) {
        let i = self.idx(u, v);
        self.vectors[i] = n;
        self.valid[i] = true;
    }

    pub fn validity_mask(&self) -> PixelMask {
        PixelMask {
            width: self.width,
            height: self.height,
            values: self.valid.clone(),
        }
    }

    /// Same map expressed in the other orientation (global negation).
    pub fn flipped(&self) -> NormalMap<S> {
        NormalMap {
            width: self.width,
            height: self.height,
            vectors: self.vectors.iter().map(|n| -*n).collect(),
            valid: self.valid.clone(),
            orientation: self.orientation.flipped(),
        }
    }

    /// View of the map in the requested orientation, flipping if needed.
    pub fn oriented(&self, orientation: NormalOrientation) -> NormalMap<S> {
        if self.orientation == orientation {
            self.clone()
        } else {
            self.flipped()
        }
    }

    pub fn cast<T: Real>(&self) -> NormalMap<T> {
        NormalMap {
            width: self.width,
            height: self.height,
            vectors: self.vectors.iter().map(|n| n.cast()).collect(),
            valid: self.valid.clone(),
            orientation: self.orientation,
        }
    }
}

/// Boolean per-pixel mask.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelMask {
    pub width: u32,
    pub height: u32,
    pub values: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: u32, height: u32, value: bool) -> Self {
        PixelMask {
            width,
            height,
            values: vec![value; (width * height) as usize],
        }
    }

    #[inline]
    pub fn idx(&self, u: u32, v: u32) -> usize {
        (v * self.width + u) as usize
    }

    #[inline]
    pub fn get(&self, u: u32, v: u32) -> bool {
        self.values[self.idx(u, v)]
    }

    #[inline]
    pub fn set(&mut self, u: u32, v: u32, b: bool) {
        let i = self.idx(u, v);
        self.values[i] = b;
    }

    pub fn count_true(&self) -> usize {
        self.values.iter().filter(|b| **b).count()
    }

    pub fn same_dims(&self, other: &PixelMask) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Logical AND of masks. Errors on dimension mismatch or an empty list.
pub fn combine_masks(masks: &[&PixelMask]) -> Result<PixelMask> {
    let first = masks
        .first()
        .ok_or(Error::EmptySources("combine_masks"))?;
    let mut out = (*first).clone();
    for m in &masks[1..] {
        if !out.same_dims(m) {
            return Err(Error::DimensionMismatch {
                expected: (out.width, out.height),
                got: (m.width, m.height),
                what: "combine_masks",
            });
        }
        for (o, v) in out.values.iter_mut().zip(m.values.iter()) {
            *o = *o && *v;
        }
    }
    Ok(out)
}
