//! Bilinear sampling with honest validity.
//!
//! A sample at continuous (u, v) mixes the four integer-grid neighbors
//! (floor cell). It is valid only when the whole stencil is inside the image
//! and, for depth / normal rasters, every stencil texel is itself valid.
//! Out-of-bounds lookups are never clamped: losses must see the real mask.

use crate::linalg::Vec3;
use crate::raster::{DepthMap, ImageBuffer, NormalMap};
use crate::scalar::Real;

/// Stencil of a continuous coordinate: base texel plus fractional weights.
/// `None` when any of the four neighbors falls outside `width x height`.
#[inline]
pub fn stencil<S: Real>(u: S, v: S, width: u32, height: u32) -> Option<(u32, u32, S, S)> {
    if !(u.is_finite() && v.is_finite()) {
        return None;
    }
    let u0f = u.floor();
    let v0f = v.floor();
    if u0f < S::zero() || v0f < S::zero() {
        return None;
    }
    let u0 = u0f.to_f64_value() as u32;
    let v0 = v0f.to_f64_value() as u32;
    if u0 + 1 >= width || v0 + 1 >= height {
        return None;
    }
    Some((u0, v0, u - u0f, v - v0f))
}

/// Bilinear sample of one image channel.
pub fn sample_image<S: Real>(img: &ImageBuffer<S>, u: S, v: S, c: u32) -> Option<S> {
    let (u0, v0, fu, fv) = stencil(u, v, img.width, img.height)?;
    let one = S::one();
    let w00 = (one - fu) * (one - fv);
    let w10 = fu * (one - fv);
    let w01 = (one - fu) * fv;
    let w11 = fu * fv;
    Some(
        img.get(u0, v0, c) * w00
            + img.get(u0 + 1, v0, c) * w10
            + img.get(u0, v0 + 1, c) * w01
            + img.get(u0 + 1, v0 + 1, c) * w11,
    )
}

/// Bilinear sample of every channel; `None` if the stencil leaves the image.
pub fn sample_image_all<S: Real>(img: &ImageBuffer<S>, u: S, v: S) -> Option<Vec<S>> {
    stencil(u, v, img.width, img.height)?;
    Some(
        (0..img.channels)
            .map(|c| sample_image(img, u, v, c).unwrap())
            .collect(),
    )
}

/// Bilinear depth sample; invalid when any stencil texel has depth <= 0.
pub fn sample_depth<S: Real>(depth: &DepthMap<S>, u: S, v: S) -> Option<S> {
    let (u0, v0, fu, fv) = stencil(u, v, depth.width, depth.height)?;
    let d00 = depth.get(u0, v0);
    let d10 = depth.get(u0 + 1, v0);
    let d01 = depth.get(u0, v0 + 1);
    let d11 = depth.get(u0 + 1, v0 + 1);
    let zero = S::zero();
    if d00 <= zero || d10 <= zero || d01 <= zero || d11 <= zero {
        return None;
    }
    let one = S::one();
    Some(
        d00 * ((one - fu) * (one - fv))
            + d10 * (fu * (one - fv))
            + d01 * ((one - fu) * fv)
            + d11 * (fu * fv),
    )
}

/// Bilinear normal sample, renormalized to unit length. Invalid when the
/// stencil leaves the image, any texel is invalid, or the weighted sum is
/// degenerate (opposing normals cancelling).
pub fn sample_normal<S: Real>(normals: &NormalMap<S>, u: S, v: S) -> Option<Vec3<S>> {
    let (u0, v0, fu, fv) = stencil(u, v, normals.width, normals.height)?;
    if !(normals.is_valid(u0, v0)
        && normals.is_valid(u0 + 1, v0)
        && normals.is_valid(u0, v0 + 1)
        && normals.is_valid(u0 + 1, v0 + 1))
    {
        return None;
    }
    let one = S::one();
    let acc = normals.get(u0, v0).scale((one - fu) * (one - fv))
        + normals.get(u0 + 1, v0).scale(fu * (one - fv))
        + normals.get(u0, v0 + 1).scale((one - fu) * fv)
        + normals.get(u0 + 1, v0 + 1).scale(fu * fv);
    acc.normalized(S::cst(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::NormalOrientation;

    #[test]
    fn integer_coordinates_on_constant_image() {
        let img = ImageBuffer::from_values(4, 4, 1, vec![0.7; 16]);
        assert_eq!(sample_image(&img, 1.0, 2.0, 0), Some(0.7));
    }

    #[test]
    fn midpoint_of_ramp_is_average() {
        // 1-D ramp 1, 3 on the first row
        let mut img = ImageBuffer::new(2, 2, 1);
        img.set(0, 0, 0, 1.0);
        img.set(1, 0, 0, 3.0);
        assert_eq!(sample_image(&img, 0.5, 0.0, 0), Some(2.0));
    }

    #[test]
    fn out_of_bounds_is_invalid() {
        let img = ImageBuffer::from_values(4, 4, 1, vec![0.5; 16]);
        assert_eq!(sample_image(&img, -0.1, 1.0, 0), None);
        assert_eq!(sample_image(&img, 3.0, 1.0, 0), None); // stencil needs u0+1 <= 3
        assert_eq!(sample_image(&img, 2.9, 1.0, 0).is_some(), true);
        assert_eq!(sample_image(&img, 1.0, 3.5, 0), None);
    }

    #[test]
    fn depth_sample_requires_valid_stencil() {
        let mut d = DepthMap::<f64>::new_invalid(2, 2);
        d.set(0, 0, 1.0);
        d.set(1, 0, 1.0);
        d.set(0, 1, 1.0);
        assert_eq!(sample_depth(&d, 0.5, 0.5), None);
        d.set(1, 1, 3.0);
        assert_eq!(sample_depth(&d, 0.5, 0.5), Some(1.5));
    }

    #[test]
    fn normal_sample_renormalizes() {
        let mut n = NormalMap::<f64>::new_invalid(2, 2, NormalOrientation::CameraFacing);
        let a = Vec3::new(0.0, 0.0, -1.0);
        let b = Vec3::new(0.0, -(0.5f64.sqrt()), -(0.5f64.sqrt()));
        n.set(0, 0, a);
        n.set(1, 0, b);
        n.set(0, 1, a);
        n.set(1, 1, b);
        let s = sample_normal(&n, 0.5, 0.5).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn opposing_normals_cancel_to_invalid() {
        let mut n = NormalMap::<f64>::new_invalid(2, 2, NormalOrientation::CameraFacing);
        let a = Vec3::new(0.0, 0.0, 1.0);
        n.set(0, 0, a);
        n.set(1, 0, -a);
        n.set(0, 1, -a);
        n.set(1, 1, a);
        assert_eq!(sample_normal(&n, 0.5, 0.5), None);
    }
}
