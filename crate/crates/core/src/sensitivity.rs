//! Directional sensitivity of scalar losses to individual depth pixels.
//!
//! Every loss kernel in this crate is generic over the scalar, so running it
//! on a depth map whose pixels are [`Dual`] numbers with one seeded
//! derivative yields d(loss)/d(depth at the seed) exactly, with no step-size
//! choice. Central finite differences over the plain `f64` path serve as the
//! independent cross-check; the two must agree wherever the loss is smooth
//! (away from bilinear cell boundaries and mask flips).

use crate::dual::Dual;
use crate::error::Result;
use crate::geometry::{CameraModel, SE3Transform};
use crate::losses::{loss_photometric_single, MaskedMean};
use crate::normal::{loss_normal_spatial, loss_prior_normal, nc, normal_from_depth};
use crate::raster::{DepthMap, ImageBuffer, NormalMap, NormalOrientation};
use crate::scalar::Real;
use crate::warp::{correspondence, warp_image};

/// Lift an f64 depth map to duals, seeding one pixel's derivative to 1.
pub fn seed_depth(depth: &DepthMap<f64>, seed_u: u32, seed_v: u32) -> DepthMap<Dual> {
    let mut lifted = depth.map(Dual::constant);
    let i = lifted.idx(seed_u, seed_v);
    lifted.values[i] = Dual::variable(depth.values[i]);
    lifted
}

/// d(f)/d(depth[seed]) via the forward-mode path.
pub fn directional_sensitivity<F>(
    depth: &DepthMap<f64>,
    seed_u: u32,
    seed_v: u32,
    f: F,
) -> Result<f64>
where
    F: FnOnce(&DepthMap<Dual>) -> Result<MaskedMean<Dual>>,
{
    let lifted = seed_depth(depth, seed_u, seed_v);
    Ok(f(&lifted)?.value.d)
}

/// Central finite difference of f64-valued `f` w.r.t. one depth pixel.
/// Also reports the valid-pixel counts at the three evaluation points so
/// callers can reject pixels whose masks flip under the step.
pub fn central_difference<F>(
    depth: &DepthMap<f64>,
    seed_u: u32,
    seed_v: u32,
    step: f64,
    mut f: F,
) -> Result<(f64, [usize; 3])>
where
    F: FnMut(&DepthMap<f64>) -> Result<MaskedMean<f64>>,
{
    let i = depth.idx(seed_u, seed_v);
    let center = f(depth)?;
    let mut plus = depth.clone();
    plus.values[i] += step;
    let up = f(&plus)?;
    let mut minus = depth.clone();
    minus.values[i] -= step;
    let down = f(&minus)?;
    Ok((
        (up.value - down.value) / (2.0 * step),
        [down.count, center.count, up.count],
    ))
}

/// Photometric warp loss as a function of the target depth.
pub fn pe_warp_loss<S: Real>(
    target_img: &ImageBuffer<S>,
    source_img: &ImageBuffer<S>,
    est_depth: &DepthMap<S>,
    x_target_to_source: &SE3Transform<S>,
    target_cam: &CameraModel<S>,
    source_cam: &CameraModel<S>,
    alpha: S,
) -> Result<MaskedMean<S>> {
    let (recon, mask) = warp_image(
        target_cam,
        source_cam,
        est_depth,
        x_target_to_source,
        source_img,
    )?;
    loss_photometric_single(target_img, &recon, &mask, alpha)
}

/// Normal consistency against a fixed reference, with the normals derived
/// from the depth under test.
pub fn nc_from_depth_loss<S: Real>(
    est_depth: &DepthMap<S>,
    cam: &CameraModel<S>,
    reference: &NormalMap<S>,
) -> Result<MaskedMean<S>> {
    let normals = normal_from_depth(est_depth, cam, NormalOrientation::CameraFacing);
    nc(&normals, reference, None)
}

/// Spatial normal-consistency loss with both the target normals and the
/// correspondences driven by the depth under test.
pub fn snc_from_depth_loss<S: Real>(
    est_depth_target: &DepthMap<S>,
    normals_source: &NormalMap<S>,
    x_target_to_source: &SE3Transform<S>,
    target_cam: &CameraModel<S>,
    source_cam: &CameraModel<S>,
) -> Result<MaskedMean<S>> {
    let normals_target =
        normal_from_depth(est_depth_target, target_cam, NormalOrientation::CameraFacing);
    loss_normal_spatial(
        &normals_target,
        normals_source,
        est_depth_target,
        x_target_to_source,
        target_cam,
        source_cam,
    )
}

/// Spatial prior-normal loss: fixed priors, correspondences from the depth
/// under test.
pub fn pnc_spatial_from_depth_loss<S: Real>(
    prior_target: &NormalMap<S>,
    prior_source: &NormalMap<S>,
    est_depth_target: &DepthMap<S>,
    x_target_to_source: &SE3Transform<S>,
    target_cam: &CameraModel<S>,
    source_cam: &CameraModel<S>,
) -> Result<MaskedMean<S>> {
    loss_prior_normal(
        prior_target,
        est_depth_target,
        target_cam,
        source_cam,
        &[(prior_source, *x_target_to_source)],
    )
}

/// Whether the pixel's correspondence stays strictly inside one bilinear
/// cell as its depth moves by +-step, with at least `margin` of fractional
/// clearance: the smoothness precondition for finite-difference agreement.
pub fn correspondence_cell_stable(
    target_cam: &CameraModel<f64>,
    source_cam: &CameraModel<f64>,
    x_target_to_source: &SE3Transform<f64>,
    u: u32,
    v: u32,
    depth: f64,
    step: f64,
    margin: f64,
) -> bool {
    let mut cell: Option<(f64, f64)> = None;
    for d in [depth - step, depth, depth + step] {
        let Some((p, _)) = correspondence(target_cam, source_cam, x_target_to_source, u, v, d)
        else {
            return false;
        };
        let (cu, cv) = (p.u.floor(), p.v.floor());
        let (fu, fv) = (p.u - cu, p.v - cv);
        if fu < margin || fu > 1.0 - margin || fv < margin || fv > 1.0 - margin {
            return false;
        }
        match cell {
            None => cell = Some((cu, cv)),
            Some(c) => {
                if c != (cu, cv) {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether a mask is unchanged at the three finite-difference evaluations.
pub fn counts_stable(counts: [usize; 3]) -> bool {
    counts[0] == counts[1] && counts[1] == counts[2]
}

/// Convenience wrapper: lift every immutable input to duals once.
pub struct DualScene {
    pub target_img: ImageBuffer<Dual>,
    pub source_img: ImageBuffer<Dual>,
    pub x: SE3Transform<Dual>,
    pub target_cam: CameraModel<Dual>,
    pub source_cam: CameraModel<Dual>,
}

impl DualScene {
    pub fn lift(
        target_img: &ImageBuffer<f64>,
        source_img: &ImageBuffer<f64>,
        x: &SE3Transform<f64>,
        target_cam: &CameraModel<f64>,
        source_cam: &CameraModel<f64>,
    ) -> Self {
        DualScene {
            target_img: target_img.cast(),
            source_img: source_img.cast(),
            x: x.cast(),
            target_cam: target_cam.cast(),
            source_cam: source_cam.cast(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vec3;

    fn cam(w: u32, h: u32) -> CameraModel<f64> {
        CameraModel::new(
            80.0,
            80.0,
            w as f64 / 2.0,
            h as f64 / 2.0,
            w,
            h,
            SE3Transform::identity(),
        )
        .unwrap()
    }

    fn smooth_image(w: u32, h: u32, phase: f64) -> ImageBuffer<f64> {
        let mut img = ImageBuffer::new(w, h, 1);
        for v in 0..h {
            for u in 0..w {
                img.set(
                    u,
                    v,
                    0,
                    0.5 + 0.25 * ((u as f64) * 0.21 + phase).sin()
                        + 0.2 * ((v as f64) * 0.17 - phase).cos(),
                );
            }
        }
        img
    }

    #[test]
    fn dual_matches_finite_difference_for_warp_pe() {
        let (w, h) = (48u32, 36u32);
        let c = cam(w, h);
        let target_img = smooth_image(w, h, 0.0);
        let source_img = smooth_image(w, h, 0.35);
        let x = SE3Transform::from_translation(Vec3::new(0.4, 0.1, 0.0));
        let mut depth = DepthMap::new_invalid(w, h);
        for v in 0..h {
            for u in 0..w {
                depth.set(u, v, 6.0 + 0.01 * u as f64 + 0.013 * v as f64);
            }
        }
        let scene = DualScene::lift(&target_img, &source_img, &x, &c, &c);
        let mut checked = 0;
        for &(u, v) in &[(10u32, 10u32), (24, 18), (30, 25), (15, 20)] {
            let d = depth.get(u, v);
            let step = 1e-3 * d;
            if !correspondence_cell_stable(&c, &c, &x, u, v, d, step, 0.05) {
                continue;
            }
            let dual = directional_sensitivity(&depth, u, v, |dd| {
                pe_warp_loss(
                    &scene.target_img,
                    &scene.source_img,
                    dd,
                    &scene.x,
                    &scene.target_cam,
                    &scene.source_cam,
                    Dual::constant(0.85),
                )
            })
            .unwrap();
            let (fd, counts) = central_difference(&depth, u, v, step, |dd| {
                pe_warp_loss(&target_img, &source_img, dd, &x, &c, &c, 0.85)
            })
            .unwrap();
            assert!(counts_stable(counts));
            let denom = fd.abs().max(1e-12);
            assert!(
                (dual - fd).abs() / denom < 1e-3,
                "pixel ({u},{v}): dual {dual} vs fd {fd}"
            );
            checked += 1;
        }
        assert!(checked >= 3);
    }
}
