//! Pseudo geometric priors: the stand-in for a frozen vision foundation
//! model. Produces scale-ambiguous pseudo depth (ground truth times a
//! global scale) and pseudo normals (ground truth rotated per pixel by a
//! fixed angular magnitude about a random in-plane axis).
//!
//! Pseudo normals are returned in the raw outward orientation, matching
//! what tangent-cross-product estimation on the pseudo depth would give;
//! the ground detector expects exactly that.

use articugeo_core::error::{Error, Result};
use articugeo_core::linalg::Mat3;
use articugeo_core::raster::{DepthMap, NormalMap, NormalOrientation};

use crate::render::CameraRender;
use crate::rng::CounterRng;

/// Build (pseudo depth, pseudo normals) from one rendered camera.
///
/// `scale` multiplies ground-truth depth (priors are relative, not metric).
/// `normal_noise_deg` tilts every valid normal by exactly that angle about
/// a seeded random axis orthogonal to it, so the mean angular deviation
/// equals the parameter.
pub fn prior_provider(
    render: &CameraRender,
    scale: f64,
    normal_noise_deg: f64,
    seed: u64,
    stream: u64,
) -> Result<(DepthMap<f64>, NormalMap<f64>)> {
    if scale <= 0.0 {
        return Err(Error::InvalidDepth(scale));
    }
    let pseudo_depth = render.depth.scaled(scale);
    let mut pseudo_normals = render
        .normals
        .oriented(NormalOrientation::Outward);
    if normal_noise_deg != 0.0 {
        let rng = CounterRng::new(seed);
        let angle = normal_noise_deg.to_radians();
        for i in 0..pseudo_normals.vectors.len() {
            if !pseudo_normals.valid[i] {
                continue;
            }
            let n = pseudo_normals.vectors[i];
            let axis = rng.unit_perpendicular(stream, i as u64, n);
            let rot = Mat3::from_axis_angle(axis, angle);
            pseudo_normals.vectors[i] = rot * n;
        }
    }
    Ok((pseudo_depth, pseudo_normals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn rendered() -> CameraRender {
        let scene = fixtures::closure_scene().unwrap();
        let rig = fixtures::default_rig(320, 192).unwrap();
        let traj = fixtures::turning_trajectory(2);
        let cam = rig.camera(articugeo_core::rig::CameraId(5));
        let pose = traj
            .front_pose(0)
            .unwrap()
            .compose(&cam.model.extrinsic_to_lidar);
        crate::render::render_camera(&scene, &cam.model, &pose)
    }

    #[test]
    fn clean_priors_pass_through() {
        let r = rendered();
        let (d, n) = prior_provider(&r, 1.0, 0.0, 1, 0).unwrap();
        assert_eq!(d.values, r.depth.values);
        assert_eq!(n.orientation, NormalOrientation::Outward);
        for i in 0..n.vectors.len() {
            if n.valid[i] {
                // outward = negated camera-facing
                assert!((n.vectors[i] + r.normals.vectors[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn scaled_priors_keep_normals() {
        let r = rendered();
        let (d, n) = prior_provider(&r, 3.0, 0.0, 1, 0).unwrap();
        for i in 0..d.values.len() {
            assert_eq!(d.values[i], 3.0 * r.depth.values[i]);
            if n.valid[i] {
                assert!((n.vectors[i] + r.normals.vectors[i]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn noise_magnitude_is_exact_in_the_mean() {
        let r = rendered();
        let (_, noisy) = prior_provider(&r, 1.0, 5.0, 7, 3).unwrap();
        let clean = r.normals.oriented(NormalOrientation::Outward);
        let mut sum = 0.0;
        let mut count = 0usize;
        for i in 0..noisy.vectors.len() {
            if noisy.valid[i] {
                let dot = noisy.vectors[i].dot(clean.vectors[i]).clamp(-1.0, 1.0);
                sum += dot.acos().to_degrees();
                count += 1;
            }
        }
        assert!(count > 10_000, "need a large sample, got {count}");
        let mean = sum / count as f64;
        assert!((mean - 5.0).abs() < 0.5, "mean deviation {mean} deg");
    }

    #[test]
    fn nonpositive_scale_rejected() {
        let r = rendered();
        assert!(prior_provider(&r, 0.0, 0.0, 1, 0).is_err());
    }
}
