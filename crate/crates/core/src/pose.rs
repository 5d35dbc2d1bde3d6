//! Joint-motion bookkeeping, within-vehicle pose distribution, and the
//! cross-vehicle pose consistency loss.
//!
//! Each vehicle has one joint motion per (t, tau) pair; per-camera motions
//! are the joint motion conjugated through the camera mount. The two
//! vehicles' motions and the articulation transforms at t and tau form a
//! kinematic loop whose residual is identity exactly when the chains agree.

use crate::error::{Error, Result};
use crate::geometry::{rotation_error_frobenius, SE3Transform};
use crate::rig::{camera_pose_from_joint, CameraId, RigConfig, Vehicle};
use crate::scalar::Real;

/// A vehicle's joint motion for one (t, tau) pair, with the per-camera
/// aggregation weights kept as metadata (the upstream aggregation operator
/// itself lives outside this crate).
#[derive(Clone, Debug)]
pub struct JointMotionEstimate<S> {
    pub vehicle: Vehicle,
    /// LiDAR frame at t -> LiDAR frame at tau.
    pub motion: SE3Transform<S>,
    /// Per-camera aggregation weights, finite, sum unconstrained.
    pub camera_weights: Vec<f64>,
}

impl<S: Real> JointMotionEstimate<S> {
    pub fn new(vehicle: Vehicle, motion: SE3Transform<S>) -> Self {
        JointMotionEstimate {
            vehicle,
            motion,
            camera_weights: vec![1.0; 5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.motion.validate()?;
        if self.camera_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidTransform(
                "joint motion camera weights must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Weights of the pose-consistency penalty.
#[derive(Clone, Copy, Debug)]
pub struct VpcWeights {
    pub lambda_rotation: f64,
    pub lambda_translation: f64,
}

impl Default for VpcWeights {
    fn default() -> Self {
        VpcWeights {
            lambda_rotation: 1.0,
            lambda_translation: 1.0,
        }
    }
}

/// Kinematic loop residual:
/// `(front_motion . cross_t)^-1 . (cross_tau . rear_motion)`,
/// with `cross_*` the rear-LiDAR -> front-LiDAR transform at each time.
/// Identity iff the two motion chains commute through the articulation.
pub fn cross_vehicle_pose_error<S: Real>(
    front_motion: &SE3Transform<S>,
    rear_motion: &SE3Transform<S>,
    cross_t: &SE3Transform<S>,
    cross_tau: &SE3Transform<S>,
) -> SE3Transform<S> {
    let left = front_motion.compose(cross_t);
    let right = cross_tau.compose(rear_motion);
    left.inverse().compose(&right)
}

/// `lambda_R |R_e - I|_Frob + lambda_t |t_e|`; zero iff the residual is
/// the identity transform.
pub fn loss_pose_consistency<S: Real>(pose_error: &SE3Transform<S>, weights: &VpcWeights) -> S {
    let rot = rotation_error_frobenius(&SE3Transform::identity(), pose_error);
    let trans = pose_error.translation.norm();
    S::cst(weights.lambda_rotation) * rot + S::cst(weights.lambda_translation) * trans
}

/// Derive every camera motion on the estimate's vehicle by conjugating the
/// joint motion through each camera mount.
pub fn distribute_pose<S: Real>(
    joint: &JointMotionEstimate<S>,
    rig: &RigConfig<S>,
) -> Vec<(CameraId, SE3Transform<S>)> {
    rig.cameras_of(joint.vehicle)
        .map(|cam| (cam.id, camera_pose_from_joint(&cam.model, &joint.motion)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CameraModel;
    use crate::linalg::{Mat3, Vec3};
    use crate::rig::RigCamera;

    #[test]
    fn rigid_rig_identical_motions_close_exactly() {
        // straight motion of an aligned rig: the chains commute bit-exactly
        let motion = SE3Transform::<f64>::from_translation(Vec3::new(0.0, 0.0, 1.5));
        let cross = SE3Transform::from_parts(Mat3::<f64>::identity(), Vec3::new(0.0, 0.0, -7.0));
        let e = cross_vehicle_pose_error(&motion, &motion, &cross, &cross);
        assert!(e.rotation.frobenius_distance_to_identity() < 1e-15);
        assert!(e.translation.norm() < 1e-15);
    }

    #[test]
    fn rigid_rig_conjugated_motion_closes() {
        // turning rigid rig: the rear motion is the front motion seen through
        // the articulation transform, and the loop closes to round-off
        let front = SE3Transform::from_parts(Mat3::rot_y(0.2), Vec3::new(0.1, 0.0, 1.5));
        let cross = SE3Transform::from_parts(Mat3::rot_y(0.4), Vec3::new(0.0, 0.0, -7.0));
        let rear = cross.inverse().compose(&front).compose(&cross);
        let e = cross_vehicle_pose_error(&front, &rear, &cross, &cross);
        assert!(e.rotation.frobenius_distance_to_identity() < 1e-14);
        assert!(e.translation.norm() < 1e-13);
    }

    #[test]
    fn translation_perturbation_moves_residual_by_its_norm() {
        let motion =
            SE3Transform::<f64>::from_parts(Mat3::rot_y(0.15), Vec3::new(0.1, 0.0, 2.0));
        let cross_t = SE3Transform::from_parts(Mat3::rot_y(0.3), Vec3::new(0.0, 0.0, -6.5));
        // consistent chain: rear motion derived so that the loop closes
        let rear = cross_t
            .inverse()
            .compose(&motion.inverse())
            .compose(&cross_t)
            .inverse();
        // cross_tau chosen to close the loop with this rear motion:
        // cross_tau = front_motion . cross_t . rear_motion^-1
        let cross_tau = motion.compose(&cross_t).compose(&rear.inverse());
        let closed = cross_vehicle_pose_error(&motion, &rear, &cross_t, &cross_tau);
        assert!(closed.translation.norm() < 1e-12);

        let delta = Vec3::new(0.06, 0.0, 0.08); // |delta| = 0.1
        let perturbed = rear.compose(&SE3Transform::from_translation(delta));
        let e = cross_vehicle_pose_error(&motion, &perturbed, &cross_t, &cross_tau);
        assert!((e.translation.norm() - 0.1).abs() < 1e-12);
        assert!(e.rotation.frobenius_distance_to_identity() < 1e-12);

        let l = loss_pose_consistency(&e, &VpcWeights::default());
        assert!((l - 0.1).abs() < 1e-9);
    }

    #[test]
    fn vpc_loss_values() {
        let w = VpcWeights::default();
        assert_eq!(
            loss_pose_consistency(&SE3Transform::<f64>::identity(), &w),
            0.0
        );
        let t = SE3Transform::<f64>::from_translation(Vec3::new(3.0, 4.0, 0.0));
        assert!((loss_pose_consistency(&t, &w) - 5.0).abs() < 1e-12);
        let r = SE3Transform::from_parts(Mat3::rot_z(std::f64::consts::PI), Vec3::zero());
        let rot_only = VpcWeights {
            lambda_rotation: 1.0,
            lambda_translation: 0.0,
        };
        assert!((loss_pose_consistency(&r, &rot_only) - 8.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn vpc_monotone_in_rotation_angle() {
        let w = VpcWeights {
            lambda_rotation: 1.0,
            lambda_translation: 0.0,
        };
        let mut last = -1.0;
        for deg in [5.0, 30.0, 90.0, 150.0, 180.0] {
            let r = SE3Transform::from_parts(Mat3::rot_y((deg as f64).to_radians()), Vec3::zero());
            let l = loss_pose_consistency(&r, &w);
            assert!(l > last, "loss not increasing at {deg} deg");
            last = l;
        }
    }

    fn rig_with_mounts() -> RigConfig<f64> {
        let mut cams = Vec::new();
        for i in 0..10u8 {
            let vehicle = if i < 5 { Vehicle::Rear } else { Vehicle::Front };
            let mount = SE3Transform::from_parts(
                Mat3::rot_y(0.6 * i as f64) * Mat3::rot_x(0.05),
                Vec3::new(0.3 * i as f64, -0.2, 0.4),
            );
            cams.push(RigCamera {
                id: CameraId(i),
                vehicle,
                model: CameraModel::new(100.0, 100.0, 32.0, 24.0, 64, 48, mount).unwrap(),
                height_gt: 1.6,
            });
        }
        RigConfig::new(cams, vec![], None).unwrap()
    }

    #[test]
    fn distributed_poses_conjugate_back_to_joint() {
        let rig = rig_with_mounts();
        let joint = JointMotionEstimate::new(
            Vehicle::Front,
            SE3Transform::from_parts(Mat3::rot_y(0.12), Vec3::new(0.1, 0.02, 1.8)),
        );
        let distributed = distribute_pose(&joint, &rig);
        assert_eq!(distributed.len(), 5);
        for (id, pose) in distributed {
            let e = &rig.camera(id).model.extrinsic_to_lidar;
            let back = e.compose(&pose).compose(&e.inverse());
            assert!(rotation_error_frobenius(&back, &joint.motion) < 1e-12);
            assert!((back.translation - joint.motion.translation).norm() < 1e-12);
        }
    }

    #[test]
    fn identity_joint_distributes_to_identities() {
        let rig = rig_with_mounts();
        let joint = JointMotionEstimate::new(Vehicle::Rear, SE3Transform::identity());
        for (_, pose) in distribute_pose(&joint, &rig) {
            assert!(pose.rotation.frobenius_distance_to_identity() < 1e-12);
            assert!(pose.translation.norm() < 1e-12);
        }
    }
}
