//! Articulated two-vehicle trajectory: per-frame front-vehicle pose plus an
//! articulation angle, with the rear vehicle hanging off a single planar-yaw
//! hinge. All motions and cross-vehicle transforms derive from the same
//! world poses, so every kinematic loop closes by construction.

use articugeo_core::error::{Error, Result};
use articugeo_core::geometry::SE3Transform;
use articugeo_core::linalg::{Mat3, Vec3};
use articugeo_core::rig::Vehicle;

/// Front-vehicle planar pose and hinge angle for one frame.
#[derive(Clone, Copy, Debug)]
pub struct FramePose {
    /// Front LiDAR position in the ground plane, meters.
    pub x: f64,
    pub z: f64,
    /// Heading about the world y (down) axis, radians.
    pub yaw: f64,
    /// Hinge angle: rear heading minus front heading, radians, |angle| < pi/2.
    pub articulation: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub frames: Vec<FramePose>,
    /// Distance from the front LiDAR back to the hinge, meters.
    pub front_arm: f64,
    /// Distance from the hinge back to the rear LiDAR, meters.
    pub rear_arm: f64,
    /// LiDAR height above the ground plane, meters.
    pub lidar_height: f64,
    /// Ground plane world y.
    pub ground_y: f64,
}

impl Trajectory {
    pub fn validate(&self) -> Result<()> {
        if self.frames.is_empty() {
            return Err(Error::DegenerateGeometry("trajectory needs frames"));
        }
        if self.front_arm <= 0.0 || self.rear_arm <= 0.0 || self.lidar_height <= 0.0 {
            return Err(Error::DegenerateGeometry(
                "hinge arms and lidar height must be positive",
            ));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.articulation.abs() >= std::f64::consts::FRAC_PI_2 {
                return Err(Error::Parse {
                    file: "trajectory".into(),
                    line: i + 1,
                    msg: format!("articulation {} out of (-pi/2, pi/2)", f.articulation),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    fn check_frame(&self, frame: usize) -> Result<&FramePose> {
        self.frames.get(frame).ok_or(Error::Parse {
            file: "trajectory".into(),
            line: frame + 1,
            msg: format!("frame {frame} out of range 0..{}", self.frames.len()),
        })
    }

    /// Front LiDAR -> world.
    pub fn front_pose(&self, frame: usize) -> Result<SE3Transform<f64>> {
        let f = self.check_frame(frame)?;
        Ok(SE3Transform::from_parts(
            Mat3::rot_y(f.yaw),
            Vec3::new(f.x, self.ground_y - self.lidar_height, f.z),
        ))
    }

    /// Rear LiDAR -> world, through the hinge.
    pub fn rear_pose(&self, frame: usize) -> Result<SE3Transform<f64>> {
        let f = self.check_frame(frame)?;
        let front_rot = Mat3::rot_y(f.yaw);
        let front_pos = Vec3::new(f.x, self.ground_y - self.lidar_height, f.z);
        let hinge = front_pos + front_rot * Vec3::new(0.0, 0.0, -self.front_arm);
        let rear_yaw = f.yaw + f.articulation;
        let rear_rot = Mat3::rot_y(rear_yaw);
        let rear_pos = hinge + rear_rot * Vec3::new(0.0, 0.0, -self.rear_arm);
        Ok(SE3Transform::from_parts(rear_rot, rear_pos))
    }

    pub fn pose(&self, vehicle: Vehicle, frame: usize) -> Result<SE3Transform<f64>> {
        match vehicle {
            Vehicle::Front => self.front_pose(frame),
            Vehicle::Rear => self.rear_pose(frame),
        }
    }

    /// Rear LiDAR -> front LiDAR at one frame.
    pub fn cross_vehicle(&self, frame: usize) -> Result<SE3Transform<f64>> {
        Ok(self
            .front_pose(frame)?
            .inverse()
            .compose(&self.rear_pose(frame)?))
    }

    /// Motions and articulation transforms for a (t, tau) pairing:
    /// (front motion t->tau, rear motion t->tau, cross at t, cross at tau).
    pub fn articulated_motion(
        &self,
        t: usize,
        tau: usize,
    ) -> Result<(
        SE3Transform<f64>,
        SE3Transform<f64>,
        SE3Transform<f64>,
        SE3Transform<f64>,
    )> {
        let front = self
            .front_pose(tau)?
            .inverse()
            .compose(&self.front_pose(t)?);
        let rear = self.rear_pose(tau)?.inverse().compose(&self.rear_pose(t)?);
        Ok((front, rear, self.cross_vehicle(t)?, self.cross_vehicle(tau)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use articugeo_core::pose::cross_vehicle_pose_error;

    fn straight(n: usize) -> Trajectory {
        Trajectory {
            frames: (0..n)
                .map(|k| FramePose {
                    x: 0.0,
                    z: 1.2 * k as f64,
                    yaw: 0.0,
                    articulation: 0.0,
                })
                .collect(),
            front_arm: 3.0,
            rear_arm: 3.0,
            lidar_height: 2.0,
            ground_y: 0.0,
        }
    }

    fn turning(n: usize) -> Trajectory {
        let mut frames = Vec::new();
        let (mut x, mut z) = (0.0, 0.0);
        for k in 0..n {
            let yaw = 0.035 * k as f64;
            frames.push(FramePose {
                x,
                z,
                yaw,
                articulation: 20.0f64.to_radians() * k as f64 / (n.max(2) - 1) as f64,
            });
            x += 1.2 * yaw.sin();
            z += 1.2 * yaw.cos();
        }
        Trajectory {
            frames,
            front_arm: 3.0,
            rear_arm: 3.0,
            lidar_height: 2.0,
            ground_y: 0.0,
        }
    }

    #[test]
    fn straight_rig_cross_is_pure_z_offset() {
        let traj = straight(3);
        let cross = traj.cross_vehicle(0).unwrap();
        assert!(cross.rotation.frobenius_distance_to_identity() < 1e-12);
        assert!((cross.translation - Vec3::new(0.0, 0.0, -6.0)).norm() < 1e-12);
        // identical motions, identical cross transforms
        let (f, r, c_t, c_tau) = traj.articulated_motion(0, 1).unwrap();
        assert!((f.translation - r.translation).norm() < 1e-12);
        assert!((c_t.translation - c_tau.translation).norm() < 1e-12);
    }

    #[test]
    fn kinematic_loop_closes_through_a_turn() {
        let traj = turning(10);
        for t in 0..9 {
            let (f, r, c_t, c_tau) = traj.articulated_motion(t, t + 1).unwrap();
            let e = cross_vehicle_pose_error(&f, &r, &c_t, &c_tau);
            assert!(
                e.rotation.frobenius_distance_to_identity() < 1e-9,
                "frame {t}: rotation residual"
            );
            assert!(e.translation.norm() < 1e-9, "frame {t}: translation residual");
        }
    }

    #[test]
    fn hinge_perturbation_breaks_closure() {
        let traj = turning(10);
        let mut bent = traj.clone();
        bent.rear_arm += 0.25;
        let (f, r, c_t, _) = traj.articulated_motion(4, 5).unwrap();
        // cross at tau computed from the perturbed geometry
        let c_tau_bent = bent.cross_vehicle(5).unwrap();
        let e = cross_vehicle_pose_error(&f, &r, &c_t, &c_tau_bent);
        let residual = e.translation.norm() + e.rotation.frobenius_distance_to_identity();
        assert!(residual > 1e-4, "expected measurable residual, got {residual}");
    }

    #[test]
    fn articulation_range_is_validated() {
        let mut traj = straight(2);
        traj.frames[1].articulation = 1.6;
        assert!(traj.validate().is_err());
    }

    #[test]
    fn out_of_range_frame_errors() {
        let traj = straight(2);
        assert!(traj.articulated_motion(1, 2).is_err());
    }
}
