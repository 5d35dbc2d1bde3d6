//! Built-in rigs, scenes and trajectories used by the verification suites
//! and shipped as sample configs.

use articugeo_core::error::Result;
use articugeo_core::geometry::{CameraModel, SE3Transform};
use articugeo_core::linalg::{Mat3, Vec3};
use articugeo_core::rig::{CameraId, RigCamera, RigConfig, Vehicle};

use crate::scene::{Primitive, Scene, Texture, Wave};
use crate::trajectory::{FramePose, Trajectory};

/// LiDAR height above ground for both vehicles, meters.
pub const LIDAR_HEIGHT: f64 = 2.0;
/// Camera drop below the LiDAR in the mount frame, meters (y-down).
pub const CAMERA_DROP: f64 = 0.4;
/// Downward pitch of every camera, radians. Kept small so the camera y axis
/// stays within the ground detector's angular threshold of gravity.
pub const CAMERA_PITCH: f64 = 0.05235987755982989; // 3 degrees

/// Horizontal field of view of every camera, degrees.
pub const FOV_DEG: f64 = 100.0;

/// Per-camera mounting: (vehicle, position in LiDAR frame, yaw about y).
/// Front vehicle heads +z; the rear vehicle trails behind it. Side cameras
/// angle outward so adjacent view cones overlap within and across vehicles.
fn mounts() -> [(Vehicle, Vec3<f64>, f64); 10] {
    let d = CAMERA_DROP;
    [
        // rear vehicle
        (Vehicle::Rear, Vec3::new(0.0, d, -2.0), 180.0),  // C0 rear view
        (Vehicle::Rear, Vec3::new(-0.9, d, -1.2), -125.0), // C1 left rear
        (Vehicle::Rear, Vec3::new(-0.9, d, 1.2), -55.0),  // C2 left front
        (Vehicle::Rear, Vec3::new(0.9, d, 1.2), 55.0),    // C3 right front
        (Vehicle::Rear, Vec3::new(0.9, d, -1.2), 125.0),  // C4 right rear
        // front vehicle
        (Vehicle::Front, Vec3::new(0.0, d, 2.0), 0.0),    // C5 front view
        (Vehicle::Front, Vec3::new(0.9, d, 1.2), 55.0),   // C6 right front
        (Vehicle::Front, Vec3::new(0.9, d, -1.2), 125.0), // C7 right rear
        (Vehicle::Front, Vec3::new(-0.9, d, -1.2), -125.0), // C8 left rear
        (Vehicle::Front, Vec3::new(-0.9, d, 1.2), -55.0), // C9 left front
    ]
}

/// Camera -> LiDAR mount from position and yaw, pitched down by
/// [`CAMERA_PITCH`].
pub fn mount_transform(position: Vec3<f64>, yaw_deg: f64) -> SE3Transform<f64> {
    let rot = Mat3::rot_y(yaw_deg.to_radians()) * Mat3::rot_x(-CAMERA_PITCH);
    SE3Transform::from_parts(rot, position)
}

/// The ten-camera rig at the given raster size.
pub fn default_rig(width: u32, height: u32) -> Result<RigConfig<f64>> {
    let fx = (width as f64 / 2.0) / (FOV_DEG.to_radians() / 2.0).tan();
    let mut cameras = Vec::new();
    for (i, (vehicle, position, yaw)) in mounts().into_iter().enumerate() {
        let model = CameraModel::new(
            fx,
            fx,
            width as f64 / 2.0,
            height as f64 / 2.0,
            width,
            height,
            mount_transform(position, yaw),
        )?;
        cameras.push(RigCamera {
            id: CameraId(i as u8),
            vehicle,
            model,
            height_gt: LIDAR_HEIGHT - CAMERA_DROP,
        });
    }
    let ids = |pairs: &[(u8, u8)]| {
        pairs
            .iter()
            .map(|&(a, b)| (CameraId(a), CameraId(b)))
            .collect::<Vec<_>>()
    };
    // adjacent overlapping cones on each vehicle
    let wv_pairs = ids(&[
        (5, 6),
        (6, 7),
        (8, 9),
        (9, 5),
        (0, 1),
        (1, 2),
        (3, 4),
        (4, 0),
    ]);
    RigConfig::new(cameras, wv_pairs, None)
}

fn ground_texture() -> Texture {
    // wavelengths of 15-30 m: at the 12 m closure visibility cap the image
    // stays far below the bilinear Nyquist band everywhere
    Texture {
        base: 0.55,
        waves: vec![
            Wave {
                amplitude: 0.16,
                freq: Vec3::new(0.051, 0.0, 0.023),
                phase: 0.7,
            },
            Wave {
                amplitude: 0.13,
                freq: Vec3::new(0.017, 0.0, 0.057),
                phase: 2.1,
            },
            Wave {
                amplitude: 0.08,
                freq: Vec3::new(-0.037, 0.0, 0.041),
                phase: 4.0,
            },
        ],
    }
}

fn wall_texture(phase: f64) -> Texture {
    Texture {
        base: 0.5,
        waves: vec![
            Wave {
                amplitude: 0.17,
                freq: Vec3::new(0.09, 0.11, 0.05),
                phase,
            },
            Wave {
                amplitude: 0.12,
                freq: Vec3::new(0.04, -0.08, 0.12),
                phase: phase + 1.3,
            },
        ],
    }
}

/// Smooth-everywhere world: textured infinite ground only, with depth
/// validity capped at 12 m. Every pixel that enters a loss sees a smooth
/// surface at moderate incidence, so consistency losses with ground-truth
/// inputs bottom out at interpolation error; near-horizon grazing rays are
/// simply invalid, never warped, never sampled.
pub fn closure_scene() -> Result<Scene> {
    Scene::new(
        vec![Primitive::Ground {
            y: 0.0,
            texture: ground_texture(),
        }],
        8.0,
    )
}

/// Ground enclosed by an octagon of walls, with boxes scattered inside:
/// every LiDAR ray terminates within ~25 m and the vertical structure
/// breaks the azimuthal ring symmetry of scan-vs-scan registration.
pub fn structured_scene() -> Result<Scene> {
    let mut primitives = vec![Primitive::Ground {
        y: 0.0,
        texture: ground_texture(),
    }];
    let apothem = 14.0;
    let half_width = apothem * (std::f64::consts::PI / 8.0).tan();
    for k in 0..8 {
        let yaw = k as f64 * std::f64::consts::FRAC_PI_4;
        primitives.push(Primitive::Wall {
            center: Vec3::new(apothem * yaw.sin(), -3.0, apothem * yaw.cos()),
            normal_yaw: yaw,
            // slight overlap at the seams so no ray escapes
            width: 2.0 * half_width + 1.0,
            height: 6.0,
            texture: wall_texture(0.8 * k as f64),
        });
    }
    let boxes = [
        (Vec3::new(6.0, -2.2, 8.0), Vec3::new(8.5, 0.0, 10.5)),
        (Vec3::new(-9.0, -1.6, 4.0), Vec3::new(-6.5, 0.0, 6.0)),
        (Vec3::new(3.0, -3.0, -12.0), Vec3::new(6.0, 0.0, -9.5)),
        (Vec3::new(-7.0, -2.5, -9.0), Vec3::new(-4.5, 0.0, -6.0)),
        (Vec3::new(9.0, -1.8, -2.0), Vec3::new(11.0, 0.0, 0.5)),
        (Vec3::new(-11.0, -2.0, 9.0), Vec3::new(-9.0, 0.0, 11.0)),
    ];
    for (i, (min, max)) in boxes.into_iter().enumerate() {
        primitives.push(Primitive::Block {
            min,
            max,
            texture: wall_texture(0.9 * i as f64 + 0.4),
        });
    }
    Scene::new(primitives, 80.0)
}

/// Ground, a fronto-parallel far wall, and a box edge in front of it: the
/// box silhouette puts a clean depth step in the forward cameras.
pub fn step_scene() -> Result<Scene> {
    Scene::new(
        vec![
            Primitive::Ground {
                y: 0.0,
                texture: ground_texture(),
            },
            Primitive::Wall {
                center: Vec3::new(0.0, -2.0, 14.0),
                normal_yaw: std::f64::consts::PI,
                width: 60.0,
                height: 4.0,
                texture: wall_texture(0.5),
            },
            Primitive::Block {
                min: Vec3::new(-4.0, -2.4, 7.5),
                max: Vec3::new(-0.5, 0.0, 9.0),
                texture: wall_texture(3.8),
            },
        ],
        80.0,
    )
}

/// Gentle left turn with the articulation swinging 0 -> 20 degrees.
pub fn turning_trajectory(n_frames: usize) -> Trajectory {
    let n = n_frames.max(2);
    let mut frames = Vec::with_capacity(n);
    let (mut x, mut z) = (0.0, 0.0);
    for k in 0..n {
        let yaw = 0.035 * k as f64;
        frames.push(FramePose {
            x,
            z,
            yaw,
            articulation: 20.0f64.to_radians() * k as f64 / (n - 1) as f64,
        });
        x += 1.2 * yaw.sin();
        z += 1.2 * yaw.cos();
    }
    Trajectory {
        frames,
        front_arm: 3.0,
        rear_arm: 3.0,
        lidar_height: LIDAR_HEIGHT,
        ground_y: 0.0,
    }
}

/// Straight constant-speed run, zero articulation.
pub fn straight_trajectory(n_frames: usize) -> Trajectory {
    Trajectory {
        frames: (0..n_frames.max(1))
            .map(|k| FramePose {
                x: 0.0,
                z: 1.2 * k as f64,
                yaw: 0.0,
                articulation: 0.0,
            })
            .collect(),
        front_arm: 3.0,
        rear_arm: 3.0,
        lidar_height: LIDAR_HEIGHT,
        ground_y: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rig_has_designed_shape() {
        let rig = default_rig(320, 192).unwrap();
        assert_eq!(rig.cameras().len(), 10);
        assert_eq!(rig.cameras_of(Vehicle::Front).count(), 5);
        assert_eq!(rig.cameras_of(Vehicle::Rear).count(), 5);
        // published pair table passes the overlap sanity check
        assert!(rig.check_cv_overlap().is_empty(), "{:?}", rig.check_cv_overlap());
        // focal length realizes the designed field of view
        let cam = &rig.camera(CameraId(5)).model;
        let fov = 2.0 * ((cam.width as f64 / 2.0) / cam.fx).atan().to_degrees();
        assert!((fov - FOV_DEG).abs() < 1e-9);
    }

    #[test]
    fn scenes_validate() {
        closure_scene().unwrap();
        structured_scene().unwrap();
        step_scene().unwrap();
        turning_trajectory(10).validate().unwrap();
        straight_trajectory(3).validate().unwrap();
    }
}
