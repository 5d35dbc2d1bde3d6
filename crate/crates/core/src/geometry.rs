//! Rigid transforms and the pinhole camera.
//!
//! Coordinate convention, used everywhere in this workspace: camera frames
//! are x-right, y-down, z-forward. A transform maps point coordinates from
//! its source frame into its target frame: `t.apply(p)` is p expressed in the
//! target frame. Rotations are stored as matrices.

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Real;

/// Orthonormality / determinant tolerance for validated transforms.
pub const SE3_TOL: f64 = 1e-9;

pub type Point3<S> = Vec3<S>;

/// Continuous image coordinates (pixels). Integer coordinates are exact
/// sample locations (cell centers).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pixel<S> {
    pub u: S,
    pub v: S,
}

impl<S: Real> Pixel<S> {
    #[inline]
    pub fn new(u: S, v: S) -> Self {
        Pixel { u, v }
    }

    pub fn is_finite(self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }
}

/// Rigid transform: rotation followed by translation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SE3Transform<S> {
    pub rotation: Mat3<S>,
    pub translation: Vec3<S>,
}

impl<S: Real> SE3Transform<S> {
    pub fn identity() -> Self {
        SE3Transform {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
        }
    }

    /// Build without validation. Compositions of valid transforms stay valid
    /// to far better than [`SE3_TOL`], so internal code uses this.
    #[inline]
    pub fn from_parts(rotation: Mat3<S>, translation: Vec3<S>) -> Self {
        SE3Transform {
            rotation,
            translation,
        }
    }

    /// Build and check `R^T R = I` and `det R = +1` within [`SE3_TOL`].
    pub fn new(rotation: Mat3<S>, translation: Vec3<S>) -> Result<Self> {
        let t = SE3Transform::from_parts(rotation, translation);
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.rotation.is_finite() || !self.translation.is_finite() {
            return Err(Error::InvalidTransform("non-finite entries".into()));
        }
        let gram_dev = (self.rotation.transpose() * self.rotation)
            .frobenius_distance_to_identity()
            .to_f64_value();
        if gram_dev > SE3_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation not orthonormal (|R^T R - I| = {gram_dev:.3e})"
            )));
        }
        let det = self.rotation.det().to_f64_value();
        if (det - 1.0).abs() > SE3_TOL {
            return Err(Error::InvalidTransform(format!(
                "rotation determinant {det} != +1"
            )));
        }
        Ok(())
    }

    pub fn from_translation(translation: Vec3<S>) -> Self {
        SE3Transform::from_parts(Mat3::identity(), translation)
    }

    #[inline]
    pub fn apply(&self, p: Point3<S>) -> Point3<S> {
        self.rotation * p + self.translation
    }

    /// Rotate a direction (no translation).
    #[inline]
    pub fn rotate(&self, d: Vec3<S>) -> Vec3<S> {
        self.rotation * d
    }

    /// `(a.compose(b)).apply(p) == a.apply(b.apply(p))`.
    #[inline]
    pub fn compose(&self, inner: &Self) -> Self {
        SE3Transform {
            rotation: self.rotation * inner.rotation,
            translation: self.rotation * inner.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        SE3Transform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Row-major 4x4 flattening (last row 0 0 0 1).
    pub fn to_matrix4(&self) -> [f64; 16] {
        let r = self.rotation.to_f64();
        let t = self.translation.to_f64();
        [
            r.m[0][0], r.m[0][1], r.m[0][2], t.x, //
            r.m[1][0], r.m[1][1], r.m[1][2], t.y, //
            r.m[2][0], r.m[2][1], r.m[2][2], t.z, //
            0.0, 0.0, 0.0, 1.0,
        ]
    }

    /// Parse a row-major 4x4; validates the rotation block.
    pub fn from_matrix4(m: &[f64; 16]) -> Result<SE3Transform<S>> {
        let last: [f64; 4] = [m[12], m[13], m[14], m[15]];
        if last != [0.0, 0.0, 0.0, 1.0] {
            return Err(Error::InvalidTransform(format!(
                "last row must be 0 0 0 1, got {last:?}"
            )));
        }
        let rotation = Mat3 {
            m: [
                [S::cst(m[0]), S::cst(m[1]), S::cst(m[2])],
                [S::cst(m[4]), S::cst(m[5]), S::cst(m[6])],
                [S::cst(m[8]), S::cst(m[9]), S::cst(m[10])],
            ],
        };
        let translation = Vec3::new(S::cst(m[3]), S::cst(m[7]), S::cst(m[11]));
        SE3Transform::new(rotation, translation)
    }

    pub fn cast<T: Real>(&self) -> SE3Transform<T> {
        SE3Transform {
            rotation: self.rotation.cast(),
            translation: self.translation.cast(),
        }
    }
}

/// `|R_a^T R_b - I|_Frobenius`: zero iff the rotations agree.
pub fn rotation_error_frobenius<S: Real>(a: &SE3Transform<S>, b: &SE3Transform<S>) -> S {
    (a.rotation.transpose() * b.rotation).frobenius_distance_to_identity()
}

/// Pinhole camera: intrinsics plus the rigid mount mapping camera
/// coordinates into the vehicle LiDAR frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CameraModel<S> {
    pub fx: S,
    pub fy: S,
    pub cx: S,
    pub cy: S,
    pub width: u32,
    pub height: u32,
    /// Camera frame -> LiDAR frame of the vehicle the camera is mounted on.
    pub extrinsic_to_lidar: SE3Transform<S>,
}

impl<S: Real> CameraModel<S> {
    pub fn new(
        fx: S,
        fy: S,
        cx: S,
        cy: S,
        width: u32,
        height: u32,
        extrinsic_to_lidar: SE3Transform<S>,
    ) -> Result<Self> {
        if fx.to_f64_value() <= 0.0 || fy.to_f64_value() <= 0.0 {
            return Err(Error::InvalidCamera(format!(
                "focal lengths must be positive (fx={fx}, fy={fy})"
            )));
        }
        let (cxf, cyf) = (cx.to_f64_value(), cy.to_f64_value());
        if cxf < 0.0 || cxf >= width as f64 || cyf < 0.0 || cyf >= height as f64 {
            return Err(Error::InvalidCamera(format!(
                "principal point ({cxf}, {cyf}) outside {width}x{height} image"
            )));
        }
        extrinsic_to_lidar.validate()?;
        Ok(CameraModel {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            extrinsic_to_lidar,
        })
    }

    /// Lift a pixel at the given depth into camera coordinates. The returned
    /// z equals `depth` exactly.
    pub fn unproject(&self, p: Pixel<S>, depth: S) -> Result<Point3<S>> {
        if !(depth > S::zero()) {
            return Err(Error::InvalidDepth(depth.to_f64_value()));
        }
        Ok(Vec3::new(
            depth * (p.u - self.cx) / self.fx,
            depth * (p.v - self.cy) / self.fy,
            depth,
        ))
    }

    /// Project a camera-frame point; returns the pixel and its depth (z).
    pub fn project(&self, p: Point3<S>) -> Result<(Pixel<S>, S)> {
        if !(p.z > S::zero()) {
            return Err(Error::BehindCamera {
                z: p.z.to_f64_value(),
            });
        }
        let u = self.fx * p.x / p.z + self.cx;
        let v = self.fy * p.y / p.z + self.cy;
        Ok((Pixel::new(u, v), p.z))
    }

    pub fn cast<T: Real>(&self) -> CameraModel<T> {
        CameraModel {
            fx: T::cst(self.fx.to_f64_value()),
            fy: T::cst(self.fy.to_f64_value()),
            cx: T::cst(self.cx.to_f64_value()),
            cy: T::cst(self.cy.to_f64_value()),
            width: self.width,
            height: self.height,
            extrinsic_to_lidar: self.extrinsic_to_lidar.cast(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_cam() -> CameraModel<f64> {
        CameraModel::new(500.0, 500.0, 320.0, 240.0, 640, 480, SE3Transform::identity()).unwrap()
    }

    #[test]
    fn principal_ray_unprojects_on_axis() {
        let cam = test_cam();
        let p = cam
            .unproject(Pixel::new(320.0, 240.0), 5.0)
            .unwrap();
        assert_eq!(p, Vec3::new(0.0, 0.0, 5.0));
    }

    #[test]
    fn unit_slope_ray() {
        let cam = test_cam();
        let p = cam.unproject(Pixel::new(820.0, 240.0), 5.0).unwrap();
        assert_eq!(p, Vec3::new(5.0, 0.0, 5.0));
    }

    #[test]
    fn project_known_points() {
        let cam = test_cam();
        let (px, d) = cam.project(Vec3::new(0.0, 0.0, 5.0)).unwrap();
        assert_eq!((px.u, px.v, d), (320.0, 240.0, 5.0));
        let (px, d) = cam.project(Vec3::new(5.0, 0.0, 5.0)).unwrap();
        assert_eq!((px.u, px.v, d), (820.0, 240.0, 5.0));
    }

    #[test]
    fn rejects_bad_depth_and_behind_camera() {
        let cam = test_cam();
        assert!(matches!(
            cam.unproject(Pixel::new(1.0, 1.0), 0.0),
            Err(Error::InvalidDepth(_))
        ));
        assert!(matches!(
            cam.project(Vec3::new(0.0, 0.0, -1.0)),
            Err(Error::BehindCamera { .. })
        ));
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let t = SE3Transform::from_parts(
            Mat3::rot_z(0.7) * Mat3::rot_x(-0.3),
            Vec3::new(1.0, -2.0, 0.5),
        );
        let dev = t
            .compose(&t.inverse())
            .rotation
            .frobenius_distance_to_identity();
        assert!(dev < 1e-12);
        assert!(t.compose(&t.inverse()).translation.norm() < 1e-12);
    }

    #[test]
    fn pure_translation_inverse() {
        let t = SE3Transform::<f64>::from_translation(Vec3::new(0.0, 0.0, 1.0));
        assert_eq!(t.inverse().translation, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn half_turn_frobenius_error_is_sqrt8() {
        let a = SE3Transform::<f64>::identity();
        let b = SE3Transform::from_parts(Mat3::rot_z(std::f64::consts::PI), Vec3::zero());
        let err = rotation_error_frobenius(&a, &b);
        assert!((err - 8.0f64.sqrt()).abs() < 1e-12);
        assert!((rotation_error_frobenius(&b, &a) - err).abs() < 1e-12);
    }

    #[test]
    fn matrix4_round_trip() {
        let t = SE3Transform::from_parts(Mat3::rot_y(0.4), Vec3::new(0.1, 0.2, 0.3));
        let back = SE3Transform::<f64>::from_matrix4(&t.to_matrix4()).unwrap();
        assert!(rotation_error_frobenius(&t, &back) < 1e-12);
    }

    #[test]
    fn validation_rejects_scaled_rotation() {
        let mut r = Mat3::<f64>::identity();
        r.m[0][0] = 1.01;
        assert!(SE3Transform::new(r, Vec3::zero()).is_err());
    }
}
