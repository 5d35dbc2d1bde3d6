//! Deterministic multi-view geometric-consistency kernels for articulated
//! two-segment camera rigs: pinhole/SE(3) geometry, warping, photometric and
//! geometric consistency losses, surface-normal reprojection, ground-plane
//! camera-height regularization, cross-vehicle pose consistency, ICP
//! extrinsic calibration, and depth evaluation metrics.
//!
//! All numeric kernels are generic over the [`scalar::Real`] scalar
//! (`f32`, `f64`, or the forward-mode [`dual::Dual`] used for sensitivity
//! checks); the aliases below fix the default `f64` instantiation.

pub mod dual;
pub mod error;
pub mod geometry;
pub mod ground;
pub mod io;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod normal;
pub mod pipeline;
pub mod pointcloud;
pub mod pose;
pub mod raster;
pub mod rig;
pub mod sample;
pub mod scalar;
pub mod sensitivity;
pub mod warp;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default `f64` instantiations.
pub type Se3 = geometry::SE3Transform<f64>;
pub type Camera = geometry::CameraModel<f64>;
pub type Pix = geometry::Pixel<f64>;
pub type Point = linalg::Vec3<f64>;
pub type Depth = raster::DepthMap<f64>;
pub type Image = raster::ImageBuffer<f64>;
pub type Normals = raster::NormalMap<f64>;
pub type Mask = raster::PixelMask;

/// `f32` instantiations for memory-constrained callers.
pub type Se3F32 = geometry::SE3Transform<f32>;
pub type CameraF32 = geometry::CameraModel<f32>;
pub type DepthF32 = raster::DepthMap<f32>;
