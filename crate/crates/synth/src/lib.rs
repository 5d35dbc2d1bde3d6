//! Deterministic synthetic world for the geometric-consistency engine:
//! analytic scenes, an articulated two-vehicle trajectory model, exact
//! renders (image / depth / normals / ground labels), LiDAR sampling, and
//! the pseudo-prior provider standing in for a vision foundation model.

pub mod config;
pub mod fixtures;
pub mod lidar;
pub mod prior;
pub mod render;
pub mod rng;
pub mod scene;
pub mod sequence;
pub mod trajectory;
