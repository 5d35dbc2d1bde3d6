//! `calibrate`: cross-vehicle extrinsics by point-to-point ICP between the
//! two LiDAR clouds. Registering the rear cloud (source) onto the front
//! cloud (target) yields the rear-LiDAR -> front-LiDAR transform.

use std::path::PathBuf;

use articugeo_core::error::{Error, Result};
use articugeo_core::io;
use articugeo_core::pointcloud::{icp_register, IcpConfig, IcpResult};

use crate::args::{Args, UsageError};

pub struct CalibrateParams {
    pub source: PathBuf,
    pub target: PathBuf,
    pub out: Option<PathBuf>,
    pub max_iterations: usize,
    pub convergence_eps: f64,
    pub max_correspondence_dist: f64,
    pub init: Option<PathBuf>,
}

impl CalibrateParams {
    pub fn from_args(args: &Args) -> std::result::Result<Self, UsageError> {
        Ok(CalibrateParams {
            source: args.path("source")?,
            target: args.path("target")?,
            out: args.get("out").map(PathBuf::from),
            max_iterations: args.parse_u64("max-iter", 50)? as usize,
            convergence_eps: args.parse_f64("eps", 1e-5)?,
            max_correspondence_dist: args.parse_f64("max-dist", 1.0)?,
            init: args.get("init").map(PathBuf::from),
        })
    }
}

pub fn run(params: &CalibrateParams) -> Result<IcpResult> {
    let source = io::read_ply(&params.source)?;
    let target = io::read_ply(&params.target)?;
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let initial_guess = match &params.init {
        Some(p) => io::read_transform(p)?,
        None => articugeo_core::geometry::SE3Transform::identity(),
    };
    let cfg = IcpConfig {
        max_iterations: params.max_iterations,
        convergence_eps: params.convergence_eps,
        max_correspondence_dist: params.max_correspondence_dist,
        initial_guess,
    };
    let result = icp_register(&source, &target, &cfg)?;
    if let Some(out) = &params.out {
        io::write_transform(
            out,
            &result.transform,
            &[
                ("rms_residual", result.rms_residual),
                ("iterations", result.iterations as f64),
                ("correspondences", result.correspondences as f64),
            ],
        )?;
    }
    Ok(result)
}
