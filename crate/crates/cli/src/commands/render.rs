//! `render`: trace every frame of a scene/rig/trajectory into the raster
//! formats, emit pseudo priors and optional LiDAR clouds, and write the run
//! manifest. Byte-identical for identical inputs and seed.

use std::path::{Path, PathBuf};

use articugeo_core::error::{Error, Result};
use articugeo_core::io;
use articugeo_core::rig::{CameraId, Vehicle};
use articugeo_synth::config;
use articugeo_synth::lidar::{sample_lidar, LidarPattern};
use articugeo_synth::prior::prior_provider;
use articugeo_synth::render::render;

use crate::args::{Args, UsageError};

pub struct RenderParams {
    pub scene: PathBuf,
    pub rig: PathBuf,
    pub traj: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
    pub prior_scale: f64,
    pub prior_noise_deg: f64,
    /// Which frames get LiDAR clouds: "none", "first", or "all".
    pub lidar: String,
    pub lidar_noise: f64,
}

impl RenderParams {
    pub fn from_args(args: &Args) -> std::result::Result<Self, UsageError> {
        Ok(RenderParams {
            scene: args.path("scene")?,
            rig: args.path("rig")?,
            traj: args.path("traj")?,
            out: args.path("out")?,
            seed: args.parse_u64("seed", 0)?,
            prior_scale: args.parse_f64("prior-scale", 1.0)?,
            prior_noise_deg: args.parse_f64("prior-noise-deg", 0.0)?,
            lidar: args.get("lidar").unwrap_or("first").to_string(),
            lidar_noise: args.parse_f64("lidar-noise", 0.01)?,
        })
    }
}

pub fn run(params: &RenderParams) -> Result<PathBuf> {
    if !matches!(params.lidar.as_str(), "none" | "first" | "all") {
        return Err(Error::Parse {
            file: "--lidar".into(),
            line: 0,
            msg: format!("expected none|first|all, got `{}`", params.lidar),
        });
    }
    let scene = config::read_scene(&params.scene)?;
    let rig = io::read_rig_config(&params.rig)?;
    let traj = config::read_trajectory(&params.traj)?;
    for warning in rig.check_cv_overlap() {
        eprintln!("warning: {warning}");
    }
    std::fs::create_dir_all(&params.out)
        .map_err(|e| Error::io(params.out.display().to_string(), e))?;

    // the manifest carries a self-contained copy of the rig
    let rig_copy = params.out.join("rig.cfg");
    io::write_rig_config(&rig_copy, &rig)?;

    let mut manifest = io::Manifest {
        rig: PathBuf::from("rig.cfg"),
        frames: traj.len(),
        ..Default::default()
    };

    let pattern = LidarPattern::default_32();
    for frame in 0..traj.len() {
        let out = render(&scene, &rig, &traj, frame)?;
        manifest.pose_front.push(traj.front_pose(frame)?);
        manifest.pose_rear.push(traj.rear_pose(frame)?);
        manifest.cross_vehicle.push(traj.cross_vehicle(frame)?);
        for (ci, cam_render) in out.cameras.iter().enumerate() {
            let cam = CameraId(ci as u8);
            let stem = format!("f{frame:03}_c{ci}");
            let mut put = |kind: &str, rel: String| {
                manifest
                    .rasters
                    .insert((frame, cam.0, kind.to_string()), PathBuf::from(rel));
            };

            let rel = format!("{stem}_image.imgf");
            io::write_image(&params.out.join(&rel), &cam_render.image)?;
            put("image", rel);

            let rel = format!("{stem}_depth.dptf");
            io::write_depth(&params.out.join(&rel), &cam_render.depth)?;
            put("depth_gt", rel);

            let rel = format!("{stem}_normal.nrmf");
            io::write_normals(&params.out.join(&rel), &cam_render.normals)?;
            put("normal_gt", rel);

            let rel = format!("{stem}_normal_valid.msk1");
            io::write_mask(&params.out.join(&rel), &cam_render.normals.validity_mask())?;
            put("normal_gt_valid", rel);

            let rel = format!("{stem}_ground.msk1");
            io::write_mask(&params.out.join(&rel), &cam_render.ground)?;
            put("ground_gt", rel);

            let stream = (frame as u64) << 8 | ci as u64;
            let (prior_depth, prior_normals) = prior_provider(
                cam_render,
                params.prior_scale,
                params.prior_noise_deg,
                params.seed,
                stream,
            )?;
            let rel = format!("{stem}_prior_depth.dptf");
            io::write_depth(&params.out.join(&rel), &prior_depth)?;
            put("prior_depth", rel);
            let rel = format!("{stem}_prior_normal.nrmf");
            io::write_normals(&params.out.join(&rel), &prior_normals)?;
            put("prior_normal", rel);
        }

        let want_lidar = match params.lidar.as_str() {
            "all" => true,
            "first" => frame == 0,
            _ => false,
        };
        if want_lidar {
            for (vehicle, pose, stream) in [
                (Vehicle::Front, traj.front_pose(frame)?, 1_000_000 + 2 * frame as u64),
                (Vehicle::Rear, traj.rear_pose(frame)?, 1_000_001 + 2 * frame as u64),
            ] {
                let cloud =
                    sample_lidar(&scene, &pose, &pattern, params.lidar_noise, params.seed, stream)?;
                let rel = format!("f{frame:03}_{}.ply", vehicle.name());
                io::write_ply(&params.out.join(&rel), &cloud)?;
                manifest
                    .clouds
                    .insert((frame, vehicle.name().to_string()), PathBuf::from(rel));
            }
        }
    }

    let manifest_path = params.out.join("manifest.txt");
    io::write_manifest(&manifest_path, &manifest)?;
    Ok(manifest_path)
}

/// Resolve a manifest-relative path.
pub fn resolve(base: &Path, rel: &Path) -> PathBuf {
    base.join(rel)
}
