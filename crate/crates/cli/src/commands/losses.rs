//! `losses`: load a rendered manifest, rebuild the frame sequence from
//! files, and compute the weighted loss report with the requested context
//! toggles.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use articugeo_core::error::{Error, Result};
use articugeo_core::io;
use articugeo_core::losses::LossReport;
use articugeo_core::pipeline::{
    compute_losses, CameraFrame, Frame, GroundMaskSource, LossOptions, NormalRoute, Sequence,
};
use articugeo_core::raster::NormalOrientation;
use articugeo_core::rig::CameraId;

use crate::args::{Args, UsageError};

pub struct LossParams {
    pub manifest: PathBuf,
    pub weights: Option<PathBuf>,
    pub cv_types: Vec<u8>,
    pub skip: BTreeSet<String>,
    pub depth_scale: f64,
    /// Optional per-frame cross-vehicle transform override (e.g. from ICP).
    pub cross: Option<PathBuf>,
    /// Optional externally estimated joint motions (frame k -> k + 1 per
    /// vehicle); integrated from the first frame's pose to replace the
    /// manifest's vehicle trajectories.
    pub motions: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Raster kind used as the estimated depth (default the ground truth,
    /// which realizes the oracle-closure mode).
    pub depth_kind: String,
    pub normal_route: NormalRoute,
    pub ground_mask_source: GroundMaskSource,
}

impl LossParams {
    pub fn from_args(args: &Args) -> std::result::Result<Self, UsageError> {
        let cv_types = match args.get("cv-types") {
            None => vec![0, 1, 2],
            Some(spec) => {
                let mut out = Vec::new();
                for token in spec.split(',').filter(|t| !t.is_empty()) {
                    let ty: u8 = token
                        .parse()
                        .ok()
                        .filter(|t| *t < 3)
                        .ok_or_else(|| UsageError(format!("--cv-types entries must be 0, 1 or 2, got `{token}`")))?;
                    out.push(ty);
                }
                out.sort_unstable();
                out.dedup();
                out
            }
        };
        Ok(LossParams {
            manifest: args.path("manifest")?,
            weights: args.get("weights").map(PathBuf::from),
            cv_types,
            skip: args
                .get("skip")
                .map(|s| s.split(',').map(|t| t.trim().to_string()).collect())
                .unwrap_or_default(),
            depth_scale: args.parse_f64("depth-scale", 1.0)?,
            cross: args.get("cross").map(PathBuf::from),
            motions: args.get("motions").map(PathBuf::from),
            out: args.get("out").map(PathBuf::from),
            depth_kind: args.get("depth-kind").unwrap_or("depth_gt").to_string(),
            normal_route: match args.get("normal-route").unwrap_or("direct") {
                "direct" => NormalRoute::Direct,
                "via-depth" => NormalRoute::ViaDepth,
                other => {
                    return Err(UsageError(format!(
                        "--normal-route expects direct|via-depth, got `{other}`"
                    )))
                }
            },
            ground_mask_source: match args.get("ground-mask").unwrap_or("prior") {
                "prior" => GroundMaskSource::Prior,
                "estimate" => GroundMaskSource::Estimate,
                other => {
                    return Err(UsageError(format!(
                        "--ground-mask expects prior|estimate, got `{other}`"
                    )))
                }
            },
        })
    }
}

/// Load the sequence a manifest describes.
pub fn load_sequence(manifest_path: &Path, depth_kind: &str) -> Result<(Sequence, io::Manifest)> {
    let manifest = io::read_manifest(manifest_path)?;
    let base = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let rig = io::read_rig_config(&base.join(&manifest.rig))?;
    let mut frames = Vec::with_capacity(manifest.frames);
    for frame in 0..manifest.frames {
        let mut cameras = Vec::with_capacity(rig.cameras().len());
        for ci in 0..rig.cameras().len() {
            let cam = CameraId(ci as u8);
            let image = io::read_image(&base.join(manifest.raster(frame, cam, "image")?))?;
            let est_depth = io::read_depth(&base.join(manifest.raster(frame, cam, depth_kind)?))?;
            let prior_depth = manifest
                .has_raster(frame, cam, "prior_depth")
                .then(|| io::read_depth(&base.join(manifest.raster(frame, cam, "prior_depth")?)))
                .transpose()?;
            // pseudo normals are stored in the raw outward orientation;
            // validity rides the ground-truth normal mask
            let prior_normals = manifest
                .has_raster(frame, cam, "prior_normal")
                .then(|| {
                    io::read_normals(
                        &base.join(manifest.raster(frame, cam, "prior_normal")?),
                        &base.join(manifest.raster(frame, cam, "normal_gt_valid")?),
                        NormalOrientation::Outward,
                    )
                })
                .transpose()?;
            cameras.push(CameraFrame {
                image,
                est_depth,
                prior_depth,
                prior_normals,
            });
        }
        frames.push(Frame {
            pose_front: manifest.pose_front[frame],
            pose_rear: manifest.pose_rear[frame],
            cross_vehicle: manifest.cross_vehicle[frame],
            cameras,
        });
    }
    Ok((Sequence { rig, frames }, manifest))
}

pub fn run(params: &LossParams) -> Result<LossReport> {
    let (mut seq, _manifest) = load_sequence(&params.manifest, &params.depth_kind)?;

    if let Some(motion_path) = &params.motions {
        apply_motion_overrides(&mut seq, &io::read_motions(motion_path)?)?;
    }

    if let Some(cross_path) = &params.cross {
        let overrides = read_cross_file(cross_path)?;
        for (frame, t) in overrides {
            if frame >= seq.frames.len() {
                return Err(Error::Parse {
                    file: cross_path.display().to_string(),
                    line: 0,
                    msg: format!("cross override frame {frame} out of range"),
                });
            }
            seq.frames[frame].cross_vehicle = t;
        }
    }

    let weights = match &params.weights {
        Some(p) => io::read_weights(p)?,
        None => Default::default(),
    };
    let opts = LossOptions {
        weights,
        cv_types: params.cv_types.clone(),
        skip: params.skip.clone(),
        depth_scale: params.depth_scale,
        normal_route: params.normal_route,
        ground_mask_source: params.ground_mask_source,
        ..Default::default()
    };
    let report = compute_losses(&seq, &opts)?;
    if let Some(out) = &params.out {
        io::write_loss_report(out, &report)?;
    }
    Ok(report)
}

/// Rebuild each vehicle's pose track so its frame-to-frame motions equal
/// the injected ones, anchored at the manifest's first pose: with
/// M_k = pose(k+1)^-1 . pose(k), the update is pose(k+1) = pose(k) . M_k^-1.
fn apply_motion_overrides(
    seq: &mut Sequence,
    motions: &[(usize, articugeo_core::rig::Vehicle, articugeo_core::Se3)],
) -> Result<()> {
    use articugeo_core::rig::Vehicle;
    for vehicle in [Vehicle::Front, Vehicle::Rear] {
        let mut per_frame: Vec<Option<articugeo_core::Se3>> = vec![None; seq.frames.len()];
        for (frame, v, t) in motions {
            if *v == vehicle {
                if *frame + 1 >= seq.frames.len() {
                    return Err(Error::IncompleteState("motion frame index out of range"));
                }
                per_frame[*frame] = Some(*t);
            }
        }
        for k in 0..seq.frames.len().saturating_sub(1) {
            let Some(motion) = per_frame[k] else { continue };
            let pose_k = match vehicle {
                Vehicle::Front => seq.frames[k].pose_front,
                Vehicle::Rear => seq.frames[k].pose_rear,
            };
            let next = pose_k.compose(&motion.inverse());
            match vehicle {
                Vehicle::Front => seq.frames[k + 1].pose_front = next,
                Vehicle::Rear => seq.frames[k + 1].pose_rear = next,
            }
        }
    }
    Ok(())
}

/// Lines of `frame 16-float row-major transform`.
fn read_cross_file(path: &Path) -> Result<Vec<(usize, articugeo_core::Se3)>> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&*file, e))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 17 {
            return Err(Error::parse(&*file, ln, "expected `frame` plus 16 floats"));
        }
        let frame: usize = tokens[0]
            .parse()
            .map_err(|_| Error::parse(&*file, ln, "bad frame index"))?;
        let vals: Vec<f64> = tokens[1..]
            .iter()
            .map(|t| {
                t.parse()
                    .map_err(|_| Error::parse(&*file, ln, format!("bad number `{t}`")))
            })
            .collect::<Result<_>>()?;
        let mut m = [0.0; 16];
        m.copy_from_slice(&vals);
        out.push((
            frame,
            articugeo_core::geometry::SE3Transform::from_matrix4(&m)
                .map_err(|e| Error::parse(&*file, ln, e.to_string()))?,
        ));
    }
    Ok(out)
}
