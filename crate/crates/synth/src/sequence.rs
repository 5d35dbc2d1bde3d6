//! Bridge from rendered frames to the loss pipeline's input.

use articugeo_core::error::Result;
use articugeo_core::pipeline::{CameraFrame, Frame, Sequence};
use articugeo_core::rig::RigConfig;

use crate::prior::prior_provider;
use crate::render::{render, RenderOutput};
use crate::scene::Scene;
use crate::trajectory::Trajectory;

/// Render `n_frames` and assemble the pipeline input with ground-truth depth
/// as the estimate and priors from the pseudo-prior provider.
pub fn sequence_from_world(
    scene: &Scene,
    rig: &RigConfig<f64>,
    traj: &Trajectory,
    n_frames: usize,
    prior_scale: f64,
    prior_noise_deg: f64,
    seed: u64,
) -> Result<Sequence> {
    let mut frames = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let out = render(scene, rig, traj, t)?;
        frames.push(frame_from_render(
            &out,
            traj,
            t,
            prior_scale,
            prior_noise_deg,
            seed,
        )?);
    }
    Ok(Sequence {
        rig: rig.clone(),
        frames,
    })
}

/// One pipeline frame from one rendered frame.
pub fn frame_from_render(
    out: &RenderOutput,
    traj: &Trajectory,
    t: usize,
    prior_scale: f64,
    prior_noise_deg: f64,
    seed: u64,
) -> Result<Frame> {
    let mut cameras = Vec::with_capacity(out.cameras.len());
    for (ci, cam_render) in out.cameras.iter().enumerate() {
        let stream = (t as u64) << 8 | ci as u64;
        let (prior_depth, prior_normals) =
            prior_provider(cam_render, prior_scale, prior_noise_deg, seed, stream)?;
        cameras.push(CameraFrame {
            image: cam_render.image.clone(),
            est_depth: cam_render.depth.clone(),
            prior_depth: Some(prior_depth),
            prior_normals: Some(prior_normals),
        });
    }
    Ok(Frame {
        pose_front: traj.front_pose(t)?,
        pose_rear: traj.rear_pose(t)?,
        cross_vehicle: traj.cross_vehicle(t)?,
        cameras,
    })
}
