//! Loss pipeline: enumerate warping contexts over a frame sequence and pool
//! every enabled loss term into one weighted report.
//!
//! The pipeline consumes in-memory rasters (the CLI loads them from the
//! documented file formats) plus per-frame vehicle poses, from which the
//! joint motions and articulation transforms for every (t, tau) pairing are
//! derived. Terms pool pixel sums over all frames, cameras and contexts of
//! the same kind, in fixed iteration order.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::geometry::SE3Transform;
use crate::ground::{ground_mask, height_map, loss_camera_height, GroundParams};
use crate::losses::{
    aggregate, loss_depth_consistency, loss_mvrc, loss_photometric_min,
    loss_photometric_single, loss_smoothness, KahanSum, LossReport, LossWeights, MaskedMean,
};
use crate::normal::{
    loss_normal_spatial, loss_prior_normal_mvrc, nc_min, normal_from_depth, reconstruct_normals,
};
use crate::pose::{cross_vehicle_pose_error, loss_pose_consistency, VpcWeights};
use crate::raster::{DepthMap, ImageBuffer, NormalMap, NormalOrientation};
use crate::rig::{CameraId, ContextKind, ContextSpec, RigConfig, RigState, Vehicle};
use crate::warp::{reproject_depth, warp_image};

/// Rasters for one camera in one frame. Estimated depth drives every warp;
/// priors feed the pseudo-normal losses and ground detection.
#[derive(Clone, Debug)]
pub struct CameraFrame {
    pub image: ImageBuffer<f64>,
    pub est_depth: DepthMap<f64>,
    pub prior_depth: Option<DepthMap<f64>>,
    pub prior_normals: Option<NormalMap<f64>>,
}

/// One timestamp across all ten cameras.
#[derive(Clone, Debug)]
pub struct Frame {
    /// LiDAR -> world pose per vehicle.
    pub pose_front: SE3Transform<f64>,
    pub pose_rear: SE3Transform<f64>,
    /// Rear LiDAR -> front LiDAR.
    pub cross_vehicle: SE3Transform<f64>,
    /// Indexed by camera id.
    pub cameras: Vec<CameraFrame>,
}

/// The full input to a loss run.
pub struct Sequence {
    pub rig: RigConfig<f64>,
    pub frames: Vec<Frame>,
}

/// Which reprojection route feeds the spatial normal-consistency term.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalRoute {
    /// Sample the source normal map at warped correspondences and
    /// compensate the rotation (the default training signal).
    Direct,
    /// Ablation comparator: reproject depth first, re-derive normals.
    ViaDepth,
}

/// Where the ground mask for camera-height regularization comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroundMaskSource {
    /// Prior depth and normals (stable, the default).
    Prior,
    /// Ablation: estimated depth and normals.
    Estimate,
}

/// Term toggles and parameters for one loss run.
#[derive(Clone, Debug)]
pub struct LossOptions {
    pub weights: LossWeights,
    /// Enabled cross-vehicle context types (subset of {0, 1, 2}).
    pub cv_types: Vec<u8>,
    /// Term-group keys to skip entirely (e.g. "photo_temporal").
    pub skip: BTreeSet<String>,
    pub ground: GroundParams<f64>,
    pub vpc: VpcWeights,
    /// Uniform scale applied to estimated depth before any loss.
    pub depth_scale: f64,
    pub normal_route: NormalRoute,
    pub ground_mask_source: GroundMaskSource,
}

impl Default for LossOptions {
    fn default() -> Self {
        LossOptions {
            weights: LossWeights::default(),
            cv_types: vec![0, 1, 2],
            skip: BTreeSet::new(),
            ground: GroundParams::default(),
            vpc: VpcWeights::default(),
            depth_scale: 1.0,
            normal_route: NormalRoute::Direct,
            ground_mask_source: GroundMaskSource::Prior,
        }
    }
}

/// Pooled sum/count pair per term.
#[derive(Default)]
struct Pool {
    sum: KahanSum<f64>,
    count: usize,
}

impl Pool {
    fn add(&mut self, mm: MaskedMean<f64>) {
        if mm.count > 0 {
            self.sum.add(mm.value * mm.count as f64);
            self.count += mm.count;
        }
    }

    fn finish(&self) -> MaskedMean<f64> {
        MaskedMean::from_sum(self.sum.value(), self.count)
    }
}

/// Joint motion of one vehicle from t to tau, from the world poses.
fn joint_motion(frames: &[Frame], vehicle: Vehicle, t: usize, tau: usize) -> SE3Transform<f64> {
    let pose = |k: usize| match vehicle {
        Vehicle::Front => &frames[k].pose_front,
        Vehicle::Rear => &frames[k].pose_rear,
    };
    pose(tau).inverse().compose(pose(t))
}

/// Rig state pair for a (t, tau) context computation.
fn state_pair(frames: &[Frame], t: usize, tau: usize) -> (RigState<f64>, RigState<f64>) {
    let state_t = RigState::spatial_only(t as i64, frames[t].cross_vehicle);
    let state_tau = RigState {
        timestamp: tau as i64,
        cross_vehicle: frames[tau].cross_vehicle,
        joint_motion_front: Some(joint_motion(frames, Vehicle::Front, t, tau)),
        joint_motion_rear: Some(joint_motion(frames, Vehicle::Rear, t, tau)),
    };
    (state_t, state_tau)
}

/// Adjacent source times of t within the sequence.
fn neighbor_times(t: usize, n_frames: usize) -> Vec<usize> {
    let mut taus = Vec::new();
    if t > 0 {
        taus.push(t - 1);
    }
    if t + 1 < n_frames {
        taus.push(t + 1);
    }
    taus
}

/// Directed spatial contexts for the run: both directions of every
/// within-vehicle pair and of every enabled cross-vehicle pair.
fn directed_spatial_contexts(rig: &RigConfig<f64>, cv_types: &[u8]) -> Vec<ContextSpec> {
    let mut out = Vec::new();
    for &(a, b) in &rig.wv_pairs {
        out.push(ContextSpec::new(ContextKind::WvSpatial, a, b, 0));
        out.push(ContextSpec::new(ContextKind::WvSpatial, b, a, 0));
    }
    for &ty in cv_types {
        for (a, b) in rig.cv_pairs_for(ty) {
            out.push(ContextSpec::new(ContextKind::CvSpatial(ty), a, b, 0));
            out.push(ContextSpec::new(ContextKind::CvSpatial(ty), b, a, 0));
        }
    }
    out
}

/// Compute every enabled loss over the sequence.
pub fn compute_losses(seq: &Sequence, opts: &LossOptions) -> Result<LossReport> {
    opts.weights.validate()?;
    if seq.frames.is_empty() {
        return Err(Error::EmptySources("loss pipeline needs frames"));
    }
    for (i, frame) in seq.frames.iter().enumerate() {
        if frame.cameras.len() != seq.rig.cameras().len() {
            return Err(Error::IncompleteState(if i == 0 {
                "frame 0 camera rasters"
            } else {
                "frame camera rasters"
            }));
        }
    }
    let alpha = opts.weights.alpha;
    let n_frames = seq.frames.len();
    let enabled = |key: &str| !opts.skip.contains(key);

    // scaled estimated depth and derived normals, cached per (frame, cam)
    let mut est_depth: Vec<Vec<DepthMap<f64>>> = Vec::with_capacity(n_frames);
    let mut est_normals: Vec<Vec<NormalMap<f64>>> = Vec::with_capacity(n_frames);
    for frame in &seq.frames {
        let mut depths = Vec::with_capacity(frame.cameras.len());
        let mut normals = Vec::with_capacity(frame.cameras.len());
        for (ci, cam_frame) in frame.cameras.iter().enumerate() {
            let cam = &seq.rig.camera(CameraId(ci as u8)).model;
            let d = if opts.depth_scale == 1.0 {
                cam_frame.est_depth.clone()
            } else {
                cam_frame.est_depth.scaled(opts.depth_scale)
            };
            normals.push(normal_from_depth(&d, cam, NormalOrientation::CameraFacing));
            depths.push(d);
        }
        est_depth.push(depths);
        est_normals.push(normals);
    }

    let mut photo_temporal = Pool::default();
    let mut photo_spatial_wv = Pool::default();
    let mut photo_spatial_cv: [Pool; 3] = Default::default();
    let mut photo_st = Pool::default();
    let mut photo_mvrc = Pool::default();
    let mut depth_consistency = Pool::default();
    let mut smoothness = Pool::default();
    let mut normal_spatial = Pool::default();
    let mut prior_temporal = Pool::default();
    let mut prior_spatial = Pool::default();
    let mut prior_st = Pool::default();
    let mut prior_mvrc = Pool::default();
    let mut camera_height = Pool::default();
    let mut pose_consistency = Pool::default();

    let spatial_contexts = directed_spatial_contexts(&seq.rig, &opts.cv_types);

    for t in 0..n_frames {
        let frame_t = &seq.frames[t];
        let taus = neighbor_times(t, n_frames);

        // ---- temporal photometric and temporal prior-normal, per camera
        for cam in seq.rig.cameras() {
            let ci = cam.id.index();
            let target_img = &frame_t.cameras[ci].image;
            let depth_t = &est_depth[t][ci];

            if enabled("photo_temporal") && !taus.is_empty() {
                let mut recons = Vec::new();
                for &tau in &taus {
                    let (state_t, state_tau) = state_pair(&seq.frames, t, tau);
                    let ctx = ContextSpec::new(
                        ContextKind::Temporal,
                        cam.id,
                        cam.id,
                        (tau as i64 - t as i64) as i8,
                    );
                    let x = crate::rig::context_transform(&ctx, &seq.rig, &state_t, &state_tau)?;
                    let (img, mask) = warp_image(
                        &cam.model,
                        &cam.model,
                        depth_t,
                        &x,
                        &seq.frames[tau].cameras[ci].image,
                    )?;
                    recons.push((img, mask));
                }
                photo_temporal.add(loss_photometric_min(target_img, &recons, alpha)?.to_f64());
            }

            if enabled("prior_normal_temporal") && !taus.is_empty() {
                let prior_t = frame_t.cameras[ci]
                    .prior_normals
                    .as_ref()
                    .ok_or(Error::MissingPrior("prior normals at t"))?;
                let mut recons = Vec::new();
                for &tau in &taus {
                    let (state_t, state_tau) = state_pair(&seq.frames, t, tau);
                    let ctx = ContextSpec::new(ContextKind::Temporal, cam.id, cam.id, (tau as i64 - t as i64) as i8);
                    let x = crate::rig::context_transform(&ctx, &seq.rig, &state_t, &state_tau)?;
                    let prior_tau = seq.frames[tau].cameras[ci]
                        .prior_normals
                        .as_ref()
                        .ok_or(Error::MissingPrior("prior normals at tau"))?;
                    recons.push(reconstruct_normals(
                        prior_tau,
                        depth_t,
                        &x,
                        &cam.model,
                        &cam.model,
                    )?);
                }
                prior_temporal.add(nc_min(prior_t, &recons)?.to_f64());
            }

            if enabled("smoothness") {
                smoothness.add(loss_smoothness(depth_t, target_img)?.to_f64());
            }

            if enabled("camera_height") {
                let gmask = match opts.ground_mask_source {
                    GroundMaskSource::Prior => {
                        let (Some(prior_n), Some(prior_d)) = (
                            frame_t.cameras[ci].prior_normals.as_ref(),
                            frame_t.cameras[ci].prior_depth.as_ref(),
                        ) else {
                            return Err(Error::MissingPrior("priors for ground detection"));
                        };
                        ground_mask(prior_n, prior_d, &cam.model, &opts.ground)
                    }
                    GroundMaskSource::Estimate => {
                        ground_mask(&est_normals[t][ci], depth_t, &cam.model, &opts.ground)
                    }
                };
                let (heights, hmask) = height_map(depth_t, &est_normals[t][ci], &cam.model);
                let gated = crate::raster::combine_masks(&[&gmask, &hmask])?;
                camera_height.add(loss_camera_height(&heights, &gated, cam.height_gt)?.to_f64());
            }
        }

        // ---- spatial, spatial-temporal, mvrc, sdc, snc, pnc per context
        for ctx in &spatial_contexts {
            let target = seq.rig.camera(ctx.target_cam);
            let source = seq.rig.camera(ctx.source_cam);
            let ti = ctx.target_cam.index();
            let si = ctx.source_cam.index();
            let target_img = &frame_t.cameras[ti].image;
            let depth_t = &est_depth[t][ti];
            let (state_t, _) = state_pair(&seq.frames, t, t.min(n_frames - 1));
            let state_same = RigState {
                joint_motion_front: Some(SE3Transform::identity()),
                joint_motion_rear: Some(SE3Transform::identity()),
                ..state_t.clone()
            };
            let x_spatial =
                crate::rig::context_transform(ctx, &seq.rig, &state_t, &state_same)?;

            let spatial_key = match ctx.kind {
                ContextKind::WvSpatial => "photo_spatial_wv".to_string(),
                ContextKind::CvSpatial(ty) => format!("photo_spatial_cv{ty}"),
                _ => unreachable!("spatial context enumeration"),
            };

            // spatial reconstruction
            let spatial_recon = if enabled(&spatial_key) || enabled("photo_mvrc") {
                Some(warp_image(
                    &target.model,
                    &source.model,
                    depth_t,
                    &x_spatial,
                    &frame_t.cameras[si].image,
                )?)
            } else {
                None
            };
            if enabled(&spatial_key) {
                let (img, mask) = spatial_recon.as_ref().unwrap();
                let mm = loss_photometric_single(target_img, img, mask, alpha)?.to_f64();
                match ctx.kind {
                    ContextKind::WvSpatial => photo_spatial_wv.add(mm),
                    ContextKind::CvSpatial(ty) => photo_spatial_cv[ty as usize].add(mm),
                    _ => unreachable!(),
                }
            }

            // spatial-temporal reconstructions (per tau)
            let mut st_recons = Vec::new();
            if (enabled("photo_spatiotemporal") || enabled("photo_mvrc")) && !taus.is_empty() {
                for &tau in &taus {
                    let (state_t, state_tau) = state_pair(&seq.frames, t, tau);
                    let st_kind = match ctx.kind {
                        ContextKind::WvSpatial => ContextKind::WvSpatioTemporal,
                        ContextKind::CvSpatial(ty) => ContextKind::CvSpatioTemporal(ty),
                        _ => unreachable!(),
                    };
                    let st_ctx = ContextSpec::new(
                        st_kind,
                        ctx.target_cam,
                        ctx.source_cam,
                        (tau as i64 - t as i64) as i8,
                    );
                    let x_st =
                        crate::rig::context_transform(&st_ctx, &seq.rig, &state_t, &state_tau)?;
                    st_recons.push(warp_image(
                        &target.model,
                        &source.model,
                        depth_t,
                        &x_st,
                        &seq.frames[tau].cameras[si].image,
                    )?);
                }
            }
            if enabled("photo_spatiotemporal") && !st_recons.is_empty() {
                photo_st.add(loss_photometric_min(target_img, &st_recons, alpha)?.to_f64());
            }
            if enabled("photo_mvrc") && !st_recons.is_empty() {
                let (s_img, s_mask) = spatial_recon.as_ref().unwrap();
                photo_mvrc.add(loss_mvrc(s_img, s_mask, &st_recons, alpha)?.to_f64());
            }

            if enabled("depth_consistency") {
                let (reprojected, mask) = reproject_depth(
                    &source.model,
                    &target.model,
                    &est_depth[t][si],
                    &x_spatial.inverse(),
                    depth_t,
                )?;
                depth_consistency.add(loss_depth_consistency(depth_t, &reprojected, &mask)?.to_f64());
            }

            if enabled("normal_spatial") {
                let mm = match opts.normal_route {
                    NormalRoute::Direct => loss_normal_spatial(
                        &est_normals[t][ti],
                        &est_normals[t][si],
                        depth_t,
                        &x_spatial,
                        &target.model,
                        &source.model,
                    )?,
                    NormalRoute::ViaDepth => {
                        let prior_d_src = frame_t.cameras[si]
                            .prior_depth
                            .as_ref()
                            .ok_or(Error::MissingPrior("source prior depth"))?;
                        crate::normal::loss_normal_spatial_via_depth(
                            &est_depth[t][si],
                            prior_d_src,
                            depth_t,
                            &x_spatial,
                            &target.model,
                            &source.model,
                        )?
                    }
                };
                normal_spatial.add(mm.to_f64());
            }

            // prior-normal losses share the spatial reconstruction geometry
            let needs_prior_s = enabled("prior_normal_spatial");
            let needs_prior_st =
                (enabled("prior_normal_spatiotemporal") || enabled("prior_normal_mvrc"))
                    && !taus.is_empty();
            let needs_prior_mvrc = enabled("prior_normal_mvrc") && !taus.is_empty();
            if needs_prior_s || needs_prior_st || needs_prior_mvrc {
                let prior_target = frame_t.cameras[ti]
                    .prior_normals
                    .as_ref()
                    .ok_or(Error::MissingPrior("target prior normals"))?;
                let prior_source_t = frame_t.cameras[si]
                    .prior_normals
                    .as_ref()
                    .ok_or(Error::MissingPrior("source prior normals"))?;
                let recon_s = reconstruct_normals(
                    prior_source_t,
                    depth_t,
                    &x_spatial,
                    &target.model,
                    &source.model,
                )?;
                if needs_prior_s {
                    prior_spatial.add(nc_min(prior_target, &[recon_s.clone()])?.to_f64());
                }
                if needs_prior_st || needs_prior_mvrc {
                    let mut st_prior_recons = Vec::new();
                    for &tau in &taus {
                        let (state_t, state_tau) = state_pair(&seq.frames, t, tau);
                        let st_kind = match ctx.kind {
                            ContextKind::WvSpatial => ContextKind::WvSpatioTemporal,
                            ContextKind::CvSpatial(ty) => ContextKind::CvSpatioTemporal(ty),
                            _ => unreachable!(),
                        };
                        let st_ctx = ContextSpec::new(
                            st_kind,
                            ctx.target_cam,
                            ctx.source_cam,
                            (tau as i64 - t as i64) as i8,
                        );
                        let x_st = crate::rig::context_transform(
                            &st_ctx, &seq.rig, &state_t, &state_tau,
                        )?;
                        let prior_source_tau = seq.frames[tau].cameras[si]
                            .prior_normals
                            .as_ref()
                            .ok_or(Error::MissingPrior("source prior normals at tau"))?;
                        st_prior_recons.push(reconstruct_normals(
                            prior_source_tau,
                            depth_t,
                            &x_st,
                            &target.model,
                            &source.model,
                        )?);
                    }
                    if enabled("prior_normal_spatiotemporal") {
                        prior_st.add(nc_min(prior_target, &st_prior_recons)?.to_f64());
                    }
                    if needs_prior_mvrc {
                        prior_mvrc.add(loss_prior_normal_mvrc(&recon_s, &st_prior_recons)?.to_f64());
                    }
                }
            }
        }

        // ---- cross-vehicle pose consistency per (t, tau)
        if enabled("pose_consistency") {
            for &tau in &taus {
                let front = joint_motion(&seq.frames, Vehicle::Front, t, tau);
                let rear = joint_motion(&seq.frames, Vehicle::Rear, t, tau);
                let t_e = cross_vehicle_pose_error(
                    &front,
                    &rear,
                    &frame_t.cross_vehicle,
                    &seq.frames[tau].cross_vehicle,
                );
                pose_consistency.add(MaskedMean {
                    value: loss_pose_consistency(&t_e, &opts.vpc),
                    count: 1,
                });
            }
        }
    }

    let mut terms: Vec<(String, MaskedMean<f64>)> = Vec::new();
    let mut push = |key: &str, pool: &Pool| {
        if enabled(key) {
            terms.push((key.to_string(), pool.finish()));
        }
    };
    push("photo_temporal", &photo_temporal);
    push("photo_spatial_wv", &photo_spatial_wv);
    for ty in 0..3usize {
        if opts.cv_types.contains(&(ty as u8)) {
            push(&format!("photo_spatial_cv{ty}"), &photo_spatial_cv[ty]);
        }
    }
    push("photo_spatiotemporal", &photo_st);
    push("photo_mvrc", &photo_mvrc);
    push("depth_consistency", &depth_consistency);
    push("smoothness", &smoothness);
    push("normal_spatial", &normal_spatial);
    push("prior_normal_temporal", &prior_temporal);
    push("prior_normal_spatial", &prior_spatial);
    push("prior_normal_spatiotemporal", &prior_st);
    push("prior_normal_mvrc", &prior_mvrc);
    push("camera_height", &camera_height);
    push("pose_consistency", &pose_consistency);

    aggregate(terms, &opts.weights)
}
