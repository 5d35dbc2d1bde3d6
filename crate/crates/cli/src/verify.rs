//! Property-check suites over every module: geometry round trips, context
//! composition closure, warping identities, normal equivariances, ground
//! detection quality, pose-loop closure, ICP recovery, metric fixed points,
//! finite-difference gradient agreement, and the full oracle loss closure.
//!
//! Every tolerance is named and overridable from the command line; each
//! check prints its worst residual next to the tolerance it was held to.

use std::collections::BTreeMap;

use articugeo_core::dual::Dual;
use articugeo_core::error::{Error, Result};
use articugeo_core::geometry::{rotation_error_frobenius, CameraModel, Pixel, SE3Transform};
use articugeo_core::linalg::{Mat3, Vec3};
use articugeo_core::losses::MaskedMean;
use articugeo_core::metrics::evaluate;
use articugeo_core::normal::{
    normal_from_depth, reproject_normals_direct, reproject_normals_via_depth,
};
use articugeo_core::pipeline::{compute_losses, LossOptions};
use articugeo_core::pointcloud::{icp_register, IcpConfig};
use articugeo_core::pose::{cross_vehicle_pose_error, loss_pose_consistency, VpcWeights};
use articugeo_core::raster::{DepthMap, NormalOrientation, PixelMask};
use articugeo_core::rig::{
    camera_pose_from_joint, cv_pairs, CameraId, ContextKind, ContextSpec, RigState, Vehicle,
};
use articugeo_core::sensitivity as sens;
use articugeo_core::warp::{correspondence, warp_image};
use articugeo_synth::fixtures;
use articugeo_synth::lidar::{sample_lidar, LidarPattern};
use articugeo_synth::render::render;
use articugeo_synth::rng::CounterRng;
use articugeo_synth::sequence::sequence_from_world;

pub const SUITES: [&str; 11] = [
    "geometry", "context", "warp", "normals", "ground", "pose", "icp", "metrics", "gradcheck",
    "closure", "all",
];

/// Named, overridable tolerances (the acceptance thresholds, reproducible
/// by flag).
#[derive(Clone, Debug)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let mut t = BTreeMap::new();
        t.insert("geometry.roundtrip_rel", 1e-9);
        t.insert("geometry.group_abs", 1e-9);
        t.insert("geometry.frobenius_abs", 1e-12);
        t.insert("context.closure_abs", 0.0);
        t.insert("context.conjugation_abs", 1e-12);
        t.insert("warp.identity_abs", 1e-6);
        t.insert("warp.homography_abs", 1e-9);
        t.insert("warp.equivariance_abs", 1e-9);
        t.insert("normals.unit_abs", 1e-6);
        t.insert("normals.rotation_deg", 0.1);
        t.insert("normals.translation_deg", 0.1);
        t.insert("normals.scale_abs", 1e-12);
        t.insert("normals.smooth_agreement_deg", 0.5);
        t.insert("ground.coverage_min", 0.99);
        t.insert("ground.false_positive_max", 0.01);
        t.insert("ground.ch_rel", 1e-3);
        t.insert("ground.ch_scale_rel", 0.01);
        t.insert("pose.loop_abs", 1e-9);
        t.insert("pose.loop_loss", 1e-8);
        t.insert("pose.perturbation_abs", 1e-6);
        t.insert("icp.noiseless_abs", 1e-6);
        t.insert("icp.rotation_deg", 0.5);
        t.insert("icp.translation_m", 0.02);
        t.insert("metrics.fixed_abs", 1e-12);
        t.insert("gradcheck.rel", 1e-3);
        t.insert("closure.loss_max", 1e-3);
        Tolerances(t)
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("unknown tolerance `{name}`"))
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        let key = self
            .0
            .keys()
            .find(|k| **k == name)
            .copied()
            .ok_or_else(|| Error::Parse {
                file: "--tol".into(),
                line: 0,
                msg: format!("unknown tolerance `{name}`"),
            })?;
        self.0.insert(key, value);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = (&&'static str, &f64)> {
        self.0.iter()
    }
}

#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn leq(name: &str, worst: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            worst,
            tolerance,
            passed: worst <= tolerance,
            detail: detail.into(),
        }
    }

    /// For checks of the form "quantity must be at least": store the margin.
    fn geq(name: &str, value: f64, minimum: f64, detail: impl Into<String>) -> Self {
        CheckResult {
            name: name.to_string(),
            worst: value,
            tolerance: minimum,
            passed: value >= minimum,
            detail: detail.into(),
        }
    }
}

fn rand_rotation(rng: &CounterRng, stream: u64, i: u64) -> Mat3<f64> {
    Mat3::rot_y(2.0 * std::f64::consts::PI * rng.uniform(stream, i, 0))
        * Mat3::rot_x(std::f64::consts::PI * (rng.uniform(stream, i, 1) - 0.5))
        * Mat3::rot_z(2.0 * std::f64::consts::PI * rng.uniform(stream, i, 2))
}

fn rand_se3(rng: &CounterRng, stream: u64, i: u64, trans_scale: f64) -> SE3Transform<f64> {
    SE3Transform::from_parts(
        rand_rotation(rng, stream, i),
        Vec3::new(
            trans_scale * (rng.uniform(stream, i, 3) - 0.5),
            trans_scale * (rng.uniform(stream, i, 4) - 0.5),
            trans_scale * (rng.uniform(stream, i, 5) - 0.5),
        ),
    )
}

// ------------------------------------------------------------- geometry

pub fn suite_geometry(tols: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    let rng = CounterRng::new(seed);
    let cam = CameraModel::new(
        134.25,
        134.25,
        160.0,
        96.0,
        320,
        192,
        SE3Transform::identity(),
    )?;
    let mut worst_rt = 0.0f64;
    for i in 0..1000 {
        let u = 319.0 * rng.uniform(1, i, 0);
        let v = 191.0 * rng.uniform(1, i, 1);
        let d = 0.5 + 60.0 * rng.uniform(1, i, 2);
        let p = cam.unproject(Pixel::new(u, v), d)?;
        assert_eq!(p.z, d, "unproject must preserve depth exactly");
        let (pix, depth) = cam.project(p)?;
        let rel = ((pix.u - u).abs() + (pix.v - v).abs() + (depth - d).abs()) / d.max(1.0);
        worst_rt = worst_rt.max(rel);
    }

    let mut worst_group = 0.0f64;
    for i in 0..100 {
        let a = rand_se3(&rng, 2, i, 4.0);
        let b = rand_se3(&rng, 2, i + 1000, 4.0);
        let c = rand_se3(&rng, 2, i + 2000, 4.0);
        let assoc_l = a.compose(&b).compose(&c);
        let assoc_r = a.compose(&b.compose(&c));
        worst_group = worst_group
            .max(rotation_error_frobenius(&assoc_l, &assoc_r))
            .max((assoc_l.translation - assoc_r.translation).norm());
        let inv = a.compose(&a.inverse());
        worst_group = worst_group
            .max(inv.rotation.frobenius_distance_to_identity())
            .max(inv.translation.norm());
        let double_inv = a.inverse().inverse();
        worst_group = worst_group
            .max(rotation_error_frobenius(&a, &double_inv))
            .max((a.translation - double_inv.translation).norm());
    }

    let half_turn = SE3Transform::from_parts(Mat3::rot_z(std::f64::consts::PI), Vec3::zero());
    let frob = rotation_error_frobenius(&SE3Transform::identity(), &half_turn);
    let sym = (rotation_error_frobenius(&half_turn, &SE3Transform::identity()) - frob).abs();

    Ok(vec![
        CheckResult::leq(
            "geometry.project_unproject_roundtrip",
            worst_rt,
            tols.get("geometry.roundtrip_rel"),
            "1000 random pixels",
        ),
        CheckResult::leq(
            "geometry.se3_group_axioms",
            worst_group,
            tols.get("geometry.group_abs"),
            "100 random triples",
        ),
        CheckResult::leq(
            "geometry.frobenius_half_turn",
            (frob - 8.0f64.sqrt()).abs().max(sym),
            tols.get("geometry.frobenius_abs"),
            "|R_e - I| at 180 deg = sqrt(8), symmetric",
        ),
    ])
}

// -------------------------------------------------------------- context

pub fn suite_context(tols: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    let rig = fixtures::default_rig(320, 192)?;
    let rng = CounterRng::new(seed);

    // published pair table, reproduced verbatim
    let expected: [&[(u8, u8)]; 3] = [
        &[(8, 2), (7, 3)],
        &[(9, 2), (6, 3), (8, 1), (7, 4)],
        &[(5, 2), (5, 3), (9, 1), (6, 4), (8, 0), (7, 0)],
    ];
    let mut table_ok = true;
    for ty in 0..3u8 {
        let got = cv_pairs(ty);
        let want: Vec<_> = expected[ty as usize]
            .iter()
            .map(|&(a, b)| (CameraId(a), CameraId(b)))
            .collect();
        table_ok &= got == want;
    }

    // float-exact composition closure on random states
    let mut closure_exact = true;
    for i in 0..1000u64 {
        let cross = rand_se3(&rng, 3, i, 8.0);
        let joint_f = rand_se3(&rng, 4, i, 2.0);
        let joint_r = rand_se3(&rng, 5, i, 2.0);
        let state_t = RigState::spatial_only(0, cross);
        let state_tau = RigState {
            timestamp: 1,
            cross_vehicle: cross,
            joint_motion_front: Some(joint_f),
            joint_motion_rear: Some(joint_r),
        };
        for (kind, st_kind, target, source) in [
            (
                ContextKind::CvSpatial(0),
                ContextKind::CvSpatioTemporal(0),
                CameraId(8),
                CameraId(2),
            ),
            (
                ContextKind::WvSpatial,
                ContextKind::WvSpatioTemporal,
                CameraId(5),
                CameraId(6),
            ),
        ] {
            let spatial = articugeo_core::rig::context_transform(
                &ContextSpec::new(kind, target, source, 0),
                &rig,
                &state_t,
                &state_tau,
            )?;
            let temporal = articugeo_core::rig::context_transform(
                &ContextSpec::new(ContextKind::Temporal, source, source, 1),
                &rig,
                &state_t,
                &state_tau,
            )?;
            let st = articugeo_core::rig::context_transform(
                &ContextSpec::new(st_kind, target, source, 1),
                &rig,
                &state_t,
                &state_tau,
            )?;
            closure_exact &= st == temporal.compose(&spatial);
        }
    }

    // conjugation is a homomorphism
    let mut worst_conj = 0.0f64;
    let cam = &rig.camera(CameraId(6)).model;
    for i in 0..100 {
        let a = rand_se3(&rng, 6, i, 2.0);
        let b = rand_se3(&rng, 7, i, 2.0);
        let lhs = camera_pose_from_joint(cam, &a.compose(&b));
        let rhs = camera_pose_from_joint(cam, &a).compose(&camera_pose_from_joint(cam, &b));
        worst_conj = worst_conj
            .max(rotation_error_frobenius(&lhs, &rhs))
            .max((lhs.translation - rhs.translation).norm());
    }

    let warnings = rig.check_cv_overlap();

    Ok(vec![
        CheckResult::leq(
            "context.table_pairs_verbatim",
            if table_ok { 0.0 } else { 1.0 },
            0.0,
            "cv_pairs reproduces the built-in pair table",
        ),
        CheckResult::leq(
            "context.spatiotemporal_composition_exact",
            if closure_exact { 0.0 } else { 1.0 },
            tols.get("context.closure_abs"),
            "1000 random rig states, bitwise",
        ),
        CheckResult::leq(
            "context.conjugation_homomorphism",
            worst_conj,
            tols.get("context.conjugation_abs"),
            "f(a.b) = f(a).f(b)",
        ),
        CheckResult::leq(
            "context.cv_overlap_warnings",
            warnings.len() as f64,
            0.0,
            "pair table consistent with mounted view cones",
        ),
    ])
}

// ----------------------------------------------------------------- warp

pub fn suite_warp(tols: &Tolerances, _seed: u64) -> Result<Vec<CheckResult>> {
    let scene = fixtures::closure_scene()?;
    let rig = fixtures::default_rig(320, 192)?;
    let traj = fixtures::straight_trajectory(2);
    let out = render(&scene, &rig, &traj, 0)?;
    let cam5 = &rig.camera(CameraId(5)).model;
    let r5 = &out.cameras[5];

    // identity warp
    let (img, mask) = warp_image(cam5, cam5, &r5.depth, &SE3Transform::identity(), &r5.image)?;
    let mut worst_id = 0.0f64;
    for v in 0..cam5.height {
        for u in 0..cam5.width {
            if mask.get(u, v) {
                worst_id = worst_id.max((img.get(u, v, 0) - r5.image.get(u, v, 0)).abs());
            }
        }
    }

    // analytic planar homography under pure z-translation
    let z0 = 10.0;
    let tz = -4.0;
    let magnification = z0 / (z0 + tz);
    let x = SE3Transform::from_translation(Vec3::new(0.0, 0.0, tz));
    let mut worst_h = 0.0f64;
    for (u, v) in [(40u32, 40u32), (160, 96), (280, 150), (10, 180)] {
        let (p, _) = correspondence(cam5, cam5, &x, u, v, z0).unwrap();
        let eu = (u as f64 - cam5.cx) * magnification + cam5.cx;
        let ev = (v as f64 - cam5.cy) * magnification + cam5.cy;
        worst_h = worst_h.max((p.u - eu).abs()).max((p.v - ev).abs());
    }

    // mask monotonicity under shrinking depth validity
    let (_, full_mask) = warp_image(
        cam5,
        cam5,
        &r5.depth,
        &SE3Transform::from_translation(Vec3::new(0.3, 0.0, 0.0)),
        &r5.image,
    )?;
    let mut holes = r5.depth.clone();
    for i in (0..holes.values.len()).step_by(5) {
        holes.values[i] = 0.0;
    }
    let (_, hole_mask) = warp_image(
        cam5,
        cam5,
        &holes,
        &SE3Transform::from_translation(Vec3::new(0.3, 0.0, 0.0)),
        &r5.image,
    )?;
    let monotone = hole_mask
        .values
        .iter()
        .zip(full_mask.values.iter())
        .all(|(h, f)| !h || *f);

    // equivariance: re-basing the LiDAR frames by G leaves the context
    // transform, and with it the warp, unchanged
    let g = SE3Transform::from_parts(Mat3::rot_y(0.7) * Mat3::rot_z(0.1), Vec3::new(3.0, -1.0, 2.0));
    let target = rig.camera(CameraId(5));
    let source = rig.camera(CameraId(6));
    let x_plain = source
        .model
        .extrinsic_to_lidar
        .inverse()
        .compose(&target.model.extrinsic_to_lidar);
    let e_t = g.compose(&target.model.extrinsic_to_lidar);
    let e_s = g.compose(&source.model.extrinsic_to_lidar);
    let x_rebased = e_s.inverse().compose(&e_t);
    let (img_a, mask_a) = warp_image(cam5, &source.model, &r5.depth, &x_plain, &out.cameras[6].image)?;
    let (img_b, mask_b) = warp_image(cam5, &source.model, &r5.depth, &x_rebased, &out.cameras[6].image)?;
    let mut worst_eq = 0.0f64;
    let mut mask_diff = 0usize;
    for i in 0..mask_a.values.len() {
        if mask_a.values[i] != mask_b.values[i] {
            mask_diff += 1;
        } else if mask_a.values[i] {
            worst_eq = worst_eq.max((img_a.values[i] - img_b.values[i]).abs());
        }
    }

    Ok(vec![
        CheckResult::leq(
            "warp.identity_reproduces_source",
            worst_id,
            tols.get("warp.identity_abs"),
            format!("{} valid pixels", mask.count_true()),
        ),
        CheckResult::leq(
            "warp.planar_homography_magnification",
            worst_h,
            tols.get("warp.homography_abs"),
            "pure z-translation toward a fronto-parallel plane",
        ),
        CheckResult::leq(
            "warp.mask_monotone_under_depth_holes",
            if monotone { 0.0 } else { 1.0 },
            0.0,
            "output mask never grows when validity shrinks",
        ),
        CheckResult::leq(
            "warp.rigid_rebasing_equivariance",
            worst_eq + mask_diff as f64,
            tols.get("warp.equivariance_abs"),
            "LiDAR frames conjugated by a rigid G",
        ),
    ])
}

// -------------------------------------------------------------- normals

pub fn suite_normals(tols: &Tolerances, _seed: u64) -> Result<Vec<CheckResult>> {
    let scene = fixtures::closure_scene()?;
    let rig = fixtures::default_rig(320, 192)?;
    let traj = fixtures::straight_trajectory(1);
    let out = render(&scene, &rig, &traj, 0)?;

    // unit-norm closure over a reprojection
    let target = rig.camera(CameraId(5));
    let source = rig.camera(CameraId(6));
    let x_spatial = source
        .model
        .extrinsic_to_lidar
        .inverse()
        .compose(&target.model.extrinsic_to_lidar);
    let n_target = normal_from_depth(
        &out.cameras[5].depth,
        &target.model,
        NormalOrientation::CameraFacing,
    );
    let n_source = normal_from_depth(
        &out.cameras[6].depth,
        &source.model,
        NormalOrientation::CameraFacing,
    );
    let (resampled, remask) = reproject_normals_direct(
        &n_source,
        &out.cameras[5].depth,
        &x_spatial,
        &target.model,
        &source.model,
    )?;
    let mut worst_unit = 0.0f64;
    for (i, valid) in resampled.valid.iter().enumerate() {
        if *valid {
            worst_unit = worst_unit.max((resampled.vectors[i].norm() - 1.0).abs());
        }
    }

    // rotation equivariance on the plane: resampled source normals equal
    // R applied to the target's own normals
    let mut worst_rot = 0.0f64;
    let mut count_rot = 0usize;
    for (i, valid) in remask.values.iter().enumerate() {
        if *valid && n_target.valid[i] {
            let expected = x_spatial.rotation * n_target.vectors[i];
            let dot = resampled.vectors[i].dot(expected).clamp(-1.0, 1.0);
            worst_rot += dot.acos().to_degrees();
            count_rot += 1;
        }
    }
    let mean_rot = worst_rot / count_rot.max(1) as f64;

    // translation invariance: C9 -> C2 run parallel on the straight rig
    let t9 = rig.camera(CameraId(9));
    let c2 = rig.camera(CameraId(2));
    let state = RigState::spatial_only(0, traj.cross_vehicle(0)?);
    let x_trans = articugeo_core::rig::context_transform(
        &ContextSpec::new(ContextKind::CvSpatial(1), CameraId(9), CameraId(2), 0),
        &rig,
        &state,
        &state,
    )?;
    let rot_part = x_trans.rotation.frobenius_distance_to_identity();
    let n9 = normal_from_depth(&out.cameras[9].depth, &t9.model, NormalOrientation::CameraFacing);
    let n2 = normal_from_depth(&out.cameras[2].depth, &c2.model, NormalOrientation::CameraFacing);
    let (res92, mask92) =
        reproject_normals_direct(&n2, &out.cameras[9].depth, &x_trans, &t9.model, &c2.model)?;
    let mut sum_trans = 0.0f64;
    let mut count_trans = 0usize;
    for (i, valid) in mask92.values.iter().enumerate() {
        if *valid && n9.valid[i] {
            let dot = res92.vectors[i].dot(n9.vectors[i]).clamp(-1.0, 1.0);
            sum_trans += dot.acos().to_degrees();
            count_trans += 1;
        }
    }
    let mean_trans = sum_trans / count_trans.max(1) as f64;

    // exact scale invariance
    let scaled = normal_from_depth(
        &out.cameras[5].depth.scaled(3.0),
        &target.model,
        NormalOrientation::CameraFacing,
    );
    let mut worst_scale = 0.0f64;
    for i in 0..scaled.vectors.len() {
        if scaled.valid[i] && n_target.valid[i] {
            worst_scale = worst_scale.max((scaled.vectors[i] - n_target.vectors[i]).norm());
        }
    }

    // direct vs depth-interpolated reprojection on the smooth world
    let (via_depth, vd_mask) = reproject_normals_via_depth(
        &out.cameras[6].depth,
        &out.cameras[5].depth,
        &x_spatial,
        &target.model,
        &source.model,
        NormalOrientation::CameraFacing,
    )?;
    let compensated = articugeo_core::normal::compensate_rotation(&resampled, &x_spatial.rotation);
    let mut sum_agree = 0.0f64;
    let mut count_agree = 0usize;
    for i in 0..via_depth.vectors.len() {
        if vd_mask.values[i] && remask.values[i] {
            let dot = via_depth.vectors[i]
                .dot(compensated.vectors[i])
                .clamp(-1.0, 1.0);
            sum_agree += dot.acos().to_degrees();
            count_agree += 1;
        }
    }
    let mean_agree = sum_agree / count_agree.max(1) as f64;

    // at a depth step, the depth-interpolated route is noisier
    let (direct_err, depth_err, band_px) = step_scene_comparison(&rig)?;

    Ok(vec![
        CheckResult::leq(
            "normals.unit_norm_closure",
            worst_unit,
            tols.get("normals.unit_abs"),
            "resampled normals renormalized",
        ),
        CheckResult::leq(
            "normals.rotation_equivariance_mean_deg",
            mean_rot,
            tols.get("normals.rotation_deg"),
            format!("{count_rot} interior pixels, planar scene"),
        ),
        CheckResult::leq(
            "normals.translation_invariance_mean_deg",
            mean_trans.max(rot_part),
            tols.get("normals.translation_deg"),
            format!("parallel camera pair, {count_trans} pixels"),
        ),
        CheckResult::leq(
            "normals.scale_invariance",
            worst_scale,
            tols.get("normals.scale_abs"),
            "normal_from_depth(3 d) = normal_from_depth(d)",
        ),
        CheckResult::leq(
            "normals.direct_vs_depth_smooth_deg",
            mean_agree,
            tols.get("normals.smooth_agreement_deg"),
            format!("{count_agree} pixels on the smooth world"),
        ),
        CheckResult::geq(
            "normals.depth_route_noisier_at_step",
            depth_err - direct_err,
            0.0,
            format!(
                "band of {band_px} px: direct {direct_err:.3} deg vs depth {depth_err:.3} deg"
            ),
        ),
    ])
}

/// Mean angular error vs ground truth of both reprojection routes within a
/// 5-pixel band of the depth discontinuity in the step scene.
pub fn step_scene_comparison(
    rig: &articugeo_core::rig::RigConfig<f64>,
) -> Result<(f64, f64, usize)> {
    let scene = fixtures::step_scene()?;
    let traj = fixtures::straight_trajectory(1);
    let out = render(&scene, rig, &traj, 0)?;
    let target = rig.camera(CameraId(5));
    let source = rig.camera(CameraId(9));
    let x = source
        .model
        .extrinsic_to_lidar
        .inverse()
        .compose(&target.model.extrinsic_to_lidar);

    let n_source = normal_from_depth(
        &out.cameras[9].depth,
        &source.model,
        NormalOrientation::CameraFacing,
    );
    let (direct, direct_mask) = reproject_normals_direct(
        &n_source,
        &out.cameras[5].depth,
        &x,
        &target.model,
        &source.model,
    )?;
    let direct = articugeo_core::normal::compensate_rotation(&direct, &x.rotation);
    let (via_depth, depth_mask) = reproject_normals_via_depth(
        &out.cameras[9].depth,
        &out.cameras[5].depth,
        &x,
        &target.model,
        &source.model,
        NormalOrientation::CameraFacing,
    )?;

    // discontinuity band: pixels within 5 px of a large target-depth jump
    let depth = &out.cameras[5].depth;
    let (w, h) = (depth.width as i64, depth.height as i64);
    let mut band = PixelMask::new(depth.width, depth.height, false);
    for v in 0..h {
        for u in 0..w {
            let d0 = depth.get(u as u32, v as u32);
            if d0 <= 0.0 {
                continue;
            }
            for (du, dv) in [(1i64, 0i64), (0, 1)] {
                let (uu, vv) = (u + du, v + dv);
                if uu < w && vv < h {
                    let d1 = depth.get(uu as u32, vv as u32);
                    if d1 > 0.0 && (d1 - d0).abs() > 1.0 {
                        for bv in (v - 5).max(0)..=(v + 5).min(h - 1) {
                            for bu in (u - 5).max(0)..=(u + 5).min(w - 1) {
                                band.set(bu as u32, bv as u32, true);
                            }
                        }
                    }
                }
            }
        }
    }

    let gt = &out.cameras[5].normals;
    let ang = |n: Vec3<f64>, g: Vec3<f64>| n.dot(g).abs().clamp(-1.0, 1.0).acos().to_degrees();
    let mut sum_direct = 0.0;
    let mut sum_depth = 0.0;
    let mut count = 0usize;
    for v in 0..depth.height {
        for u in 0..depth.width {
            if band.get(u, v)
                && direct_mask.get(u, v)
                && depth_mask.get(u, v)
                && gt.is_valid(u, v)
            {
                sum_direct += ang(direct.get(u, v), gt.get(u, v));
                sum_depth += ang(via_depth.get(u, v), gt.get(u, v));
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::EmptyEvaluation);
    }
    Ok((
        sum_direct / count as f64,
        sum_depth / count as f64,
        count,
    ))
}

// --------------------------------------------------------------- ground

pub fn suite_ground(tols: &Tolerances, _seed: u64) -> Result<Vec<CheckResult>> {
    use articugeo_core::ground::{ground_mask, height_map, loss_camera_height, GroundParams};

    let scene = fixtures::closure_scene()?;
    let rig = fixtures::default_rig(320, 192)?;
    let traj = fixtures::straight_trajectory(1);
    let out = render(&scene, &rig, &traj, 0)?;
    let cam = rig.camera(CameraId(5));
    let r = &out.cameras[5];
    let (prior_depth, prior_normals) =
        articugeo_synth::prior::prior_provider(r, 1.0, 0.0, 1, 0)?;
    let params = GroundParams::default();
    let mask = ground_mask(&prior_normals, &prior_depth, &cam.model, &params);

    // coverage and false positives against the rendered ground labels,
    // restricted to pixels where the prior normal is defined
    let mut labeled = 0usize;
    let mut covered = 0usize;
    let mut false_pos = 0usize;
    let mut mask_count = 0usize;
    for i in 0..mask.values.len() {
        let label = r.ground.values[i] && prior_normals.valid[i];
        if label {
            labeled += 1;
            if mask.values[i] {
                covered += 1;
            }
        }
        if mask.values[i] {
            mask_count += 1;
            if !r.ground.values[i] {
                false_pos += 1;
            }
        }
    }
    let coverage = covered as f64 / labeled.max(1) as f64;
    let fp_rate = false_pos as f64 / mask_count.max(1) as f64;

    // threshold monotonicity
    let tight = ground_mask(
        &prior_normals,
        &prior_depth,
        &cam.model,
        &GroundParams {
            angle_threshold: 2.0f64.to_radians(),
        },
    );
    let monotone = tight
        .values
        .iter()
        .zip(mask.values.iter())
        .all(|(t, m)| !t || *m);

    // camera height at ground truth and under scaled depth
    let est_normals = normal_from_depth(&r.depth, &cam.model, NormalOrientation::CameraFacing);
    let (heights, hmask) = height_map(&r.depth, &est_normals, &cam.model);
    let gated = articugeo_core::raster::combine_masks(&[&mask, &hmask])?;
    let ch0 = loss_camera_height(&heights, &gated, cam.height_gt)?;
    let mut worst_scale_rel = 0.0f64;
    for s in [0.5, 2.0, 3.0] {
        let scaled = r.depth.scaled(s);
        let n_s = normal_from_depth(&scaled, &cam.model, NormalOrientation::CameraFacing);
        let (hs, hm) = height_map(&scaled, &n_s, &cam.model);
        let gs = articugeo_core::raster::combine_masks(&[&mask, &hm])?;
        let ch = loss_camera_height(&hs, &gs, cam.height_gt)?;
        let expected = (s - 1.0f64).abs() * cam.height_gt;
        worst_scale_rel = worst_scale_rel.max((ch.value - expected).abs() / expected);
    }

    Ok(vec![
        CheckResult::geq(
            "ground.mask_coverage",
            coverage,
            tols.get("ground.coverage_min"),
            format!("{covered}/{labeled} labeled ground pixels"),
        ),
        CheckResult::leq(
            "ground.mask_false_positives",
            fp_rate,
            tols.get("ground.false_positive_max"),
            format!("{false_pos}/{mask_count} masked pixels"),
        ),
        CheckResult::leq(
            "ground.mask_monotone_in_threshold",
            if monotone { 0.0 } else { 1.0 },
            0.0,
            "2 deg mask subset of 5 deg mask",
        ),
        CheckResult::leq(
            "ground.height_loss_at_gt",
            ch0.value / cam.height_gt,
            tols.get("ground.ch_rel"),
            format!("{} ground pixels", ch0.count),
        ),
        CheckResult::leq(
            "ground.height_scale_linearity",
            worst_scale_rel,
            tols.get("ground.ch_scale_rel"),
            "|L_ch(s d) - |s-1| h| / (|s-1| h) over s in {0.5, 2, 3}",
        ),
    ])
}

// ----------------------------------------------------------------- pose

pub fn suite_pose(tols: &Tolerances, _seed: u64) -> Result<Vec<CheckResult>> {
    let traj = fixtures::turning_trajectory(10);
    let vpc = VpcWeights::default();

    let mut worst_loop = 0.0f64;
    let mut worst_loss = 0.0f64;
    for t in 0..9 {
        let (f, r, c_t, c_tau) = traj.articulated_motion(t, t + 1)?;
        let e = cross_vehicle_pose_error(&f, &r, &c_t, &c_tau);
        worst_loop = worst_loop
            .max(e.rotation.frobenius_distance_to_identity())
            .max(e.translation.norm());
        worst_loss = worst_loss.max(loss_pose_consistency(&e, &vpc));
    }

    // exact translation perturbation response and monotonicity
    let (f, r, c_t, c_tau) = traj.articulated_motion(4, 5)?;
    let mut last = -1.0;
    let mut monotone = true;
    let mut worst_pert = 0.0f64;
    for mag in [0.01, 0.05, 0.1, 0.5] {
        let delta = Vec3::new(0.6 * mag, 0.0, 0.8 * mag);
        let perturbed = r.compose(&SE3Transform::from_translation(delta));
        let e = cross_vehicle_pose_error(&f, &perturbed, &c_t, &c_tau);
        let loss = loss_pose_consistency(&e, &vpc);
        if mag == 0.1 {
            worst_pert = (loss - 0.1 * vpc.lambda_translation).abs();
        }
        monotone &= loss > last;
        last = loss;
    }

    // distributed poses conjugate back to the joint motion
    let rig = fixtures::default_rig(320, 192)?;
    let joint = articugeo_core::pose::JointMotionEstimate::new(Vehicle::Front, f);
    let mut worst_dist = 0.0f64;
    for (id, pose) in articugeo_core::pose::distribute_pose(&joint, &rig) {
        let e = &rig.camera(id).model.extrinsic_to_lidar;
        let back = e.compose(&pose).compose(&e.inverse());
        worst_dist = worst_dist
            .max(rotation_error_frobenius(&back, &joint.motion))
            .max((back.translation - joint.motion.translation).norm());
    }

    Ok(vec![
        CheckResult::leq(
            "pose.articulated_loop_identity",
            worst_loop,
            tols.get("pose.loop_abs"),
            "all adjacent pairs on the turning trajectory",
        ),
        CheckResult::leq(
            "pose.articulated_loop_loss",
            worst_loss,
            tols.get("pose.loop_loss"),
            "pose-consistency loss over the closed loop",
        ),
        CheckResult::leq(
            "pose.translation_perturbation_exact",
            worst_pert,
            tols.get("pose.perturbation_abs"),
            "0.1 m rear perturbation moves the loss by 0.1 lambda_t",
        ),
        CheckResult::leq(
            "pose.perturbation_monotone",
            if monotone { 0.0 } else { 1.0 },
            0.0,
            "loss increases over magnitudes {0.01, 0.05, 0.1, 0.5} m",
        ),
        CheckResult::leq(
            "pose.distribute_conjugation_roundtrip",
            worst_dist,
            1e-12,
            "five distributed poses recover the joint motion",
        ),
    ])
}

// ------------------------------------------------------------------ icp

pub fn suite_icp(tols: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    let (mut worst_rot_deg, mut worst_trans, mut monotone) = (0.0f64, 0.0f64, true);
    let trials = 3;
    for trial in 0..trials {
        let r = icp_trial(seed, trial)?;
        monotone &= r.monotone;
        worst_rot_deg = worst_rot_deg.max(r.rotation_error_deg);
        worst_trans = worst_trans.max(r.translation_error);
    }

    // noiseless self-registration from a small offset, on a cloud free of
    // scan-pattern symmetry (a ring-sampled scan vs its own copy has true
    // local minima one azimuth step apart)
    let rng = CounterRng::new(seed);
    let cloud = articugeo_core::pointcloud::PointCloud::new(
        (0..2000u64)
            .map(|i| {
                Vec3::new(
                    16.0 * rng.uniform(40, i, 0) - 8.0,
                    4.0 * rng.uniform(40, i, 1) - 4.0,
                    20.0 * rng.uniform(40, i, 2) - 4.0,
                )
            })
            .collect(),
    );
    let truth = SE3Transform::from_parts(Mat3::rot_y(0.05), Vec3::new(0.1, 0.02, -0.15));
    let moved = cloud.transformed(&truth);
    let cfg = registration_config(SE3Transform::identity());
    let self_result = icp_register(&cloud, &moved, &cfg)?;
    let self_err = rotation_error_frobenius(&self_result.transform, &truth)
        + (self_result.transform.translation - truth.translation).norm();

    Ok(vec![
        CheckResult::leq(
            "icp.noiseless_self_registration",
            self_err,
            tols.get("icp.noiseless_abs"),
            "exact copy registered from a small offset",
        ),
        CheckResult::leq(
            "icp.noisy_rotation_error_deg",
            worst_rot_deg,
            tols.get("icp.rotation_deg"),
            format!("{trials} seeded articulated trials, 1 cm range noise"),
        ),
        CheckResult::leq(
            "icp.noisy_translation_error_m",
            worst_trans,
            tols.get("icp.translation_m"),
            format!("{trials} seeded articulated trials"),
        ),
        CheckResult::leq(
            "icp.residual_monotone",
            if monotone { 0.0 } else { 1.0 },
            0.0,
            "gated RMS non-increasing every iteration",
        ),
    ])
}

pub fn rotation_angle_deg(a: &Mat3<f64>, b: &Mat3<f64>) -> f64 {
    let rel = a.transpose() * *b;
    let trace = rel.m[0][0] + rel.m[1][1] + rel.m[2][2];
    ((trace - 1.0) / 2.0).clamp(-1.0, 1.0).acos().to_degrees()
}

/// Registration config for the synthetic trials: default 1.0 m gate (it is
/// what rejects the non-overlap regions of the partially-overlapping scans)
/// with the per-trial initial guess.
pub fn registration_config(initial_guess: SE3Transform<f64>) -> IcpConfig {
    IcpConfig {
        initial_guess,
        ..Default::default()
    }
}

/// Outcome of one seeded cross-vehicle registration trial.
pub struct IcpTrial {
    pub rotation_error_deg: f64,
    pub translation_error: f64,
    pub monotone: bool,
    pub overlap_fraction: f64,
}

/// Sample both vehicles' LiDAR on the structured scene, perturb the true
/// articulation transform within the documented basin, register, score.
pub fn icp_trial(seed: u64, trial: usize) -> Result<IcpTrial> {
    let scene = fixtures::structured_scene()?;
    let traj = fixtures::turning_trajectory(4);
    // asymmetric range caps leave the front scan blind to regions the rear
    // scan still covers, pinning partial overlap between the clouds
    let target_pattern = LidarPattern {
        n_azimuth: 900,
        max_range: 15.0,
        ..LidarPattern::default_32()
    };
    let source_pattern = LidarPattern {
        n_azimuth: 900,
        max_range: 35.0,
        ..LidarPattern::default_32()
    };
    let rng = CounterRng::new(seed);

    let frame = trial % traj.len();
    let front_pose = traj.front_pose(frame)?;
    let rear_pose = traj.rear_pose(frame)?;
    let truth = traj.cross_vehicle(frame)?;
    let target = sample_lidar(&scene, &front_pose, &target_pattern, 0.01, seed, 2 * trial as u64)?;
    let source =
        sample_lidar(&scene, &rear_pose, &source_pattern, 0.01, seed, 2 * trial as u64 + 1)?;

    // initial guess within the documented basin (<= 10 deg, <= 0.3 m)
    let yaw_off = (10.0f64).to_radians() * (2.0 * rng.uniform(9, trial as u64, 0) - 1.0);
    let t_off = Vec3::new(
        0.2 * (2.0 * rng.uniform(9, trial as u64, 1) - 1.0),
        0.05 * (2.0 * rng.uniform(9, trial as u64, 2) - 1.0),
        0.2 * (2.0 * rng.uniform(9, trial as u64, 3) - 1.0),
    );
    let init = SE3Transform::from_parts(
        truth.rotation * Mat3::rot_y(yaw_off),
        truth.translation + t_off,
    );
    // coarse pass with the default gate covers the whole initial basin;
    // the refinement pass tightens the gate so matches straddling the
    // coverage boundary between the two scans stop pulling the solution
    let coarse = icp_register(&source, &target, &registration_config(init))?;
    let fine_cfg = IcpConfig {
        max_correspondence_dist: 0.25,
        initial_guess: coarse.transform,
        ..Default::default()
    };
    let result = icp_register(&source, &target, &fine_cfg)?;

    // each solve step must not increase its own correspondence residual,
    // and once the gated set stabilizes the whole chain must descend
    let mut monotone = true;
    for pass in [&coarse, &result] {
        for it in &pass.residual_history {
            monotone &= it.rms_after <= it.rms_before + 1e-12;
        }
        for w in pass.residual_history.windows(2) {
            if w[0].pairs == w[1].pairs {
                monotone &= w[1].rms_before <= w[0].rms_after + 1e-9;
            }
        }
    }

    // overlap: fraction of moved source points with a true counterpart
    // within twice the noise-and-sampling scale
    let truth_moved = source.transformed(&truth);
    let tree = articugeo_core::pointcloud::KdTree3::build(&target.points);
    let close = truth_moved
        .points
        .iter()
        .filter(|p| matches!(tree.nearest(**p), Some((_, d2)) if d2 < 0.25))
        .count();

    Ok(IcpTrial {
        rotation_error_deg: rotation_angle_deg(&result.transform.rotation, &truth.rotation),
        translation_error: (result.transform.translation - truth.translation).norm(),
        monotone,
        overlap_fraction: close as f64 / source.len().max(1) as f64,
    })
}

// -------------------------------------------------------------- metrics

pub fn suite_metrics(tols: &Tolerances, _seed: u64) -> Result<Vec<CheckResult>> {
    let mut gt = DepthMap::<f64>::new_invalid(16, 16);
    for v in 0..16 {
        for u in 0..16 {
            gt.set(u, v, 3.0 + 0.4 * u as f64 + 0.2 * v as f64);
        }
    }
    let tol = tols.get("metrics.fixed_abs");

    let fixed = evaluate(&gt, &gt, 100.0, false)?;
    let worst_fixed = fixed
        .abs_rel
        .max(fixed.sq_rel)
        .max(fixed.rmse)
        .max(fixed.rmse_log)
        .max((fixed.delta1 - 1.0).abs())
        .max((fixed.delta2 - 1.0).abs())
        .max((fixed.delta3 - 1.0).abs());

    let r12 = evaluate(&gt.scaled(1.2), &gt, 100.0, false)?;
    let worst_12 = (r12.abs_rel - 0.2).abs().max((r12.delta1 - 1.0).abs());
    let r13 = evaluate(&gt.scaled(1.3), &gt, 100.0, false)?;
    let worst_13 = (r13.abs_rel - 0.3).abs().max(r13.delta1.abs());

    let mut far = DepthMap::<f64>::new_invalid(2, 1);
    far.set(0, 0, 60.0);
    far.set(1, 0, 120.0);
    let capped = evaluate(&far, &far, 100.0, false)?;
    let cap_ok = capped.pixel_count == 1;

    let mut mixed = gt.clone();
    for (i, v) in mixed.values.iter_mut().enumerate() {
        *v *= 1.0 + 0.08 * ((i % 9) as f64);
    }
    let rm = evaluate(&mixed, &gt, 100.0, false)?;
    let monotone = rm.delta1 <= rm.delta2 && rm.delta2 <= rm.delta3 && rm.delta3 <= 1.0;

    Ok(vec![
        CheckResult::leq("metrics.exact_fixed_point", worst_fixed, tol, "evaluate(g, g)"),
        CheckResult::leq(
            "metrics.scale_1_2",
            worst_12,
            tol,
            "abs_rel = 0.2, delta1 = 1 at 1.2 g",
        ),
        CheckResult::leq(
            "metrics.scale_1_3",
            worst_13,
            tol,
            "abs_rel = 0.3, delta1 = 0 at 1.3 g",
        ),
        CheckResult::leq(
            "metrics.range_cap_100m",
            if cap_ok { 0.0 } else { 1.0 },
            0.0,
            "ground truth beyond 100 m excluded",
        ),
        CheckResult::leq(
            "metrics.delta_monotonicity",
            if monotone { 0.0 } else { 1.0 },
            0.0,
            "delta1 <= delta2 <= delta3 <= 1",
        ),
    ])
}

// ------------------------------------------------------------ gradcheck

pub fn suite_gradcheck(tols: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    let scene = fixtures::closure_scene()?;
    let rig = fixtures::default_rig(320, 192)?;
    let traj = fixtures::straight_trajectory(2);
    let out0 = render(&scene, &rig, &traj, 0)?;
    let out1 = render(&scene, &rig, &traj, 1)?;

    let target = rig.camera(CameraId(5));
    let source = rig.camera(CameraId(9));
    let state = RigState::spatial_only(0, traj.cross_vehicle(0)?);
    let x_spatial = articugeo_core::rig::context_transform(
        &ContextSpec::new(ContextKind::WvSpatial, CameraId(5), CameraId(9), 0),
        &rig,
        &state,
        &state,
    )?;

    // evaluate away from every stationary configuration: a smooth
    // multiplicative ripple bends the estimated surface off the plane (a
    // uniform scale would leave the normals unchanged), and noisy priors
    // give the pseudo-normal field per-pixel variation so correspondence
    // shifts actually move the loss
    let mut est_depth = out0.cameras[5].depth.clone();
    for v in 0..est_depth.height {
        for u in 0..est_depth.width {
            let d = est_depth.get(u, v);
            if d > 0.0 {
                let ripple = 1.0
                    + 0.03 * ((u as f64) * 0.061).sin() * ((v as f64) * 0.083).sin()
                    + 0.015 * ((u as f64) * 0.029 + 1.0).cos();
                est_depth.set(u, v, d * ripple);
            }
        }
    }
    let target_img = &out0.cameras[5].image;
    let source_img = &out0.cameras[9].image;
    let _ = &out1;

    let gt_normals_target = out0.cameras[5].normals.clone();
    let n_source =
        normal_from_depth(&out0.cameras[9].depth, &source.model, NormalOrientation::CameraFacing);
    let (_, prior_n5) = articugeo_synth::prior::prior_provider(&out0.cameras[5], 1.0, 6.0, 3, 0)?;
    let (_, prior_n9) = articugeo_synth::prior::prior_provider(&out0.cameras[9], 1.0, 6.0, 3, 1)?;

    let tol = tols.get("gradcheck.rel");
    let rng = CounterRng::new(seed);
    let alpha = 0.85;

    // dual-lifted immutable inputs, shared across functionals
    let d_target_img = target_img.cast::<Dual>();
    let d_source_img = source_img.cast::<Dual>();
    let d_x = x_spatial.cast::<Dual>();
    let d_tcam = target.model.cast::<Dual>();
    let d_scam = source.model.cast::<Dual>();
    let d_gt_normals = gt_normals_target.cast::<Dual>();
    let d_n_source = n_source.cast::<Dual>();
    let d_prior_n5 = prior_n5.cast::<Dual>();
    let d_prior_n9 = prior_n9.cast::<Dual>();

    type F64Loss<'a> = Box<dyn Fn(&DepthMap<f64>) -> Result<MaskedMean<f64>> + 'a>;
    type DualLoss<'a> = Box<dyn Fn(&DepthMap<Dual>) -> Result<MaskedMean<Dual>> + 'a>;
    // relative FD step per functional: the normal-consistency losses carry
    // curvature far above their gradient near alignment, so their oracle
    // needs a smaller step (compensated reductions keep round-off below it)
    let functionals: Vec<(&str, f64, F64Loss, DualLoss)> = vec![
        (
            "pe",
            1e-5,
            Box::new(|d: &DepthMap<f64>| {
                sens::pe_warp_loss(
                    target_img,
                    source_img,
                    d,
                    &x_spatial,
                    &target.model,
                    &source.model,
                    alpha,
                )
            }),
            Box::new(|d: &DepthMap<Dual>| {
                sens::pe_warp_loss(
                    &d_target_img,
                    &d_source_img,
                    d,
                    &d_x,
                    &d_tcam,
                    &d_scam,
                    Dual::constant(alpha),
                )
            }),
        ),
        (
            "nc",
            1e-6,
            Box::new(|d: &DepthMap<f64>| {
                sens::nc_from_depth_loss(d, &target.model, &gt_normals_target)
            }),
            Box::new(|d: &DepthMap<Dual>| sens::nc_from_depth_loss(d, &d_tcam, &d_gt_normals)),
        ),
        (
            "snc",
            1e-6,
            Box::new(|d: &DepthMap<f64>| {
                sens::snc_from_depth_loss(d, &n_source, &x_spatial, &target.model, &source.model)
            }),
            Box::new(|d: &DepthMap<Dual>| {
                sens::snc_from_depth_loss(d, &d_n_source, &d_x, &d_tcam, &d_scam)
            }),
        ),
        (
            "pnc_spatial",
            1e-5,
            Box::new(|d: &DepthMap<f64>| {
                sens::pnc_spatial_from_depth_loss(
                    &prior_n5,
                    &prior_n9,
                    d,
                    &x_spatial,
                    &target.model,
                    &source.model,
                )
            }),
            Box::new(|d: &DepthMap<Dual>| {
                sens::pnc_spatial_from_depth_loss(
                    &d_prior_n5,
                    &d_prior_n9,
                    d,
                    &d_x,
                    &d_tcam,
                    &d_scam,
                )
            }),
        ),
    ];

    let mut results = Vec::new();
    for (fi, (name, rel_step, f_plain, f_dual)) in functionals.iter().enumerate() {
        let mut checked = 0usize;
        let mut worst_rel = 0.0f64;
        let mut attempts = 0u64;
        while checked < 100 && attempts < 20_000 {
            attempts += 1;
            let u = 4 + (rng.uniform(20 + fi as u64, attempts, 0) * (320.0 - 8.0)) as u32;
            let v = 4 + (rng.uniform(20 + fi as u64, attempts, 1) * (192.0 - 8.0)) as u32;
            let d = est_depth.get(u, v);
            if d <= 0.0 {
                continue;
            }
            let step = rel_step * d;
            // smoothness preconditions: correspondence stays inside one
            // bilinear cell with margin, and masks must not flip
            if !sens::correspondence_cell_stable(
                &target.model,
                &source.model,
                &x_spatial,
                u,
                v,
                d,
                step,
                0.05,
            ) {
                continue;
            }
            let (fd, counts) = sens::central_difference(&est_depth, u, v, step, |dd| {
                f_plain(dd)
            })?;
            if !sens::counts_stable(counts) {
                continue;
            }
            if fd.abs() < 1e-10 {
                continue; // below finite-difference noise, relative error undefined
            }
            let dual = sens::directional_sensitivity(&est_depth, u, v, |dd| f_dual(dd))?;
            let rel = (dual - fd).abs() / fd.abs();
            worst_rel = worst_rel.max(rel);
            checked += 1;
        }
        results.push(CheckResult::leq(
            &format!("gradcheck.{name}"),
            worst_rel,
            tol,
            format!("{checked} interior pixels ({attempts} sampled)"),
        ));
        if checked < 100 {
            results.last_mut().unwrap().passed = false;
            results.last_mut().unwrap().detail =
                format!("only {checked} eligible pixels found in {attempts} attempts");
        }
    }
    Ok(results)
}

// -------------------------------------------------------------- closure

pub fn suite_closure(tols: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    let scene = fixtures::closure_scene()?;
    let rig = fixtures::default_rig(320, 192)?;
    let traj = fixtures::turning_trajectory(3);
    let seq = sequence_from_world(&scene, &rig, &traj, 3, 1.0, 0.0, seed)?;
    let report = compute_losses(&seq, &LossOptions::default())?;
    let tol = tols.get("closure.loss_max");
    let mut results = Vec::new();
    for term in &report.terms {
        if term.key == "smoothness" {
            continue;
        }
        let mut check = CheckResult::leq(
            &format!("closure.{}", term.key),
            term.value,
            tol,
            format!("{} contributing pixels", term.count),
        );
        if term.count == 0 {
            check.passed = false;
            check.detail = "no contributing pixels".into();
        }
        results.push(check);
    }
    Ok(results)
}

/// Run a named suite; `all` chains every suite.
pub fn run_suite(name: &str, tols: &Tolerances, seed: u64) -> Result<Vec<CheckResult>> {
    match name {
        "geometry" => suite_geometry(tols, seed),
        "context" => suite_context(tols, seed),
        "warp" => suite_warp(tols, seed),
        "normals" => suite_normals(tols, seed),
        "ground" => suite_ground(tols, seed),
        "pose" => suite_pose(tols, seed),
        "icp" => suite_icp(tols, seed),
        "metrics" => suite_metrics(tols, seed),
        "gradcheck" => suite_gradcheck(tols, seed),
        "closure" => suite_closure(tols, seed),
        "all" => {
            let mut out = Vec::new();
            for suite in SUITES.iter().filter(|s| **s != "all") {
                out.extend(run_suite(suite, tols, seed)?);
            }
            Ok(out)
        }
        other => Err(Error::Parse {
            file: "verify".into(),
            line: 0,
            msg: format!("unknown suite `{other}`; known: {}", SUITES.join(", ")),
        }),
    }
}
