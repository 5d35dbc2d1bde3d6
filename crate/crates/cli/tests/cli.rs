//! End-to-end checks of the binary: exit codes, error reporting, context
//! toggles, and the calibrate/metrics file round trips.

use std::path::{Path, PathBuf};
use std::process::Command;

use articugeo_core::io;
use articugeo_synth::config;
use articugeo_synth::fixtures;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_articugeo")
}

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir()
        .join("articugeo_cli_tests")
        .join(format!("{name}_{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn render_fixture(dir: &Path, scene: &articugeo_synth::scene::Scene, frames: usize) -> PathBuf {
    config::write_scene(&dir.join("scene.cfg"), scene).unwrap();
    io::write_rig_config(&dir.join("rig.cfg"), &fixtures::default_rig(128, 80).unwrap()).unwrap();
    config::write_trajectory(&dir.join("traj.cfg"), &fixtures::turning_trajectory(frames))
        .unwrap();
    let out = dir.join("run");
    let status = Command::new(bin())
        .args([
            "render",
            "--scene",
            dir.join("scene.cfg").to_str().unwrap(),
            "--rig",
            dir.join("rig.cfg").to_str().unwrap(),
            "--traj",
            dir.join("traj.cfg").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "3",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    out.join("manifest.txt")
}

#[test]
fn no_arguments_is_usage_error() {
    let out = Command::new(bin()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_command_and_unknown_suite_are_usage_errors() {
    let out = Command::new(bin()).arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = Command::new(bin()).args(["verify", "nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("unknown suite"), "{stderr}");
}

#[test]
fn missing_rig_file_exits_2_and_names_the_path() {
    let dir = workdir("missing_rig");
    config::write_scene(&dir.join("scene.cfg"), &fixtures::closure_scene().unwrap()).unwrap();
    config::write_trajectory(&dir.join("traj.cfg"), &fixtures::straight_trajectory(1)).unwrap();
    let out = Command::new(bin())
        .args([
            "render",
            "--scene",
            dir.join("scene.cfg").to_str().unwrap(),
            "--rig",
            dir.join("no_such_rig.cfg").to_str().unwrap(),
            "--traj",
            dir.join("traj.cfg").to_str().unwrap(),
            "--out",
            dir.join("out").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no_such_rig.cfg"), "{stderr}");
}

#[test]
fn render_file_count_contract_one_frame() {
    let dir = workdir("file_count");
    config::write_scene(&dir.join("scene.cfg"), &fixtures::closure_scene().unwrap()).unwrap();
    io::write_rig_config(&dir.join("rig.cfg"), &fixtures::default_rig(96, 64).unwrap()).unwrap();
    config::write_trajectory(&dir.join("traj.cfg"), &fixtures::straight_trajectory(1)).unwrap();
    let out = dir.join("run");
    let status = Command::new(bin())
        .args([
            "render",
            "--scene",
            dir.join("scene.cfg").to_str().unwrap(),
            "--rig",
            dir.join("rig.cfg").to_str().unwrap(),
            "--traj",
            dir.join("traj.cfg").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--lidar",
            "none",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let count = |ext: &str, prior: bool| {
        std::fs::read_dir(&out)
            .unwrap()
            .filter(|e| {
                let name = e.as_ref().unwrap().file_name().to_string_lossy().to_string();
                name.ends_with(ext) && name.contains("prior") == prior
            })
            .count()
    };
    assert_eq!(count("_image.imgf", false), 10);
    assert_eq!(count("_depth.dptf", false), 10);
    assert_eq!(count("_normal.nrmf", false), 10);
    assert_eq!(count("_prior_depth.dptf", true), 10);
    assert_eq!(count("_prior_normal.nrmf", true), 10);
    assert!(out.join("manifest.txt").exists());
    assert!(out.join("rig.cfg").exists());
}

#[test]
fn cv_type_toggles_control_report_terms() {
    let dir = workdir("cv_toggle");
    let manifest = render_fixture(&dir, &fixtures::closure_scene().unwrap(), 2);
    let run_with = |types: &str| {
        let out = Command::new(bin())
            .args([
                "losses",
                "--manifest",
                manifest.to_str().unwrap(),
                "--cv-types",
                types,
                "--skip",
                "prior_normal_temporal,prior_normal_spatial,prior_normal_spatiotemporal,prior_normal_mvrc,camera_height",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8_lossy(&out.stdout).to_string()
    };
    let none = run_with("");
    assert!(!none.contains("photo_spatial_cv0"));
    assert!(!none.contains("photo_spatial_cv1"));
    assert!(none.contains("photo_spatial_wv"));
    let some = run_with("1,2");
    assert!(!some.contains("photo_spatial_cv0"));
    assert!(some.contains("photo_spatial_cv1"));
    assert!(some.contains("photo_spatial_cv2"));
}

#[test]
fn depth_scale_flag_moves_camera_height_loss() {
    let dir = workdir("depth_scale");
    let manifest = render_fixture(&dir, &fixtures::closure_scene().unwrap(), 1);
    let out = Command::new(bin())
        .args([
            "losses",
            "--manifest",
            manifest.to_str().unwrap(),
            "--depth-scale",
            "2",
            "--skip",
            "photo_temporal,photo_spatiotemporal,photo_mvrc,prior_normal_temporal,prior_normal_spatiotemporal,prior_normal_mvrc",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let ch_line = stdout
        .lines()
        .find(|l| l.starts_with("camera_height"))
        .expect("camera_height term present");
    let value: f64 = ch_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    // doubled depth over ground: height error equals the mounting height
    let h_gt = fixtures::LIDAR_HEIGHT - fixtures::CAMERA_DROP;
    assert!((value - h_gt).abs() < 0.01 * h_gt, "camera_height {value} vs {h_gt}");
}

#[test]
fn calibrate_recovers_articulation_from_rendered_clouds() {
    let dir = workdir("calibrate");
    config::write_scene(&dir.join("scene.cfg"), &fixtures::structured_scene().unwrap()).unwrap();
    io::write_rig_config(&dir.join("rig.cfg"), &fixtures::default_rig(96, 64).unwrap()).unwrap();
    config::write_trajectory(&dir.join("traj.cfg"), &fixtures::turning_trajectory(2)).unwrap();
    let out = dir.join("run");
    let status = Command::new(bin())
        .args([
            "render",
            "--scene",
            dir.join("scene.cfg").to_str().unwrap(),
            "--rig",
            dir.join("rig.cfg").to_str().unwrap(),
            "--traj",
            dir.join("traj.cfg").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--lidar",
            "first",
            "--lidar-noise",
            "0.01",
            "--seed",
            "5",
        ])
        .status()
        .unwrap();
    assert!(status.success());

    // initial guess: ground truth bent by 5 degrees and 15 cm
    let manifest = io::read_manifest(&out.join("manifest.txt")).unwrap();
    let truth = manifest.cross_vehicle[0];
    let init = articugeo_core::geometry::SE3Transform::from_parts(
        truth.rotation * articugeo_core::linalg::Mat3::rot_y(5.0f64.to_radians()),
        truth.translation + articugeo_core::linalg::Vec3::new(0.1, 0.0, -0.1),
    );
    io::write_transform(&dir.join("init.txt"), &init, &[]).unwrap();

    let result = Command::new(bin())
        .args([
            "calibrate",
            "--source",
            out.join("f000_rear.ply").to_str().unwrap(),
            "--target",
            out.join("f000_front.ply").to_str().unwrap(),
            "--init",
            dir.join("init.txt").to_str().unwrap(),
            "--out",
            dir.join("cross.txt").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let recovered = io::read_transform(&dir.join("cross.txt")).unwrap();
    let rot_err = articugeo_core::geometry::rotation_error_frobenius(&recovered, &truth);
    let trans_err = (recovered.translation - truth.translation).norm();
    // full-range clouds with the coarse 1 m gate: centimeter-level recovery
    assert!(rot_err < 0.02, "rotation error {rot_err}");
    assert!(trans_err < 0.05, "translation error {trans_err} m");
}

#[test]
fn calibrate_empty_cloud_is_numerical_failure() {
    let dir = workdir("empty_cloud");
    let empty = articugeo_core::pointcloud::PointCloud::new(vec![]);
    io::write_ply(&dir.join("empty.ply"), &empty).unwrap();
    io::write_ply(&dir.join("also_empty.ply"), &empty).unwrap();
    let out = Command::new(bin())
        .args([
            "calibrate",
            "--source",
            dir.join("empty.ply").to_str().unwrap(),
            "--target",
            dir.join("also_empty.ply").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no correspondences"), "{stderr}");
}

#[test]
fn motion_file_injection_matches_derived_motions() {
    use articugeo_cli::commands::losses::{run, LossParams};
    use articugeo_core::pipeline::{GroundMaskSource, NormalRoute};
    use articugeo_core::rig::Vehicle;

    let dir = workdir("motions");
    let manifest_path = render_fixture(&dir, &fixtures::closure_scene().unwrap(), 2);
    let manifest = io::read_manifest(&manifest_path).unwrap();

    // motion file carrying exactly the ground-truth frame-to-frame motions
    let motion = |pose_t: &articugeo_core::Se3, pose_tau: &articugeo_core::Se3| {
        pose_tau.inverse().compose(pose_t)
    };
    let motions = vec![
        (0usize, Vehicle::Front, motion(&manifest.pose_front[0], &manifest.pose_front[1])),
        (0usize, Vehicle::Rear, motion(&manifest.pose_rear[0], &manifest.pose_rear[1])),
    ];
    io::write_motions(&dir.join("motions.txt"), &motions).unwrap();

    let base_params = LossParams {
        manifest: manifest_path.clone(),
        weights: None,
        cv_types: vec![],
        skip: ["prior_normal_temporal", "prior_normal_spatial", "prior_normal_spatiotemporal",
               "prior_normal_mvrc", "camera_height", "depth_consistency", "normal_spatial"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
        depth_scale: 1.0,
        cross: None,
        motions: None,
        out: None,
        depth_kind: "depth_gt".into(),
        normal_route: NormalRoute::Direct,
        ground_mask_source: GroundMaskSource::Prior,
    };
    let plain = run(&base_params).unwrap();
    let injected = run(&LossParams {
        motions: Some(dir.join("motions.txt")),
        ..base_params
    })
    .unwrap();
    for (a, b) in plain.terms.iter().zip(injected.terms.iter()) {
        assert_eq!(a.key, b.key);
        assert!(
            (a.value - b.value).abs() < 1e-9,
            "{}: {} vs {}",
            a.key,
            a.value,
            b.value
        );
    }
}

#[test]
fn metrics_of_identical_manifests_is_zero_error() {
    let dir = workdir("metrics");
    let manifest = render_fixture(&dir, &fixtures::closure_scene().unwrap(), 1);
    let out = Command::new(bin())
        .args([
            "metrics",
            "--pred",
            manifest.to_str().unwrap(),
            "--gt",
            manifest.to_str().unwrap(),
            "--max-depth",
            "100",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("abs_rel 0.000000"), "{stdout}");
    assert!(stdout.contains("delta1 1.000000"), "{stdout}");
}

#[test]
fn verify_list_tols_and_tol_override() {
    let out = Command::new(bin())
        .args(["verify", "geometry", "--list-tols"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("geometry.roundtrip_rel"));

    // an absurdly tight tolerance must flip the suite to FAIL with exit 3
    let out = Command::new(bin())
        .args(["verify", "geometry", "--tol", "geometry.roundtrip_rel=1e-30"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
