//! Regenerate the sample configs shipped under `configs/`.
//!
//! Usage: cargo run -p articugeo-cli --example write_sample_configs -- [DIR]

use std::path::PathBuf;

use articugeo_core::io::write_rig_config;
use articugeo_synth::config::{write_scene, write_trajectory};
use articugeo_synth::fixtures;

fn main() {
    let dir = PathBuf::from(
        std::env::args()
            .nth(1)
            .unwrap_or_else(|| "configs".to_string()),
    );
    std::fs::create_dir_all(&dir).expect("create output directory");

    write_scene(&dir.join("closure_scene.cfg"), &fixtures::closure_scene().unwrap()).unwrap();
    write_scene(
        &dir.join("structured_scene.cfg"),
        &fixtures::structured_scene().unwrap(),
    )
    .unwrap();
    write_scene(&dir.join("step_scene.cfg"), &fixtures::step_scene().unwrap()).unwrap();
    write_trajectory(&dir.join("turning_10.cfg"), &fixtures::turning_trajectory(10)).unwrap();
    write_trajectory(&dir.join("straight_3.cfg"), &fixtures::straight_trajectory(3)).unwrap();
    write_rig_config(&dir.join("rig_320x192.cfg"), &fixtures::default_rig(320, 192).unwrap())
        .unwrap();
    write_rig_config(&dir.join("rig_640x384.cfg"), &fixtures::default_rig(640, 384).unwrap())
        .unwrap();
    println!("wrote sample configs to {}", dir.display());
}
