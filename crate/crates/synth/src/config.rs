//! Text configs for scenes and trajectories.
//!
//! Scene file, one directive per line:
//!   max_depth <meters>
//!   ground <y> <base> [amp fx fy fz phase]...
//!   block <min xyz> <max xyz> <base> [amp fx fy fz phase]...
//!   wall <center xyz> <normal_yaw_rad> <width> <height> <base> [wave]...
//!
//! Trajectory file:
//!   arms <front_arm> <rear_arm>
//!   lidar_height <meters>
//!   ground_y <y>
//!   frame <x> <z> <yaw_rad> <articulation_rad>

use std::path::Path;

use articugeo_core::error::{Error, Result};
use articugeo_core::linalg::Vec3;

use crate::scene::{Primitive, Scene, Texture, Wave};
use crate::trajectory::{FramePose, Trajectory};

fn numbers(file: &str, ln: usize, tokens: &[&str]) -> Result<Vec<f64>> {
    tokens
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(file, ln, format!("bad number `{t}`")))
        })
        .collect()
}

fn texture_from(file: &str, ln: usize, vals: &[f64]) -> Result<Texture> {
    if vals.is_empty() || (vals.len() - 1) % 5 != 0 {
        return Err(Error::parse(
            file,
            ln,
            "texture needs a base value plus groups of 5 (amp fx fy fz phase)",
        ));
    }
    let waves = vals[1..]
        .chunks(5)
        .map(|c| Wave {
            amplitude: c[0],
            freq: Vec3::new(c[1], c[2], c[3]),
            phase: c[4],
        })
        .collect();
    Ok(Texture {
        base: vals[0],
        waves,
    })
}

fn texture_to_string(t: &Texture) -> String {
    let mut s = format!("{}", t.base);
    for w in &t.waves {
        s.push_str(&format!(
            " {} {} {} {} {}",
            w.amplitude, w.freq.x, w.freq.y, w.freq.z, w.phase
        ));
    }
    s
}

pub fn read_scene(path: &Path) -> Result<Scene> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&*file, e))?;
    let mut primitives = Vec::new();
    let mut max_depth = 80.0;
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "max_depth" => {
                max_depth = numbers(&file, ln, &tokens[1..])?
                    .first()
                    .copied()
                    .ok_or_else(|| Error::parse(&*file, ln, "max_depth needs a value"))?;
            }
            "ground" => {
                let v = numbers(&file, ln, &tokens[1..])?;
                if v.is_empty() {
                    return Err(Error::parse(&*file, ln, "ground needs `y` then texture"));
                }
                primitives.push(Primitive::Ground {
                    y: v[0],
                    texture: texture_from(&file, ln, &v[1..])?,
                });
            }
            "block" => {
                let v = numbers(&file, ln, &tokens[1..])?;
                if v.len() < 7 {
                    return Err(Error::parse(&*file, ln, "block needs min xyz, max xyz, texture"));
                }
                primitives.push(Primitive::Block {
                    min: Vec3::new(v[0], v[1], v[2]),
                    max: Vec3::new(v[3], v[4], v[5]),
                    texture: texture_from(&file, ln, &v[6..])?,
                });
            }
            "wall" => {
                let v = numbers(&file, ln, &tokens[1..])?;
                if v.len() < 7 {
                    return Err(Error::parse(
                        &*file,
                        ln,
                        "wall needs center xyz, normal_yaw, width, height, texture",
                    ));
                }
                primitives.push(Primitive::Wall {
                    center: Vec3::new(v[0], v[1], v[2]),
                    normal_yaw: v[3],
                    width: v[4],
                    height: v[5],
                    texture: texture_from(&file, ln, &v[6..])?,
                });
            }
            other => {
                return Err(Error::parse(&*file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    Scene::new(primitives, max_depth)
}

pub fn write_scene(path: &Path, scene: &Scene) -> Result<()> {
    let mut text = format!("# articugeo scene\nmax_depth {}\n", scene.max_depth);
    for p in &scene.primitives {
        match p {
            Primitive::Ground { y, texture } => {
                text.push_str(&format!("ground {y} {}\n", texture_to_string(texture)));
            }
            Primitive::Block { min, max, texture } => {
                text.push_str(&format!(
                    "block {} {} {} {} {} {} {}\n",
                    min.x,
                    min.y,
                    min.z,
                    max.x,
                    max.y,
                    max.z,
                    texture_to_string(texture)
                ));
            }
            Primitive::Wall {
                center,
                normal_yaw,
                width,
                height,
                texture,
            } => {
                text.push_str(&format!(
                    "wall {} {} {} {normal_yaw} {width} {height} {}\n",
                    center.x,
                    center.y,
                    center.z,
                    texture_to_string(texture)
                ));
            }
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_trajectory(path: &Path) -> Result<Trajectory> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&*file, e))?;
    let mut traj = Trajectory {
        frames: Vec::new(),
        front_arm: 3.0,
        rear_arm: 3.0,
        lidar_height: 2.0,
        ground_y: 0.0,
    };
    for (i, raw) in text.lines().enumerate() {
        let ln = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "arms" => {
                let v = numbers(&file, ln, &tokens[1..])?;
                if v.len() != 2 {
                    return Err(Error::parse(&*file, ln, "arms needs two values"));
                }
                traj.front_arm = v[0];
                traj.rear_arm = v[1];
            }
            "lidar_height" => {
                traj.lidar_height = numbers(&file, ln, &tokens[1..])?[0];
            }
            "ground_y" => {
                traj.ground_y = numbers(&file, ln, &tokens[1..])?[0];
            }
            "frame" => {
                let v = numbers(&file, ln, &tokens[1..])?;
                if v.len() != 4 {
                    return Err(Error::parse(&*file, ln, "frame needs x z yaw articulation"));
                }
                traj.frames.push(FramePose {
                    x: v[0],
                    z: v[1],
                    yaw: v[2],
                    articulation: v[3],
                });
            }
            other => {
                return Err(Error::parse(&*file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    traj.validate()?;
    Ok(traj)
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut text = format!(
        "# articugeo trajectory\narms {} {}\nlidar_height {}\nground_y {}\n",
        traj.front_arm, traj.rear_arm, traj.lidar_height, traj.ground_y
    );
    for f in &traj.frames {
        text.push_str(&format!("frame {} {} {} {}\n", f.x, f.z, f.yaw, f.articulation));
    }
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}
