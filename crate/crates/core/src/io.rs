//! File formats: binary rasters, ASCII PLY clouds, rig/weights configs,
//! motion and transform files, run manifests and flat reports.
//!
//! Binary rasters are little-endian with fixed magics:
//!   depth  "DPTF": u32 width, u32 height, then f32 row-major meters
//!   image  "IMGF": u32 width, height, channels, then f32 interleaved
//!   normal "NRMF": u32 width, height, then 3 x f32 per pixel
//!   mask   "MSK1": u32 width, height, then one byte in {0, 1} per pixel
//! Normal-map validity travels as a separate MSK1 file.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geometry::{CameraModel, SE3Transform};
use crate::linalg::Vec3;
use crate::losses::{LossReport, LossTerm, LossWeights};
use crate::metrics::MetricReport;
use crate::pointcloud::PointCloud;
use crate::raster::{DepthMap, ImageBuffer, NormalMap, NormalOrientation, PixelMask};
use crate::rig::{CameraId, RigCamera, RigConfig, Vehicle};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn wr(path: &Path, w: &mut impl Write, bytes: &[u8]) -> Result<()> {
    w.write_all(bytes)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn rd_exact(path: &Path, r: &mut impl Read, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn rd_u32(path: &Path, r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    rd_exact(path, r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn rd_f32(path: &Path, r: &mut impl Read) -> Result<f32> {
    let mut b = [0u8; 4];
    rd_exact(path, r, &mut b)?;
    Ok(f32::from_le_bytes(b))
}

fn check_magic(path: &Path, r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    rd_exact(path, r, &mut b)?;
    if &b != magic {
        return Err(Error::BadFormat {
            path: path.display().to_string(),
            msg: format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&b),
                String::from_utf8_lossy(magic)
            ),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- rasters

pub fn write_depth(path: &Path, depth: &DepthMap<f64>) -> Result<()> {
    let mut w = create(path)?;
    wr(path, &mut w, b"DPTF")?;
    wr(path, &mut w, &depth.width.to_le_bytes())?;
    wr(path, &mut w, &depth.height.to_le_bytes())?;
    for v in &depth.values {
        wr(path, &mut w, &(*v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_depth(path: &Path) -> Result<DepthMap<f64>> {
    let mut r = open(path)?;
    check_magic(path, &mut r, b"DPTF")?;
    let width = rd_u32(path, &mut r)?;
    let height = rd_u32(path, &mut r)?;
    let mut values = Vec::with_capacity((width * height) as usize);
    for _ in 0..width * height {
        values.push(rd_f32(path, &mut r)? as f64);
    }
    Ok(DepthMap::from_values(width, height, values))
}

pub fn write_image(path: &Path, img: &ImageBuffer<f64>) -> Result<()> {
    let mut w = create(path)?;
    wr(path, &mut w, b"IMGF")?;
    wr(path, &mut w, &img.width.to_le_bytes())?;
    wr(path, &mut w, &img.height.to_le_bytes())?;
    wr(path, &mut w, &img.channels.to_le_bytes())?;
    for v in &img.values {
        wr(path, &mut w, &(*v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn read_image(path: &Path) -> Result<ImageBuffer<f64>> {
    let mut r = open(path)?;
    check_magic(path, &mut r, b"IMGF")?;
    let width = rd_u32(path, &mut r)?;
    let height = rd_u32(path, &mut r)?;
    let channels = rd_u32(path, &mut r)?;
    if channels != 1 && channels != 3 {
        return Err(Error::BadFormat {
            path: path.display().to_string(),
            msg: format!("image channels must be 1 or 3, got {channels}"),
        });
    }
    let n = (width * height * channels) as usize;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(rd_f32(path, &mut r)? as f64);
    }
    Ok(ImageBuffer::from_values(width, height, channels, values))
}

/// Writes vectors only; pair with [`write_mask`] for validity.
pub fn write_normals(path: &Path, normals: &NormalMap<f64>) -> Result<()> {
    let mut w = create(path)?;
    wr(path, &mut w, b"NRMF")?;
    wr(path, &mut w, &normals.width.to_le_bytes())?;
    wr(path, &mut w, &normals.height.to_le_bytes())?;
    for n in &normals.vectors {
        wr(path, &mut w, &(n.x as f32).to_le_bytes())?;
        wr(path, &mut w, &(n.y as f32).to_le_bytes())?;
        wr(path, &mut w, &(n.z as f32).to_le_bytes())?;
    }
    Ok(())
}

/// Vectors from NRMF plus validity from a MSK1 companion file. The stored
/// orientation tag must be supplied by the caller's convention; rasters
/// written by this workspace are camera-facing unless noted.
pub fn read_normals(
    path: &Path,
    valid_path: &Path,
    orientation: NormalOrientation,
) -> Result<NormalMap<f64>> {
    let mut r = open(path)?;
    check_magic(path, &mut r, b"NRMF")?;
    let width = rd_u32(path, &mut r)?;
    let height = rd_u32(path, &mut r)?;
    let mut vectors = Vec::with_capacity((width * height) as usize);
    for _ in 0..width * height {
        let x = rd_f32(path, &mut r)? as f64;
        let y = rd_f32(path, &mut r)? as f64;
        let z = rd_f32(path, &mut r)? as f64;
        vectors.push(Vec3::new(x, y, z));
    }
    let mask = read_mask(valid_path)?;
    if mask.width != width || mask.height != height {
        return Err(Error::DimensionMismatch {
            expected: (width, height),
            got: (mask.width, mask.height),
            what: "normal validity mask",
        });
    }
    Ok(NormalMap {
        width,
        height,
        vectors,
        valid: mask.values,
        orientation,
    })
}

pub fn write_mask(path: &Path, mask: &PixelMask) -> Result<()> {
    let mut w = create(path)?;
    wr(path, &mut w, b"MSK1")?;
    wr(path, &mut w, &mask.width.to_le_bytes())?;
    wr(path, &mut w, &mask.height.to_le_bytes())?;
    let bytes: Vec<u8> = mask.values.iter().map(|b| *b as u8).collect();
    wr(path, &mut w, &bytes)?;
    Ok(())
}

pub fn read_mask(path: &Path) -> Result<PixelMask> {
    let mut r = open(path)?;
    check_magic(path, &mut r, b"MSK1")?;
    let width = rd_u32(path, &mut r)?;
    let height = rd_u32(path, &mut r)?;
    let mut bytes = vec![0u8; (width * height) as usize];
    rd_exact(path, &mut r, &mut bytes)?;
    for (i, b) in bytes.iter().enumerate() {
        if *b > 1 {
            return Err(Error::BadFormat {
                path: path.display().to_string(),
                msg: format!("mask byte {i} is {b}, must be 0 or 1"),
            });
        }
    }
    Ok(PixelMask {
        width,
        height,
        values: bytes.into_iter().map(|b| b == 1).collect(),
    })
}

// ------------------------------------------------------------------- PLY

pub fn write_ply(path: &Path, cloud: &PointCloud) -> Result<()> {
    let mut w = create(path)?;
    let header = format!(
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nend_header\n",
        cloud.len()
    );
    wr(path, &mut w, header.as_bytes())?;
    for p in &cloud.points {
        wr(path, &mut w, format!("{} {} {}\n", p.x, p.y, p.z).as_bytes())?;
    }
    Ok(())
}

pub fn read_ply(path: &Path) -> Result<PointCloud> {
    let file = path.display().to_string();
    let r = open(path)?;
    let mut lines = r.lines().enumerate();
    let mut next = |expect: &str| -> Result<(usize, String)> {
        for (i, line) in lines.by_ref() {
            let line = line.map_err(|e| Error::io(&*file, e))?;
            let trimmed = line.trim().to_string();
            if trimmed.is_empty() || trimmed.starts_with("comment") {
                continue;
            }
            return Ok((i + 1, trimmed));
        }
        Err(Error::parse(&*file, 0, format!("unexpected end of file, expected {expect}")))
    };

    let (ln, line) = next("ply")?;
    if line != "ply" {
        return Err(Error::parse(&*file, ln, "expected `ply`"));
    }
    let (ln, line) = next("format")?;
    if line != "format ascii 1.0" {
        return Err(Error::parse(&*file, ln, "expected `format ascii 1.0`"));
    }
    let (ln, line) = next("element vertex")?;
    let count: usize = line
        .strip_prefix("element vertex ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::parse(&*file, ln, "expected `element vertex N`"))?;
    for prop in ["x", "y", "z"] {
        let (ln, line) = next("property")?;
        if line != format!("property float {prop}") {
            return Err(Error::parse(
                &*file,
                ln,
                format!("expected `property float {prop}`, got `{line}`"),
            ));
        }
    }
    let (ln, line) = next("end_header")?;
    if line != "end_header" {
        return Err(Error::parse(&*file, ln, "expected `end_header`"));
    }
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let (ln, line) = next("vertex line")?;
        let mut it = line.split_whitespace();
        let mut coord = |name: &str| -> Result<f64> {
            it.next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| Error::parse(&*file, ln, format!("bad {name} coordinate")))
        };
        let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
        points.push(Vec3::new(x, y, z));
    }
    Ok(PointCloud::new(points))
}

// ------------------------------------------------------------ rig config

fn parse_floats(file: &str, ln: usize, tokens: &[&str], n: usize) -> Result<Vec<f64>> {
    if tokens.len() != n {
        return Err(Error::parse(
            file,
            ln,
            format!("expected {n} numbers, got {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(file, ln, format!("bad number `{t}`")))
        })
        .collect()
}

fn matrix16(file: &str, ln: usize, tokens: &[&str]) -> Result<SE3Transform<f64>> {
    let v = parse_floats(file, ln, tokens, 16)?;
    let mut m = [0.0; 16];
    m.copy_from_slice(&v);
    SE3Transform::from_matrix4(&m).map_err(|e| Error::parse(file, ln, e.to_string()))
}

pub fn write_rig_config(path: &Path, rig: &RigConfig<f64>) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::from("# articugeo rig configuration\n");
    for cam in rig.cameras() {
        text.push_str(&format!("camera {}\n", cam.id));
        text.push_str(&format!("vehicle {}\n", cam.vehicle.name()));
        text.push_str(&format!("fx {}\n", cam.model.fx));
        text.push_str(&format!("fy {}\n", cam.model.fy));
        text.push_str(&format!("cx {}\n", cam.model.cx));
        text.push_str(&format!("cy {}\n", cam.model.cy));
        text.push_str(&format!("width {}\n", cam.model.width));
        text.push_str(&format!("height {}\n", cam.model.height));
        let m = cam.model.extrinsic_to_lidar.to_matrix4();
        text.push_str("extrinsic_to_lidar");
        for v in m {
            text.push_str(&format!(" {v}"));
        }
        text.push('\n');
        text.push_str(&format!("height_gt {}\n", cam.height_gt));
        text.push_str("end\n");
    }
    for (a, b) in &rig.wv_pairs {
        text.push_str(&format!("wv_pair {a} {b}\n"));
    }
    if let Some(table) = &rig.cv_pairs_override {
        for (ty, pairs) in table.iter().enumerate() {
            for (a, b) in pairs {
                text.push_str(&format!("cross_vehicle_pair {ty} {a} {b}\n"));
            }
        }
    }
    wr(path, &mut w, text.as_bytes())
}

pub fn read_rig_config(path: &Path) -> Result<RigConfig<f64>> {
    let file = path.display().to_string();
    let r = open(path)?;
    let mut cameras: Vec<RigCamera<f64>> = Vec::new();
    let mut wv_pairs = Vec::new();
    let mut cv_override: [Vec<(CameraId, CameraId)>; 3] = Default::default();
    let mut any_cv = false;

    #[derive(Default)]
    struct Partial {
        id: Option<CameraId>,
        vehicle: Option<Vehicle>,
        line: usize,
        fx: Option<f64>,
        fy: Option<f64>,
        cx: Option<f64>,
        cy: Option<f64>,
        width: Option<u32>,
        height: Option<u32>,
        extrinsic: Option<SE3Transform<f64>>,
        height_gt: Option<f64>,
    }
    let mut current: Option<Partial> = None;

    let cam_id = |file: &str, ln: usize, tok: &str| -> Result<CameraId> {
        CameraId::parse(tok)
            .ok_or_else(|| Error::parse(file, ln, format!("bad camera id `{tok}`")))
    };

    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(&*file, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match (tokens[0], &mut current) {
            ("camera", None) => {
                if tokens.len() != 2 {
                    return Err(Error::parse(&*file, ln, "usage: camera <id>"));
                }
                current = Some(Partial {
                    id: Some(cam_id(&file, ln, tokens[1])?),
                    line: ln,
                    ..Default::default()
                });
            }
            ("camera", Some(_)) => {
                return Err(Error::parse(&*file, ln, "camera block not closed with `end`"));
            }
            ("vehicle", Some(p)) => {
                if tokens.len() != 2 {
                    return Err(Error::parse(&*file, ln, "usage: vehicle <front|rear>"));
                }
                p.vehicle = Some(
                    Vehicle::parse(tokens[1]).map_err(|e| Error::parse(&*file, ln, e.to_string()))?,
                );
            }
            ("fx", Some(p)) => p.fx = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0]),
            ("fy", Some(p)) => p.fy = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0]),
            ("cx", Some(p)) => p.cx = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0]),
            ("cy", Some(p)) => p.cy = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0]),
            ("width", Some(p)) => {
                p.width = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0] as u32)
            }
            ("height", Some(p)) => {
                p.height = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0] as u32)
            }
            ("extrinsic_to_lidar", Some(p)) => {
                p.extrinsic = Some(matrix16(&file, ln, &tokens[1..])?);
            }
            ("height_gt", Some(p)) => {
                p.height_gt = Some(parse_floats(&file, ln, &tokens[1..], 1)?[0]);
            }
            ("end", slot @ Some(_)) => {
                let p = slot.take().unwrap();
                let id = p.id.expect("camera header sets the id");
                let missing = |what: &str| {
                    Error::parse(&*file, p.line, format!("camera {id} missing `{what}`"))
                };
                let model = CameraModel::new(
                    p.fx.ok_or_else(|| missing("fx"))?,
                    p.fy.ok_or_else(|| missing("fy"))?,
                    p.cx.ok_or_else(|| missing("cx"))?,
                    p.cy.ok_or_else(|| missing("cy"))?,
                    p.width.ok_or_else(|| missing("width"))?,
                    p.height.ok_or_else(|| missing("height"))?,
                    p.extrinsic.ok_or_else(|| missing("extrinsic_to_lidar"))?,
                )
                .map_err(|e| Error::parse(&*file, p.line, e.to_string()))?;
                cameras.push(RigCamera {
                    id,
                    vehicle: p.vehicle.ok_or_else(|| missing("vehicle"))?,
                    model,
                    height_gt: p.height_gt.ok_or_else(|| missing("height_gt"))?,
                });
            }
            ("wv_pair", None) => {
                if tokens.len() != 3 {
                    return Err(Error::parse(&*file, ln, "usage: wv_pair <id> <id>"));
                }
                wv_pairs.push((cam_id(&file, ln, tokens[1])?, cam_id(&file, ln, tokens[2])?));
            }
            ("cross_vehicle_pair" | "cv_pair", None) => {
                if tokens.len() != 4 {
                    return Err(Error::parse(
                        &*file,
                        ln,
                        "usage: cross_vehicle_pair <type> <id> <id>",
                    ));
                }
                let ty: usize = tokens[1]
                    .parse()
                    .ok()
                    .filter(|t| *t < 3)
                    .ok_or_else(|| Error::parse(&*file, ln, "cv type must be 0, 1, or 2"))?;
                any_cv = true;
                cv_override[ty]
                    .push((cam_id(&file, ln, tokens[2])?, cam_id(&file, ln, tokens[3])?));
            }
            (other, _) => {
                return Err(Error::parse(&*file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    if current.is_some() {
        return Err(Error::parse(&*file, 0, "unterminated camera block"));
    }
    let cv = any_cv.then(|| cv_override.to_vec());
    RigConfig::new(cameras, wv_pairs, cv).map_err(|e| Error::parse(&*file, 0, e.to_string()))
}

// --------------------------------------------------------------- weights

pub fn read_weights(path: &Path) -> Result<LossWeights> {
    let file = path.display().to_string();
    let r = open(path)?;
    let mut w = LossWeights::default();
    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(&*file, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(&*file, ln, "usage: <name> <value>"));
        }
        let value: f64 = tokens[1]
            .parse()
            .map_err(|_| Error::parse(&*file, ln, format!("bad number `{}`", tokens[1])))?;
        match tokens[0] {
            "alpha" => w.alpha = value,
            "lambda_temporal" => w.lambda_temporal = value,
            "lambda_spatial" => w.lambda_spatial = value,
            "lambda_spatiotemporal" => w.lambda_spatiotemporal = value,
            "lambda_mvrc" => w.lambda_mvrc = value,
            "lambda_depth_consistency" => w.lambda_depth_consistency = value,
            "lambda_smoothness" => w.lambda_smoothness = value,
            "lambda_normal_spatial" => w.lambda_normal_spatial = value,
            "lambda_prior_normal" => w.lambda_prior_normal = value,
            "lambda_camera_height" => w.lambda_camera_height = value,
            "lambda_pose_consistency" => w.lambda_pose_consistency = value,
            other => {
                return Err(Error::parse(&*file, ln, format!("unknown weight `{other}`")));
            }
        }
    }
    w.validate().map_err(|e| Error::parse(&*file, 0, e.to_string()))?;
    Ok(w)
}

// --------------------------------------------------------------- reports

/// Flat `name value count` lines, one per term, then `total <value>`.
pub fn write_loss_report(path: &Path, report: &LossReport) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::new();
    for t in &report.terms {
        text.push_str(&format!("{} {:.17e} {}\n", t.key, t.value, t.count));
    }
    text.push_str(&format!("total {:.17e}\n", report.total));
    wr(path, &mut w, text.as_bytes())
}

pub fn read_loss_report(path: &Path) -> Result<LossReport> {
    let file = path.display().to_string();
    let r = open(path)?;
    let mut report = LossReport::default();
    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(&*file, e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens[0] == "total" {
            report.total = tokens[1]
                .parse()
                .map_err(|_| Error::parse(&*file, ln, "bad total"))?;
            continue;
        }
        if tokens.len() != 3 {
            return Err(Error::parse(&*file, ln, "expected `name value count`"));
        }
        report.terms.push(LossTerm {
            key: tokens[0].to_string(),
            value: tokens[1]
                .parse()
                .map_err(|_| Error::parse(&*file, ln, "bad value"))?,
            count: tokens[2]
                .parse()
                .map_err(|_| Error::parse(&*file, ln, "bad count"))?,
            weight: 0.0,
        });
    }
    Ok(report)
}

pub fn write_metric_report(path: &Path, report: &MetricReport) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::new();
    for (k, v) in report.entries() {
        text.push_str(&format!("{k} {v:.17e}\n"));
    }
    wr(path, &mut w, text.as_bytes())
}

// ---------------------------------------------- transforms and motions

/// 16 row-major floats on one line, with optional metadata lines after.
pub fn write_transform(
    path: &Path,
    t: &SE3Transform<f64>,
    metadata: &[(&str, f64)],
) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::new();
    for v in t.to_matrix4() {
        text.push_str(&format!("{v:.17e} "));
    }
    text.push('\n');
    for (k, v) in metadata {
        text.push_str(&format!("{k} {v:.17e}\n"));
    }
    wr(path, &mut w, text.as_bytes())
}

pub fn read_transform(path: &Path) -> Result<SE3Transform<f64>> {
    let file = path.display().to_string();
    let r = open(path)?;
    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(&*file, e))?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() || line.starts_with('#') {
            continue;
        }
        return matrix16(&file, ln, &tokens);
    }
    Err(Error::parse(&*file, 0, "no transform line found"))
}

/// Motion file: one line per entry, `frame_index vehicle 16-float transform`
/// mapping the vehicle's LiDAR frame at `frame` to its frame at `frame + 1`.
pub fn write_motions(path: &Path, motions: &[(usize, Vehicle, SE3Transform<f64>)]) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::new();
    for (frame, vehicle, t) in motions {
        text.push_str(&format!("{frame} {}", vehicle.name()));
        for v in t.to_matrix4() {
            text.push_str(&format!(" {v:.17e}"));
        }
        text.push('\n');
    }
    wr(path, &mut w, text.as_bytes())
}

pub fn read_motions(path: &Path) -> Result<Vec<(usize, Vehicle, SE3Transform<f64>)>> {
    let file = path.display().to_string();
    let r = open(path)?;
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(&*file, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 18 {
            return Err(Error::parse(
                &*file,
                ln,
                "expected `frame vehicle` plus 16 floats",
            ));
        }
        let frame: usize = tokens[0]
            .parse()
            .map_err(|_| Error::parse(&*file, ln, "bad frame index"))?;
        let vehicle =
            Vehicle::parse(tokens[1]).map_err(|e| Error::parse(&*file, ln, e.to_string()))?;
        out.push((frame, vehicle, matrix16(&file, ln, &tokens[2..])?));
    }
    Ok(out)
}

// -------------------------------------------------------------- manifest

/// Raster roles a manifest can reference per (frame, camera).
pub const RASTER_KINDS: [&str; 7] = [
    "image",
    "depth_gt",
    "normal_gt",
    "normal_gt_valid",
    "ground_gt",
    "prior_depth",
    "prior_normal",
];

/// Index of one rendered run: rig config, per-frame vehicle poses and
/// articulation transforms, and per-(frame, camera) raster paths. All paths
/// are relative to the manifest's directory.
#[derive(Clone, Debug, Default)]
pub struct Manifest {
    pub rig: PathBuf,
    pub frames: usize,
    /// Per frame: LiDAR -> world pose of each vehicle.
    pub pose_front: Vec<SE3Transform<f64>>,
    pub pose_rear: Vec<SE3Transform<f64>>,
    /// Per frame: rear LiDAR -> front LiDAR.
    pub cross_vehicle: Vec<SE3Transform<f64>>,
    /// (frame, camera, kind) -> relative path.
    pub rasters: BTreeMap<(usize, u8, String), PathBuf>,
    /// (frame, vehicle) -> relative PLY path.
    pub clouds: BTreeMap<(usize, String), PathBuf>,
}

impl Manifest {
    pub fn raster(&self, frame: usize, cam: CameraId, kind: &str) -> Result<&PathBuf> {
        self.rasters
            .get(&(frame, cam.0, kind.to_string()))
            .ok_or(Error::MissingPrior("raster listed in manifest"))
    }

    pub fn has_raster(&self, frame: usize, cam: CameraId, kind: &str) -> bool {
        self.rasters.contains_key(&(frame, cam.0, kind.to_string()))
    }
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let mut w = create(path)?;
    let mut text = String::from("articugeo_manifest 1\n");
    text.push_str(&format!("rig {}\n", manifest.rig.display()));
    text.push_str(&format!("frames {}\n", manifest.frames));
    let encode = |t: &SE3Transform<f64>| -> String {
        t.to_matrix4()
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    for frame in 0..manifest.frames {
        text.push_str(&format!(
            "pose {frame} front {}\n",
            encode(&manifest.pose_front[frame])
        ));
        text.push_str(&format!(
            "pose {frame} rear {}\n",
            encode(&manifest.pose_rear[frame])
        ));
        text.push_str(&format!(
            "cross {frame} {}\n",
            encode(&manifest.cross_vehicle[frame])
        ));
    }
    for ((frame, cam, kind), p) in &manifest.rasters {
        text.push_str(&format!("raster {frame} C{cam} {kind} {}\n", p.display()));
    }
    for ((frame, vehicle), p) in &manifest.clouds {
        text.push_str(&format!("cloud {frame} {vehicle} {}\n", p.display()));
    }
    wr(path, &mut w, text.as_bytes())
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let file = path.display().to_string();
    let r = open(path)?;
    let mut manifest = Manifest::default();
    let mut poses_front: BTreeMap<usize, SE3Transform<f64>> = BTreeMap::new();
    let mut poses_rear: BTreeMap<usize, SE3Transform<f64>> = BTreeMap::new();
    let mut crosses: BTreeMap<usize, SE3Transform<f64>> = BTreeMap::new();
    let mut first = true;
    for (i, line) in r.lines().enumerate() {
        let ln = i + 1;
        let line = line.map_err(|e| Error::io(&*file, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if first {
            if line != "articugeo_manifest 1" {
                return Err(Error::parse(&*file, ln, "expected `articugeo_manifest 1` header"));
            }
            first = false;
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "rig" => manifest.rig = PathBuf::from(tokens[1]),
            "frames" => {
                manifest.frames = tokens[1]
                    .parse()
                    .map_err(|_| Error::parse(&*file, ln, "bad frame count"))?;
            }
            "pose" => {
                if tokens.len() != 19 {
                    return Err(Error::parse(&*file, ln, "pose needs frame, vehicle, 16 floats"));
                }
                let frame: usize = tokens[1]
                    .parse()
                    .map_err(|_| Error::parse(&*file, ln, "bad frame index"))?;
                let t = matrix16(&file, ln, &tokens[3..])?;
                match tokens[2] {
                    "front" => poses_front.insert(frame, t),
                    "rear" => poses_rear.insert(frame, t),
                    other => {
                        return Err(Error::parse(&*file, ln, format!("bad vehicle `{other}`")))
                    }
                };
            }
            "cross" => {
                if tokens.len() != 18 {
                    return Err(Error::parse(&*file, ln, "cross needs frame plus 16 floats"));
                }
                let frame: usize = tokens[1]
                    .parse()
                    .map_err(|_| Error::parse(&*file, ln, "bad frame index"))?;
                crosses.insert(frame, matrix16(&file, ln, &tokens[2..])?);
            }
            "raster" => {
                if tokens.len() != 5 {
                    return Err(Error::parse(&*file, ln, "raster needs frame, camera, kind, path"));
                }
                let frame: usize = tokens[1]
                    .parse()
                    .map_err(|_| Error::parse(&*file, ln, "bad frame index"))?;
                let cam = CameraId::parse(tokens[2])
                    .ok_or_else(|| Error::parse(&*file, ln, "bad camera id"))?;
                if !RASTER_KINDS.contains(&tokens[3]) {
                    return Err(Error::parse(&*file, ln, format!("unknown raster kind `{}`", tokens[3])));
                }
                manifest
                    .rasters
                    .insert((frame, cam.0, tokens[3].to_string()), PathBuf::from(tokens[4]));
            }
            "cloud" => {
                if tokens.len() != 4 {
                    return Err(Error::parse(&*file, ln, "cloud needs frame, vehicle, path"));
                }
                let frame: usize = tokens[1]
                    .parse()
                    .map_err(|_| Error::parse(&*file, ln, "bad frame index"))?;
                Vehicle::parse(tokens[2]).map_err(|e| Error::parse(&*file, ln, e.to_string()))?;
                manifest
                    .clouds
                    .insert((frame, tokens[2].to_string()), PathBuf::from(tokens[3]));
            }
            other => {
                return Err(Error::parse(&*file, ln, format!("unknown directive `{other}`")));
            }
        }
    }
    for frame in 0..manifest.frames {
        let miss = |what: &str| Error::parse(&*file, 0, format!("frame {frame} missing {what}"));
        manifest
            .pose_front
            .push(*poses_front.get(&frame).ok_or_else(|| miss("front pose"))?);
        manifest
            .pose_rear
            .push(*poses_rear.get(&frame).ok_or_else(|| miss("rear pose"))?);
        manifest
            .cross_vehicle
            .push(*crosses.get(&frame).ok_or_else(|| miss("cross transform"))?);
    }
    Ok(manifest)
}
