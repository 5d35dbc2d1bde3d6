//! `metrics`: depth evaluation of a prediction manifest against a
//! ground-truth manifest, pooled over all frames and cameras.

use std::path::{Path, PathBuf};

use articugeo_core::error::{Error, Result};
use articugeo_core::io;
use articugeo_core::metrics::{MetricAccumulator, MetricReport, DEFAULT_MAX_DEPTH};
use articugeo_core::rig::CameraId;

use crate::args::{Args, UsageError};

pub struct MetricsParams {
    pub pred_manifest: PathBuf,
    pub gt_manifest: PathBuf,
    pub pred_kind: String,
    pub gt_kind: String,
    pub max_depth: f64,
    pub median_scale: bool,
    pub out: Option<PathBuf>,
}

impl MetricsParams {
    pub fn from_args(args: &Args) -> std::result::Result<Self, UsageError> {
        Ok(MetricsParams {
            pred_manifest: args.path("pred")?,
            gt_manifest: args.path("gt")?,
            pred_kind: args.get("pred-kind").unwrap_or("depth_gt").to_string(),
            gt_kind: args.get("gt-kind").unwrap_or("depth_gt").to_string(),
            max_depth: args.parse_f64("max-depth", DEFAULT_MAX_DEPTH)?,
            median_scale: args.has("median-scale"),
            out: args.get("out").map(PathBuf::from),
        })
    }
}

pub fn run(params: &MetricsParams) -> Result<MetricReport> {
    let pred = io::read_manifest(&params.pred_manifest)?;
    let gt = io::read_manifest(&params.gt_manifest)?;
    if pred.frames != gt.frames {
        return Err(Error::Parse {
            file: params.pred_manifest.display().to_string(),
            line: 0,
            msg: format!(
                "manifests misaligned: {} vs {} frames",
                pred.frames, gt.frames
            ),
        });
    }
    let pred_base = base_of(&params.pred_manifest);
    let gt_base = base_of(&params.gt_manifest);
    let mut acc = MetricAccumulator::new();
    for frame in 0..gt.frames {
        for ci in 0..10u8 {
            let cam = CameraId(ci);
            let p = io::read_depth(&pred_base.join(pred.raster(frame, cam, &params.pred_kind)?))?;
            let g = io::read_depth(&gt_base.join(gt.raster(frame, cam, &params.gt_kind)?))?;
            acc.add_image(&p, &g, params.max_depth, params.median_scale)?;
        }
    }
    let report = acc.finish()?;
    if let Some(out) = &params.out {
        io::write_metric_report(out, &report)?;
    }
    Ok(report)
}

fn base_of(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}
