//! Depth evaluation metrics against ground truth.
//!
//! Pixels count when the ground truth lies in (0, max_depth] and the
//! prediction is positive; predictions are clamped into
//! [min_clamp, max_depth] before scoring so the log terms stay finite.
//! The optional median-scaling mode divides out per-image scale before
//! evaluation (scale-ambiguous protocol).

use crate::error::{Error, Result};
use crate::losses::KahanSum;
use crate::raster::DepthMap;
use crate::scalar::Real;

/// Default evaluation range cap, meters.
pub const DEFAULT_MAX_DEPTH: f64 = 100.0;
/// Lower clamp on predictions, meters (keeps ln finite; not a protocol knob).
pub const MIN_CLAMP: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricReport {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub pixel_count: usize,
}

impl MetricReport {
    pub fn entries(&self) -> [(&'static str, f64); 8] {
        [
            ("abs_rel", self.abs_rel),
            ("sq_rel", self.sq_rel),
            ("rmse", self.rmse),
            ("rmse_log", self.rmse_log),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("delta3", self.delta3),
            ("pixel_count", self.pixel_count as f64),
        ]
    }
}

/// Streaming accumulator so multi-frame evaluations pool pixels exactly
/// like a single large image.
#[derive(Clone, Debug, Default)]
pub struct MetricAccumulator {
    abs_rel: KahanSum<f64>,
    sq_rel: KahanSum<f64>,
    sq_err: KahanSum<f64>,
    sq_log_err: KahanSum<f64>,
    d1: usize,
    d2: usize,
    d3: usize,
    count: usize,
}

impl MetricAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulate one prediction/ground-truth image pair.
    pub fn add_image<S: Real>(
        &mut self,
        pred: &DepthMap<S>,
        gt: &DepthMap<S>,
        max_depth: f64,
        median_scale: bool,
    ) -> Result<()> {
        if pred.width != gt.width || pred.height != gt.height {
            return Err(Error::DimensionMismatch {
                expected: (gt.width, gt.height),
                got: (pred.width, pred.height),
                what: "metric evaluation",
            });
        }
        if max_depth <= 0.0 {
            return Err(Error::InvalidDepth(max_depth));
        }
        let valid = |p: f64, g: f64| g > 0.0 && g <= max_depth && p > 0.0;

        let scale = if median_scale {
            let mut preds = Vec::new();
            let mut gts = Vec::new();
            for i in 0..gt.values.len() {
                let p = pred.values[i].to_f64_value();
                let g = gt.values[i].to_f64_value();
                if valid(p, g) {
                    preds.push(p);
                    gts.push(g);
                }
            }
            if preds.is_empty() {
                return Ok(());
            }
            median(&mut gts) / median(&mut preds)
        } else {
            1.0
        };

        for i in 0..gt.values.len() {
            let p_raw = pred.values[i].to_f64_value();
            let g = gt.values[i].to_f64_value();
            if !valid(p_raw, g) {
                continue;
            }
            let p = (p_raw * scale).clamp(MIN_CLAMP, max_depth);
            let err = p - g;
            self.abs_rel.add(err.abs() / g);
            self.sq_rel.add(err * err / g);
            self.sq_err.add(err * err);
            let log_err = p.ln() - g.ln();
            self.sq_log_err.add(log_err * log_err);
            let ratio = (p / g).max(g / p);
            if ratio < 1.25 {
                self.d1 += 1;
            }
            if ratio < 1.25f64.powi(2) {
                self.d2 += 1;
            }
            if ratio < 1.25f64.powi(3) {
                self.d3 += 1;
            }
            self.count += 1;
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<MetricReport> {
        if self.count == 0 {
            return Err(Error::EmptyEvaluation);
        }
        let n = self.count as f64;
        Ok(MetricReport {
            abs_rel: self.abs_rel.value() / n,
            sq_rel: self.sq_rel.value() / n,
            rmse: (self.sq_err.value() / n).sqrt(),
            rmse_log: (self.sq_log_err.value() / n).sqrt(),
            delta1: self.d1 as f64 / n,
            delta2: self.d2 as f64 / n,
            delta3: self.d3 as f64 / n,
            pixel_count: self.count,
        })
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Evaluate one prediction against ground truth up to `max_depth`.
pub fn evaluate<S: Real>(
    pred: &DepthMap<S>,
    gt: &DepthMap<S>,
    max_depth: f64,
    median_scale: bool,
) -> Result<MetricReport> {
    let mut acc = MetricAccumulator::new();
    acc.add_image(pred, gt, max_depth, median_scale)?;
    acc.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gt_map() -> DepthMap<f64> {
        let mut d = DepthMap::new_invalid(8, 8);
        for v in 0..8 {
            for u in 0..8 {
                d.set(u, v, 2.0 + 0.5 * u as f64 + 0.25 * v as f64);
            }
        }
        d
    }

    #[test]
    fn exact_prediction_is_fixed_point() {
        let g = gt_map();
        let r = evaluate(&g, &g, DEFAULT_MAX_DEPTH, false).unwrap();
        assert_eq!(r.abs_rel, 0.0);
        assert_eq!(r.sq_rel, 0.0);
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.rmse_log, 0.0);
        assert_eq!((r.delta1, r.delta2, r.delta3), (1.0, 1.0, 1.0));
        assert_eq!(r.pixel_count, 64);
    }

    #[test]
    fn uniform_scale_algebra() {
        let g = gt_map();
        let r = evaluate(&g.scaled(1.2), &g, DEFAULT_MAX_DEPTH, false).unwrap();
        assert!((r.abs_rel - 0.2).abs() < 1e-12);
        assert_eq!((r.delta1, r.delta2, r.delta3), (1.0, 1.0, 1.0));

        let r = evaluate(&g.scaled(1.3), &g, DEFAULT_MAX_DEPTH, false).unwrap();
        assert!((r.abs_rel - 0.3).abs() < 1e-12);
        assert_eq!(r.delta1, 0.0);
        assert_eq!(r.delta2, 1.0);
    }

    #[test]
    fn delta_monotonicity_on_mixed_errors() {
        let g = gt_map();
        let mut p = g.clone();
        for (i, v) in p.values.iter_mut().enumerate() {
            *v *= 1.0 + 0.1 * ((i % 7) as f64);
        }
        let r = evaluate(&p, &g, DEFAULT_MAX_DEPTH, false).unwrap();
        assert!(r.delta1 <= r.delta2 && r.delta2 <= r.delta3 && r.delta3 <= 1.0);
    }

    #[test]
    fn max_depth_cap_excludes_far_ground_truth() {
        let mut g = DepthMap::new_invalid(2, 1);
        g.set(0, 0, 50.0);
        g.set(1, 0, 150.0);
        let r = evaluate(&g, &g, 100.0, false).unwrap();
        assert_eq!(r.pixel_count, 1);
    }

    #[test]
    fn median_scaling_removes_global_scale() {
        let g = gt_map();
        let r = evaluate(&g.scaled(0.3), &g, DEFAULT_MAX_DEPTH, true).unwrap();
        assert!(r.abs_rel < 1e-12);
        assert_eq!(r.delta1, 1.0);
    }

    #[test]
    fn empty_evaluation_is_an_error() {
        let empty = DepthMap::<f64>::new_invalid(4, 4);
        assert!(matches!(
            evaluate(&empty, &empty, DEFAULT_MAX_DEPTH, false),
            Err(Error::EmptyEvaluation)
        ));
    }
}
