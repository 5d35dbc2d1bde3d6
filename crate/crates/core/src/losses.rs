//! Photometric reconstruction error, consistency losses and aggregation.
//!
//! The photometric error mixes an L1 intensity term with a structural
//! similarity penalty, `pe = (1 - alpha) |x - y| + alpha (1 - SSIM) / 2`,
//! with alpha defaulting to 0.85. Per-pixel minima over source times give
//! the occlusion-tolerant temporal variants. All reductions run in fixed
//! row-major order with compensated summation, so results are independent
//! of any internal parallelism and stable enough for sensitivity checks.

use crate::error::{Error, Result};
use crate::raster::{DepthMap, ImageBuffer, PixelMask};
use crate::scalar::Real;

/// SSIM stabilizers on [0, 1] intensities.
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;

/// Compensated (Kahan) accumulator; fixed-order reductions stay reproducible
/// and keep enough precision for finite-difference cross-checks.
#[derive(Clone, Copy, Debug)]
pub struct KahanSum<S> {
    sum: S,
    carry: S,
}

impl<S: Real> KahanSum<S> {
    pub fn new() -> Self {
        KahanSum {
            sum: S::zero(),
            carry: S::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: S) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> S {
        self.sum
    }
}

impl<S: Real> Default for KahanSum<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// A masked reduction: mean value over `count` contributing pixels.
/// `count == 0` marks the term as absent (contributes zero, flagged).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaskedMean<S> {
    pub value: S,
    pub count: usize,
}

impl<S: Real> MaskedMean<S> {
    pub fn empty() -> Self {
        MaskedMean {
            value: S::zero(),
            count: 0,
        }
    }

    pub fn from_sum(sum: S, count: usize) -> Self {
        if count == 0 {
            Self::empty()
        } else {
            MaskedMean {
                value: sum / S::cst(count as f64),
                count,
            }
        }
    }

    pub fn to_f64(self) -> MaskedMean<f64> {
        MaskedMean {
            value: self.value.to_f64_value(),
            count: self.count,
        }
    }
}

fn check_image_dims<S: Real>(
    x: &ImageBuffer<S>,
    y: &ImageBuffer<S>,
    what: &'static str,
) -> Result<()> {
    if x.width != y.width || x.height != y.height || x.channels != y.channels {
        return Err(Error::DimensionMismatch {
            expected: (x.width, x.height),
            got: (y.width, y.height),
            what,
        });
    }
    Ok(())
}

/// Mirror (reflect-101) coordinate for window taps at the image border.
#[inline]
fn reflect(i: i64, n: i64) -> i64 {
    if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    }
}

/// Per-pixel SSIM over a 3x3 box window with reflection padding; masked
/// pixels are excluded from the window statistics, and a masked center is
/// left at zero. Multi-channel images average SSIM over channels.
pub fn ssim_map<S: Real>(
    x: &ImageBuffer<S>,
    y: &ImageBuffer<S>,
    mask: &PixelMask,
) -> Result<Vec<S>> {
    check_image_dims(x, y, "ssim")?;
    let (w, h, ch) = (x.width as i64, x.height as i64, x.channels);
    let c1 = S::cst(SSIM_C1);
    let c2 = S::cst(SSIM_C2);
    let mut out = vec![S::zero(); (x.width * x.height) as usize];
    for v in 0..h {
        for u in 0..w {
            if !mask.get(u as u32, v as u32) {
                continue;
            }
            let mut acc = S::zero();
            for c in 0..ch {
                let mut n = 0usize;
                let (mut sx, mut sy, mut sxx, mut syy, mut sxy) =
                    (S::zero(), S::zero(), S::zero(), S::zero(), S::zero());
                for dv in -1i64..=1 {
                    for du in -1i64..=1 {
                        let uu = reflect(u + du, w) as u32;
                        let vv = reflect(v + dv, h) as u32;
                        if !mask.get(uu, vv) {
                            continue;
                        }
                        let xv = x.get(uu, vv, c);
                        let yv = y.get(uu, vv, c);
                        sx += xv;
                        sy += yv;
                        sxx += xv * xv;
                        syy += yv * yv;
                        sxy += xv * yv;
                        n += 1;
                    }
                }
                let nf = S::cst(n as f64);
                let mx = sx / nf;
                let my = sy / nf;
                let vx = sxx / nf - mx * mx;
                let vy = syy / nf - my * my;
                let cov = sxy / nf - mx * my;
                let ssim = ((S::two() * mx * my + c1) * (S::two() * cov + c2))
                    / ((mx * mx + my * my + c1) * (vx + vy + c2));
                acc += ssim;
            }
            out[(v * w + u) as usize] = acc / S::cst(ch as f64);
        }
    }
    Ok(out)
}

/// Per-pixel photometric error map. Zero exactly where the two images agree
/// on the whole window neighborhood.
pub fn pe_map<S: Real>(
    x: &ImageBuffer<S>,
    y: &ImageBuffer<S>,
    mask: &PixelMask,
    alpha: S,
) -> Result<Vec<S>> {
    check_image_dims(x, y, "photometric error")?;
    let ssim = ssim_map(x, y, mask)?;
    let (w, h, ch) = (x.width, x.height, x.channels);
    let one = S::one();
    let mut out = vec![S::zero(); (w * h) as usize];
    for v in 0..h {
        for u in 0..w {
            if !mask.get(u, v) {
                continue;
            }
            let mut l1 = S::zero();
            for c in 0..ch {
                l1 += (x.get(u, v, c) - y.get(u, v, c)).abs();
            }
            l1 /= S::cst(ch as f64);
            let i = (v * w + u) as usize;
            out[i] = (one - alpha) * l1 + alpha * (one - ssim[i]) * S::half();
        }
    }
    Ok(out)
}

/// Masked mean of a per-pixel map.
pub fn masked_mean<S: Real>(map: &[S], mask: &PixelMask) -> MaskedMean<S> {
    let mut sum = KahanSum::new();
    let mut count = 0usize;
    for (value, valid) in map.iter().zip(mask.values.iter()) {
        if *valid {
            sum.add(*value);
            count += 1;
        }
    }
    MaskedMean::from_sum(sum.value(), count)
}

/// Photometric loss with a per-pixel minimum over reconstructions, the
/// occlusion-tolerant form used for temporal and spatial-temporal contexts.
/// Pixels invalid in a source are excluded from that source's candidates;
/// the mean runs over pixels valid in at least one source.
pub fn loss_photometric_min<S: Real>(
    target: &ImageBuffer<S>,
    sources: &[(ImageBuffer<S>, PixelMask)],
    alpha: S,
) -> Result<MaskedMean<S>> {
    if sources.is_empty() {
        return Err(Error::EmptySources("photometric min loss"));
    }
    let maps: Vec<(Vec<S>, &PixelMask)> = sources
        .iter()
        .map(|(img, mask)| Ok((pe_map(target, img, mask, alpha)?, mask)))
        .collect::<Result<_>>()?;
    let n = (target.width * target.height) as usize;
    let mut sum = KahanSum::new();
    let mut count = 0usize;
    for i in 0..n {
        let mut best: Option<S> = None;
        for (map, mask) in &maps {
            if mask.values[i] {
                best = Some(match best {
                    Some(b) => b.min(map[i]),
                    None => map[i],
                });
            }
        }
        if let Some(b) = best {
            sum.add(b);
            count += 1;
        }
    }
    Ok(MaskedMean::from_sum(sum.value(), count))
}

/// Photometric loss of a single reconstruction (spatial contexts).
pub fn loss_photometric_single<S: Real>(
    target: &ImageBuffer<S>,
    warped: &ImageBuffer<S>,
    mask: &PixelMask,
    alpha: S,
) -> Result<MaskedMean<S>> {
    let map = pe_map(target, warped, mask, alpha)?;
    Ok(masked_mean(&map, mask))
}

/// Multi-view reconstruction consistency: photometric error between the
/// spatial reconstruction and each spatial-temporal reconstruction of the
/// same target view, per-pixel minimum over source times, masks intersected.
pub fn loss_mvrc<S: Real>(
    recon_spatial: &ImageBuffer<S>,
    mask_spatial: &PixelMask,
    recon_st: &[(ImageBuffer<S>, PixelMask)],
    alpha: S,
) -> Result<MaskedMean<S>> {
    if recon_st.is_empty() {
        return Err(Error::EmptySources("mvrc"));
    }
    let intersected: Vec<(ImageBuffer<S>, PixelMask)> = recon_st
        .iter()
        .map(|(img, mask)| {
            Ok((
                img.clone(),
                crate::raster::combine_masks(&[mask_spatial, mask])?,
            ))
        })
        .collect::<Result<_>>()?;
    loss_photometric_min(recon_spatial, &intersected, alpha)
}

/// Spatial depth consistency: masked mean |target depth - reprojected depth|.
pub fn loss_depth_consistency<S: Real>(
    depth_target: &DepthMap<S>,
    reprojected: &DepthMap<S>,
    mask: &PixelMask,
) -> Result<MaskedMean<S>> {
    if depth_target.width != reprojected.width || depth_target.height != reprojected.height {
        return Err(Error::DimensionMismatch {
            expected: (depth_target.width, depth_target.height),
            got: (reprojected.width, reprojected.height),
            what: "depth consistency",
        });
    }
    let mut sum = KahanSum::new();
    let mut count = 0usize;
    for i in 0..depth_target.values.len() {
        if mask.values[i] {
            sum.add((depth_target.values[i] - reprojected.values[i]).abs());
            count += 1;
        }
    }
    Ok(MaskedMean::from_sum(sum.value(), count))
}

/// Edge-aware smoothness on mean-normalized disparity: gradients of
/// 1/depth, down-weighted where the image itself has edges.
pub fn loss_smoothness<S: Real>(
    depth: &DepthMap<S>,
    img: &ImageBuffer<S>,
) -> Result<MaskedMean<S>> {
    if depth.width != img.width || depth.height != img.height {
        return Err(Error::DimensionMismatch {
            expected: (depth.width, depth.height),
            got: (img.width, img.height),
            what: "smoothness",
        });
    }
    let (w, h) = (depth.width, depth.height);
    let mut dsum = KahanSum::new();
    let mut dcount = 0usize;
    for d in &depth.values {
        if *d > S::zero() {
            dsum.add(S::one() / *d);
            dcount += 1;
        }
    }
    if dcount == 0 {
        return Ok(MaskedMean::empty());
    }
    let mean_disp = dsum.value() / S::cst(dcount as f64);
    let disp = |u: u32, v: u32| -> Option<S> {
        let d = depth.get(u, v);
        (d > S::zero()).then(|| S::one() / d / mean_disp)
    };
    let grad_img = |u0: u32, v0: u32, u1: u32, v1: u32| -> S {
        let mut g = S::zero();
        for c in 0..img.channels {
            g += (img.get(u1, v1, c) - img.get(u0, v0, c)).abs();
        }
        g / S::cst(img.channels as f64)
    };
    let mut sum = KahanSum::new();
    let mut count = 0usize;
    for v in 0..h {
        for u in 0..w {
            if u + 1 < w {
                if let (Some(a), Some(b)) = (disp(u, v), disp(u + 1, v)) {
                    sum.add((b - a).abs() * (-grad_img(u, v, u + 1, v)).exp());
                    count += 1;
                }
            }
            if v + 1 < h {
                if let (Some(a), Some(b)) = (disp(u, v), disp(u, v + 1)) {
                    sum.add((b - a).abs() * (-grad_img(u, v, u, v + 1)).exp());
                    count += 1;
                }
            }
        }
    }
    Ok(MaskedMean::from_sum(sum.value(), count))
}

/// Weighting coefficients for loss aggregation. The photometric mix alpha
/// belongs to the loss definition; the per-term lambdas are tuning defaults
/// and can be overridden from a weights config file.
#[derive(Clone, Copy, Debug)]
pub struct LossWeights {
    pub alpha: f64,
    pub lambda_temporal: f64,
    pub lambda_spatial: f64,
    pub lambda_spatiotemporal: f64,
    pub lambda_mvrc: f64,
    pub lambda_depth_consistency: f64,
    pub lambda_smoothness: f64,
    pub lambda_normal_spatial: f64,
    pub lambda_prior_normal: f64,
    pub lambda_camera_height: f64,
    pub lambda_pose_consistency: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            alpha: 0.85,
            lambda_temporal: 1.0,
            lambda_spatial: 0.1,
            lambda_spatiotemporal: 0.1,
            lambda_mvrc: 0.1,
            lambda_depth_consistency: 0.1,
            lambda_smoothness: 1e-3,
            lambda_normal_spatial: 1.0,
            lambda_prior_normal: 1.0,
            lambda_camera_height: 1.0,
            lambda_pose_consistency: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.alpha,
            self.lambda_temporal,
            self.lambda_spatial,
            self.lambda_spatiotemporal,
            self.lambda_mvrc,
            self.lambda_depth_consistency,
            self.lambda_smoothness,
            self.lambda_normal_spatial,
            self.lambda_prior_normal,
            self.lambda_camera_height,
            self.lambda_pose_consistency,
        ];
        if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidCamera(
                "loss weights must be finite and nonnegative".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidCamera("alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Lambda applied to a report term, by key.
    pub fn weight_for(&self, key: &str) -> f64 {
        if key.starts_with("photo_spatial_") {
            self.lambda_spatial
        } else if key == "photo_temporal" {
            self.lambda_temporal
        } else if key == "photo_spatiotemporal" {
            self.lambda_spatiotemporal
        } else if key == "photo_mvrc" {
            self.lambda_mvrc
        } else if key == "depth_consistency" {
            self.lambda_depth_consistency
        } else if key == "smoothness" {
            self.lambda_smoothness
        } else if key == "normal_spatial" {
            self.lambda_normal_spatial
        } else if key.starts_with("prior_normal_") {
            self.lambda_prior_normal
        } else if key == "camera_height" {
            self.lambda_camera_height
        } else if key == "pose_consistency" {
            self.lambda_pose_consistency
        } else {
            0.0
        }
    }
}

/// One aggregated loss term.
#[derive(Clone, Debug, PartialEq)]
pub struct LossTerm {
    pub key: String,
    pub value: f64,
    pub count: usize,
    pub weight: f64,
}

impl LossTerm {
    /// Absent: zero contributing pixels (or pose pairs).
    pub fn is_absent(&self) -> bool {
        self.count == 0
    }
}

/// Weighted aggregation of all computed terms.
#[derive(Clone, Debug, Default)]
pub struct LossReport {
    pub terms: Vec<LossTerm>,
    pub total: f64,
}

impl LossReport {
    pub fn get(&self, key: &str) -> Option<&LossTerm> {
        self.terms.iter().find(|t| t.key == key)
    }
}

/// Build the weighted report. Terms with zero valid pixels contribute
/// nothing to the total and stay flagged via their count.
pub fn aggregate(
    terms: Vec<(String, MaskedMean<f64>)>,
    weights: &LossWeights,
) -> Result<LossReport> {
    weights.validate()?;
    let mut report = LossReport::default();
    let mut total = KahanSum::new();
    for (key, mm) in terms {
        let weight = weights.weight_for(&key);
        if mm.count > 0 {
            total.add(weight * mm.value);
        }
        report.terms.push(LossTerm {
            key,
            value: mm.value,
            count: mm.count,
            weight,
        });
    }
    report.total = total.value();
    Ok(report)
}
