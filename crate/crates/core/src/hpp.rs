//! Human-proximal depth filtering.
//!
//! Given a normalized depth field and per-person masks, keep only pixels
//! whose depth falls within `tau` of some person's mean depth. The hard form
//! is a binary band test; the differentiable form replaces the band test
//! with `relu((d - (m - tau)) * ((m + tau) - d))`, which is positive exactly
//! inside the band, peaks at `tau^2` at the band center, and admits the
//! analytic derivative `2 * tau` with respect to `tau` on the active set.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{DepthMap, FieldStack, PersonMaskSet, ScalarField};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HppError {
    DimensionMismatch { expected: (usize, usize), actual: (usize, usize) },
    /// Operation requires a depth map already normalized to [0, 1].
    DepthNotNormalized,
    /// Filter-mask height/width must be divisible by 4 and match the
    /// feature grid scaled by 4.
    NotDownsamplable { height: usize, width: usize },
}

impl fmt::Display for HppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HppError::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            HppError::DepthNotNormalized => {
                write!(f, "depth map must be normalized to [0, 1] first")
            }
            HppError::NotDownsamplable { height, width } => {
                write!(f, "grid {height}x{width} is not 4x-poolable onto the feature grid")
            }
        }
    }
}

impl core::error::Error for HppError {}

/// Per-person mean normalized depth.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonDepthSummary {
    means: Vec<f64>,
}

impl PersonDepthSummary {
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn count(&self) -> usize {
        self.means.len()
    }
}

/// Per-person depth interval `[mean - tau, mean + tau]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthBand {
    intervals: Vec<(f64, f64)>,
}

impl DepthBand {
    pub fn from_summary(summary: &PersonDepthSummary, tau: f64) -> Self {
        assert!(tau > 0.0 && tau.is_finite(), "tau must be positive and finite");
        let intervals = summary.means().iter().map(|&m| (m - tau, m + tau)).collect();
        Self { intervals }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }
}

/// Min-max normalization of a raw depth field onto [0, 1].
///
/// A constant input has no usable range; it maps to all zeros with the
/// degenerate flag set instead of dividing by zero.
pub fn normalize_depth(depth: &DepthMap) -> DepthMap {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in depth.data() {
        min = min.min(v);
        max = max.max(v);
    }
    let range = max - min;
    if range < 1e-12 {
        return DepthMap::normalized_from_raw(
            depth.height(),
            depth.width(),
            vec![0.0; depth.data().len()],
            true,
        );
    }
    let data = depth.data().iter().map(|&v| (v - min) / range).collect();
    DepthMap::normalized_from_raw(depth.height(), depth.width(), data, false)
}

/// Mean normalized depth over each person mask.
pub fn person_mean_depth(
    depth: &DepthMap,
    masks: &PersonMaskSet,
) -> Result<PersonDepthSummary, HppError> {
    if !depth.is_normalized() {
        return Err(HppError::DepthNotNormalized);
    }
    if (depth.height(), depth.width()) != (masks.height(), masks.width()) {
        return Err(HppError::DimensionMismatch {
            expected: (depth.height(), depth.width()),
            actual: (masks.height(), masks.width()),
        });
    }
    let mut means = Vec::with_capacity(masks.count());
    for person in 0..masks.count() {
        let mask = masks.mask(person);
        let mut sum = 0.0;
        let mut area = 0u64;
        for (p, &m) in mask.iter().enumerate() {
            if m == 1 {
                sum += depth.data()[p];
                area += 1;
            }
        }
        // Empty masks are rejected at PersonMaskSet construction.
        means.push(sum / area as f64);
    }
    Ok(PersonDepthSummary { means })
}

/// Binary depth-band filter: 1 where the depth lies strictly inside some
/// person's band `(mean - tau, mean + tau)`.
pub fn hard_filter_mask(
    depth: &DepthMap,
    summary: &PersonDepthSummary,
    tau: f64,
) -> Result<ScalarField, HppError> {
    assert!(tau > 0.0 && tau.is_finite(), "tau must be positive and finite");
    if !depth.is_normalized() {
        return Err(HppError::DepthNotNormalized);
    }
    let data = depth
        .data()
        .iter()
        .map(|&d| {
            let inside = summary.means().iter().any(|&m| m - tau < d && d < m + tau);
            if inside {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    Ok(ScalarField::new(depth.height(), depth.width(), data).expect("same shape as input"))
}

/// Differentiable depth-band filter: per pixel, the sum over persons of
/// `relu((d - (m - tau)) * ((m + tau) - d))`.
///
/// Not clamped to [0, 1]; a pixel inside several bands accumulates up to
/// `n * tau^2`.
pub fn soft_filter_mask(
    depth: &DepthMap,
    summary: &PersonDepthSummary,
    tau: f64,
) -> Result<ScalarField, HppError> {
    assert!(tau > 0.0 && tau.is_finite(), "tau must be positive and finite");
    if !depth.is_normalized() {
        return Err(HppError::DepthNotNormalized);
    }
    let data = depth
        .data()
        .iter()
        .map(|&d| {
            let mut acc = 0.0;
            for &m in summary.means() {
                let theta = (d - (m - tau)) * ((m + tau) - d);
                if theta > 0.0 {
                    acc += theta;
                }
            }
            acc
        })
        .collect();
    Ok(ScalarField::new(depth.height(), depth.width(), data).expect("same shape as input"))
}

/// Analytic derivative of [`soft_filter_mask`] with respect to `tau`:
/// `2 * tau` per person whose band term is active at the pixel. Person mean
/// depths are constants with respect to `tau`.
pub fn soft_mask_tau_grad(
    depth: &DepthMap,
    summary: &PersonDepthSummary,
    tau: f64,
) -> Result<ScalarField, HppError> {
    assert!(tau > 0.0 && tau.is_finite(), "tau must be positive and finite");
    if !depth.is_normalized() {
        return Err(HppError::DepthNotNormalized);
    }
    let data = depth
        .data()
        .iter()
        .map(|&d| {
            let mut acc = 0.0;
            for &m in summary.means() {
                let theta = (d - (m - tau)) * ((m + tau) - d);
                if theta > 0.0 {
                    acc += 2.0 * tau;
                }
            }
            acc
        })
        .collect();
    Ok(ScalarField::new(depth.height(), depth.width(), data).expect("same shape as input"))
}

/// 4x4 non-overlapping average pooling.
pub(crate) fn avg_pool4(field: &ScalarField) -> Result<ScalarField, HppError> {
    let (h, w) = (field.height(), field.width());
    if !h.is_multiple_of(4) || !w.is_multiple_of(4) {
        return Err(HppError::NotDownsamplable { height: h, width: w });
    }
    let (oh, ow) = (h / 4, w / 4);
    let mut out = vec![0.0; oh * ow];
    for oy in 0..oh {
        for ox in 0..ow {
            let mut sum = 0.0;
            for dy in 0..4 {
                for dx in 0..4 {
                    sum += field.get(oy * 4 + dy, ox * 4 + dx);
                }
            }
            out[oy * ow + ox] = sum / 16.0;
        }
    }
    Ok(ScalarField::new(oh, ow, out).expect("pooled shape"))
}

/// 4x4 non-overlapping max pooling of a binary field.
pub(crate) fn max_pool4(field: &ScalarField) -> Result<ScalarField, HppError> {
    let (h, w) = (field.height(), field.width());
    if !h.is_multiple_of(4) || !w.is_multiple_of(4) {
        return Err(HppError::NotDownsamplable { height: h, width: w });
    }
    let (oh, ow) = (h / 4, w / 4);
    let mut out = vec![0.0; oh * ow];
    for oy in 0..oh {
        for ox in 0..ow {
            let mut best = f64::NEG_INFINITY;
            for dy in 0..4 {
                for dx in 0..4 {
                    best = best.max(field.get(oy * 4 + dy, ox * 4 + dx));
                }
            }
            out[oy * ow + ox] = best;
        }
    }
    Ok(ScalarField::new(oh, ow, out).expect("pooled shape"))
}

/// 4x average-pool the filter mask and add it to every channel of the
/// feature stack. The mask must be exactly 4x the feature grid.
pub fn downsample_add(fm: &ScalarField, feature: &FieldStack) -> Result<FieldStack, HppError> {
    let pooled = avg_pool4(fm)?;
    if (pooled.height(), pooled.width()) != (feature.height(), feature.width()) {
        return Err(HppError::DimensionMismatch {
            expected: (pooled.height(), pooled.width()),
            actual: (feature.height(), feature.width()),
        });
    }
    let plane = feature.height() * feature.width();
    let mut out = feature.clone();
    for c in 0..feature.channels() {
        for p in 0..plane {
            out.data_mut()[c * plane + p] += pooled.data()[p];
        }
    }
    Ok(out)
}
