//! Loss terms for contact segmentation: cross-entropy, the local and global
//! region-consistency losses (hard counting forms plus differentiable soft
//! relaxations with analytic gradients), the prompt-similarity binary loss,
//! and the cosine/channel-gating math feeding it.
//!
//! The soft relaxations are defined on probability channels and reduce
//! exactly to the hard counting losses on one-hot inputs. The global soft
//! form freezes its region selection at the argmax label map, so the penalty
//! is linear in the probabilities and its gradient is -1 on the selected
//! pixels.

use alloc::vec::Vec;
use core::fmt;

use crate::grid::{
    argmax_labels, ContactIndicator, FieldStack, LabelMap, LossWeights, ProbMap,
    SimilarityVector, CONTACT_CLASSES, NUM_CLASSES,
};
use crate::math;
use crate::regions::enclosed_foreign_sweep;

/// Clamp floor applied inside every logarithm.
pub const LOG_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LossError {
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    /// Probability map must satisfy the per-pixel simplex constraint.
    NotNormalized,
    /// Cosine similarity is undefined for a zero vector.
    ZeroVector { row: Option<usize> },
    /// Channel-gated stacks must carry one channel per class.
    BadChannelCount { actual: usize },
    /// Vector lengths disagree.
    LengthMismatch { expected: usize, actual: usize },
}

impl fmt::Display for LossError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossError::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            LossError::NotNormalized => {
                write!(f, "probability map is not normalized to the per-pixel simplex")
            }
            LossError::ZeroVector { row: Some(r) } => {
                write!(f, "row {r} has zero norm, cosine similarity undefined")
            }
            LossError::ZeroVector { row: None } => {
                write!(f, "query vector has zero norm, cosine similarity undefined")
            }
            LossError::BadChannelCount { actual } => {
                write!(f, "expected {NUM_CLASSES} channels, got {actual}")
            }
            LossError::LengthMismatch { expected, actual } => {
                write!(f, "expected length {expected}, got {actual}")
            }
        }
    }
}

impl core::error::Error for LossError {}

/// Per-class loss values with their sums: `total` covers all 18 classes
/// (background included), `contact_total` only classes 1..=17.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassLosses {
    pub per_class: [f64; NUM_CLASSES],
    pub total: f64,
    pub contact_total: f64,
}

impl ClassLosses {
    fn from_per_class(per_class: [f64; NUM_CLASSES]) -> Self {
        let total = per_class.iter().sum();
        let contact_total = per_class[1..].iter().sum();
        Self { per_class, total, contact_total }
    }
}

/// Breakdown of the combined training loss.
#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown {
    pub ce: f64,
    pub local_jl: f64,
    pub global_jl: f64,
    pub prompt_be: f64,
    pub total: f64,
}

/// Cosine similarity between `query` and every row of `rows`.
pub fn cosine_similarity(query: &[f64], rows: &[Vec<f64>]) -> Result<Vec<f64>, LossError> {
    let qnorm_sq: f64 = query.iter().map(|v| v * v).sum();
    if qnorm_sq == 0.0 {
        return Err(LossError::ZeroVector { row: None });
    }
    let qnorm = math::sqrt(qnorm_sq);
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != query.len() {
            return Err(LossError::LengthMismatch { expected: query.len(), actual: row.len() });
        }
        let rnorm_sq: f64 = row.iter().map(|v| v * v).sum();
        if rnorm_sq == 0.0 {
            return Err(LossError::ZeroVector { row: Some(r) });
        }
        let dot: f64 = query.iter().zip(row).map(|(a, b)| a * b).sum();
        out.push((dot / (qnorm * math::sqrt(rnorm_sq))).clamp(-1.0, 1.0));
    }
    Ok(out)
}

/// Scale each contact channel of an 18-channel feature stack by its
/// similarity; the background channel 0 passes through unchanged.
pub fn prompt_gate(features: &FieldStack, s: &SimilarityVector) -> Result<FieldStack, LossError> {
    if features.channels() != NUM_CLASSES {
        return Err(LossError::BadChannelCount { actual: features.channels() });
    }
    let plane = features.height() * features.width();
    let mut out = features.clone();
    for c in 1..NUM_CLASSES {
        let scale = s.for_class(c as u8);
        for v in &mut out.data_mut()[c * plane..(c + 1) * plane] {
            *v *= scale;
        }
    }
    Ok(out)
}

fn check_dims(
    a: (usize, usize),
    b: (usize, usize),
) -> Result<(), LossError> {
    if a != b {
        return Err(LossError::DimensionMismatch { expected: a, actual: b });
    }
    Ok(())
}

/// Counting form of the local region-consistency loss: per class, the
/// fraction of that class's ground-truth pixels predicted as anything else.
/// Classes absent from the ground truth contribute zero.
pub fn local_joint_loss_hard(pred: &LabelMap, gt: &LabelMap) -> Result<ClassLosses, LossError> {
    check_dims((gt.height(), gt.width()), (pred.height(), pred.width()))?;
    let mut area = [0u64; NUM_CLASSES];
    let mut miss = [0u64; NUM_CLASSES];
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        area[g as usize] += 1;
        if p != g {
            miss[g as usize] += 1;
        }
    }
    let mut per_class = [0.0; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        if area[c] > 0 {
            per_class[c] = miss[c] as f64 / area[c] as f64;
        }
    }
    Ok(ClassLosses::from_per_class(per_class))
}

/// Soft relaxation of the local loss on probability channels: per class,
/// `sum(|P_c - 1|) / area` over that class's ground-truth pixels. Reduces to
/// the hard loss on one-hot input. The gradient is `-1 / area_c` at the
/// class channel of each ground-truth pixel with `P_c < 1`.
pub fn local_joint_loss_soft(
    probs: &ProbMap,
    gt: &LabelMap,
) -> Result<(ClassLosses, FieldStack), LossError> {
    if !probs.is_normalized() {
        return Err(LossError::NotNormalized);
    }
    check_dims((gt.height(), gt.width()), (probs.height(), probs.width()))?;
    let plane = probs.pixel_count();
    let mut area = [0u64; NUM_CLASSES];
    for &g in gt.data() {
        area[g as usize] += 1;
    }
    let mut per_class = [0.0; NUM_CLASSES];
    let mut grad = FieldStack::zeros(NUM_CLASSES, probs.height(), probs.width())
        .expect("non-empty grid");
    for (p, &g) in gt.data().iter().enumerate() {
        let c = g as usize;
        let inv_area = 1.0 / area[c] as f64;
        let value = probs.data()[c * plane + p];
        per_class[c] += (value - 1.0).abs() * inv_area;
        if value < 1.0 {
            grad.data_mut()[c * plane + p] = -inv_area;
        }
    }
    Ok((ClassLosses::from_per_class(per_class), grad))
}

/// Counting form of the global region-consistency loss: per class, the
/// number of pixels in foreign regions fully enclosed by that class.
pub fn global_joint_loss_hard(pred: &LabelMap) -> ClassLosses {
    let sweep = enclosed_foreign_sweep(pred);
    let mut per_class = [0.0; NUM_CLASSES];
    for (c, indices) in sweep.iter().enumerate() {
        per_class[c] = indices.len() as f64;
    }
    ClassLosses::from_per_class(per_class)
}

/// Soft global loss with the region selection taken from `pred` and held
/// fixed: per class, `sum(1 - P_c)` over the enclosed foreign pixels of
/// `pred`. Linear in the probabilities, so the gradient is -1 at each
/// selected pixel's class channel.
pub fn global_joint_loss_soft_frozen(
    pred: &LabelMap,
    probs: &ProbMap,
) -> Result<(ClassLosses, FieldStack), LossError> {
    if !probs.is_normalized() {
        return Err(LossError::NotNormalized);
    }
    check_dims((pred.height(), pred.width()), (probs.height(), probs.width()))?;
    let plane = probs.pixel_count();
    let sweep = enclosed_foreign_sweep(pred);
    let mut per_class = [0.0; NUM_CLASSES];
    let mut grad = FieldStack::zeros(NUM_CLASSES, probs.height(), probs.width())
        .expect("non-empty grid");
    for (c, indices) in sweep.iter().enumerate() {
        let mut acc = 0.0;
        for &idx in indices {
            let p = idx as usize;
            acc += 1.0 - probs.data()[c * plane + p];
            grad.data_mut()[c * plane + p] = -1.0;
        }
        per_class[c] = acc;
    }
    Ok((ClassLosses::from_per_class(per_class), grad))
}

/// Soft global loss with regions selected from the argmax of `probs`.
pub fn global_joint_loss_soft(
    probs: &ProbMap,
) -> Result<(ClassLosses, FieldStack), LossError> {
    let pred = argmax_labels(probs);
    global_joint_loss_soft_frozen(&pred, probs)
}

/// Mean pixelwise cross-entropy against integer labels, probabilities
/// clamped to `[LOG_CLAMP, 1]`. The gradient at each pixel's ground-truth
/// channel is `-1 / (n_pixels * P)`, zero where the clamp is active.
pub fn cross_entropy(
    probs: &ProbMap,
    gt: &LabelMap,
) -> Result<(f64, FieldStack), LossError> {
    if !probs.is_normalized() {
        return Err(LossError::NotNormalized);
    }
    check_dims((gt.height(), gt.width()), (probs.height(), probs.width()))?;
    let plane = probs.pixel_count();
    let inv_n = 1.0 / plane as f64;
    let mut loss = 0.0;
    let mut grad = FieldStack::zeros(NUM_CLASSES, probs.height(), probs.width())
        .expect("non-empty grid");
    for (p, &g) in gt.data().iter().enumerate() {
        let idx = g as usize * plane + p;
        let value = probs.data()[idx];
        let clamped = value.clamp(LOG_CLAMP, 1.0);
        loss -= math::ln(clamped) * inv_n;
        if value > LOG_CLAMP {
            grad.data_mut()[idx] = -inv_n / value;
        }
    }
    Ok((loss, grad))
}

/// Presence flags over contact classes 1..=17 derived from a label map.
pub fn contact_indicator_from_gt(gt: &LabelMap) -> ContactIndicator {
    let mut flags = [false; CONTACT_CLASSES];
    for &g in gt.data() {
        if g > 0 {
            flags[g as usize - 1] = true;
        }
    }
    ContactIndicator::new(flags)
}

/// Binary cross-entropy between similarities and presence flags.
///
/// Similarities in [-1, 1] are mapped to probabilities with the affine map
/// `p = (s + 1) / 2`, clamped away from 0 and 1, then averaged over the 17
/// contact classes. The returned gradient is with respect to each `s_k`,
/// zero where the clamp is active.
pub fn prompt_be_loss(
    s: &SimilarityVector,
    c: &ContactIndicator,
) -> (f64, [f64; CONTACT_CLASSES]) {
    let inv_n = 1.0 / CONTACT_CLASSES as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; CONTACT_CLASSES];
    for (k, slot) in grad.iter_mut().enumerate() {
        let raw = (s.values()[k] + 1.0) / 2.0;
        let p = raw.clamp(LOG_CLAMP, 1.0 - LOG_CLAMP);
        let target = if c.flags()[k] { 1.0 } else { 0.0 };
        loss -= inv_n * (target * math::ln(p) + (1.0 - target) * math::ln(1.0 - p));
        if raw > LOG_CLAMP && raw < 1.0 - LOG_CLAMP {
            *slot = -inv_n * (target / p - (1.0 - target) / (1.0 - p)) * 0.5;
        }
    }
    (loss, grad)
}

/// Combined loss: cross-entropy plus the weighted soft region losses and the
/// prompt binary loss, with the contact indicator derived from `gt`.
pub fn total_loss(
    probs: &ProbMap,
    gt: &LabelMap,
    s: &SimilarityVector,
    weights: &LossWeights,
) -> Result<LossBreakdown, LossError> {
    let (ce, _) = cross_entropy(probs, gt)?;
    let (local, _) = local_joint_loss_soft(probs, gt)?;
    let (global, _) = global_joint_loss_soft(probs)?;
    let indicator = contact_indicator_from_gt(gt);
    let (prompt_be, _) = prompt_be_loss(s, &indicator);
    let total = ce
        + weights.alpha * local.total
        + weights.beta * global.total
        + weights.gamma * prompt_be;
    Ok(LossBreakdown {
        ce,
        local_jl: local.total,
        global_jl: global.total,
        prompt_be,
        total,
    })
}
