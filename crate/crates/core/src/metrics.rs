//! Evaluation metrics over predicted and ground-truth label maps.
//!
//! All metrics are reported on a 0..100 scale. `sc_acc` and `c_acc` are
//! accuracies over ground-truth contact pixels (exact-class and binary
//! respectively); `miou`/`wiou` average per-class intersection-over-union;
//! `ad_acc` is adaptive accuracy, which rewards binary hits on ground-truth
//! contact pixels and subtracts a penalty over human-body pixels the ground
//! truth marks as non-contact, so an everything-is-contact prediction scores
//! near zero instead of 100.

use core::fmt;

use crate::grid::{
    argmax_labels, binarize_nonzero, LabelMap, PersonMaskSet, ProbMap, ScalarField,
    CONTACT_CLASSES, NUM_CLASSES,
};
use crate::hpp::max_pool4;

/// Stabilizer added to both denominators of adaptive accuracy.
pub const AD_ACC_DELTA: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricError {
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },
    /// Ground truth has no contact pixel, accuracy undefined.
    NoContactPixels,
    /// No contact class has a nonempty prediction/ground-truth union.
    NoEvaluableClass,
    /// Human mask must be binary.
    NonBinaryHuman { index: usize },
    /// Aggregation over an empty report list.
    EmptyList,
    /// Mask grid is not 4x-poolable.
    NotDownsamplable { height: usize, width: usize },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::DimensionMismatch { expected, actual } => write!(
                f,
                "dimension mismatch: expected {}x{}, got {}x{}",
                expected.0, expected.1, actual.0, actual.1
            ),
            MetricError::NoContactPixels => {
                write!(f, "ground truth contains no contact pixel")
            }
            MetricError::NoEvaluableClass => {
                write!(f, "no contact class has a nonempty union")
            }
            MetricError::NonBinaryHuman { index } => {
                write!(f, "human mask value at index {index} is neither 0 nor 1")
            }
            MetricError::EmptyList => write!(f, "cannot aggregate an empty report list"),
            MetricError::NotDownsamplable { height, width } => {
                write!(f, "mask grid {height}x{width} is not divisible by 4")
            }
        }
    }
}

impl core::error::Error for MetricError {}

/// One image's metric values; per-class IoU is absent for classes missing
/// from both maps.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub sc_acc: f64,
    pub c_acc: f64,
    pub miou: f64,
    pub wiou: f64,
    pub ad_acc: f64,
    pub per_class_iou: [Option<f64>; CONTACT_CLASSES],
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<(), MetricError> {
    if a != b {
        return Err(MetricError::DimensionMismatch { expected: a, actual: b });
    }
    Ok(())
}

/// Exact-class accuracy over ground-truth contact pixels, 0..100.
pub fn sc_acc(pred: &LabelMap, gt: &LabelMap) -> Result<f64, MetricError> {
    check_dims((gt.height(), gt.width()), (pred.height(), pred.width()))?;
    let mut contact = 0u64;
    let mut correct = 0u64;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if g > 0 {
            contact += 1;
            if p == g {
                correct += 1;
            }
        }
    }
    if contact == 0 {
        return Err(MetricError::NoContactPixels);
    }
    Ok(100.0 * correct as f64 / contact as f64)
}

/// Binary contact accuracy over ground-truth contact pixels, 0..100. Scores
/// 100 for any prediction that covers the ground truth, including the
/// degenerate everything-is-contact map.
pub fn c_acc(pred: &LabelMap, gt: &LabelMap) -> Result<f64, MetricError> {
    check_dims((gt.height(), gt.width()), (pred.height(), pred.width()))?;
    let mut contact = 0u64;
    let mut hit = 0u64;
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        if g > 0 {
            contact += 1;
            if p > 0 {
                hit += 1;
            }
        }
    }
    if contact == 0 {
        return Err(MetricError::NoContactPixels);
    }
    Ok(100.0 * hit as f64 / contact as f64)
}

/// Intersection-over-union per contact class; `None` when a class appears
/// in neither map.
pub fn iou_per_class(
    pred: &LabelMap,
    gt: &LabelMap,
) -> Result<[Option<f64>; CONTACT_CLASSES], MetricError> {
    check_dims((gt.height(), gt.width()), (pred.height(), pred.width()))?;
    let mut inter = [0u64; NUM_CLASSES];
    let mut pred_count = [0u64; NUM_CLASSES];
    let mut gt_count = [0u64; NUM_CLASSES];
    for (&p, &g) in pred.data().iter().zip(gt.data()) {
        pred_count[p as usize] += 1;
        gt_count[g as usize] += 1;
        if p == g {
            inter[p as usize] += 1;
        }
    }
    let mut out = [None; CONTACT_CLASSES];
    for c in 1..NUM_CLASSES {
        let union = pred_count[c] + gt_count[c] - inter[c];
        if union > 0 {
            out[c - 1] = Some(inter[c] as f64 / union as f64);
        }
    }
    Ok(out)
}

/// Mean IoU over the contact classes with a nonempty union, 0..100.
pub fn miou(pred: &LabelMap, gt: &LabelMap) -> Result<f64, MetricError> {
    let ious = iou_per_class(pred, gt)?;
    let mut sum = 0.0;
    let mut n = 0u32;
    for iou in ious.into_iter().flatten() {
        sum += iou;
        n += 1;
    }
    if n == 0 {
        return Err(MetricError::NoEvaluableClass);
    }
    Ok(100.0 * sum / n as f64)
}

/// IoU weighted by each class's share of the ground-truth contact pixels,
/// 0..100.
pub fn wiou(pred: &LabelMap, gt: &LabelMap) -> Result<f64, MetricError> {
    let ious = iou_per_class(pred, gt)?;
    let mut gt_count = [0u64; NUM_CLASSES];
    let mut total = 0u64;
    for &g in gt.data() {
        gt_count[g as usize] += 1;
        if g > 0 {
            total += 1;
        }
    }
    if total == 0 {
        return Err(MetricError::NoEvaluableClass);
    }
    let mut acc = 0.0;
    for c in 1..NUM_CLASSES {
        if gt_count[c] > 0 {
            let weight = gt_count[c] as f64 / total as f64;
            // A class present in gt always has a nonempty union.
            acc += weight * ious[c - 1].expect("gt presence implies defined IoU");
        }
    }
    Ok(100.0 * acc)
}

/// Adaptive accuracy, -100..100.
///
/// First term: binary contact hits over ground-truth contact pixels. Second
/// term: hits over the negative set (human pixels the ground truth marks as
/// non-contact). Both denominators are stabilized with [`AD_ACC_DELTA`].
pub fn ad_acc(pred: &LabelMap, gt: &LabelMap, human: &ScalarField) -> Result<f64, MetricError> {
    check_dims((gt.height(), gt.width()), (pred.height(), pred.width()))?;
    check_dims((gt.height(), gt.width()), (human.height(), human.width()))?;
    if let Some(index) = human.data().iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(MetricError::NonBinaryHuman { index });
    }
    let gt_b = binarize_nonzero(gt);
    let pred_b = binarize_nonzero(pred);
    let mut gt_total = 0.0;
    let mut gt_hit = 0.0;
    let mut neg_total = 0.0;
    let mut neg_hit = 0.0;
    for p in 0..gt.pixel_count() {
        let g = gt_b.data()[p];
        let o = pred_b.data()[p];
        let zeta = human.data()[p] - g * human.data()[p];
        gt_total += g;
        gt_hit += g * o;
        neg_total += zeta;
        neg_hit += zeta * o;
    }
    Ok(100.0 * (gt_hit / (gt_total + AD_ACC_DELTA) - neg_hit / (neg_total + AD_ACC_DELTA)))
}

/// All five metrics for one image, gathered in a single fused pass over the
/// three grids. Produces exactly the values of the five standalone ops: all
/// of them reduce to the same per-class and binary counts.
pub fn evaluate_image(
    pred: &LabelMap,
    gt: &LabelMap,
    human: &ScalarField,
) -> Result<MetricReport, MetricError> {
    check_dims((gt.height(), gt.width()), (pred.height(), pred.width()))?;
    check_dims((gt.height(), gt.width()), (human.height(), human.width()))?;

    let mut inter = [0u64; NUM_CLASSES];
    let mut pred_count = [0u64; NUM_CLASSES];
    let mut gt_count = [0u64; NUM_CLASSES];
    let mut correct = 0u64;
    let mut hit = 0u64;
    let mut neg_total = 0u64;
    let mut neg_hit = 0u64;
    for (p, (&pv, &gv)) in pred.data().iter().zip(gt.data()).enumerate() {
        let hv = human.data()[p];
        if hv != 0.0 && hv != 1.0 {
            return Err(MetricError::NonBinaryHuman { index: p });
        }
        pred_count[pv as usize] += 1;
        gt_count[gv as usize] += 1;
        if pv == gv {
            inter[pv as usize] += 1;
        }
        if gv > 0 {
            if pv == gv {
                correct += 1;
            }
            if pv > 0 {
                hit += 1;
            }
        } else if hv == 1.0 {
            neg_total += 1;
            if pv > 0 {
                neg_hit += 1;
            }
        }
    }

    let contact: u64 = gt_count[1..].iter().sum();
    if contact == 0 {
        return Err(MetricError::NoContactPixels);
    }

    let mut per_class_iou = [None; CONTACT_CLASSES];
    let mut iou_sum = 0.0;
    let mut iou_n = 0u32;
    let mut wiou_acc = 0.0;
    for c in 1..NUM_CLASSES {
        let union = pred_count[c] + gt_count[c] - inter[c];
        if union > 0 {
            let iou = inter[c] as f64 / union as f64;
            per_class_iou[c - 1] = Some(iou);
            iou_sum += iou;
            iou_n += 1;
            if gt_count[c] > 0 {
                wiou_acc += (gt_count[c] as f64 / contact as f64) * iou;
            }
        }
    }
    if iou_n == 0 {
        return Err(MetricError::NoEvaluableClass);
    }

    let ad = 100.0
        * (hit as f64 / (contact as f64 + AD_ACC_DELTA)
            - neg_hit as f64 / (neg_total as f64 + AD_ACC_DELTA));

    Ok(MetricReport {
        sc_acc: 100.0 * correct as f64 / contact as f64,
        c_acc: 100.0 * hit as f64 / contact as f64,
        miou: 100.0 * iou_sum / iou_n as f64,
        wiou: 100.0 * wiou_acc,
        ad_acc: ad,
        per_class_iou,
    })
}

/// [`evaluate_image`] over the argmax of a probability map.
pub fn evaluate_probs(
    probs: &ProbMap,
    gt: &LabelMap,
    human: &ScalarField,
) -> Result<MetricReport, MetricError> {
    evaluate_image(&argmax_labels(probs), gt, human)
}

/// Unweighted per-image mean of every metric; per-class IoUs average over
/// the images where they are defined.
pub fn aggregate(reports: &[MetricReport]) -> Result<MetricReport, MetricError> {
    if reports.is_empty() {
        return Err(MetricError::EmptyList);
    }
    let n = reports.len() as f64;
    let mut iou_sum = [0.0; CONTACT_CLASSES];
    let mut iou_n = [0u32; CONTACT_CLASSES];
    let mut sums = [0.0; 5];
    for r in reports {
        sums[0] += r.sc_acc;
        sums[1] += r.c_acc;
        sums[2] += r.miou;
        sums[3] += r.wiou;
        sums[4] += r.ad_acc;
        for (k, iou) in r.per_class_iou.iter().enumerate() {
            if let Some(v) = iou {
                iou_sum[k] += v;
                iou_n[k] += 1;
            }
        }
    }
    let mut per_class_iou = [None; CONTACT_CLASSES];
    for k in 0..CONTACT_CLASSES {
        if iou_n[k] > 0 {
            per_class_iou[k] = Some(iou_sum[k] / iou_n[k] as f64);
        }
    }
    Ok(MetricReport {
        sc_acc: sums[0] / n,
        c_acc: sums[1] / n,
        miou: sums[2] / n,
        wiou: sums[3] / n,
        ad_acc: sums[4] / n,
        per_class_iou,
    })
}

/// Union of all person masks at full resolution.
pub fn human_mask_full(masks: &PersonMaskSet) -> ScalarField {
    masks.union_mask()
}

/// Union of all person masks, 4x4 max-pooled onto the quarter-resolution
/// prediction grid.
pub fn human_mask_quarter(masks: &PersonMaskSet) -> Result<ScalarField, MetricError> {
    max_pool4(&masks.union_mask()).map_err(|_| MetricError::NotDownsamplable {
        height: masks.height(),
        width: masks.width(),
    })
}
