//! Shared dense-grid containers and their validation rules.
//!
//! All grids are row-major with the last index fastest. Class ids run
//! 0..=17 where 0 is the background slot and 1..=17 are the contact
//! classes; channel stacks are channel-major (`c * h * w + y * w + x`).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Total class count including background (class 0).
pub const NUM_CLASSES: usize = 18;
/// Contact classes, ids 1..=17.
pub const CONTACT_CLASSES: usize = 17;
/// Per-pixel tolerance on the channel sum when a [`ProbMap`] claims to be
/// normalized. Chosen so a single-coordinate probe of up to this size keeps
/// the map valid, which is what finite-difference checks rely on.
pub const SIMPLEX_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GridError {
    /// Grid constructed with a zero dimension.
    EmptyGrid,
    /// Buffer length does not match `height * width` (times channels).
    LengthMismatch { expected: usize, actual: usize },
    /// A label value outside 0..=17.
    InvalidLabel { index: usize, value: u8 },
    /// A class argument outside 1..=17.
    InvalidClass { class: u8 },
    /// A value that must be finite is NaN or infinite.
    NonFinite { index: usize },
    /// A probability outside [0, 1].
    ProbOutOfRange { index: usize },
    /// A similarity value outside [-1, 1].
    SimilarityOutOfRange { index: usize },
    /// A person mask entry that is neither 0 nor 1.
    NonBinaryMask { person: usize, index: usize },
    /// A person mask with no foreground pixel.
    EmptyMask { person: usize },
    /// Loss weights must be finite and non-negative, with tau > 0.
    InvalidWeights,
}

impl fmt::Display for GridError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridError::EmptyGrid => write!(f, "grid dimensions must be at least 1x1"),
            GridError::LengthMismatch { expected, actual } => {
                write!(f, "buffer length {actual} does not match expected {expected}")
            }
            GridError::InvalidLabel { index, value } => {
                write!(f, "label {value} at index {index} is outside 0..=17")
            }
            GridError::InvalidClass { class } => {
                write!(f, "class {class} is outside the contact range 1..=17")
            }
            GridError::NonFinite { index } => write!(f, "non-finite value at index {index}"),
            GridError::ProbOutOfRange { index } => {
                write!(f, "probability at index {index} is outside [0, 1]")
            }
            GridError::SimilarityOutOfRange { index } => {
                write!(f, "similarity at index {index} is outside [-1, 1]")
            }
            GridError::NonBinaryMask { person, index } => {
                write!(f, "mask for person {person} has non-binary value at index {index}")
            }
            GridError::EmptyMask { person } => {
                write!(f, "mask for person {person} has no foreground pixel")
            }
            GridError::InvalidWeights => {
                write!(f, "weights must be finite and non-negative with tau > 0")
            }
        }
    }
}

impl core::error::Error for GridError {}

fn check_dims(height: usize, width: usize) -> Result<(), GridError> {
    if height == 0 || width == 0 {
        return Err(GridError::EmptyGrid);
    }
    Ok(())
}

/// H x W grid of class ids in 0..=17, 0 meaning background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: usize,
    width: usize,
    data: Vec<u8>,
}

impl LabelMap {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self, GridError> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(GridError::LengthMismatch {
                expected: height * width,
                actual: data.len(),
            });
        }
        for (index, &value) in data.iter().enumerate() {
            if value as usize >= NUM_CLASSES {
                return Err(GridError::InvalidLabel { index, value });
            }
        }
        Ok(Self { height, width, data })
    }

    /// All-background map.
    pub fn zeros(height: usize, width: usize) -> Result<Self, GridError> {
        check_dims(height, width)?;
        Ok(Self { height, width, data: vec![0; height * width] })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn get(&self, y: usize, x: usize) -> u8 {
        self.data[y * self.width + x]
    }

    pub(crate) fn set(&mut self, y: usize, x: usize, value: u8) {
        debug_assert!((value as usize) < NUM_CLASSES);
        self.data[y * self.width + x] = value;
    }
}

/// H x W field of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self, GridError> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(GridError::LengthMismatch {
                expected: height * width,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index });
        }
        Ok(Self { height, width, data })
    }

    pub fn zeros(height: usize, width: usize) -> Result<Self, GridError> {
        check_dims(height, width)?;
        Ok(Self { height, width, data: vec![0.0; height * width] })
    }

    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        Self { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// True when every element is exactly 0.0 or 1.0.
    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// 18 x H x W per-pixel class distribution, channel-major.
///
/// Values always lie in [0, 1]. The `normalized` flag records whether every
/// pixel's channel sum is within [`SIMPLEX_TOL`] of 1; the losses require it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
    normalized: bool,
}

impl ProbMap {
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self, GridError> {
        check_dims(height, width)?;
        let expected = NUM_CLASSES * height * width;
        if data.len() != expected {
            return Err(GridError::LengthMismatch { expected, actual: data.len() });
        }
        for (index, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite { index });
            }
            if !(0.0..=1.0).contains(&v) {
                return Err(GridError::ProbOutOfRange { index });
            }
        }
        let mut map = Self { height, width, data, normalized: false };
        map.normalized = map.check_simplex();
        Ok(map)
    }

    /// Exact one-hot encoding of a label map.
    pub fn one_hot(labels: &LabelMap) -> Self {
        let (h, w) = (labels.height(), labels.width());
        let plane = h * w;
        let mut data = vec![0.0; NUM_CLASSES * plane];
        for (p, &label) in labels.data().iter().enumerate() {
            data[label as usize * plane + p] = 1.0;
        }
        Self { height: h, width: w, data, normalized: true }
    }

    fn check_simplex(&self) -> bool {
        let plane = self.height * self.width;
        for p in 0..plane {
            let mut sum = 0.0;
            for c in 0..NUM_CLASSES {
                sum += self.data[c * plane + p];
            }
            if (sum - 1.0).abs() > SIMPLEX_TOL {
                return false;
            }
        }
        true
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn pixel_count(&self) -> usize {
        self.height * self.width
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.pixel_count();
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn value(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[c * self.pixel_count() + y * self.width + x]
    }

    /// Copy with one coordinate nudged by `delta`, for finite-difference
    /// probes. Fails if the nudged value leaves [0, 1] or the pixel drifts
    /// off the simplex tolerance.
    pub fn perturbed(&self, c: usize, y: usize, x: usize, delta: f64) -> Result<Self, GridError> {
        let plane = self.pixel_count();
        let idx = c * plane + y * self.width + x;
        let mut out = self.clone();
        let v = out.data[idx] + delta;
        if !v.is_finite() {
            return Err(GridError::NonFinite { index: idx });
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(GridError::ProbOutOfRange { index: idx });
        }
        out.data[idx] = v;
        if out.normalized {
            let p = y * self.width + x;
            let sum: f64 = (0..NUM_CLASSES).map(|ch| out.data[ch * plane + p]).sum();
            // Tiny headroom so a probe of exactly the tolerance size does
            // not flip the flag on rounding dust.
            if (sum - 1.0).abs() > SIMPLEX_TOL + 1e-10 {
                out.normalized = false;
            }
        }
        Ok(out)
    }
}

/// H x W depth field, raw or normalized to [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    height: usize,
    width: usize,
    data: Vec<f64>,
    normalized: bool,
    degenerate: bool,
}

impl DepthMap {
    /// Raw (un-normalized) depth field; values only need to be finite.
    pub fn raw(height: usize, width: usize, data: Vec<f64>) -> Result<Self, GridError> {
        check_dims(height, width)?;
        if data.len() != height * width {
            return Err(GridError::LengthMismatch {
                expected: height * width,
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index });
        }
        Ok(Self { height, width, data, normalized: false, degenerate: false })
    }

    pub(crate) fn normalized_from_raw(
        height: usize,
        width: usize,
        data: Vec<f64>,
        degenerate: bool,
    ) -> Self {
        Self { height, width, data, normalized: true, degenerate }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Set when normalization hit a constant input and produced all zeros.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }
}

/// N binary person masks over a common H x W grid.
///
/// Empty masks are rejected at construction: a person with no pixels has no
/// average depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersonMaskSet {
    height: usize,
    width: usize,
    count: usize,
    data: Vec<u8>,
}

impl PersonMaskSet {
    pub fn new(height: usize, width: usize, data: Vec<u8>) -> Result<Self, GridError> {
        check_dims(height, width)?;
        let plane = height * width;
        if data.is_empty() || !data.len().is_multiple_of(plane) {
            return Err(GridError::LengthMismatch {
                expected: plane,
                actual: data.len(),
            });
        }
        let count = data.len() / plane;
        for person in 0..count {
            let mask = &data[person * plane..(person + 1) * plane];
            let mut any = false;
            for (index, &v) in mask.iter().enumerate() {
                match v {
                    0 => {}
                    1 => any = true,
                    _ => return Err(GridError::NonBinaryMask { person, index }),
                }
            }
            if !any {
                return Err(GridError::EmptyMask { person });
            }
        }
        Ok(Self { height, width, count, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn mask(&self, person: usize) -> &[u8] {
        let plane = self.height * self.width;
        &self.data[person * plane..(person + 1) * plane]
    }

    /// Pixelwise maximum over all persons, as a binary field.
    pub fn union_mask(&self) -> ScalarField {
        let plane = self.height * self.width;
        let mut out = vec![0.0; plane];
        for person in 0..self.count {
            for (p, &v) in self.mask(person).iter().enumerate() {
                if v == 1 {
                    out[p] = 1.0;
                }
            }
        }
        ScalarField::from_raw(self.height, self.width, out)
    }
}

/// Image-text similarity for the 17 contact classes, each in [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityVector {
    values: [f64; CONTACT_CLASSES],
}

impl SimilarityVector {
    pub fn new(values: [f64; CONTACT_CLASSES]) -> Result<Self, GridError> {
        for (index, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(GridError::NonFinite { index });
            }
            if !(-1.0..=1.0).contains(&v) {
                return Err(GridError::SimilarityOutOfRange { index });
            }
        }
        Ok(Self { values })
    }

    pub fn from_slice(values: &[f64]) -> Result<Self, GridError> {
        if values.len() != CONTACT_CLASSES {
            return Err(GridError::LengthMismatch {
                expected: CONTACT_CLASSES,
                actual: values.len(),
            });
        }
        let mut arr = [0.0; CONTACT_CLASSES];
        arr.copy_from_slice(values);
        Self::new(arr)
    }

    pub fn values(&self) -> &[f64; CONTACT_CLASSES] {
        &self.values
    }

    /// Similarity for contact class `c` in 1..=17.
    pub fn for_class(&self, c: u8) -> f64 {
        debug_assert!((1..=CONTACT_CLASSES as u8).contains(&c));
        self.values[c as usize - 1]
    }
}

/// Presence flag per contact class 1..=17.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContactIndicator {
    flags: [bool; CONTACT_CLASSES],
}

impl ContactIndicator {
    pub fn new(flags: [bool; CONTACT_CLASSES]) -> Self {
        Self { flags }
    }

    pub fn flags(&self) -> &[bool; CONTACT_CLASSES] {
        &self.flags
    }

    /// Presence of contact class `c` in 1..=17.
    pub fn is_present(&self, c: u8) -> bool {
        debug_assert!((1..=CONTACT_CLASSES as u8).contains(&c));
        self.flags[c as usize - 1]
    }
}

/// C x H x W stack of finite reals: decoder features, loss gradients, and
/// anything else that is grid-shaped but not a probability distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldStack {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FieldStack {
    pub fn new(
        channels: usize,
        height: usize,
        width: usize,
        data: Vec<f64>,
    ) -> Result<Self, GridError> {
        check_dims(height, width)?;
        if channels == 0 {
            return Err(GridError::EmptyGrid);
        }
        let expected = channels * height * width;
        if data.len() != expected {
            return Err(GridError::LengthMismatch { expected, actual: data.len() });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite { index });
        }
        Ok(Self { channels, height, width, data })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self, GridError> {
        check_dims(height, width)?;
        if channels == 0 {
            return Err(GridError::EmptyGrid);
        }
        Ok(Self { channels, height, width, data: vec![0.0; channels * height * width] })
    }

    pub fn from_prob(probs: &ProbMap) -> Self {
        Self {
            channels: NUM_CLASSES,
            height: probs.height(),
            width: probs.width(),
            data: probs.data().to_vec(),
        }
    }

    pub fn from_scalar(field: &ScalarField) -> Self {
        Self {
            channels: 1,
            height: field.height(),
            width: field.width(),
            data: field.data().to_vec(),
        }
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let plane = self.height * self.width;
        &self.data[c * plane..(c + 1) * plane]
    }

    pub fn value(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}

/// Weights of the combined loss: `ce + alpha * local + beta * global +
/// gamma * prompt`, plus the depth band half-width `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub tau: f64,
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64, tau: f64) -> Result<Self, GridError> {
        let ok = alpha.is_finite()
            && beta.is_finite()
            && gamma.is_finite()
            && tau.is_finite()
            && alpha >= 0.0
            && beta >= 0.0
            && gamma >= 0.0
            && tau > 0.0;
        if !ok {
            return Err(GridError::InvalidWeights);
        }
        Ok(Self { alpha, beta, gamma, tau })
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { alpha: 0.3, beta: 0.1, gamma: 1.0, tau: 0.1 }
    }
}

/// Binary membership field for one contact class: 1 where `labels == c`.
pub fn binarize_class(labels: &LabelMap, c: u8) -> Result<ScalarField, GridError> {
    if c == 0 || c as usize >= NUM_CLASSES {
        return Err(GridError::InvalidClass { class: c });
    }
    let data = labels.data().iter().map(|&v| if v == c { 1.0 } else { 0.0 }).collect();
    Ok(ScalarField::from_raw(labels.height(), labels.width(), data))
}

/// Per-pixel argmax over channels; ties go to the lowest channel index.
pub fn argmax_labels(probs: &ProbMap) -> LabelMap {
    let plane = probs.pixel_count();
    let mut data = vec![0u8; plane];
    for (p, out) in data.iter_mut().enumerate() {
        let mut best = probs.data()[p];
        let mut best_c = 0u8;
        for c in 1..NUM_CLASSES {
            let v = probs.data()[c * plane + p];
            if v > best {
                best = v;
                best_c = c as u8;
            }
        }
        *out = best_c;
    }
    LabelMap { height: probs.height(), width: probs.width(), data }
}

/// Binary contact field: 1 where the label is any contact class.
pub fn binarize_nonzero(labels: &LabelMap) -> ScalarField {
    let data = labels.data().iter().map(|&v| if v > 0 { 1.0 } else { 0.0 }).collect();
    ScalarField::from_raw(labels.height(), labels.width(), data)
}
