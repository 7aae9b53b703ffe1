//! Deterministic synthetic scenes: persons as ellipse masks on distinct
//! depth plateaus, contact classes as rectangles inside the persons, plus a
//! controllable corrupted prediction. Everything derives from tagged
//! SplitMix64 streams, so a `(config, seed)` pair reproduces bit-identical
//! output on every platform.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{
    ContactIndicator, DepthMap, LabelMap, PersonMaskSet, ProbMap, CONTACT_CLASSES, NUM_CLASSES,
};
use crate::loss::contact_indicator_from_gt;
use crate::rng::{self, SplitMix64};

/// Probability mass spread off the one-hot channel by
/// [`perturb_prediction`].
pub const DEFAULT_SOFTEN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthError {
    pub reason: String,
}

impl fmt::Display for SynthError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scene config: {}", self.reason)
    }
}

impl core::error::Error for SynthError {}

fn invalid(reason: &str) -> SynthError {
    SynthError { reason: String::from(reason) }
}

/// Scene generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub height: usize,
    pub width: usize,
    pub persons: usize,
    pub contact_classes: Vec<u8>,
    pub noise_rate: f64,
    pub enclosed_blobs: usize,
    pub seed: u64,
}

/// A generated scene: ground truth, raw depth, person masks, and the
/// contact-class indicator derived from the ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub gt: LabelMap,
    pub depth: DepthMap,
    pub persons: PersonMaskSet,
    pub indicator: ContactIndicator,
}

fn validate(config: &SceneConfig) -> Result<(), SynthError> {
    if config.height < 16 || config.width < 16 {
        return Err(invalid("height and width must be at least 16"));
    }
    if !config.height.is_multiple_of(4) || !config.width.is_multiple_of(4) {
        return Err(invalid("height and width must be divisible by 4"));
    }
    if !(1..=4).contains(&config.persons) {
        return Err(invalid("persons must be between 1 and 4"));
    }
    if config.contact_classes.iter().any(|&c| c == 0 || c as usize > CONTACT_CLASSES) {
        return Err(invalid("contact classes must lie in 1..=17"));
    }
    if !(0.0..=1.0).contains(&config.noise_rate) || !config.noise_rate.is_finite() {
        return Err(invalid("noise rate must lie in [0, 1]"));
    }
    Ok(())
}

struct Ellipse {
    cx: i64,
    cy: i64,
    rx: i64,
    ry: i64,
}

impl Ellipse {
    fn contains(&self, y: i64, x: i64) -> bool {
        let dx = x - self.cx;
        let dy = y - self.cy;
        (dx * dx) * (self.ry * self.ry) + (dy * dy) * (self.rx * self.rx)
            <= (self.rx * self.rx) * (self.ry * self.ry)
    }
}

/// Smallest semi-axis whose inscribed-box span `2 * floor(0.7 * ry) + 1`
/// reaches `needed` cells.
fn min_semi_axis_for(needed: usize) -> usize {
    let mut ry = 2usize;
    while 2 * (ry * 7 / 10) + 1 < needed {
        ry += 1;
    }
    ry
}

fn draw_in(rng: &mut SplitMix64, lo: usize, hi: usize) -> usize {
    rng.next_range(lo as u64, hi as u64) as usize
}

/// Generate a scene.
///
/// Persons occupy disjoint vertical strips so their masks never overlap;
/// each strip gets one axis-aligned ellipse at raw depth plateau `1 + i`
/// (background sits beyond all plateaus), with a small horizontal ramp so
/// the depth field is never constant. Contact classes are assigned to
/// persons round-robin and painted as grid cells of the ellipse's inscribed
/// box, so every requested class is present in the ground truth.
pub fn gen_scene(config: &SceneConfig) -> Result<Scene, SynthError> {
    validate(config)?;
    let (h, w) = (config.height, config.width);
    let persons = config.persons;

    let mut classes = config.contact_classes.clone();
    classes.sort_unstable();
    classes.dedup();

    // Round-robin class assignment per person.
    let mut assigned: Vec<Vec<u8>> = vec![Vec::new(); persons];
    for (j, &c) in classes.iter().enumerate() {
        assigned[j % persons].push(c);
    }

    let strip_w = w / persons;
    let mut gt = LabelMap::zeros(h, w).expect("validated dims");
    let mut masks = vec![0u8; persons * h * w];
    let mut depth = vec![0.0f64; h * w];

    // Background depth: beyond every plateau, with a gentle ramp.
    let far = persons as f64 + 2.0;
    for y in 0..h {
        for x in 0..w {
            depth[y * w + x] = far + 0.3 * (x + y) as f64 / (w + h) as f64;
        }
    }

    for i in 0..persons {
        let mut geom = rng::stream_n(config.seed, "person-geom", i as u64);
        let k = assigned[i].len();
        let strip_start = i * strip_w;

        let rx_lo = (strip_w / 4).max(1);
        let rx_hi = ((strip_w.saturating_sub(2)) / 2).max(rx_lo);
        let rx = draw_in(&mut geom, rx_lo, rx_hi);
        let box_w = 2 * (rx * 7 / 10) + 1;

        let cols = if k == 0 { 1 } else { k.min(box_w) };
        let rows = k.div_ceil(cols);
        let ry_lo = min_semi_axis_for(rows).max(h / 8).max(2);
        let ry_hi = (2 * h / 5).max(ry_lo);
        let ry = draw_in(&mut geom, ry_lo, ry_hi);
        if 2 * ry + 1 > h {
            return Err(invalid("scene too small for the requested class layout"));
        }

        let cy = draw_in(&mut geom, ry, h - 1 - ry);
        let cx = draw_in(&mut geom, strip_start + rx, strip_start + strip_w - 1 - rx);

        let ellipse = Ellipse { cx: cx as i64, cy: cy as i64, rx: rx as i64, ry: ry as i64 };
        let plateau = 1.0 + i as f64;
        let span = (2 * rx + 1) as f64;
        for y in cy - ry..=cy + ry {
            for x in cx.saturating_sub(rx)..=(cx + rx).min(w - 1) {
                if ellipse.contains(y as i64, x as i64) {
                    masks[i * h * w + y * w + x] = 1;
                    depth[y * w + x] = plateau + 0.1 * (x - (cx - rx)) as f64 / span;
                }
            }
        }

        // Contact cells tile the inscribed box of the ellipse.
        if k > 0 {
            let hx = rx * 7 / 10;
            let hy = ry * 7 / 10;
            let box_h = 2 * hy + 1;
            let (x0, y0) = (cx - hx, cy - hy);
            for (j, &class) in assigned[i].iter().enumerate() {
                let r = j / cols;
                let cl = j % cols;
                let cell_y0 = y0 + r * box_h / rows;
                let cell_y1 = y0 + (r + 1) * box_h / rows;
                let cell_x0 = x0 + cl * box_w / cols;
                let cell_x1 = x0 + (cl + 1) * box_w / cols;
                for y in cell_y0..cell_y1 {
                    for x in cell_x0..cell_x1 {
                        gt.set(y, x, class);
                    }
                }
            }
        }
    }

    let depth = DepthMap::raw(h, w, depth).expect("finite by construction");
    let persons = PersonMaskSet::new(h, w, masks).expect("ellipse centers are foreground");
    let indicator = contact_indicator_from_gt(&gt);
    Ok(Scene { gt, depth, persons, indicator })
}

/// Uniformly pick a class different from `current`.
fn other_class(rng: &mut SplitMix64, current: u8) -> u8 {
    let r = rng.next_range(0, NUM_CLASSES as u64 - 2) as u8;
    if r >= current {
        r + 1
    } else {
        r
    }
}

/// Corrupted prediction with the default softening mass.
pub fn perturb_prediction(scene: &Scene, config: &SceneConfig) -> ProbMap {
    perturb_prediction_eps(scene, config, DEFAULT_SOFTEN)
}

/// Corrupted prediction: [`perturb_labels`] softened by spreading `soften`
/// mass uniformly over all channels.
pub fn perturb_prediction_eps(scene: &Scene, config: &SceneConfig, soften: f64) -> ProbMap {
    assert!((0.0..1.0).contains(&soften), "soften mass must lie in [0, 1)");
    let pred = perturb_labels(scene, config);
    let (h, w) = (pred.height(), pred.width());
    let plane = h * w;
    let off = soften / NUM_CLASSES as f64;
    let mut data = vec![off; NUM_CLASSES * plane];
    for (p, &label) in pred.data().iter().enumerate() {
        data[label as usize * plane + p] = 1.0 - soften + off;
    }
    ProbMap::new(h, w, data).expect("values are valid probabilities")
}

/// Corrupted label map: flip `noise_rate` of the contact pixels to another
/// class, then inject `enclosed_blobs` single-pixel foreign blobs whose 3x3
/// neighborhood is a solid contact class, so each blob is a fully enclosed
/// foreign region of its host class.
pub fn perturb_labels(scene: &Scene, config: &SceneConfig) -> LabelMap {
    let (h, w) = (scene.gt.height(), scene.gt.width());
    let mut pred = scene.gt.clone();

    let mut noise = rng::stream(config.seed, "noise");
    if config.noise_rate > 0.0 {
        for y in 0..h {
            for x in 0..w {
                let g = pred.get(y, x);
                if g == 0 {
                    continue;
                }
                if noise.next_f64() < config.noise_rate {
                    let class = other_class(&mut noise, g);
                    pred.set(y, x, class);
                }
            }
        }
    }

    let mut blobs = rng::stream(config.seed, "blobs");
    for b in 0..config.enclosed_blobs {
        let mut candidates = Vec::new();
        for y in 1..h - 1 {
            for x in 1..w - 1 {
                let c = pred.get(y, x);
                if c == 0 {
                    continue;
                }
                let solid = (0..3).all(|dy| {
                    (0..3).all(|dx| pred.get(y + dy - 1, x + dx - 1) == c)
                });
                if solid {
                    candidates.push((y, x, c));
                }
            }
        }
        let (y, x, host) = if candidates.is_empty() {
            // No solid block survived the noise: carve one so the blob
            // guarantee still holds. Force sites step down the middle
            // column so consecutive forced blobs never touch.
            let host = *config.contact_classes.first().unwrap_or(&1);
            let y = 1 + (h / 2 + 3 * b) % (h - 2);
            let y = y.min(h - 2);
            let x = w / 2;
            for dy in 0..3 {
                for dx in 0..3 {
                    pred.set(y + dy - 1, x + dx - 1, host);
                }
            }
            (y, x, host)
        } else {
            let pick = blobs.next_range(0, candidates.len() as u64 - 1) as usize;
            candidates[pick]
        };
        pred.set(y, x, other_class(&mut blobs, host));
    }

    pred
}
