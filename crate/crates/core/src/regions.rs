//! 8-connected component labeling and enclosed-region analysis.
//!
//! The binary-mask labeling is a classic two-pass union-find pass with a
//! deterministic relabel: final labels are dense (1..K) and ordered by first
//! appearance in raster order, so identical inputs give bit-identical
//! component maps.
//!
//! "Enclosed" analysis asks, for a class `c`: which pixels belong to
//! connected regions of the complement of the class-`c` region that never
//! reach the grid boundary. Those are regions fully surrounded by `c`.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::grid::{binarize_class, GridError, LabelMap, ScalarField, NUM_CLASSES};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionError {
    /// Input field contains a value other than 0.0 or 1.0.
    NonBinaryInput { index: usize },
    /// Class argument outside 1..=17.
    InvalidClass { class: u8 },
}

impl fmt::Display for RegionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionError::NonBinaryInput { index } => {
                write!(f, "mask value at index {index} is neither 0 nor 1")
            }
            RegionError::InvalidClass { class } => {
                write!(f, "class {class} is outside the contact range 1..=17")
            }
        }
    }
}

impl core::error::Error for RegionError {}

impl From<RegionError> for GridError {
    fn from(err: RegionError) -> Self {
        match err {
            RegionError::NonBinaryInput { index } => GridError::NonFinite { index },
            RegionError::InvalidClass { class } => GridError::InvalidClass { class },
        }
    }
}

/// H x W grid of component labels: 0 on background pixels, 1..K on the
/// foreground components in raster order of first appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentMap {
    height: usize,
    width: usize,
    labels: Vec<u32>,
    count: u32,
}

impl ComponentMap {
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, y: usize, x: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    /// Number of foreground components K.
    pub fn count(&self) -> u32 {
        self.count
    }
}

/// Set of component labels that appear on the outermost rows and columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryLabelSet {
    present: Vec<bool>,
}

impl BoundaryLabelSet {
    pub fn contains(&self, label: u32) -> bool {
        self.present.get(label as usize).copied().unwrap_or(false)
    }

    /// Member labels in ascending order.
    pub fn to_vec(&self) -> Vec<u32> {
        self.present
            .iter()
            .enumerate()
            .filter_map(|(l, &p)| if p { Some(l as u32) } else { None })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.present.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Elementwise 1 - x on a binary field.
pub fn negate(mask: &ScalarField) -> Result<ScalarField, RegionError> {
    let data = mask
        .data()
        .iter()
        .enumerate()
        .map(|(index, &v)| {
            if v == 0.0 {
                Ok(1.0)
            } else if v == 1.0 {
                Ok(0.0)
            } else {
                Err(RegionError::NonBinaryInput { index })
            }
        })
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(ScalarField::new(mask.height(), mask.width(), data).expect("same shape as input"))
}

/// Union-find over provisional labels, path-halving, union to the smaller
/// root. Index 0 is a dummy so provisional labels can start at 1.
struct UnionFind {
    parent: Vec<u32>,
}

impl UnionFind {
    fn new() -> Self {
        Self { parent: vec![0] }
    }

    fn make(&mut self) -> u32 {
        let label = self.parent.len() as u32;
        self.parent.push(label);
        label
    }

    fn find(&mut self, mut i: u32) -> u32 {
        loop {
            let p = self.parent[i as usize];
            if p == i {
                return i;
            }
            let gp = self.parent[p as usize];
            self.parent[i as usize] = gp;
            i = gp;
        }
    }

    fn union(&mut self, a: u32, b: u32) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return;
        }
        if ra < rb {
            self.parent[rb as usize] = ra;
        } else {
            self.parent[ra as usize] = rb;
        }
    }

    fn len(&self) -> usize {
        self.parent.len()
    }
}

/// First labeling pass over an arbitrary foreground predicate. Returns the
/// provisional label grid plus the union-find relating provisional labels.
fn scan_components<F: Fn(usize) -> bool>(
    height: usize,
    width: usize,
    fg: F,
) -> (Vec<u32>, UnionFind) {
    let mut labels = vec![0u32; height * width];
    let mut uf = UnionFind::new();
    for y in 0..height {
        let row = y * width;
        for x in 0..width {
            let p = row + x;
            if !fg(p) {
                continue;
            }
            let mut neighbors = [0u32; 4];
            let mut n = 0;
            if x > 0 && labels[p - 1] != 0 {
                neighbors[n] = labels[p - 1];
                n += 1;
            }
            if y > 0 {
                let up = p - width;
                if x > 0 && labels[up - 1] != 0 {
                    neighbors[n] = labels[up - 1];
                    n += 1;
                }
                if labels[up] != 0 {
                    neighbors[n] = labels[up];
                    n += 1;
                }
                if x + 1 < width && labels[up + 1] != 0 {
                    neighbors[n] = labels[up + 1];
                    n += 1;
                }
            }
            if n == 0 {
                labels[p] = uf.make();
            } else {
                let mut min = neighbors[0];
                for &l in &neighbors[1..n] {
                    if l < min {
                        min = l;
                    }
                }
                labels[p] = min;
                for &l in &neighbors[..n] {
                    uf.union(min, l);
                }
            }
        }
    }
    (labels, uf)
}

fn components_by<F: Fn(usize) -> bool>(
    height: usize,
    width: usize,
    fg: F,
) -> (Vec<u32>, u32) {
    let (mut labels, mut uf) = scan_components(height, width, fg);
    // Relabel to dense 1..K in raster order of first appearance.
    let mut remap = vec![0u32; uf.len()];
    let mut next = 0u32;
    for label in labels.iter_mut() {
        if *label == 0 {
            continue;
        }
        let root = uf.find(*label);
        if remap[root as usize] == 0 {
            next += 1;
            remap[root as usize] = next;
        }
        *label = remap[root as usize];
    }
    (labels, next)
}

/// Label the 8-connected components of the 1-pixels of a binary mask.
pub fn label_components(mask: &ScalarField) -> Result<ComponentMap, RegionError> {
    if let Some(index) = mask.data().iter().position(|&v| v != 0.0 && v != 1.0) {
        return Err(RegionError::NonBinaryInput { index });
    }
    let (height, width) = (mask.height(), mask.width());
    let data = mask.data();
    let (labels, count) = components_by(height, width, |p| data[p] == 1.0);
    Ok(ComponentMap { height, width, labels, count })
}

/// Distinct labels on the first/last rows and columns of a component map.
pub fn boundary_labels(cmap: &ComponentMap) -> BoundaryLabelSet {
    let (h, w) = (cmap.height, cmap.width);
    let mut present = vec![false; cmap.count as usize + 1];
    let mut mark = |label: u32| present[label as usize] = true;
    for x in 0..w {
        mark(cmap.labels[x]);
        mark(cmap.labels[(h - 1) * w + x]);
    }
    for y in 0..h {
        mark(cmap.labels[y * w]);
        mark(cmap.labels[y * w + w - 1]);
    }
    BoundaryLabelSet { present }
}

/// Binary mask of pixels whose component of the class-`c` complement never
/// reaches the grid boundary.
///
/// Built as the literal chain: class indicator, negation, component
/// labeling, boundary label extraction, membership test. Note the class-`c`
/// pixels themselves carry component label 0, so they are marked whenever no
/// class-`c` pixel lies on the boundary.
pub fn enclosed_mask(labels: &LabelMap, c: u8) -> Result<ScalarField, RegionError> {
    let indicator = binarize_class(labels, c).map_err(|_| RegionError::InvalidClass { class: c })?;
    let complement = negate(&indicator)?;
    let cmap = label_components(&complement)?;
    let boundary = boundary_labels(&cmap);
    let data = cmap
        .labels
        .iter()
        .map(|&l| if boundary.contains(l) { 0.0 } else { 1.0 })
        .collect();
    Ok(ScalarField::new(labels.height(), labels.width(), data).expect("same shape as input"))
}

/// [`enclosed_mask`] restricted to pixels whose label differs from `c`:
/// exactly the foreign regions fully surrounded by class `c`.
///
/// Computed directly on the class's bounding-box window rather than through
/// the full composition; the result is identical.
pub fn enclosed_foreign_mask(labels: &LabelMap, c: u8) -> Result<ScalarField, RegionError> {
    if c == 0 || c as usize >= NUM_CLASSES {
        return Err(RegionError::InvalidClass { class: c });
    }
    let mut out = ScalarField::zeros(labels.height(), labels.width())
        .expect("label maps are non-empty");
    for idx in enclosed_foreign_indices(labels, c) {
        out.data_mut()[idx as usize] = 1.0;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Bbox {
    min_y: usize,
    max_y: usize,
    min_x: usize,
    max_x: usize,
}

/// Bounding box of every label value, one pass.
fn label_bboxes(labels: &LabelMap) -> [Option<Bbox>; NUM_CLASSES] {
    let (h, w) = (labels.height(), labels.width());
    let data = labels.data();
    let mut boxes: [Option<Bbox>; NUM_CLASSES] = [None; NUM_CLASSES];
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let v = data[row + x] as usize;
            match &mut boxes[v] {
                Some(b) => {
                    b.max_y = y;
                    if x < b.min_x {
                        b.min_x = x;
                    }
                    if x > b.max_x {
                        b.max_x = x;
                    }
                }
                None => boxes[v] = Some(Bbox { min_y: y, max_y: y, min_x: x, max_x: x }),
            }
        }
    }
    boxes
}

/// Raster-ordered pixel indices of foreign regions enclosed by the given
/// label value, restricted to the value's bounding box expanded by one.
///
/// A complement component is either fully surrounded by the value (hence
/// strictly inside the box) or it escapes past the box, where no pixel of
/// the value exists, and necessarily reaches the grid boundary. Component
/// fragments touching the window edge are therefore exactly the
/// non-enclosed ones.
fn enclosed_foreign_in_window(labels: &LabelMap, value: u8, bbox: Bbox) -> Vec<u32> {
    let (h, w) = (labels.height(), labels.width());
    let data = labels.data();

    let wy0 = bbox.min_y.saturating_sub(1);
    let wy1 = (bbox.max_y + 1).min(h - 1);
    let wx0 = bbox.min_x.saturating_sub(1);
    let wx1 = (bbox.max_x + 1).min(w - 1);
    let wh = wy1 - wy0 + 1;
    let ww = wx1 - wx0 + 1;

    let mut window = vec![0u32; wh * ww];
    let mut uf = UnionFind::new();
    for wy in 0..wh {
        let gbase = (wy0 + wy) * w + wx0;
        let wbase = wy * ww;
        for wx in 0..ww {
            if data[gbase + wx] == value {
                continue;
            }
            let p = wbase + wx;
            let mut neighbors = [0u32; 4];
            let mut n = 0;
            if wx > 0 && window[p - 1] != 0 {
                neighbors[n] = window[p - 1];
                n += 1;
            }
            if wy > 0 {
                let up = p - ww;
                if wx > 0 && window[up - 1] != 0 {
                    neighbors[n] = window[up - 1];
                    n += 1;
                }
                if window[up] != 0 {
                    neighbors[n] = window[up];
                    n += 1;
                }
                if wx + 1 < ww && window[up + 1] != 0 {
                    neighbors[n] = window[up + 1];
                    n += 1;
                }
            }
            if n == 0 {
                window[p] = uf.make();
            } else {
                let mut min = neighbors[0];
                for &l in &neighbors[1..n] {
                    if l < min {
                        min = l;
                    }
                }
                window[p] = min;
                for &l in &neighbors[..n] {
                    uf.union(min, l);
                }
            }
        }
    }

    let mut escapes = vec![false; uf.len()];
    {
        let mut mark = |q: usize, uf: &mut UnionFind| {
            let l = window[q];
            if l != 0 {
                escapes[uf.find(l) as usize] = true;
            }
        };
        for wx in 0..ww {
            mark(wx, &mut uf);
            mark((wh - 1) * ww + wx, &mut uf);
        }
        for wy in 0..wh {
            mark(wy * ww, &mut uf);
            mark(wy * ww + ww - 1, &mut uf);
        }
    }

    let mut out = Vec::new();
    for wy in 0..wh {
        let gbase = (wy0 + wy) * w + wx0;
        let wbase = wy * ww;
        for wx in 0..ww {
            let l = window[wbase + wx];
            if l != 0 && !escapes[uf.find(l) as usize] {
                out.push((gbase + wx) as u32);
            }
        }
    }
    out
}

/// Enclosed-foreign pixel indices for one label value (background 0
/// allowed, unlike the public class-checked ops).
pub(crate) fn enclosed_foreign_indices(labels: &LabelMap, value: u8) -> Vec<u32> {
    match label_bboxes(labels)[value as usize] {
        Some(bbox) => enclosed_foreign_in_window(labels, value, bbox),
        // Value absent: the complement is the whole grid and touches the
        // boundary everywhere.
        None => Vec::new(),
    }
}

/// Maximal 8-connected same-label regions ("atoms") with their adjacency.
///
/// For any class `c`, the components of the class-`c` complement are
/// exactly the connected groups of atoms whose label differs from `c`:
/// same-label neighbors are already merged into one atom, and neighbors
/// with different labels always carry an edge here. This lets the 18-class
/// sweep pay the full-grid scans once and solve each class on the much
/// smaller atom graph.
struct AtomGraph {
    count: usize,
    /// Atom label value, indexed by atom id (slot 0 unused).
    label_of: Vec<u8>,
    /// Whether the atom has a pixel on the grid boundary.
    touches_border: Vec<bool>,
    /// Pixel indices grouped by atom: atom `a` owns
    /// `pixels[offsets[a] .. offsets[a + 1]]`, each group raster-ordered.
    offsets: Vec<u32>,
    pixels: Vec<u32>,
    /// Deduplicated adjacency between atoms of different labels.
    edges: Vec<(u32, u32)>,
}

fn build_atom_graph(labels: &LabelMap) -> AtomGraph {
    let (h, w) = (labels.height(), labels.width());
    let data = labels.data();

    let (atoms, count) =
        components_same_label(h, w, data);
    let count = count as usize;

    let mut label_of = vec![0u8; count + 1];
    let mut touches_border = vec![false; count + 1];
    let mut sizes = vec![0u32; count + 1];
    for (p, &a) in atoms.iter().enumerate() {
        label_of[a as usize] = data[p];
        sizes[a as usize] += 1;
    }
    for x in 0..w {
        touches_border[atoms[x] as usize] = true;
        touches_border[atoms[(h - 1) * w + x] as usize] = true;
    }
    for y in 0..h {
        touches_border[atoms[y * w] as usize] = true;
        touches_border[atoms[y * w + w - 1] as usize] = true;
    }

    let mut offsets = vec![0u32; count + 2];
    for a in 1..=count {
        offsets[a + 1] = offsets[a] + sizes[a];
    }
    let mut cursor = offsets.clone();
    let mut pixels = vec![0u32; h * w];
    for (p, &a) in atoms.iter().enumerate() {
        pixels[cursor[a as usize] as usize] = p as u32;
        cursor[a as usize] += 1;
    }

    // Edges exist exactly where neighboring pixels disagree on the label;
    // forward directions only, deduplicated by packed sort.
    let mut packed: Vec<u64> = Vec::new();
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let p = row + x;
            let v = data[p];
            let mut push = |q: usize| {
                if data[q] != v {
                    let (a, b) = (atoms[p], atoms[q]);
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    packed.push(((lo as u64) << 32) | hi as u64);
                }
            };
            if x + 1 < w {
                push(p + 1);
            }
            if y + 1 < h {
                if x > 0 {
                    push(p + w - 1);
                }
                push(p + w);
                if x + 1 < w {
                    push(p + w + 1);
                }
            }
        }
    }
    packed.sort_unstable();
    packed.dedup();
    let edges = packed
        .into_iter()
        .map(|key| ((key >> 32) as u32, key as u32))
        .collect();

    AtomGraph { count, label_of, touches_border, offsets, pixels, edges }
}

/// Same-label component labeling (dense ids, raster first-appearance
/// order). Like the binary pass but merging on label equality.
fn components_same_label(h: usize, w: usize, data: &[u8]) -> (Vec<u32>, u32) {
    let mut atoms = vec![0u32; h * w];
    let mut uf = UnionFind::new();
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let p = row + x;
            let v = data[p];
            let mut neighbors = [0u32; 4];
            let mut n = 0;
            if x > 0 && data[p - 1] == v {
                neighbors[n] = atoms[p - 1];
                n += 1;
            }
            if y > 0 {
                let up = p - w;
                if x > 0 && data[up - 1] == v {
                    neighbors[n] = atoms[up - 1];
                    n += 1;
                }
                if data[up] == v {
                    neighbors[n] = atoms[up];
                    n += 1;
                }
                if x + 1 < w && data[up + 1] == v {
                    neighbors[n] = atoms[up + 1];
                    n += 1;
                }
            }
            if n == 0 {
                atoms[p] = uf.make();
            } else {
                let mut min = neighbors[0];
                for &l in &neighbors[1..n] {
                    if l < min {
                        min = l;
                    }
                }
                atoms[p] = min;
                for &l in &neighbors[..n] {
                    uf.union(min, l);
                }
            }
        }
    }
    let mut remap = vec![0u32; uf.len()];
    let mut next = 0u32;
    for a in atoms.iter_mut() {
        let root = uf.find(*a);
        if remap[root as usize] == 0 {
            next += 1;
            remap[root as usize] = next;
        }
        *a = remap[root as usize];
    }
    (atoms, next)
}

/// Enclosed-foreign pixel indices for every label value 0..=17, each list
/// in raster order.
pub(crate) fn enclosed_foreign_sweep(labels: &LabelMap) -> [Vec<u32>; NUM_CLASSES] {
    let graph = build_atom_graph(labels);
    let atom_ids = 1..=graph.count;

    let mut parent: Vec<u32> = Vec::with_capacity(graph.count + 1);
    let mut border_root = vec![false; graph.count + 1];
    let mut out: [Vec<u32>; NUM_CLASSES] = core::array::from_fn(|_| Vec::new());

    for value in 0..NUM_CLASSES as u8 {
        parent.clear();
        parent.extend(0..=graph.count as u32);
        let find = |parent: &mut Vec<u32>, mut i: u32| loop {
            let p = parent[i as usize];
            if p == i {
                return i;
            }
            let gp = parent[p as usize];
            parent[i as usize] = gp;
            i = gp;
        };
        for &(a, b) in &graph.edges {
            if graph.label_of[a as usize] == value || graph.label_of[b as usize] == value {
                continue;
            }
            let ra = find(&mut parent, a);
            let rb = find(&mut parent, b);
            if ra != rb {
                if ra < rb {
                    parent[rb as usize] = ra;
                } else {
                    parent[ra as usize] = rb;
                }
            }
        }
        border_root.iter_mut().for_each(|v| *v = false);
        for a in atom_ids.clone() {
            if graph.label_of[a] != value && graph.touches_border[a] {
                let root = find(&mut parent, a as u32);
                border_root[root as usize] = true;
            }
        }
        let slot = &mut out[value as usize];
        for a in atom_ids.clone() {
            if graph.label_of[a] != value && !border_root[find(&mut parent, a as u32) as usize] {
                let (lo, hi) = (graph.offsets[a] as usize, graph.offsets[a + 1] as usize);
                slot.extend_from_slice(&graph.pixels[lo..hi]);
            }
        }
        slot.sort_unstable();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::LabelMap;

    fn mask(h: usize, w: usize, data: &[f64]) -> ScalarField {
        ScalarField::new(h, w, data.to_vec()).unwrap()
    }

    #[test]
    fn negate_flips_and_is_involutive() {
        let m = mask(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let n = negate(&m).unwrap();
        assert_eq!(n.data(), &[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(negate(&n).unwrap(), m);
    }

    #[test]
    fn negate_rejects_non_binary() {
        let m = mask(1, 2, &[0.5, 1.0]);
        assert_eq!(negate(&m), Err(RegionError::NonBinaryInput { index: 0 }));
    }

    #[test]
    fn label_components_trivial_masks() {
        let zeros = ScalarField::zeros(3, 4).unwrap();
        let cmap = label_components(&zeros).unwrap();
        assert_eq!(cmap.count(), 0);
        assert!(cmap.labels().iter().all(|&l| l == 0));

        let ones = mask(3, 4, &[1.0; 12]);
        let cmap = label_components(&ones).unwrap();
        assert_eq!(cmap.count(), 1);
        assert!(cmap.labels().iter().all(|&l| l == 1));
    }

    #[test]
    fn label_components_diagonal_bridge() {
        let m = mask(
            4,
            4,
            &[
                1.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 1.0, //
                0.0, 1.0, 1.0, 1.0,
            ],
        );
        let cmap = label_components(&m).unwrap();
        assert_eq!(cmap.count(), 2);
        let expect = [
            1, 1, 0, 0, //
            1, 0, 0, 2, //
            0, 0, 2, 2, //
            0, 2, 2, 2,
        ];
        assert_eq!(cmap.labels(), &expect);
    }

    #[test]
    fn boundary_labels_enumerates_edges() {
        let cmap = ComponentMap {
            height: 3,
            width: 3,
            labels: vec![1, 1, 0, 1, 0, 2, 1, 0, 0],
            count: 2,
        };
        let set = boundary_labels(&cmap);
        assert_eq!(set.to_vec(), vec![0, 1, 2]);
        assert!(set.contains(2));
        assert!(!set.contains(3));
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn boundary_labels_single_pixel_map() {
        let cmap = label_components(&mask(1, 1, &[1.0])).unwrap();
        assert_eq!(boundary_labels(&cmap).to_vec(), vec![1]);
    }

    /// Layout whose class-complement has three boundary components and one
    /// interior component (the third in raster order), so the boundary set
    /// is {0, 1, 2, 4} and exactly component 3 is enclosed.
    fn ring_fixture() -> (LabelMap, Vec<usize>) {
        let c = 5u8;
        let o = 2u8;
        #[rustfmt::skip]
        let data = vec![
            o, o, c, c, o, o,
            o, o, c, c, o, o,
            c, c, c, c, c, c,
            c, o, o, c, c, c,
            c, o, o, c, o, o,
            c, c, c, c, o, o,
        ];
        let labels = LabelMap::new(6, 6, data).unwrap();
        let enclosed = vec![3 * 6 + 1, 3 * 6 + 2, 4 * 6 + 1, 4 * 6 + 2];
        (labels, enclosed)
    }

    #[test]
    fn enclosed_mask_matches_interior_component() {
        let (labels, interior) = ring_fixture();
        let indicator = binarize_class(&labels, 5).unwrap();
        let cmap = label_components(&negate(&indicator).unwrap()).unwrap();
        assert_eq!(cmap.count(), 4);
        let set = boundary_labels(&cmap);
        assert_eq!(set.to_vec(), vec![0, 1, 2, 4]);

        let enclosed = enclosed_mask(&labels, 5).unwrap();
        for p in 0..36 {
            let expect = if interior.contains(&p) { 1.0 } else { 0.0 };
            assert_eq!(enclosed.data()[p], expect, "pixel {p}");
        }
    }

    #[test]
    fn enclosed_mask_thin_maps_are_all_boundary() {
        let labels = LabelMap::new(2, 5, vec![3; 10]).unwrap();
        assert!(enclosed_mask(&labels, 3).unwrap().data().iter().all(|&v| v == 0.0));
        let labels = LabelMap::new(5, 2, vec![3; 10]).unwrap();
        assert!(enclosed_mask(&labels, 3).unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn enclosed_mask_single_interior_foreign_pixel() {
        let mut data = vec![7u8; 9];
        data[4] = 2;
        let labels = LabelMap::new(3, 3, data).unwrap();
        let enclosed = enclosed_mask(&labels, 7).unwrap();
        let expect = [0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(enclosed.data(), &expect);
        assert_eq!(enclosed_foreign_mask(&labels, 7).unwrap().data(), &expect);
    }

    #[test]
    fn enclosed_mask_marks_class_pixels_when_class_is_interior() {
        // Single class-c pixel in the middle: its own label-0 slot is absent
        // from the boundary set, so the class pixel itself is reported.
        let mut data = vec![2u8; 9];
        data[4] = 7;
        let labels = LabelMap::new(3, 3, data).unwrap();
        let enclosed = enclosed_mask(&labels, 7).unwrap();
        assert_eq!(enclosed.data()[4], 1.0);
        assert_eq!(enclosed.data().iter().filter(|&&v| v == 1.0).count(), 1);
        // The foreign variant drops it.
        let foreign = enclosed_foreign_mask(&labels, 7).unwrap();
        assert!(foreign.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn enclosed_foreign_zero_when_region_touches_border() {
        #[rustfmt::skip]
        let data = vec![
            4, 4, 4,
            4, 9, 9,
            4, 4, 4,
        ];
        let labels = LabelMap::new(3, 3, data).unwrap();
        let foreign = enclosed_foreign_mask(&labels, 4).unwrap();
        assert!(foreign.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn enclosed_foreign_perfect_map_is_zero() {
        let labels = LabelMap::new(4, 4, vec![6; 16]).unwrap();
        let foreign = enclosed_foreign_mask(&labels, 6).unwrap();
        assert!(foreign.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sweep_matches_public_composition() {
        let (labels, interior) = ring_fixture();
        let indices = enclosed_foreign_indices(&labels, 5);
        let expect: Vec<u32> = interior.iter().map(|&p| p as u32).collect();
        assert_eq!(indices, expect);

        // Background value 0 is allowed on the internal path.
        let sweep = enclosed_foreign_sweep(&labels);
        assert_eq!(sweep[5], expect);
        assert!(sweep[0].is_empty());
    }

    /// The three routes to enclosed-foreign pixels must agree: the literal
    /// negate/label/boundary composition, the bounding-box window, and the
    /// atom-graph sweep.
    #[test]
    fn three_route_enclosed_agreement_on_random_maps() {
        let mut state = 0x1234_5678_9ABCu64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize
        };
        for round in 0..60 {
            let h = 2 + next() % 14;
            let w = 2 + next() % 14;
            let values = 2 + (round % 5) as u8;
            let data: Vec<u8> = (0..h * w).map(|_| (next() % values as usize) as u8).collect();
            let labels = LabelMap::new(h, w, data).unwrap();
            let sweep = enclosed_foreign_sweep(&labels);
            for c in 1..=(values.max(2) - 1) {
                let literal = enclosed_mask(&labels, c).unwrap();
                let literal_foreign: Vec<u32> = literal
                    .data()
                    .iter()
                    .enumerate()
                    .filter(|&(p, &v)| v == 1.0 && labels.data()[p] != c)
                    .map(|(p, _)| p as u32)
                    .collect();
                let windowed = enclosed_foreign_indices(&labels, c);
                assert_eq!(windowed, literal_foreign, "round {round} class {c}");
                assert_eq!(sweep[c as usize], literal_foreign, "round {round} class {c}");
                let mask = enclosed_foreign_mask(&labels, c).unwrap();
                let from_mask: Vec<u32> = mask
                    .data()
                    .iter()
                    .enumerate()
                    .filter(|&(_, &v)| v == 1.0)
                    .map(|(p, _)| p as u32)
                    .collect();
                assert_eq!(from_mask, literal_foreign, "round {round} class {c}");
            }
        }
    }

    #[test]
    fn sweep_background_enclosure() {
        // Background ring inside class 3, on a map that is otherwise class 3
        // except a background pixel column touching the top border.
        #[rustfmt::skip]
        let data = vec![
            3, 3, 3, 3, 0,
            3, 0, 0, 3, 3,
            3, 0, 0, 3, 3,
            3, 3, 3, 3, 3,
        ];
        let labels = LabelMap::new(4, 5, data).unwrap();
        let sweep = enclosed_foreign_sweep(&labels);
        // Foreign (non-background) regions enclosed by background: none.
        assert!(sweep[0].is_empty());
        // Class-3 analysis: the 2x2 background block is enclosed; the corner
        // background pixel touches the border.
        assert_eq!(sweep[3], vec![6, 7, 11, 12]);
    }
}
