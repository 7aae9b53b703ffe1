//! Dataset directory layout: one HTF file per tensor, named
//! `<image_id>.<kind>.htf` with kinds `gt`, `pred`, `depth`, `masks`, `sim`.
//!
//! Loading validates every tensor against the core type invariants before
//! returning, so downstream code never sees an ill-formed grid. Predictions
//! may be stored at the ground-truth resolution or at quarter resolution;
//! the loader records which.

use std::fs;
use std::path::{Path, PathBuf};

use hotkit_core::grid::{
    DepthMap, LabelMap, PersonMaskSet, ProbMap, SimilarityVector, CONTACT_CLASSES, NUM_CLASSES,
};
use thiserror::Error;

use crate::tensorio::{read_htf, write_htf, HtfTensor, TensorData, TensorIoError};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("missing file {path}")]
    MissingFile { path: PathBuf },
    #[error("{path}: {source}")]
    Tensor {
        path: PathBuf,
        #[source]
        source: TensorIoError,
    },
    #[error("{path}: {detail}")]
    ShapeMismatch { path: PathBuf, detail: String },
    #[error("{path}: {detail}")]
    InvariantViolation { path: PathBuf, detail: String },
    #[error("cannot scan {path}: {source}")]
    Scan {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Prediction tensor as stored, either probabilities or hard labels, at
/// full or quarter resolution relative to the ground truth.
#[derive(Debug, Clone)]
pub enum Prediction {
    Probs(ProbMap),
    Labels(LabelMap),
}

impl Prediction {
    pub fn height(&self) -> usize {
        match self {
            Prediction::Probs(p) => p.height(),
            Prediction::Labels(l) => l.height(),
        }
    }

    pub fn width(&self) -> usize {
        match self {
            Prediction::Probs(p) => p.width(),
            Prediction::Labels(l) => l.width(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct DatasetEntry {
    pub image_id: String,
    pub gt: LabelMap,
    pub pred: Option<Prediction>,
    /// True when the prediction grid is the ground truth downsampled by 4.
    pub pred_quarter: bool,
    pub depth: Option<DepthMap>,
    pub masks: Option<PersonMaskSet>,
    pub sim: Option<SimilarityVector>,
}

/// Which optional tensors the invoking command needs.
#[derive(Debug, Clone, Copy, Default)]
pub struct Requirements {
    pub pred: bool,
    pub depth: bool,
    pub masks: bool,
    pub sim: bool,
}

pub fn entry_path(dir: &Path, image_id: &str, kind: &str) -> PathBuf {
    dir.join(format!("{image_id}.{kind}.htf"))
}

/// Image ids in a dataset directory, sorted: every `<id>.gt.htf` counts.
pub fn list_image_ids(dir: &Path) -> Result<Vec<String>, DatasetError> {
    let entries = fs::read_dir(dir).map_err(|source| DatasetError::Scan {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|source| DatasetError::Scan {
            path: dir.to_path_buf(),
            source,
        })?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(id) = name.strip_suffix(".gt.htf") {
            ids.push(id.to_string());
        }
    }
    ids.sort();
    Ok(ids)
}

fn read_required(path: &Path) -> Result<HtfTensor, DatasetError> {
    if !path.exists() {
        return Err(DatasetError::MissingFile { path: path.to_path_buf() });
    }
    read_htf(path).map_err(|source| DatasetError::Tensor { path: path.to_path_buf(), source })
}

fn shape_err(path: &Path, detail: String) -> DatasetError {
    DatasetError::ShapeMismatch { path: path.to_path_buf(), detail }
}

fn invariant_err(path: &Path, detail: String) -> DatasetError {
    DatasetError::InvariantViolation { path: path.to_path_buf(), detail }
}

fn as_u8_rank2(tensor: HtfTensor, path: &Path) -> Result<(usize, usize, Vec<u8>), DatasetError> {
    let dims = tensor.dims().to_vec();
    if dims.len() != 2 {
        return Err(shape_err(path, format!("expected rank 2, got dims {dims:?}")));
    }
    match tensor.into_data() {
        TensorData::U8(data) => Ok((dims[0] as usize, dims[1] as usize, data)),
        TensorData::F32(_) => Err(shape_err(path, "expected u8 dtype".into())),
    }
}

fn load_gt(path: &Path) -> Result<LabelMap, DatasetError> {
    let (h, w, data) = as_u8_rank2(read_required(path)?, path)?;
    LabelMap::new(h, w, data).map_err(|e| invariant_err(path, e.to_string()))
}

fn load_pred(path: &Path, gt: &LabelMap) -> Result<(Prediction, bool), DatasetError> {
    let tensor = read_required(path)?;
    let dims = tensor.dims().to_vec();
    let pred = match tensor.into_data() {
        TensorData::U8(data) => {
            if dims.len() != 2 {
                return Err(shape_err(path, format!("label pred must be rank 2, got {dims:?}")));
            }
            let labels = LabelMap::new(dims[0] as usize, dims[1] as usize, data)
                .map_err(|e| invariant_err(path, e.to_string()))?;
            Prediction::Labels(labels)
        }
        TensorData::F32(data) => {
            if dims.len() != 3 {
                return Err(shape_err(path, format!("prob pred must be rank 3, got {dims:?}")));
            }
            if dims[0] as usize != NUM_CLASSES {
                return Err(shape_err(
                    path,
                    format!("prob pred needs {NUM_CLASSES} channels, got {}", dims[0]),
                ));
            }
            let probs = ProbMap::new(
                dims[1] as usize,
                dims[2] as usize,
                data.into_iter().map(f64::from).collect(),
            )
            .map_err(|e| invariant_err(path, e.to_string()))?;
            Prediction::Probs(probs)
        }
    };
    let (h, w) = (pred.height(), pred.width());
    if (h, w) == (gt.height(), gt.width()) {
        Ok((pred, false))
    } else if gt.height().is_multiple_of(4)
        && gt.width().is_multiple_of(4)
        && (h, w) == (gt.height() / 4, gt.width() / 4)
    {
        Ok((pred, true))
    } else {
        Err(shape_err(
            path,
            format!(
                "pred grid {h}x{w} is neither the gt grid {}x{} nor its quarter",
                gt.height(),
                gt.width()
            ),
        ))
    }
}

fn load_depth(path: &Path, gt: &LabelMap) -> Result<DepthMap, DatasetError> {
    let tensor = read_required(path)?;
    let dims = tensor.dims().to_vec();
    if dims.len() != 2 {
        return Err(shape_err(path, format!("depth must be rank 2, got {dims:?}")));
    }
    if (dims[0] as usize, dims[1] as usize) != (gt.height(), gt.width()) {
        return Err(shape_err(
            path,
            format!("depth grid {}x{} does not match gt", dims[0], dims[1]),
        ));
    }
    match tensor.into_data() {
        TensorData::F32(data) => {
            DepthMap::raw(dims[0] as usize, dims[1] as usize, data.into_iter().map(f64::from).collect())
                .map_err(|e| invariant_err(path, e.to_string()))
        }
        TensorData::U8(_) => Err(shape_err(path, "expected f32 dtype".into())),
    }
}

fn load_masks(path: &Path, gt: &LabelMap) -> Result<PersonMaskSet, DatasetError> {
    let tensor = read_required(path)?;
    let dims = tensor.dims().to_vec();
    if dims.len() != 3 {
        return Err(shape_err(path, format!("masks must be rank 3, got {dims:?}")));
    }
    if (dims[1] as usize, dims[2] as usize) != (gt.height(), gt.width()) {
        return Err(shape_err(
            path,
            format!("mask grid {}x{} does not match gt", dims[1], dims[2]),
        ));
    }
    match tensor.into_data() {
        TensorData::U8(data) => PersonMaskSet::new(gt.height(), gt.width(), data)
            .map_err(|e| invariant_err(path, e.to_string())),
        TensorData::F32(_) => Err(shape_err(path, "expected u8 dtype".into())),
    }
}

fn load_sim(path: &Path) -> Result<SimilarityVector, DatasetError> {
    let tensor = read_required(path)?;
    let dims = tensor.dims().to_vec();
    if dims != [CONTACT_CLASSES as u32] {
        return Err(shape_err(path, format!("sim must have dims [17], got {dims:?}")));
    }
    match tensor.into_data() {
        TensorData::F32(data) => {
            let values: Vec<f64> = data.into_iter().map(f64::from).collect();
            SimilarityVector::from_slice(&values).map_err(|e| invariant_err(path, e.to_string()))
        }
        TensorData::U8(_) => Err(shape_err(path, "expected f32 dtype".into())),
    }
}

/// Load one dataset entry; only tensors named in `req` are required, but
/// anything present and loadable is returned.
pub fn load_dataset_entry(
    dir: &Path,
    image_id: &str,
    req: Requirements,
) -> Result<DatasetEntry, DatasetError> {
    let gt = load_gt(&entry_path(dir, image_id, "gt"))?;

    let mut entry = DatasetEntry {
        image_id: image_id.to_string(),
        gt,
        pred: None,
        pred_quarter: false,
        depth: None,
        masks: None,
        sim: None,
    };

    let pred_path = entry_path(dir, image_id, "pred");
    if req.pred || pred_path.exists() {
        let (pred, quarter) = load_pred(&pred_path, &entry.gt)?;
        entry.pred = Some(pred);
        entry.pred_quarter = quarter;
    }
    let depth_path = entry_path(dir, image_id, "depth");
    if req.depth || depth_path.exists() {
        entry.depth = Some(load_depth(&depth_path, &entry.gt)?);
    }
    let masks_path = entry_path(dir, image_id, "masks");
    if req.masks || masks_path.exists() {
        entry.masks = Some(load_masks(&masks_path, &entry.gt)?);
    }
    let sim_path = entry_path(dir, image_id, "sim");
    if req.sim || sim_path.exists() {
        entry.sim = Some(load_sim(&sim_path)?);
    }
    Ok(entry)
}

/// Ground truth subsampled with stride 4 (top-left pixel of each block),
/// the deterministic counterpart of a quarter-resolution prediction.
pub fn downsample_labels_stride4(labels: &LabelMap) -> Option<LabelMap> {
    let (h, w) = (labels.height(), labels.width());
    if !h.is_multiple_of(4) || !w.is_multiple_of(4) {
        return None;
    }
    let (oh, ow) = (h / 4, w / 4);
    let mut data = Vec::with_capacity(oh * ow);
    for y in 0..oh {
        for x in 0..ow {
            data.push(labels.get(y * 4, x * 4));
        }
    }
    Some(LabelMap::new(oh, ow, data).expect("subsampled labels stay valid"))
}

pub fn write_gt(dir: &Path, image_id: &str, gt: &LabelMap) -> Result<(), TensorIoError> {
    let tensor =
        HtfTensor::from_u8(vec![gt.height() as u32, gt.width() as u32], gt.data().to_vec())?;
    write_htf(&tensor, &entry_path(dir, image_id, "gt"))
}

pub fn write_pred_probs(
    dir: &Path,
    image_id: &str,
    probs: &ProbMap,
) -> Result<(), TensorIoError> {
    let tensor = HtfTensor::from_f32(
        vec![NUM_CLASSES as u32, probs.height() as u32, probs.width() as u32],
        probs.data().iter().map(|&v| v as f32).collect(),
    )?;
    write_htf(&tensor, &entry_path(dir, image_id, "pred"))
}

pub fn write_depth(dir: &Path, image_id: &str, depth: &DepthMap) -> Result<(), TensorIoError> {
    let tensor = HtfTensor::from_f32(
        vec![depth.height() as u32, depth.width() as u32],
        depth.data().iter().map(|&v| v as f32).collect(),
    )?;
    write_htf(&tensor, &entry_path(dir, image_id, "depth"))
}

pub fn write_masks(dir: &Path, image_id: &str, masks: &PersonMaskSet) -> Result<(), TensorIoError> {
    let tensor = HtfTensor::from_u8(
        vec![masks.count() as u32, masks.height() as u32, masks.width() as u32],
        masks.data().to_vec(),
    )?;
    write_htf(&tensor, &entry_path(dir, image_id, "masks"))
}

pub fn write_sim(dir: &Path, image_id: &str, sim: &SimilarityVector) -> Result<(), TensorIoError> {
    let tensor = HtfTensor::from_f32(
        vec![CONTACT_CLASSES as u32],
        sim.values().iter().map(|&v| v as f32).collect(),
    )?;
    write_htf(&tensor, &entry_path(dir, image_id, "sim"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use hotkit_core::synth::{gen_scene, perturb_prediction, SceneConfig};

    fn scene_setup() -> (SceneConfig, tempfile::TempDir) {
        let config = SceneConfig {
            height: 32,
            width: 32,
            persons: 2,
            contact_classes: vec![2, 7],
            noise_rate: 0.0,
            enclosed_blobs: 0,
            seed: 5,
        };
        (config, tempfile::tempdir().unwrap())
    }

    #[test]
    fn generated_entry_round_trips_through_the_loader() {
        let (config, dir) = scene_setup();
        let scene = gen_scene(&config).unwrap();
        let probs = perturb_prediction(&scene, &config);
        write_gt(dir.path(), "img_0000", &scene.gt).unwrap();
        write_pred_probs(dir.path(), "img_0000", &probs).unwrap();
        write_depth(dir.path(), "img_0000", &scene.depth).unwrap();
        write_masks(dir.path(), "img_0000", &scene.persons).unwrap();

        let req = Requirements { pred: true, depth: true, masks: true, sim: false };
        let entry = load_dataset_entry(dir.path(), "img_0000", req).unwrap();
        assert_eq!(entry.gt, scene.gt);
        assert!(!entry.pred_quarter);
        assert_eq!(entry.masks.unwrap(), scene.persons);
        match entry.pred.unwrap() {
            Prediction::Probs(p) => assert!(p.is_normalized()),
            Prediction::Labels(_) => panic!("expected probabilities"),
        }
        assert_eq!(list_image_ids(dir.path()).unwrap(), vec!["img_0000".to_string()]);
    }

    #[test]
    fn gt_out_of_range_is_an_invariant_violation() {
        let dir = tempfile::tempdir().unwrap();
        let tensor = HtfTensor::from_u8(vec![1, 2], vec![0, 18]).unwrap();
        write_htf(&tensor, &entry_path(dir.path(), "bad", "gt")).unwrap();
        match load_dataset_entry(dir.path(), "bad", Requirements::default()) {
            Err(DatasetError::InvariantViolation { .. }) => {}
            other => panic!("expected InvariantViolation, got {other:?}"),
        }
    }

    #[test]
    fn all_zero_person_slice_is_rejected() {
        let (config, dir) = scene_setup();
        let scene = gen_scene(&config).unwrap();
        write_gt(dir.path(), "img", &scene.gt).unwrap();
        let plane = 32 * 32;
        let tensor = HtfTensor::from_u8(vec![1, 32, 32], vec![0u8; plane]).unwrap();
        write_htf(&tensor, &entry_path(dir.path(), "img", "masks")).unwrap();
        let req = Requirements { masks: true, ..Default::default() };
        match load_dataset_entry(dir.path(), "img", req) {
            Err(DatasetError::InvariantViolation { detail, .. }) => {
                assert!(detail.contains("no foreground"), "{detail}");
            }
            other => panic!("expected InvariantViolation, got {other:?}"),
        }
    }

    #[test]
    fn missing_required_pred_names_the_file() {
        let (config, dir) = scene_setup();
        let scene = gen_scene(&config).unwrap();
        write_gt(dir.path(), "img", &scene.gt).unwrap();
        let req = Requirements { pred: true, ..Default::default() };
        match load_dataset_entry(dir.path(), "img", req) {
            Err(DatasetError::MissingFile { path }) => {
                assert!(path.to_string_lossy().ends_with("img.pred.htf"));
            }
            other => panic!("expected MissingFile, got {other:?}"),
        }
    }

    #[test]
    fn quarter_resolution_pred_is_detected() {
        let (config, dir) = scene_setup();
        let scene = gen_scene(&config).unwrap();
        write_gt(dir.path(), "img", &scene.gt).unwrap();
        let quarter = downsample_labels_stride4(&scene.gt).unwrap();
        let tensor = HtfTensor::from_u8(vec![8, 8], quarter.data().to_vec()).unwrap();
        write_htf(&tensor, &entry_path(dir.path(), "img", "pred")).unwrap();
        let req = Requirements { pred: true, ..Default::default() };
        let entry = load_dataset_entry(dir.path(), "img", req).unwrap();
        assert!(entry.pred_quarter);
    }
}
