//! `hotkit hpp`: depth-band filter masks written per image.

use std::path::Path;

use anyhow::{anyhow, Context};
use hotkit_core::grid::ScalarField;
use hotkit_core::hpp::{hard_filter_mask, normalize_depth, person_mean_depth, soft_filter_mask};
use rayon::prelude::*;

use crate::commands::{thread_pool, CmdError, CmdResult};
use crate::dataset::{list_image_ids, load_dataset_entry, Requirements};
use crate::tensorio::{write_htf, HtfTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    Hard,
    Soft,
}

pub struct HppArgs<'a> {
    pub data: &'a Path,
    pub out: &'a Path,
    pub tau: f64,
    pub mode: FilterMode,
    pub threads: Option<usize>,
}

fn filter_for(args: &HppArgs, image_id: &str) -> Result<(), anyhow::Error> {
    let req = Requirements { depth: true, masks: true, ..Default::default() };
    let entry = load_dataset_entry(args.data, image_id, req)?;
    let depth = entry.depth.expect("depth required");
    let masks = entry.masks.expect("masks required");

    let normalized = normalize_depth(&depth);
    if normalized.is_degenerate() {
        return Err(anyhow!(
            "{image_id}: constant depth map has no usable range (degenerate)"
        ));
    }
    let summary = person_mean_depth(&normalized, &masks)?;
    let fm: ScalarField = match args.mode {
        FilterMode::Hard => hard_filter_mask(&normalized, &summary, args.tau)?,
        FilterMode::Soft => soft_filter_mask(&normalized, &summary, args.tau)?,
    };
    let tensor = HtfTensor::from_f32(
        vec![fm.height() as u32, fm.width() as u32],
        fm.data().iter().map(|&v| v as f32).collect(),
    )?;
    write_htf(&tensor, &args.out.join(format!("{image_id}.fm.htf")))
        .with_context(|| format!("writing {image_id} filter mask"))?;
    Ok(())
}

pub fn run(args: &HppArgs) -> CmdResult {
    if !(args.tau > 0.0 && args.tau.is_finite()) {
        return Err(anyhow!("--tau must be positive and finite").into());
    }
    let ids = list_image_ids(args.data)?;
    if ids.is_empty() {
        return Err(anyhow!("no `<id>.gt.htf` files in {}", args.data.display()).into());
    }
    std::fs::create_dir_all(args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let pool = thread_pool(args.threads)?;
    pool.install(|| {
        ids.par_iter()
            .map(|id| filter_for(args, id))
            .collect::<Result<Vec<_>, _>>()
    })
    .map_err(CmdError::Input)?;
    println!("wrote {} filter masks to {}", ids.len(), args.out.display());
    Ok(())
}
