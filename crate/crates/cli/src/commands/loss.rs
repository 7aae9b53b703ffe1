//! `hotkit loss`: per-image loss breakdowns over a dataset directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, Context};
use hotkit_core::grid::{LabelMap, LossWeights, ProbMap};
use hotkit_core::loss::{
    contact_indicator_from_gt, cross_entropy, global_joint_loss_soft, local_joint_loss_soft,
    prompt_be_loss, LossBreakdown,
};
use rayon::prelude::*;

use crate::commands::{thread_pool, CmdError, CmdResult};
use crate::dataset::{
    downsample_labels_stride4, list_image_ids, load_dataset_entry, Prediction, Requirements,
};
use crate::report::write_loss_csv;

pub struct LossArgs<'a> {
    pub data: &'a Path,
    pub out: &'a Path,
    pub weights: LossWeights,
    pub threads: Option<usize>,
}

fn breakdown_for(
    dir: &Path,
    image_id: &str,
    weights: &LossWeights,
) -> Result<(String, LossBreakdown), anyhow::Error> {
    let req = Requirements { pred: true, sim: weights.gamma > 0.0, ..Default::default() };
    let entry = load_dataset_entry(dir, image_id, req)?;

    let probs: ProbMap = match entry.pred.expect("pred required") {
        Prediction::Probs(probs) => probs,
        Prediction::Labels(labels) => ProbMap::one_hot(&labels),
    };
    let gt: LabelMap = if entry.pred_quarter {
        downsample_labels_stride4(&entry.gt)
            .ok_or_else(|| anyhow!("{image_id}: gt grid is not divisible by 4"))?
    } else {
        entry.gt
    };

    let (ce, _) = cross_entropy(&probs, &gt).with_context(|| format!("{image_id}: ce"))?;
    let (local, _) =
        local_joint_loss_soft(&probs, &gt).with_context(|| format!("{image_id}: local"))?;
    let (global, _) =
        global_joint_loss_soft(&probs).with_context(|| format!("{image_id}: global"))?;
    let prompt_be = match &entry.sim {
        Some(sim) => prompt_be_loss(sim, &contact_indicator_from_gt(&gt)).0,
        None => 0.0,
    };
    let total = ce
        + weights.alpha * local.total
        + weights.beta * global.total
        + weights.gamma * prompt_be;
    Ok((
        image_id.to_string(),
        LossBreakdown { ce, local_jl: local.total, global_jl: global.total, prompt_be, total },
    ))
}

pub fn run(args: &LossArgs) -> CmdResult {
    let ids = list_image_ids(args.data)?;
    if ids.is_empty() {
        return Err(anyhow!("no `<id>.gt.htf` files in {}", args.data.display()).into());
    }
    let pool = thread_pool(args.threads)?;
    let rows: Vec<(String, LossBreakdown)> = pool
        .install(|| {
            ids.par_iter()
                .map(|id| breakdown_for(args.data, id, &args.weights))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(CmdError::Input)?;

    let file = File::create(args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_loss_csv(BufWriter::new(file), &rows).context("writing loss csv")?;
    println!("wrote {} loss rows to {}", rows.len(), args.out.display());
    Ok(())
}
