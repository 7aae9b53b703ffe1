//! `hotkit eval`: metric reports over a dataset directory.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use anyhow::{anyhow, Context};
use hotkit_core::grid::{argmax_labels, LabelMap, ScalarField};
use hotkit_core::metrics::{aggregate, evaluate_image, human_mask_full, human_mask_quarter, MetricReport};
use rayon::prelude::*;

use crate::commands::{thread_pool, CmdError, CmdResult};
use crate::dataset::{
    downsample_labels_stride4, list_image_ids, load_dataset_entry, Prediction, Requirements,
};
use crate::report::{format_aggregate_line, write_metrics_csv};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredRes {
    Full,
    Quarter,
}

pub struct EvalArgs<'a> {
    pub data: &'a Path,
    pub out: &'a Path,
    pub pred_res: Option<PredRes>,
    pub threads: Option<usize>,
}

/// Resolve one image to (pred labels, gt, human mask) at a common grid.
fn prepare(
    dir: &Path,
    image_id: &str,
    pred_res: Option<PredRes>,
) -> Result<(String, MetricReport), anyhow::Error> {
    let req = Requirements { pred: true, masks: true, ..Default::default() };
    let entry = load_dataset_entry(dir, image_id, req)?;

    if let Some(expected) = pred_res {
        let actual = if entry.pred_quarter { PredRes::Quarter } else { PredRes::Full };
        if expected != actual {
            return Err(anyhow!(
                "{image_id}: prediction resolution is {actual:?}, but --pred-res asked for {expected:?}"
            ));
        }
    }

    let pred: LabelMap = match entry.pred.expect("pred required") {
        Prediction::Probs(probs) => argmax_labels(&probs),
        Prediction::Labels(labels) => labels,
    };
    let masks = entry.masks.expect("masks required");

    let (gt, human): (LabelMap, ScalarField) = if entry.pred_quarter {
        let gt = downsample_labels_stride4(&entry.gt)
            .ok_or_else(|| anyhow!("{image_id}: gt grid is not divisible by 4"))?;
        let human = human_mask_quarter(&masks)?;
        (gt, human)
    } else {
        (entry.gt, human_mask_full(&masks))
    };

    let report = evaluate_image(&pred, &gt, &human)
        .with_context(|| format!("evaluating {image_id}"))?;
    Ok((image_id.to_string(), report))
}

pub fn run(args: &EvalArgs) -> CmdResult {
    let ids = list_image_ids(args.data)?;
    if ids.is_empty() {
        return Err(anyhow!("no `<id>.gt.htf` files in {}", args.data.display()).into());
    }
    let pool = thread_pool(args.threads)?;
    let rows: Vec<(String, MetricReport)> = pool
        .install(|| {
            ids.par_iter()
                .map(|id| prepare(args.data, id, args.pred_res))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(CmdError::Input)?;

    let reports: Vec<MetricReport> = rows.iter().map(|(_, r)| r.clone()).collect();
    let agg = aggregate(&reports)?;

    let file = File::create(args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    write_metrics_csv(BufWriter::new(file), &rows, &agg).context("writing metrics csv")?;
    println!("{}", format_aggregate_line(&agg));
    Ok(())
}
