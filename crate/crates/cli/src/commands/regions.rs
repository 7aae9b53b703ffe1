//! `hotkit regions`: component labeling and enclosed-region masks on single
//! HTF files.

use std::path::Path;

use anyhow::{anyhow, Context};
use hotkit_core::grid::{LabelMap, ScalarField};
use hotkit_core::regions::{enclosed_mask, label_components};

use crate::commands::CmdResult;
use crate::tensorio::{read_htf, write_htf, HtfTensor, TensorData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionOp {
    Components,
    Enclosed,
}

pub struct RegionsArgs<'a> {
    pub input: &'a Path,
    pub output: &'a Path,
    pub op: RegionOp,
    pub class: Option<u8>,
}

fn read_rank2(path: &Path) -> Result<(usize, usize, Vec<u8>), anyhow::Error> {
    let tensor = read_htf(path).with_context(|| format!("reading {}", path.display()))?;
    let dims = tensor.dims().to_vec();
    if dims.len() != 2 {
        return Err(anyhow!("{}: expected a rank-2 u8 tensor, got dims {dims:?}", path.display()));
    }
    match tensor.into_data() {
        TensorData::U8(data) => Ok((dims[0] as usize, dims[1] as usize, data)),
        TensorData::F32(_) => Err(anyhow!("{}: expected u8 dtype", path.display())),
    }
}

pub fn run(args: &RegionsArgs) -> CmdResult {
    let (h, w, data) = read_rank2(args.input)?;
    match args.op {
        RegionOp::Components => {
            let field = ScalarField::new(h, w, data.iter().map(|&v| v as f64).collect())
                .map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
            let cmap = label_components(&field)
                .map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
            // Component labels exceed u8; store them as exact f32 integers.
            let tensor = HtfTensor::from_f32(
                vec![h as u32, w as u32],
                cmap.labels().iter().map(|&l| l as f32).collect(),
            )?;
            write_htf(&tensor, args.output)
                .with_context(|| format!("writing {}", args.output.display()))?;
            println!("{} components", cmap.count());
        }
        RegionOp::Enclosed => {
            let class = args
                .class
                .ok_or_else(|| anyhow!("--class is required for --op enclosed"))?;
            let labels = LabelMap::new(h, w, data)
                .map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
            let mask = enclosed_mask(&labels, class)
                .map_err(|e| anyhow!("{}: {e}", args.input.display()))?;
            let tensor = HtfTensor::from_u8(
                vec![h as u32, w as u32],
                mask.data().iter().map(|&v| v as u8).collect(),
            )?;
            write_htf(&tensor, args.output)
                .with_context(|| format!("writing {}", args.output.display()))?;
            println!("{} enclosed pixels", mask.sum() as u64);
        }
    }
    Ok(())
}
