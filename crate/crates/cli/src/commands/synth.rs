//! `hotkit synth`: write a deterministic synthetic dataset.

use std::path::Path;

use anyhow::Context;
use hotkit_core::grid::{SimilarityVector, CONTACT_CLASSES};
use hotkit_core::rng;
use hotkit_core::synth::{gen_scene, perturb_prediction_eps, SceneConfig};

use crate::dataset;
use crate::commands::CmdResult;

pub struct SynthArgs<'a> {
    pub out: &'a Path,
    pub count: usize,
    pub seed: u64,
    pub size: (usize, usize),
    pub noise: f64,
    pub blobs: usize,
    pub soften: f64,
}

/// Per-image scene parameters: persons and contact classes are drawn from
/// the image's sub-seed, everything else comes from the flags.
fn image_config(args: &SynthArgs, index: usize) -> SceneConfig {
    let image_seed = rng::sub_seed(args.seed, "image", index as u64);
    let mut pick = rng::stream(image_seed, "image-config");
    let persons = 1 + pick.next_range(0, 3) as usize;
    let n_classes = 2 + pick.next_range(0, 3) as usize;
    let mut classes = Vec::new();
    while classes.len() < n_classes {
        let c = pick.next_range(1, CONTACT_CLASSES as u64) as u8;
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    SceneConfig {
        height: args.size.0,
        width: args.size.1,
        persons,
        contact_classes: classes,
        noise_rate: args.noise,
        enclosed_blobs: args.blobs,
        seed: image_seed,
    }
}

/// Similarity matched to the scene: +1 for present classes, -1 otherwise.
fn matched_sim(indicator: &hotkit_core::ContactIndicator) -> SimilarityVector {
    let values: [f64; CONTACT_CLASSES] =
        core::array::from_fn(|k| if indicator.flags()[k] { 1.0 } else { -1.0 });
    SimilarityVector::new(values).expect("values are +-1")
}

pub fn run(args: &SynthArgs) -> CmdResult {
    if !(0.0..1.0).contains(&args.soften) {
        return Err(anyhow::anyhow!("--soften must lie in [0, 1)").into());
    }
    std::fs::create_dir_all(args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    for index in 0..args.count {
        let image_id = format!("img_{index:04}");
        let config = image_config(args, index);
        let scene = gen_scene(&config)
            .with_context(|| format!("generating {image_id}"))?;
        let probs = perturb_prediction_eps(&scene, &config, args.soften);
        let sim = matched_sim(&scene.indicator);
        dataset::write_gt(args.out, &image_id, &scene.gt)
            .with_context(|| format!("writing {image_id} gt"))?;
        dataset::write_pred_probs(args.out, &image_id, &probs)
            .with_context(|| format!("writing {image_id} pred"))?;
        dataset::write_depth(args.out, &image_id, &scene.depth)
            .with_context(|| format!("writing {image_id} depth"))?;
        dataset::write_masks(args.out, &image_id, &scene.persons)
            .with_context(|| format!("writing {image_id} masks"))?;
        dataset::write_sim(args.out, &image_id, &sim)
            .with_context(|| format!("writing {image_id} sim"))?;
    }
    println!("wrote {} entries to {}", args.count, args.out.display());
    Ok(())
}
