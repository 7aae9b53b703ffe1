//! Wall-time measurement of the dense kernels on a synthetic scene. All
//! kernels run single-threaded; the harness reports per-operation medians
//! and p95s plus the combined labeling + enclosed-sweep + evaluation time
//! that the performance budget is stated against.

use std::time::Instant;

use anyhow::{ensure, Result};
use hotkit_core::hpp::{normalize_depth, person_mean_depth, soft_filter_mask};
use hotkit_core::loss::global_joint_loss_hard;
use hotkit_core::metrics::evaluate_image;
use hotkit_core::regions::label_components;
use hotkit_core::synth::{gen_scene, perturb_labels, SceneConfig};

#[derive(Debug, Clone)]
pub struct BenchStats {
    pub name: &'static str,
    pub median_ms: f64,
    pub p95_ms: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub height: usize,
    pub width: usize,
    pub iters: usize,
    pub stats: Vec<BenchStats>,
    /// Median of label_components + 18-class enclosed sweep +
    /// evaluate_image, measured back to back per iteration.
    pub combined_median_ms: f64,
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    samples[samples.len() / 2]
}

fn p95(sorted: &[f64]) -> f64 {
    let idx = ((sorted.len() as f64 * 0.95).ceil() as usize).clamp(1, sorted.len()) - 1;
    sorted[idx]
}

fn stats(name: &'static str, mut samples: Vec<f64>) -> BenchStats {
    let median_ms = median(&mut samples);
    BenchStats { name, median_ms, p95_ms: p95(&samples) }
}

pub fn run_bench(height: usize, width: usize, iters: usize) -> Result<BenchReport> {
    ensure!(iters >= 1, "iters must be at least 1");
    let config = SceneConfig {
        height,
        width,
        persons: 4,
        contact_classes: (1..=17).collect(),
        noise_rate: 0.05,
        enclosed_blobs: 8,
        seed: 2024,
    };
    let scene = gen_scene(&config)?;
    let pred = perturb_labels(&scene, &config);
    let human = scene.persons.union_mask();
    let depth = normalize_depth(&scene.depth);
    let summary = person_mean_depth(&depth, &scene.persons)?;

    let mut t_label = Vec::with_capacity(iters);
    let mut t_sweep = Vec::with_capacity(iters);
    let mut t_eval = Vec::with_capacity(iters);
    let mut t_soft = Vec::with_capacity(iters);
    let mut t_combined = Vec::with_capacity(iters);

    for _ in 0..iters {
        let start = Instant::now();
        let cmap = label_components(&human)?;
        let label_ms = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(cmap.count());

        let start = Instant::now();
        let losses = global_joint_loss_hard(&pred);
        let sweep_ms = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(losses.total);

        let start = Instant::now();
        let report = evaluate_image(&pred, &scene.gt, &human)?;
        let eval_ms = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(report.sc_acc);

        let start = Instant::now();
        let fm = soft_filter_mask(&depth, &summary, 0.1)?;
        let soft_ms = start.elapsed().as_secs_f64() * 1e3;
        std::hint::black_box(fm.data()[0]);

        t_label.push(label_ms);
        t_sweep.push(sweep_ms);
        t_eval.push(eval_ms);
        t_soft.push(soft_ms);
        t_combined.push(label_ms + sweep_ms + eval_ms);
    }

    let combined_median_ms = median(&mut t_combined);
    Ok(BenchReport {
        height,
        width,
        iters,
        stats: vec![
            stats("label_components", t_label),
            stats("enclosed_sweep_18", t_sweep),
            stats("evaluate_image", t_eval),
            stats("soft_filter_mask", t_soft),
        ],
        combined_median_ms,
    })
}

pub fn print_report(report: &BenchReport) {
    println!(
        "bench  size={}x{}  iters={}  (single-threaded)",
        report.height, report.width, report.iters
    );
    for s in &report.stats {
        println!("{:<20} median {:>10.3} ms   p95 {:>10.3} ms", s.name, s.median_ms, s.p95_ms);
    }
    println!(
        "{:<20} median {:>10.3} ms",
        "combined(label+sweep+eval)", report.combined_median_ms
    );
}
