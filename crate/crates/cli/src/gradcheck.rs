//! Finite-difference verification of every analytic gradient against the
//! same functions evaluated at perturbed inputs, over randomized synthetic
//! scenes.

use anyhow::{ensure, Result};
use hotkit_core::grid::{
    argmax_labels, ProbMap, SimilarityVector, CONTACT_CLASSES, NUM_CLASSES, SIMPLEX_TOL,
};
use hotkit_core::hpp::{normalize_depth, person_mean_depth, soft_filter_mask, soft_mask_tau_grad};
use hotkit_core::loss::{
    contact_indicator_from_gt, cross_entropy, global_joint_loss_soft_frozen,
    local_joint_loss_soft,
};
use hotkit_core::rng::{self, SplitMix64};
use hotkit_core::synth::{gen_scene, perturb_prediction, SceneConfig};

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub max_rel_err: f64,
    pub worst_seed: u64,
}

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub eps: f64,
    pub tol: f64,
    pub trials: usize,
    pub checks: Vec<CheckOutcome>,
}

impl GradcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.max_rel_err <= self.tol)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom < 1e-12 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

struct Tracker {
    name: &'static str,
    max_rel_err: f64,
    worst_seed: u64,
}

impl Tracker {
    fn new(name: &'static str) -> Self {
        Self { name, max_rel_err: 0.0, worst_seed: 0 }
    }

    fn observe(&mut self, err: f64, seed: u64) {
        if err > self.max_rel_err {
            self.max_rel_err = err;
            self.worst_seed = seed;
        }
    }

    fn done(self) -> CheckOutcome {
        CheckOutcome { name: self.name, max_rel_err: self.max_rel_err, worst_seed: self.worst_seed }
    }
}

fn trial_config(scene_seed: u64) -> SceneConfig {
    let mut pick = rng::stream(scene_seed, "gradcheck-config");
    let persons = 1 + pick.next_range(0, 2) as usize;
    let n_classes = 2 + pick.next_range(0, 2) as usize;
    let mut classes = Vec::new();
    while classes.len() < n_classes {
        let c = pick.next_range(1, 17) as u8;
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    SceneConfig {
        height: 32,
        width: 32,
        persons,
        contact_classes: classes,
        noise_rate: 0.1,
        enclosed_blobs: 1,
        seed: scene_seed,
    }
}

fn sample_coord(gen: &mut SplitMix64, probs: &ProbMap) -> (usize, usize, usize) {
    let p = gen.next_range(0, probs.pixel_count() as u64 - 1) as usize;
    let c = gen.next_range(0, NUM_CLASSES as u64 - 1) as usize;
    (c, p / probs.width(), p % probs.width())
}

/// Run all five gradient checks over `trials` seeded scenes.
pub fn run_gradcheck(seed: u64, trials: usize, eps: f64, tol: f64) -> Result<GradcheckReport> {
    ensure!(trials >= 1, "trials must be at least 1");
    ensure!(eps > 0.0 && eps.is_finite(), "eps must be positive");
    ensure!(tol > 0.0 && tol.is_finite(), "tol must be positive");

    let mut tau_check = Tracker::new("tau_grad");
    let mut local_check = Tracker::new("local_soft");
    let mut global_check = Tracker::new("global_soft");
    let mut ce_check = Tracker::new("cross_entropy");
    let mut be_check = Tracker::new("prompt_be");

    const COORD_SAMPLES: usize = 8;
    let tau = 0.1;

    for trial in 0..trials {
        let scene_seed = rng::sub_seed(seed, "gradcheck-scene", trial as u64);
        let config = trial_config(scene_seed);
        let scene = gen_scene(&config)?;
        let mut coords = rng::stream(scene_seed, "gradcheck-coords");

        // Depth-band gradient with respect to tau: sum over pixels whose
        // active set cannot flip under a +-eps probe.
        let depth = normalize_depth(&scene.depth);
        let summary = person_mean_depth(&depth, &scene.persons)?;
        let keep: Vec<bool> = depth
            .data()
            .iter()
            .map(|&d| {
                summary
                    .means()
                    .iter()
                    .all(|&m| (d - (m - tau)).abs() > eps && (d - (m + tau)).abs() > eps)
            })
            .collect();
        let masked_sum = |t: f64| -> Result<f64> {
            Ok(soft_filter_mask(&depth, &summary, t)?
                .data()
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(v, _)| v)
                .sum())
        };
        // Fall back to a forward difference when the step would push tau
        // out of its positive domain; the truncation error then shows up
        // in the check instead of crashing it.
        let fd = if tau - eps > 1e-12 {
            (masked_sum(tau + eps)? - masked_sum(tau - eps)?) / (2.0 * eps)
        } else {
            (masked_sum(tau + eps)? - masked_sum(tau)?) / eps
        };
        let analytic: f64 = soft_mask_tau_grad(&depth, &summary, tau)?
            .data()
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v)
            .sum();
        tau_check.observe(rel_err(fd, analytic), scene_seed);

        // Loss gradients on the corrupted prediction.
        let probs = perturb_prediction(&scene, &config);
        let pred = argmax_labels(&probs);

        let (_, ce_grad) = cross_entropy(&probs, &scene.gt)?;
        let (_, local_grad) = local_joint_loss_soft(&probs, &scene.gt)?;
        let (_, global_grad) = global_joint_loss_soft_frozen(&pred, &probs)?;

        for _ in 0..COORD_SAMPLES {
            let (c, y, x) = sample_coord(&mut coords, &probs);
            // A probability probe can be at most the simplex tolerance and
            // must stay inside [0, 1]; at the default eps neither cap
            // triggers because the softened one-hot keeps every channel
            // well inside the interval.
            let v = probs.value(c, y, x);
            let step = eps.min(SIMPLEX_TOL).min((1.0 - v) * 0.5).min(v * 0.5);
            if step < 1e-12 {
                continue;
            }
            let eps = step;
            let plus = probs.perturbed(c, y, x, eps)?;
            let minus = probs.perturbed(c, y, x, -eps)?;

            let fd = (cross_entropy(&plus, &scene.gt)?.0 - cross_entropy(&minus, &scene.gt)?.0)
                / (2.0 * eps);
            ce_check.observe(rel_err(fd, ce_grad.value(c, y, x)), scene_seed);

            let fd = (local_joint_loss_soft(&plus, &scene.gt)?.0.total
                - local_joint_loss_soft(&minus, &scene.gt)?.0.total)
                / (2.0 * eps);
            local_check.observe(rel_err(fd, local_grad.value(c, y, x)), scene_seed);

            let fd = (global_joint_loss_soft_frozen(&pred, &plus)?.0.total
                - global_joint_loss_soft_frozen(&pred, &minus)?.0.total)
                / (2.0 * eps);
            global_check.observe(rel_err(fd, global_grad.value(c, y, x)), scene_seed);
        }

        // Prompt binary loss over a random similarity vector, kept away
        // from the clamp saturation at +-1.
        let mut sim_gen = rng::stream(scene_seed, "gradcheck-sim");
        let values: [f64; CONTACT_CLASSES] =
            core::array::from_fn(|_| -0.9 + 1.8 * sim_gen.next_f64());
        let s = SimilarityVector::new(values)?;
        let indicator = contact_indicator_from_gt(&scene.gt);
        let (_, be_grad) = hotkit_core::loss::prompt_be_loss(&s, &indicator);
        for k in 0..CONTACT_CLASSES {
            let mut plus_v = values;
            plus_v[k] = (values[k] + eps).min(1.0);
            let mut minus_v = values;
            minus_v[k] = (values[k] - eps).max(-1.0);
            let span = plus_v[k] - minus_v[k];
            if span < 1e-12 {
                continue;
            }
            let plus = hotkit_core::loss::prompt_be_loss(&SimilarityVector::new(plus_v)?, &indicator).0;
            let minus =
                hotkit_core::loss::prompt_be_loss(&SimilarityVector::new(minus_v)?, &indicator).0;
            let fd = (plus - minus) / span;
            be_check.observe(rel_err(fd, be_grad[k]), scene_seed);
        }
    }

    Ok(GradcheckReport {
        eps,
        tol,
        trials,
        checks: vec![
            tau_check.done(),
            local_check.done(),
            global_check.done(),
            ce_check.done(),
            be_check.done(),
        ],
    })
}

pub fn print_report(report: &GradcheckReport) {
    println!(
        "gradcheck  trials={}  eps={:.1e}  tol={:.1e}",
        report.trials, report.eps, report.tol
    );
    for check in &report.checks {
        let verdict = if check.max_rel_err <= report.tol { "PASS" } else { "FAIL" };
        println!(
            "{:<14} max_rel_err={:.3e}  worst_seed={}  {}",
            check.name, check.max_rel_err, check.worst_seed, verdict
        );
    }
}
