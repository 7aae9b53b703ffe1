//! Cross-module invariants: partition identities, hard/soft agreement,
//! finite-difference gradient verification, and determinism properties.

use hotkit_core::grid::{
    argmax_labels, binarize_class, binarize_nonzero, LabelMap, ProbMap, ScalarField,
    SimilarityVector, CONTACT_CLASSES, NUM_CLASSES,
};
use hotkit_core::hpp::{
    downsample_add, hard_filter_mask, normalize_depth, person_mean_depth, soft_filter_mask,
    soft_mask_tau_grad,
};
use hotkit_core::loss::{
    contact_indicator_from_gt, cross_entropy, global_joint_loss_hard, global_joint_loss_soft,
    global_joint_loss_soft_frozen, local_joint_loss_hard, local_joint_loss_soft, prompt_be_loss,
};
use hotkit_core::metrics::{aggregate, c_acc, evaluate_image, sc_acc};
use hotkit_core::regions::{boundary_labels, enclosed_foreign_mask, enclosed_mask, label_components, negate};
use hotkit_core::rng::{self, SplitMix64};
use hotkit_core::synth::{gen_scene, perturb_prediction, perturb_prediction_eps, SceneConfig};
use hotkit_core::FieldStack;
use proptest::prelude::*;

fn scene_config(seed: u64) -> SceneConfig {
    let mut pick = rng::stream(seed, "test-config");
    let persons = 1 + (pick.next_range(0, 2) as usize);
    let n_classes = 2 + pick.next_range(0, 3) as usize;
    let mut classes = Vec::new();
    while classes.len() < n_classes {
        let c = pick.next_range(1, 17) as u8;
        if !classes.contains(&c) {
            classes.push(c);
        }
    }
    SceneConfig {
        height: 48,
        width: 64,
        persons,
        contact_classes: classes,
        noise_rate: 0.1,
        enclosed_blobs: 1,
        seed,
    }
}

fn random_label_map(gen: &mut SplitMix64, h: usize, w: usize, values: u8) -> LabelMap {
    let data: Vec<u8> = (0..h * w).map(|_| gen.next_range(0, values as u64 - 1) as u8).collect();
    LabelMap::new(h, w, data).unwrap()
}

/// Noisy simplex map around the one-hot encoding of `labels`: every channel
/// strictly inside (0, 1), so finite differences stay off the kinks.
fn noisy_probs(gen: &mut SplitMix64, labels: &LabelMap) -> ProbMap {
    let plane = labels.pixel_count();
    let mut data = vec![0.0; NUM_CLASSES * plane];
    for p in 0..plane {
        let mut sum = 0.0;
        for c in 0..NUM_CLASSES {
            let base = if labels.data()[p] as usize == c { 1.0 } else { 0.0 };
            let v = base + 0.05 + 0.3 * gen.next_f64();
            data[c * plane + p] = v;
            sum += v;
        }
        for c in 0..NUM_CLASSES {
            data[c * plane + p] /= sum;
        }
    }
    let probs = ProbMap::new(labels.height(), labels.width(), data).unwrap();
    assert!(probs.is_normalized());
    probs
}

const FD_EPS: f64 = 1e-5;
const FD_TOL: f64 = 1e-4;

fn rel_err(a: f64, b: f64) -> f64 {
    let denom = a.abs().max(b.abs());
    if denom < 1e-12 {
        0.0
    } else {
        (a - b).abs() / denom
    }
}

#[test]
fn class_indicators_partition_the_grid() {
    let mut gen = rng::stream(3, "partition");
    for _ in 0..20 {
        let labels = random_label_map(&mut gen, 9, 13, 18);
        let mut sum = vec![0.0; labels.pixel_count()];
        for c in 1..NUM_CLASSES as u8 {
            for (acc, v) in sum.iter_mut().zip(binarize_class(&labels, c).unwrap().data()) {
                *acc += v;
            }
        }
        let background = negate(&binarize_nonzero(&labels)).unwrap();
        for (acc, v) in sum.iter_mut().zip(background.data()) {
            *acc += v;
        }
        assert!(sum.iter().all(|&v| v == 1.0));
    }
}

#[test]
fn argmax_is_idempotent_through_one_hot() {
    let mut gen = rng::stream(4, "argmax");
    for _ in 0..20 {
        let labels = random_label_map(&mut gen, 7, 11, 18);
        let probs = noisy_probs(&mut gen, &labels);
        let first = argmax_labels(&probs);
        let second = argmax_labels(&ProbMap::one_hot(&first));
        assert_eq!(first, second);
    }
}

#[test]
fn nonzero_binarization_tracks_argmax_background() {
    let mut gen = rng::stream(5, "nonzero");
    for _ in 0..20 {
        let labels = random_label_map(&mut gen, 6, 6, 18);
        let probs = noisy_probs(&mut gen, &labels);
        let pred = argmax_labels(&probs);
        let contact = binarize_nonzero(&pred);
        for (p, &v) in contact.data().iter().enumerate() {
            let is_bg = pred.data()[p] == 0;
            assert_eq!(v == 0.0, is_bg);
        }
    }
}

#[test]
fn boundary_component_never_enclosed() {
    let mut gen = rng::stream(6, "monotone-safety");
    for _ in 0..50 {
        let labels = random_label_map(&mut gen, 10, 10, 4);
        for c in 1..4u8 {
            let complement = negate(&binarize_class(&labels, c).unwrap()).unwrap();
            let cmap = label_components(&complement).unwrap();
            let boundary = boundary_labels(&cmap);
            let enclosed = enclosed_mask(&labels, c).unwrap();
            for (p, &v) in enclosed.data().iter().enumerate() {
                if v == 1.0 {
                    assert!(!boundary.contains(cmap.labels()[p]));
                }
            }
            // Foreign mask is pointwise <= enclosed mask.
            let foreign = enclosed_foreign_mask(&labels, c).unwrap();
            for (e, f) in enclosed.data().iter().zip(foreign.data()) {
                assert!(f <= e);
            }
        }
    }
}

/// The internal sweep behind the global loss must agree with the literal
/// public composition for every contact class.
#[test]
fn global_loss_matches_public_enclosed_ops() {
    let mut gen = rng::stream(7, "sweep-oracle");
    for _ in 0..40 {
        let labels = random_label_map(&mut gen, 12, 12, 5);
        let losses = global_joint_loss_hard(&labels);
        for c in 1..5u8 {
            let count = enclosed_foreign_mask(&labels, c).unwrap().sum();
            assert_eq!(losses.per_class[c as usize], count, "class {c}");
        }
    }
}

#[test]
fn hard_soft_filter_support_identity() {
    for seed in 0..30u64 {
        let config = scene_config(seed);
        let scene = gen_scene(&config).unwrap();
        let depth = normalize_depth(&scene.depth);
        let summary = person_mean_depth(&depth, &scene.persons).unwrap();
        let tau = 0.1;
        let hard = hard_filter_mask(&depth, &summary, tau).unwrap();
        let soft = soft_filter_mask(&depth, &summary, tau).unwrap();
        for p in 0..hard.data().len() {
            let d = depth.data()[p];
            let on_edge = summary
                .means()
                .iter()
                .any(|&m| d == m - tau || d == m + tau);
            if on_edge {
                continue;
            }
            assert_eq!(hard.data()[p] == 1.0, soft.data()[p] > 0.0, "seed {seed} pixel {p}");
        }
    }
}

#[test]
fn tau_gradient_matches_finite_differences() {
    for seed in 0..20u64 {
        let config = scene_config(seed);
        let scene = gen_scene(&config).unwrap();
        let depth = normalize_depth(&scene.depth);
        let summary = person_mean_depth(&depth, &scene.persons).unwrap();
        let tau = 0.1;

        // Pixels within eps of a band edge change their active set under
        // the probe and are excluded.
        let keep: Vec<bool> = depth
            .data()
            .iter()
            .map(|&d| {
                summary
                    .means()
                    .iter()
                    .all(|&m| (d - (m - tau)).abs() > FD_EPS && (d - (m + tau)).abs() > FD_EPS)
            })
            .collect();

        let masked_sum = |tau: f64| -> f64 {
            soft_filter_mask(&depth, &summary, tau)
                .unwrap()
                .data()
                .iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(v, _)| v)
                .sum()
        };
        let fd = (masked_sum(tau + FD_EPS) - masked_sum(tau - FD_EPS)) / (2.0 * FD_EPS);
        let analytic: f64 = soft_mask_tau_grad(&depth, &summary, tau)
            .unwrap()
            .data()
            .iter()
            .zip(&keep)
            .filter(|(_, &k)| k)
            .map(|(v, _)| v)
            .sum();
        assert!(
            rel_err(fd, analytic) < FD_TOL,
            "seed {seed}: fd {fd} vs analytic {analytic}"
        );
    }
}

#[test]
fn normalize_depth_hits_unit_range() {
    for seed in 0..10u64 {
        let scene = gen_scene(&scene_config(seed)).unwrap();
        let depth = normalize_depth(&scene.depth);
        let min = depth.data().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = depth.data().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(min, 0.0);
        assert_eq!(max, 1.0);
    }
}

#[test]
fn person_means_ignore_other_mask_ordering() {
    let scene = gen_scene(&scene_config(13)).unwrap();
    let depth = normalize_depth(&scene.depth);
    let summary = person_mean_depth(&depth, &scene.persons).unwrap();
    // Rebuild the set with persons reversed; each person's mean must be
    // unchanged under reordering of the others.
    let (h, w) = (scene.persons.height(), scene.persons.width());
    let mut reversed = Vec::new();
    for i in (0..scene.persons.count()).rev() {
        reversed.extend_from_slice(scene.persons.mask(i));
    }
    let swapped = hotkit_core::PersonMaskSet::new(h, w, reversed).unwrap();
    let summary_swapped = person_mean_depth(&depth, &swapped).unwrap();
    let mut expect: Vec<f64> = summary.means().to_vec();
    expect.reverse();
    assert_eq!(summary_swapped.means(), expect.as_slice());
}

#[test]
fn downsample_add_is_linear_in_the_mask() {
    let mut gen = rng::stream(8, "pool-linearity");
    let h = 16;
    let w = 16;
    let fm1 = ScalarField::new(h, w, (0..h * w).map(|_| gen.next_f64()).collect()).unwrap();
    let fm2 = ScalarField::new(h, w, (0..h * w).map(|_| gen.next_f64()).collect()).unwrap();
    let feature =
        FieldStack::new(2, 4, 4, (0..32).map(|_| gen.next_f64()).collect()).unwrap();
    let (a, b) = (0.7, -1.3);
    let combo = ScalarField::new(
        h,
        w,
        fm1.data().iter().zip(fm2.data()).map(|(x, y)| a * x + b * y).collect(),
    )
    .unwrap();

    let lhs = downsample_add(&combo, &feature).unwrap();
    let d1 = downsample_add(&fm1, &feature).unwrap();
    let d2 = downsample_add(&fm2, &feature).unwrap();
    for i in 0..lhs.data().len() {
        let expect = a * (d1.data()[i] - feature.data()[i])
            + b * (d2.data()[i] - feature.data()[i])
            + feature.data()[i];
        assert!((lhs.data()[i] - expect).abs() < 1e-12);
    }
}

#[test]
fn soft_losses_reduce_to_hard_on_one_hot() {
    let mut gen = rng::stream(9, "relaxation");
    for _ in 0..50 {
        let gt = random_label_map(&mut gen, 12, 12, 18);
        let pred = random_label_map(&mut gen, 12, 12, 18);
        let one_hot = ProbMap::one_hot(&pred);

        let (soft_local, _) = local_joint_loss_soft(&one_hot, &gt).unwrap();
        let hard_local = local_joint_loss_hard(&pred, &gt).unwrap();
        assert!((soft_local.total - hard_local.total).abs() < 1e-9);

        let (soft_global, _) = global_joint_loss_soft(&one_hot).unwrap();
        let hard_global = global_joint_loss_hard(&pred);
        assert!((soft_global.total - hard_global.total).abs() < 1e-9);
    }
}

#[test]
fn loss_gradients_match_finite_differences() {
    let mut gen = rng::stream(10, "loss-fd");
    for round in 0..8 {
        let gt = random_label_map(&mut gen, 8, 8, 6);
        let probs = noisy_probs(&mut gen, &gt);
        let plane = probs.pixel_count();

        // Cross-entropy.
        let (_, ce_grad) = cross_entropy(&probs, &gt).unwrap();
        for _ in 0..6 {
            let p = gen.next_range(0, plane as u64 - 1) as usize;
            let c = gen.next_range(0, NUM_CLASSES as u64 - 1) as usize;
            let (y, x) = (p / probs.width(), p % probs.width());
            let plus = cross_entropy(&probs.perturbed(c, y, x, FD_EPS).unwrap(), &gt).unwrap().0;
            let minus = cross_entropy(&probs.perturbed(c, y, x, -FD_EPS).unwrap(), &gt).unwrap().0;
            let fd = (plus - minus) / (2.0 * FD_EPS);
            assert!(
                rel_err(fd, ce_grad.value(c, y, x)) < FD_TOL,
                "round {round}: ce fd {fd} vs {}",
                ce_grad.value(c, y, x)
            );
        }

        // Local joint loss.
        let (_, local_grad) = local_joint_loss_soft(&probs, &gt).unwrap();
        for _ in 0..6 {
            let p = gen.next_range(0, plane as u64 - 1) as usize;
            let c = gen.next_range(0, NUM_CLASSES as u64 - 1) as usize;
            let (y, x) = (p / probs.width(), p % probs.width());
            let plus =
                local_joint_loss_soft(&probs.perturbed(c, y, x, FD_EPS).unwrap(), &gt).unwrap().0;
            let minus =
                local_joint_loss_soft(&probs.perturbed(c, y, x, -FD_EPS).unwrap(), &gt).unwrap().0;
            let fd = (plus.total - minus.total) / (2.0 * FD_EPS);
            assert!(rel_err(fd, local_grad.value(c, y, x)) < FD_TOL, "round {round} local");
        }

        // Global joint loss with frozen regions.
        let pred = argmax_labels(&probs);
        let (_, global_grad) = global_joint_loss_soft_frozen(&pred, &probs).unwrap();
        for _ in 0..6 {
            let p = gen.next_range(0, plane as u64 - 1) as usize;
            let c = gen.next_range(0, NUM_CLASSES as u64 - 1) as usize;
            let (y, x) = (p / probs.width(), p % probs.width());
            let plus =
                global_joint_loss_soft_frozen(&pred, &probs.perturbed(c, y, x, FD_EPS).unwrap())
                    .unwrap()
                    .0;
            let minus =
                global_joint_loss_soft_frozen(&pred, &probs.perturbed(c, y, x, -FD_EPS).unwrap())
                    .unwrap()
                    .0;
            let fd = (plus.total - minus.total) / (2.0 * FD_EPS);
            assert!(rel_err(fd, global_grad.value(c, y, x)) < FD_TOL, "round {round} global");
        }

        // Prompt binary loss.
        let values: [f64; CONTACT_CLASSES] =
            core::array::from_fn(|_| -0.9 + 1.8 * gen.next_f64());
        let s = SimilarityVector::new(values).unwrap();
        let indicator = contact_indicator_from_gt(&gt);
        let (_, be_grad) = prompt_be_loss(&s, &indicator);
        for k in 0..CONTACT_CLASSES {
            let mut plus_v = values;
            plus_v[k] += FD_EPS;
            let mut minus_v = values;
            minus_v[k] -= FD_EPS;
            let plus = prompt_be_loss(&SimilarityVector::new(plus_v).unwrap(), &indicator).0;
            let minus = prompt_be_loss(&SimilarityVector::new(minus_v).unwrap(), &indicator).0;
            let fd = (plus - minus) / (2.0 * FD_EPS);
            assert!(rel_err(fd, be_grad[k]) < FD_TOL, "round {round} be[{k}]");
        }
    }
}

/// The fused evaluation pass must reproduce the standalone metric ops
/// exactly.
#[test]
fn evaluate_image_matches_standalone_ops() {
    use hotkit_core::metrics::{ad_acc, iou_per_class, miou, wiou};
    for seed in 200..230u64 {
        let config = scene_config(seed);
        let scene = gen_scene(&config).unwrap();
        let probs = perturb_prediction(&scene, &config);
        let pred = argmax_labels(&probs);
        let human = scene.persons.union_mask();
        let report = evaluate_image(&pred, &scene.gt, &human).unwrap();
        assert_eq!(report.sc_acc, sc_acc(&pred, &scene.gt).unwrap());
        assert_eq!(report.c_acc, c_acc(&pred, &scene.gt).unwrap());
        assert_eq!(report.miou, miou(&pred, &scene.gt).unwrap());
        assert_eq!(report.wiou, wiou(&pred, &scene.gt).unwrap());
        assert_eq!(report.ad_acc, ad_acc(&pred, &scene.gt, &human).unwrap());
        assert_eq!(report.per_class_iou, iou_per_class(&pred, &scene.gt).unwrap());
    }
}

#[test]
fn loss_terms_non_negative_and_monotone_in_weights() {
    use hotkit_core::loss::total_loss;
    use hotkit_core::LossWeights;
    let mut gen = rng::stream(77, "weights");
    for seed in 0..10u64 {
        let config = scene_config(seed);
        let scene = gen_scene(&config).unwrap();
        let probs = perturb_prediction(&scene, &config);
        let values: [f64; CONTACT_CLASSES] =
            core::array::from_fn(|_| -0.8 + 1.6 * gen.next_f64());
        let s = SimilarityVector::new(values).unwrap();

        let base = LossWeights::default();
        let b = total_loss(&probs, &scene.gt, &s, &base).unwrap();
        assert!(b.ce >= 0.0 && b.local_jl >= 0.0 && b.global_jl >= 0.0 && b.prompt_be >= 0.0);

        // Raising any single weight never lowers the total.
        for bumped in [
            LossWeights::new(base.alpha + 0.5, base.beta, base.gamma, base.tau).unwrap(),
            LossWeights::new(base.alpha, base.beta + 0.5, base.gamma, base.tau).unwrap(),
            LossWeights::new(base.alpha, base.beta, base.gamma + 0.5, base.tau).unwrap(),
        ] {
            let t = total_loss(&probs, &scene.gt, &s, &bumped).unwrap();
            assert!(t.total >= b.total - 1e-12, "seed {seed}");
        }
    }
}

#[test]
fn metric_bounds_and_ordering_on_random_scenes() {
    for seed in 40..70u64 {
        let config = scene_config(seed);
        let scene = gen_scene(&config).unwrap();
        let probs = perturb_prediction(&scene, &config);
        let pred = argmax_labels(&probs);
        let human = scene.persons.union_mask();
        let report = evaluate_image(&pred, &scene.gt, &human).unwrap();
        assert!((0.0..=100.0).contains(&report.sc_acc));
        assert!((0.0..=100.0).contains(&report.c_acc));
        assert!((0.0..=100.0).contains(&report.miou));
        assert!((0.0..=100.0).contains(&report.wiou));
        assert!((-100.0..=100.0).contains(&report.ad_acc));
        assert!(
            sc_acc(&pred, &scene.gt).unwrap() <= c_acc(&pred, &scene.gt).unwrap() + 1e-12
        );
    }
}

#[test]
fn one_hot_prediction_zeroes_losses_and_saturates_metrics() {
    let mut config = scene_config(99);
    config.noise_rate = 0.0;
    config.enclosed_blobs = 0;
    let scene = gen_scene(&config).unwrap();
    let probs = perturb_prediction_eps(&scene, &config, 0.0);
    assert_eq!(probs, ProbMap::one_hot(&scene.gt));

    let (ce, _) = cross_entropy(&probs, &scene.gt).unwrap();
    assert_eq!(ce, 0.0);
    let (local, _) = local_joint_loss_soft(&probs, &scene.gt).unwrap();
    assert_eq!(local.total, 0.0);
    // The global term is the structural count of regions enclosed in the
    // ground truth itself (the background class encloses every interior
    // contact island), so it matches the hard form instead of vanishing.
    let (global, _) = global_joint_loss_soft(&probs).unwrap();
    assert_eq!(global.total, global_joint_loss_hard(&scene.gt).total);

    let human = scene.persons.union_mask();
    let report = evaluate_image(&argmax_labels(&probs), &scene.gt, &human).unwrap();
    assert_eq!(report.sc_acc, 100.0);
    assert_eq!(report.c_acc, 100.0);
    assert_eq!(report.miou, 100.0);
    assert_eq!(report.wiou, 100.0);
    assert!(report.ad_acc > 99.999);
}

proptest! {
    #[test]
    fn aggregate_is_permutation_invariant(seeds in proptest::collection::vec(0u64..1000, 2..6)) {
        let reports: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let config = scene_config(seed);
                let scene = gen_scene(&config).unwrap();
                let probs = perturb_prediction(&scene, &config);
                let human = scene.persons.union_mask();
                evaluate_image(&argmax_labels(&probs), &scene.gt, &human).unwrap()
            })
            .collect();
        let forward = aggregate(&reports).unwrap();
        let mut target = reports.clone();
        target.reverse();
        let backward = aggregate(&target).unwrap();
        prop_assert!((forward.sc_acc - backward.sc_acc).abs() < 1e-9);
        prop_assert!((forward.ad_acc - backward.ad_acc).abs() < 1e-9);
        for k in 0..CONTACT_CLASSES {
            match (forward.per_class_iou[k], backward.per_class_iou[k]) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                (None, None) => {}
                _ => prop_assert!(false, "per-class IoU presence differs"),
            }
        }
    }
}
