//! Property tests over randomly drawn small instances.

use msan::autodiff::masked_softmax_raw;
use msan::model::{
    adjacent_pairs, objective_eq1, CoherenceAnnotation, CoherenceClass, DurationWindow, ImportanceLabel, Instance,
    PplMap, Segment, Selection,
};
use msan::policy::{rollout, PolicyConfig, PolicyParams, RolloutOptions};
use msan::scoring::{coherence_reward, composite_reward, exp_neg_ppl, imp_at_t, impcoh_at_t, RewardConfig};
use msan::solvers::{solve, Method, ObjectiveMode, SolverConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
struct Spec {
    durations: Vec<f64>,
    levels: Vec<Vec<u8>>,
    ppl: Vec<f64>,
    classes: Vec<u8>,
}

fn spec(max_m: usize) -> impl Strategy<Value = Spec> {
    (1..=max_m).prop_flat_map(|m| {
        let pairs = m * (m - 1) / 2;
        (
            prop::collection::vec(50u32..400, m).prop_map(|v| v.into_iter().map(|d| d as f64 / 100.0).collect()),
            prop::collection::vec(prop::collection::vec(1u8..=4, 0..3), m),
            prop::collection::vec(0.0f64..4.0, pairs),
            prop::collection::vec(0u8..4, pairs),
        )
            .prop_map(|(durations, levels, ppl, classes)| Spec {
                durations,
                levels,
                ppl,
                classes,
            })
    })
}

fn build(s: &Spec, force_end: bool) -> Instance {
    let m = s.durations.len();
    let segments = (0..m)
        .map(|i| Segment {
            index: i,
            duration_s: s.durations[i],
            features: vec![i as f64 / m as f64, s.durations[i] / 4.0, 1.0],
            labels: s.levels[i].iter().map(|&l| ImportanceLabel::new(l).unwrap()).collect(),
            text: None,
        })
        .collect();
    let mut ppl = PplMap::new();
    let mut ann = CoherenceAnnotation::new();
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            ppl.insert(i, j, s.ppl[k]).unwrap();
            let class = match s.classes[k] {
                0 => Some(CoherenceClass::Coherent),
                1 => Some(CoherenceClass::Uncertain),
                2 => Some(CoherenceClass::Incoherent),
                _ => None,
            };
            if let Some(c) = class {
                ann.insert(i, j, c).unwrap();
            }
            k += 1;
        }
    }
    Instance::new("prop", segments, ppl, Some(ann), force_end).unwrap()
}

fn subset(m: usize, mask: u32) -> Vec<usize> {
    (0..m).filter(|i| mask >> i & 1 == 1).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn objective_depends_only_on_the_set(s in spec(8), mask in any::<u32>(), rot in 0usize..8) {
        let inst = build(&s, false);
        let mut idx = subset(inst.len(), mask);
        prop_assume!(!idx.is_empty());
        let window = DurationWindow::new(idx.iter().map(|&i| inst.duration(i)).sum::<f64>())?;
        let cfg = RewardConfig::default();
        let a = Selection::new(&inst, idx.clone(), "t")?;
        let len = idx.len();
        idx.rotate_left(rot % len);
        idx.reverse();
        let b = Selection::new(&inst, idx, "t")?;
        prop_assert_eq!(&a.temporal, &b.temporal);
        prop_assert_eq!(a.total_duration_s, b.total_duration_s);
        let coh = |i, j| exp_neg_ppl(&inst, i, j);
        let va = objective_eq1(&inst, &a, &window, &cfg, coh)?;
        let vb = objective_eq1(&inst, &b, &window, &cfg, coh)?;
        prop_assert!(va.is_some());
        prop_assert_eq!(va, vb);
        prop_assert_eq!(adjacent_pairs(&a).len(), a.len().saturating_sub(1));
    }

    #[test]
    fn composite_reward_is_affine_in_beta(s in spec(7), mask in 1u32..128) {
        let inst = build(&s, false);
        let idx = subset(inst.len(), mask);
        prop_assume!(!idx.is_empty());
        let sel = Selection::new(&inst, idx, "t")?;
        let at = |b: f64| composite_reward(&inst, &sel, &RewardConfig::with_beta(b).unwrap()).unwrap();
        let cfg = RewardConfig::default();
        let imp = msan::scoring::importance_reward(&inst, &sel, &cfg);
        let coh = coherence_reward(&inst, &sel, &cfg)?;
        prop_assert!((at(0.0) - coh).abs() < 1e-15);
        prop_assert!((at(1.0) - imp).abs() < 1e-15);
        prop_assert!((at(0.3) - (0.3 * imp + 0.7 * coh)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&imp));
    }

    #[test]
    fn coherence_decreases_in_each_touched_ppl(s in spec(7), mask in 1u32..128, bump in 0.01f64..2.0) {
        let inst = build(&s, false);
        let idx = subset(inst.len(), mask);
        prop_assume!(idx.len() >= 2);
        let sel = Selection::new(&inst, idx, "t")?;
        let cfg = RewardConfig::default();
        let base = coherence_reward(&inst, &sel, &cfg)?;
        for (pi, pj) in adjacent_pairs(&sel) {
            let mut ppl = PplMap::new();
            for ((i, j), v) in inst.ppl().iter() {
                ppl.insert(i, j, if (i, j) == (pi, pj) { v + bump } else { v })?;
            }
            let bumped = Instance::new("b", inst.segments().to_vec(), ppl, None, false)?;
            prop_assert!(coherence_reward(&bumped, &sel, &cfg)? < base);
        }
    }

    #[test]
    fn metrics_vanish_off_window_and_factor_on_it(s in spec(7), mask in 1u32..128, target in 1.0f64..12.0) {
        let inst = build(&s, false);
        let idx = subset(inst.len(), mask);
        prop_assume!(!idx.is_empty());
        let sel = Selection::new(&inst, idx, "t")?;
        let window = DurationWindow::new(target)?;
        let cfg = RewardConfig::default();
        let m = impcoh_at_t(&inst, &sel, &window, &cfg)?;
        if window.contains(sel.total_duration_s) {
            prop_assert!((m.overall / 100.0 - (m.imp / 100.0) * (m.coh / 100.0)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&imp_at_t(&inst, &sel, &window, &cfg)));
        } else {
            prop_assert_eq!((m.imp, m.coh, m.overall), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn oracle_dominates_and_sam_is_exact(s in spec(9), target in 2.0f64..10.0, seed in any::<u64>(), reward in any::<bool>()) {
        let inst = build(&s, false);
        let window = DurationWindow::new(target)?;
        let cfg = SolverConfig {
            seed,
            force_end_segment: Some(false),
            objective_mode: if reward { ObjectiveMode::RewardMean } else { ObjectiveMode::Eq1Sum },
            ..SolverConfig::default()
        };
        let Ok(oracle) = solve(Method::Oracle, &inst, &window, &cfg) else {
            // No subset fits: SAM must agree.
            prop_assert!(solve(Method::Sam, &inst, &window, &cfg).is_err());
            return Ok(());
        };
        let best = cfg.objective(&inst, &oracle, &window)?.expect("oracle output is feasible");
        let sam = solve(Method::Sam, &inst, &window, &cfg)?;
        prop_assert_eq!(cfg.objective(&inst, &sam, &window)?, Some(best));
        for method in [Method::Random, Method::RandomCut] {
            if let Ok(sel) = solve(method, &inst, &window, &cfg) {
                prop_assert!(sel.temporal.windows(2).all(|w| w[0] < w[1]));
                let tau: f64 = sel.temporal.iter().map(|&i| inst.duration(i)).sum();
                prop_assert_eq!(tau, sel.total_duration_s);
                if let Some(v) = cfg.objective(&inst, &sel, &window)? {
                    prop_assert!(v <= best);
                }
                if method == Method::RandomCut {
                    prop_assert!(window.contains(sel.total_duration_s));
                }
            }
        }
        prop_assert!(window.contains(sam.total_duration_s));
    }

    #[test]
    fn solvers_are_deterministic(s in spec(8), seed in any::<u64>()) {
        let inst = build(&s, false);
        let window = DurationWindow::new(6.0)?;
        let cfg = SolverConfig { seed, ..SolverConfig::default() };
        for method in [Method::Random, Method::RandomCut, Method::Sam, Method::Oracle] {
            let a = solve(method, &inst, &window, &cfg).ok();
            let b = solve(method, &inst, &window, &cfg).ok();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn rollouts_never_repeat_or_overflow(s in spec(9), seed in any::<u64>(), target in 1.0f64..8.0, mask in any::<bool>()) {
        let inst = build(&s, true);
        let window = DurationWindow::new(target)?;
        prop_assume!(inst.duration(inst.end_index()) <= window.t_max_s);
        let params = PolicyParams::init(PolicyConfig::with_dims(3, 4, 3, 1), seed % 17)?;
        let mut opts = RolloutOptions::from_config(params.config(), &inst);
        opts.feasibility_mask = mask;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rollout(&inst, &window, &params, opts, &mut rng)?;
        let mut seen = r.selection.indices.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), r.selection.len());
        prop_assert!(r.selection.total_duration_s <= window.t_max_s);
        for step in &r.steps {
            prop_assert!(step.probs.iter().all(|&p| p >= 0.0));
            prop_assert!((step.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for (p, &b) in step.probs.iter().zip(&step.blocked) {
                if b {
                    prop_assert_eq!(*p, 0.0);
                }
            }
        }
    }

    #[test]
    fn argmax_ignores_a_shift_of_open_logits(
        logits in prop::collection::vec(-5.0f64..5.0, 2..10),
        blocked_bits in any::<u16>(),
        shift in -50.0f64..50.0,
    ) {
        let n = logits.len();
        let mut blocked: Vec<bool> = (0..n).map(|i| blocked_bits >> i & 1 == 1).collect();
        blocked[0] = false;
        let shifted: Vec<f64> = logits.iter().zip(&blocked).map(|(l, &b)| if b { *l } else { l + shift }).collect();
        let argmax = |p: &[f64]| {
            p.iter().enumerate().fold(0, |best, (i, &v)| if v > p[best] { i } else { best })
        };
        let p = masked_softmax_raw(&logits, &blocked);
        let q = masked_softmax_raw(&shifted, &blocked);
        prop_assert_eq!(argmax(&p), argmax(&q));
        for i in 0..n {
            prop_assert!((p[i] - q[i]).abs() < 1e-12);
        }
    }
}
