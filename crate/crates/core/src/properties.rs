//! Property tests over the public API.

use proptest::prelude::*;

use crate::bounds::{pairwise_error_bound, TypeClassOverlap};
use crate::experiments::solve_graph_params;
use crate::io::Instance;
use crate::likelihood::{canonicalize, flip, likelihood_difference, neg_log_likelihood, orient, swap_users};
use crate::model::{generate_instance, AtypicalCounts, GroundTruth, ModelKind, ModelParams, SbmParams};
use crate::stats::{wilson_interval, Z95};
use crate::thresholds::{graph_quality, model2_achievable_p, model2_converse_p, msp_model1};
use crate::Seed;

fn half_labels(size: usize) -> impl Strategy<Value = Vec<bool>> {
    Just((0..size).map(|i| i < size / 2).collect::<Vec<bool>>()).prop_shuffle()
}

fn prob() -> impl Strategy<Value = f64> {
    0.02f64..0.98
}

fn theta() -> impl Strategy<Value = f64> {
    0.01f64..0.49
}

/// Parameters, observation, and two arbitrary ground truths of matching shape.
fn setting(kind: ModelKind) -> impl Strategy<Value = (ModelParams, u64, GroundTruth, GroundTruth)> {
    (1usize..=6, 1usize..=6)
        .prop_flat_map(move |(hn, hm)| {
            let (n, m) = (2 * hn, 2 * hm);
            let truth = move || {
                (half_labels(n), half_labels(m), proptest::collection::vec(any::<bool>(), m)).prop_map(move |(u, a, t)| {
                    let t = if kind == ModelKind::Basic { vec![false; t.len()] } else { t };
                    GroundTruth::from_labels(u, a, t).unwrap()
                })
            };
            (Just((n, m)), theta(), theta(), prob(), prob(), prob(), prob(), prob(), any::<u64>(), truth(), truth())
        })
        .prop_map(move |((n, m), ta, tr, a1, b1, a2, b2, p, seed, x, y)| {
            let (s, mv) = (SbmParams::new(a1, b1), SbmParams::new(a2, b2));
            let params = match kind {
                ModelKind::Basic => ModelParams::basic(n, m, ta, s, mv, p).unwrap(),
                ModelKind::Atypical => ModelParams::atypical(n, m, ta, tr, s, mv, p).unwrap(),
            };
            (params, seed, x, y)
        })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn basic_flip_preserves_likelihood((params, seed, x, _) in setting(ModelKind::Basic)) {
        let (_, obs) = generate_instance(&params, AtypicalCounts::none(), Seed(seed)).unwrap();
        prop_assert_eq!(neg_log_likelihood(&x, &obs, &params).unwrap(), neg_log_likelihood(&flip(&x), &obs, &params).unwrap());
        prop_assert_eq!(flip(&flip(&x)), x.clone());
        prop_assert_eq!(canonicalize(&flip(&x)), canonicalize(&x));
    }

    #[test]
    fn user_swap_preserves_atypical_likelihood((params, seed, x, _) in setting(ModelKind::Atypical)) {
        let (_, obs) = generate_instance(&params, AtypicalCounts::UniformRandom, Seed(seed)).unwrap();
        let a = neg_log_likelihood(&x, &obs, &params).unwrap();
        let b = neg_log_likelihood(&swap_users(&x), &obs, &params).unwrap();
        prop_assert!(close(a, b), "{} vs {}", a, b);
        let o = orient(&x, &params);
        prop_assert!(close(a, neg_log_likelihood(&o, &obs, &params).unwrap()));
        prop_assert_eq!(orient(&o, &params), o);
    }

    #[test]
    fn difference_matches_full_evaluation((params, seed, x, y) in prop_oneof![setting(ModelKind::Basic), setting(ModelKind::Atypical)]) {
        let (_, obs) = generate_instance(&params, AtypicalCounts::UniformRandom, Seed(seed)).unwrap();
        let full = neg_log_likelihood(&x, &obs, &params).unwrap() - neg_log_likelihood(&y, &obs, &params).unwrap();
        let diff = likelihood_difference(&x, &y, &obs, &params).unwrap();
        prop_assert!((full - diff).abs() <= 1e-8 * neg_log_likelihood(&x, &obs, &params).unwrap().max(1.0), "{} vs {}", full, diff);
    }

    #[test]
    fn likelihood_is_relabeling_equivariant((params, seed, x, _) in setting(ModelKind::Atypical), rot in 0usize..100) {
        let (_, obs) = generate_instance(&params, AtypicalCounts::UniformRandom, Seed(seed)).unwrap();
        let (n, m) = (params.n, params.m);
        let up: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let mp: Vec<usize> = (0..m).map(|j| (j + 3 * rot) % m).collect();
        let a = neg_log_likelihood(&x, &obs, &params).unwrap();
        let b = neg_log_likelihood(&x.permuted(&up, &mp), &obs.permuted(&up, &mp), &params).unwrap();
        prop_assert!(close(a, b));
    }

    #[test]
    fn instance_files_round_trip((params, seed, _, _) in prop_oneof![setting(ModelKind::Basic), setting(ModelKind::Atypical)]) {
        let counts = if params.kind == ModelKind::Basic { AtypicalCounts::none() } else { AtypicalCounts::UniformRandom };
        let (xi, obs) = generate_instance(&params, counts, Seed(seed)).unwrap();
        let inst = Instance::new(params, Some(xi), obs).unwrap();
        prop_assert_eq!(Instance::from_toml_str(&inst.to_toml_string().unwrap()).unwrap(), inst);
    }

    #[test]
    fn generation_is_deterministic((params, seed, _, _) in setting(ModelKind::Atypical)) {
        let a = generate_instance(&params, AtypicalCounts::UniformRandom, Seed(seed)).unwrap();
        let b = generate_instance(&params, AtypicalCounts::UniformRandom, Seed(seed)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn wilson_interval_is_sane(trials in 1usize..500, frac in 0.0f64..=1.0) {
        let s = (frac * trials as f64).round() as usize;
        let (lo, hi) = wilson_interval(s, trials, Z95);
        let r = s as f64 / trials as f64;
        prop_assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        prop_assert!(lo <= r + 1e-12 && r <= hi + 1e-12);
    }

    #[test]
    fn graph_solve_round_trips(i in 0.01f64..6.0, size in 10usize..20_000, beta in 0.001f64..0.2) {
        if let Ok(g) = solve_graph_params(i, size, beta) {
            let back = graph_quality(g.alpha, g.beta, size).unwrap().value();
            prop_assert!((back - i).abs() <= 1e-9 * i);
        }
    }

    #[test]
    fn thresholds_are_monotone(i1 in 0.0f64..3.0, i2 in 0.0f64..3.0, d in 0.0f64..1.0, t in theta(), tr in theta(), eps in 0.0f64..0.5) {
        let (n, m) = (5000, 1000);
        let p = |a, b| msp_model1(n, m, a, b, t, 0.0).unwrap().p_value.unwrap();
        prop_assert!(p(i1 + d, i2) <= p(i1, i2));
        prop_assert!(p(i1, i2 + d) <= p(i1, i2));
        let ach = model2_achievable_p(n, m, i1, i2, t, tr, eps).unwrap();
        let conv = model2_converse_p(n, m, i1, i2, t, tr, eps).unwrap();
        if let (Some(a), Some(c)) = (ach.p_value, conv.p_value) {
            prop_assert!(c <= a);
        }
        prop_assert!(conv.feasible || !ach.feasible);
    }

    #[test]
    fn pairwise_bounds_are_probabilities_and_fall_with_p(
        (params, _, x, y) in prop_oneof![setting(ModelKind::Basic), setting(ModelKind::Atypical)],
        i1 in 0.0f64..3.0,
        i2 in 0.0f64..3.0,
    ) {
        let mut o = TypeClassOverlap::between(&x, &y).unwrap();
        if params.kind == ModelKind::Basic {
            o = o.genres_only();
        }
        let lo = pairwise_error_bound(&o, &params.with_p(params.p / 2.0), i1, i2).unwrap().value;
        let hi = pairwise_error_bound(&o, &params, i1, i2).unwrap().value;
        prop_assert!((0.0..=1.0).contains(&hi));
        prop_assert!(hi <= lo);
    }
}
