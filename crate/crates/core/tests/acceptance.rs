//! Acceptance checks, one line per criterion. Runs without the libtest
//! harness so the report is always printed; exits non-zero if any check fails.

use std::time::Instant;

use rand::Rng;

use gsmc::bounds::{empirical_pairwise_error, pairwise_error_bound_model1, pairwise_error_bound_model2, pairwise_error_bound_model2_exact, TypeClassOverlap};
use gsmc::estimators::{exact_recovery, ml_exhaustive};
use gsmc::experiments::{run_sweep, ExperimentConfig};
use gsmc::likelihood::{flip, neg_log_likelihood};
use gsmc::model::{generate_instance, sample_ground_truth, AtypicalCounts, GroundTruth, ModelKind, ModelParams, Observation, SbmParams};
use gsmc::thresholds::{classify_regime, classify_regime_with_tolerance, graph_quality, h, model2_achievable_p, model2_converse_p, msp_model1, nu, tau, Regime, ThresholdTerm};
use gsmc::Seed;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn formula_reproduction() -> Check {
    let p = msp_model1(10_000, 10_000, 0.0, 0.0, 0.2, 0.0).unwrap().p_value.unwrap();
    let expected = 10_000f64.ln() / (0.2 * 10_000.0);
    let err = rel_err(p, expected);
    let clamped = msp_model1(10_000, 10_000, 2.5, 2.5, 0.2, 0.0).unwrap().p_value;
    ensure(
        err <= 1e-12 && clamped == Some(0.0),
        format!("p* = {p:.12} (rel err {err:.1e}), p*(I1 = I2 = 2.5) = {clamped:?}"),
    )
}

fn identity_suite() -> Check {
    let mut rng = Seed(101).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let t: f64 = rng.random_range(1e-9..0.5);
        worst = worst.max(tau(t, t).unwrap().abs()).max((nu(t, t).unwrap() - h(t).unwrap()).abs());
    }
    let mut violations = 0;
    for _ in 0..10_000 {
        let a: f64 = rng.random_range(1e-9..0.5);
        let r: f64 = rng.random_range(1e-9..0.5);
        if nu(a, r).unwrap() < tau(a, r).unwrap() {
            violations += 1;
        }
    }
    ensure(
        worst <= 1e-12 && violations == 0,
        format!("max identity error {worst:.1e}, nu < tau on {violations}/10000 pairs"),
    )
}

/// Log-probability of an observation by direct multiplication over entries
/// and node pairs, reading nominal ratings off the rating tables.
fn direct_log_prob(xi: &GroundTruth, obs: &Observation, params: &ModelParams) -> f64 {
    let (n, m) = (params.n, params.m);
    let mut lp = 0.0;
    for i in 0..n {
        for j in 0..m {
            // men like action and dislike romance; women the reverse; atypical movies inverted
            let mut nominal = if xi.is_man(i) { xi.is_action(j) } else { !xi.is_action(j) };
            if xi.is_atypical(j) {
                nominal = !nominal;
            }
            let theta = if xi.is_action(j) { params.theta_action } else { params.theta_romance };
            lp += match obs.ratings.get(i, j) {
                None => (1.0 - params.p).ln(),
                Some(v) if v == nominal => (params.p * (1.0 - theta)).ln(),
                Some(_) => (params.p * theta).ln(),
            };
        }
    }
    let graph = |size: usize, same: &dyn Fn(usize, usize) -> bool, edge: &dyn Fn(usize, usize) -> bool, g: SbmParams| {
        let mut lp = 0.0;
        for a in 0..size {
            for b in a + 1..size {
                let q = if same(a, b) { g.alpha } else { g.beta };
                lp += if edge(a, b) { q.ln() } else { (1.0 - q).ln() };
            }
        }
        lp
    };
    lp += graph(n, &|a, b| xi.is_man(a) == xi.is_man(b), &|a, b| obs.social.has_edge(a, b), params.social);
    lp += graph(m, &|a, b| xi.is_action(a) == xi.is_action(b), &|a, b| obs.movie.has_edge(a, b), params.movie);
    lp
}

fn balanced(size: usize) -> Vec<Vec<bool>> {
    (0u32..1 << size)
        .filter(|b| b.count_ones() as usize == size / 2)
        .map(|b| (0..size).map(|i| b >> i & 1 == 1).collect())
        .collect()
}

fn all_truths(n: usize, m: usize, kind: ModelKind) -> Vec<GroundTruth> {
    let flags: Vec<Vec<bool>> = match kind {
        ModelKind::Basic => vec![vec![false; m]],
        ModelKind::Atypical => (0u32..1 << m).map(|b| (0..m).map(|j| b >> j & 1 == 1).collect()).collect(),
    };
    let mut out = Vec::new();
    for man in balanced(n) {
        for action in balanced(m) {
            for atyp in &flags {
                out.push(GroundTruth::from_labels(man.clone(), action.clone(), atyp.clone()).unwrap());
            }
        }
    }
    out
}

fn random_params(rng: &mut impl Rng, kind: ModelKind, n: usize, m: usize) -> ModelParams {
    let g = |rng: &mut dyn rand::RngCore| SbmParams::new(rng.random_range(0.05..0.95), rng.random_range(0.05..0.95));
    let (s, mv) = (g(rng), g(rng));
    let p = rng.random_range(0.05..0.95);
    match kind {
        ModelKind::Basic => ModelParams::basic(n, m, rng.random_range(0.01..0.49), s, mv, p).unwrap(),
        ModelKind::Atypical => {
            ModelParams::atypical(n, m, rng.random_range(0.01..0.49), rng.random_range(0.01..0.49), s, mv, p).unwrap()
        }
    }
}

fn oracle_equivalence() -> Check {
    let mut rng = Seed(202).rng();
    let one_atypical = AtypicalCounts::Fixed { action: 1, romance: 0 };
    let mut worst: f64 = 0.0;
    let mut argmax_mismatch = 0;
    for (kind, counts) in [(ModelKind::Basic, AtypicalCounts::none()), (ModelKind::Atypical, one_atypical)] {
        let space = all_truths(4, 4, kind);
        for k in 0..200 {
            let params = random_params(&mut rng, kind, 4, 4);
            let (_, obs) = generate_instance(&params, counts, Seed(k)).unwrap();
            let xi = &space[rng.random_range(0..space.len())];
            let direct = -direct_log_prob(xi, &obs, &params);
            worst = worst.max(rel_err(neg_log_likelihood(xi, &obs, &params).unwrap(), direct));
        }
        for k in 0..50 {
            let params = random_params(&mut rng, kind, 4, 4);
            let (_, obs) = generate_instance(&params, counts, Seed(1000 + k)).unwrap();
            let best = space.iter().map(|xi| -direct_log_prob(xi, &obs, &params)).fold(f64::INFINITY, f64::min);
            let xi_hat = ml_exhaustive(&obs, &params).unwrap();
            if rel_err(-direct_log_prob(&xi_hat, &obs, &params), best) > 1e-12 {
                argmax_mismatch += 1;
            }
        }
    }
    ensure(
        worst <= 1e-12 && argmax_mismatch == 0,
        format!("max rel error {worst:.1e} over 400 likelihoods, {argmax_mismatch}/100 exhaustive estimates off the brute-force maximum"),
    )
}

fn flip_symmetry() -> Check {
    let mut rng = Seed(303).rng();
    let mut bad_l = 0;
    let mut bad_rec = 0;
    for k in 0..1000 {
        let n = 2 * rng.random_range(1..=10);
        let m = 2 * rng.random_range(1..=10);
        let params = random_params(&mut rng, ModelKind::Basic, n, m);
        let (_, obs) = generate_instance(&params, AtypicalCounts::none(), Seed(k)).unwrap();
        let xi = GroundTruth::from_labels(
            balanced_random(&mut rng, n),
            balanced_random(&mut rng, m),
            vec![false; m],
        )
        .unwrap();
        if neg_log_likelihood(&xi, &obs, &params).unwrap() != neg_log_likelihood(&flip(&xi), &obs, &params).unwrap() {
            bad_l += 1;
        }
        if !exact_recovery(&flip(&xi), &xi).unwrap() {
            bad_rec += 1;
        }
    }
    ensure(bad_l == 0 && bad_rec == 0, format!("L mismatch on {bad_l}/1000, recovery verdict wrong on {bad_rec}/1000"))
}

fn balanced_random(rng: &mut impl Rng, size: usize) -> Vec<bool> {
    use rand::seq::SliceRandom;
    let mut v: Vec<bool> = (0..size).map(|i| i < size / 2).collect();
    v.shuffle(rng);
    v
}

fn swap_one(rng: &mut impl Rng, labels: &mut [bool]) {
    let ones: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let zeros: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    let a = ones[rng.random_range(0..ones.len())];
    let b = zeros[rng.random_range(0..zeros.len())];
    labels.swap(a, b);
}

fn perturb(rng: &mut impl Rng, xi: &GroundTruth, kind: ModelKind) -> GroundTruth {
    loop {
        let (mut man, mut action, mut atyp) = (xi.man_labels().to_vec(), xi.action_labels().to_vec(), xi.atypical_labels().to_vec());
        if rng.random_bool(0.5) {
            swap_one(rng, &mut man);
        }
        if rng.random_bool(0.5) {
            swap_one(rng, &mut action);
        }
        if kind == ModelKind::Atypical {
            for _ in 0..rng.random_range(0..=2) {
                let j = rng.random_range(0..atyp.len());
                atyp[j] = !atyp[j];
            }
        }
        let alt = GroundTruth::from_labels(man, action, atyp).unwrap();
        if alt != *xi {
            return alt;
        }
    }
}

fn chernoff_bound_validity() -> Check {
    let (n, m, trials) = (50, 50, 2000);
    let social = SbmParams::new(0.14, 0.1);
    let movie = SbmParams::new(0.13, 0.1);
    let i1 = graph_quality(social.alpha, social.beta, n).unwrap().value();
    let i2 = graph_quality(movie.alpha, movie.beta, m).unwrap().value();
    let mut rng = Seed(404).rng();
    let mut details = Vec::new();
    let mut failures = 0;
    for kind in [ModelKind::Basic, ModelKind::Atypical] {
        let params = match kind {
            ModelKind::Basic => ModelParams::basic(n, m, 0.2, social, movie, 0.1).unwrap(),
            ModelKind::Atypical => ModelParams::atypical(n, m, 0.15, 0.3, social, movie, 0.1).unwrap(),
        };
        let counts = if kind == ModelKind::Basic { AtypicalCounts::none() } else { AtypicalCounts::UniformRandom };
        let mut worst_margin = f64::NEG_INFINITY;
        let mut max_rate: f64 = 0.0;
        for k in 0..100u64 {
            let xi = sample_ground_truth(&params, counts, Seed(5000 + k)).unwrap();
            let alt = perturb(&mut rng, &xi, kind);
            let o = TypeClassOverlap::between(&xi, &alt).unwrap();
            let bound = match kind {
                ModelKind::Basic => pairwise_error_bound_model1(&o.genres_only(), &params, i1, i2).unwrap().value,
                ModelKind::Atypical => {
                    let exact = pairwise_error_bound_model2_exact(&o, &params, i1, i2).unwrap().value;
                    let relaxed = pairwise_error_bound_model2(&o, &params, i1, i2).unwrap().value;
                    exact.min(relaxed)
                }
            };
            let r = empirical_pairwise_error(&xi, &alt, &params, trials, Seed(9000 + k)).unwrap();
            let se = (bound * (1.0 - bound) / trials as f64).sqrt().max(r.std_error());
            let margin = r.rate - (bound + 3.0 * se);
            worst_margin = worst_margin.max(margin);
            max_rate = max_rate.max(r.rate);
            if margin > 0.0 {
                failures += 1;
            }
        }
        details.push(format!("{kind}: worst (rate - bound - 3se) = {worst_margin:.4}, max rate {max_rate:.4}"));
    }
    ensure(failures == 0, format!("{failures}/200 violations; {}", details.join("; ")))
}

const PHASE: &str = r#"
seed = 606
trials = 50
estimator = { local_search = { restarts = 10 } }

[model]
kind = "basic"
n = 200
m = 200
theta = 0.2
i1 = 0.0
i2 = 0.0

[sweep]
axis = "p"
start = 0.4
stop = 2.0
steps = 9
relative = true
"#;

fn phase_transition_model1() -> Check {
    let config = ExperimentConfig::from_toml_str(PHASE).unwrap();
    let rows = run_sweep(&config).unwrap().rows;
    let rates: Vec<_> = rows.iter().map(|r| r.outcome.unwrap()).collect();
    let low = rates.first().unwrap().rate;
    let high = rates.last().unwrap().rate;
    let monotone = (0..rates.len()).all(|i| (i + 1..rates.len()).all(|j| rates[j].ci_high >= rates[i].ci_low));
    let curve: Vec<String> = rows.iter().zip(&rates).map(|(r, o)| format!("{:.1}:{:.2}", r.axis_value, o.rate)).collect();
    ensure(
        high >= 0.9 && low <= 0.3 && monotone,
        format!("rate at 0.4p* = {low:.2}, at 2p* = {high:.2}, non-decreasing up to CI overlap: {monotone}; curve {}", curve.join(" ")),
    )
}

fn synergy_rate(i1: f64, i2: f64, p: f64) -> f64 {
    let text = format!(
        "seed = 707\ntrials = 50\nestimator = {{ local_search = {{ restarts = 10 }} }}\n\n[model]\nkind = \"basic\"\nn = 200\nm = 200\ntheta = 0.2\ni1 = {i1:?}\ni2 = {i2:?}\n\n[sweep]\naxis = \"p\"\nstart = {p:?}\nstop = {p:?}\nsteps = 1\n"
    );
    let config = ExperimentConfig::from_toml_str(&text).unwrap();
    run_sweep(&config).unwrap().rows[0].outcome.unwrap().rate
}

fn synergy_shape_model1() -> Check {
    let p = 0.9 * msp_model1(200, 200, 0.0, 0.0, 0.2, 0.0).unwrap().p_value.unwrap();
    let one = synergy_rate(4.0, 0.0, p);
    let both = synergy_rate(4.0, 4.0, p);
    ensure(one < 0.5 && both > 0.7, format!("p = {p:.4}: success {one:.2} with I1 = 4 only, {both:.2} with I1 = I2 = 4"))
}

fn model2_regime_classifier() -> Check {
    let (n, m) = (10_000, 2000);
    let a = classify_regime(n, m, 0.3, 0.03).unwrap();
    let b = classify_regime(n, m, 0.3, 0.15).unwrap();
    let c = classify_regime_with_tolerance(n, m, 0.35, 0.1156, 0.01).unwrap();
    let report = model2_achievable_p(n, m, 0.0, 0.0, 0.35, 0.1156, 0.0).unwrap();
    let ratio = report.term(ThresholdTerm::UserClusters).unwrap() / report.term(ThresholdTerm::MovieClusters).unwrap();
    ensure(
        a == Regime::SocialSensitive && b == Regime::MovieSensitive && c == Regime::Boundary,
        format!("(0.3, 0.03) -> {a}, (0.3, 0.15) -> {b}, (0.35, 0.1156) -> {c} (user/movie term ratio {ratio:.4}, tolerance 0.01)"),
    )
}

fn model2_equal_theta_gate() -> Check {
    let mut wrong = Vec::new();
    for eps in [0.0, 0.05, 0.25] {
        for k in 0..=40 {
            let i2 = 1.0 + k as f64 * 0.05;
            let r = model2_achievable_p(10_000, 2000, 0.5, i2, 0.2, 0.2, eps).unwrap();
            if r.feasible != (i2 >= 2.0 * (1.0 + eps)) || r.p_value.is_some() != r.feasible {
                wrong.push(format!("(eps {eps}, I2 {i2})"));
            }
        }
    }
    ensure(wrong.is_empty(), format!("{} grid points disagree {}", wrong.len(), wrong.join(" ")))
}

fn achievability_converse_gap() -> Check {
    let mut ratios = Vec::new();
    for (a, r) in [(0.3, 0.15), (0.1, 0.4), (0.35, 0.1156)] {
        let ach = model2_achievable_p(10_000, 2000, 0.0, 0.0, a, r, 0.0).unwrap();
        let conv = model2_converse_p(10_000, 2000, 0.0, 0.0, a, r, 0.0).unwrap();
        ratios.push(ach.term(ThresholdTerm::MovieClusters).unwrap() / conv.term(ThresholdTerm::MovieClusters).unwrap());
    }
    ensure(ratios.iter().all(|&x| x == 2.0), format!("third-term ratios {ratios:?}"))
}

fn main() {
    let checks: [(&str, fn() -> Check); 10] = [
        ("formula_reproduction", formula_reproduction),
        ("identity_suite", identity_suite),
        ("oracle_equivalence", oracle_equivalence),
        ("flip_symmetry", flip_symmetry),
        ("chernoff_bound_validity", chernoff_bound_validity),
        ("phase_transition_model1", phase_transition_model1),
        ("synergy_shape_model1", synergy_shape_model1),
        ("model2_regime_classifier", model2_regime_classifier),
        ("model2_equal_theta_gate", model2_equal_theta_gate),
        ("achievability_converse_gap", achievability_converse_gap),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (verdict, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{verdict} {name} [{:.1}s] {detail}", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}
