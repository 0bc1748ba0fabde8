//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use hardnet::attacks::run_parity_attack;
use hardnet::families::{sample_dataset, CompressibleFn, FamilySpec, LabelMode};
use hardnet::gadgets::{build_n1, build_n2, build_n3, GadgetParams};
use hardnet::lift::{
    case3_discrepancy, default_params_for, good_set_prob, in_good_set_f64, lift_compressed, lift_naive_family,
    random_point, reference_eval_family, transform_dataset, verify_identity, DistributionSpec, FamilyOracle,
    LiftedNetwork, LiftedQueryOracle, PointRegion,
};
use hardnet::rational::{int, rat, relu, Rational};
use hardnet::sq::{
    pairwise_check, run_game, run_simulation, variance_check, ExactCubeOracle, FamilyEnsemble, QueryTable,
    SimulatorConfig, Strategy,
};
use hardnet::{rng, stats};
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

const SEED: u64 = 20240601;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn pm(spec: FamilySpec) -> CompressibleFn {
    spec.build().unwrap().to_pm_one().unwrap()
}

fn families() -> Vec<(&'static str, CompressibleFn)> {
    vec![
        ("parity d=10", pm(FamilySpec::random_parity(10, SEED))),
        ("parity d=16", pm(FamilySpec::random_parity(16, SEED + 1))),
        ("lwr n=2 q=8 p=2", pm(FamilySpec::random_lwr(2, 8, 2, SEED))),
    ]
}

fn dyadic<R: Rng>(r: &mut R, lo: i64, hi: i64, den: i64) -> Rational {
    rat(r.random_range(lo..=hi), den)
}

fn gadget_suite() -> Verdict {
    let d = 10;
    let p = GadgetParams::new(d).unwrap();
    let delta = p.delta.clone();
    let mut failures = 0u64;

    let n1 = build_n1(&p).unwrap();
    for k in 0..5000i64 {
        let mag = &delta + (int(10) - &delta) * rat(k, 4999);
        for t in [mag.clone(), -mag] {
            let want = if t.is_positive() { int(1) } else { int(-1) };
            failures += u64::from(n1.eval_exact_scalar(&[t]).unwrap() != want);
        }
    }

    let n2 = build_n2(&p).unwrap();
    let two_d = int(2 * d as i64);
    let regions: Vec<u64> = (0..30_000u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(SEED, rng::ids::TEST_POINTS, i);
            let region = i % 3;
            let z: Vec<Rational> = (0..d)
                .map(|_| match region {
                    0 => {
                        let m = dyadic(&mut r, 200, 100_000, 10_000);
                        if r.random() { m } else { -m }
                    }
                    _ => dyadic(&mut r, -500, 500, 10_000),
                })
                .collect();
            let mut z = z;
            if region == 1 {
                let j = r.random_range(0..d);
                z[j] = dyadic(&mut r, -100, 100, 10_000);
            }
            let v = n2.eval_exact_scalar(&z).unwrap();
            let abs: Vec<Rational> = z.iter().map(|x| x.abs()).collect();
            let even = n2.eval_exact_scalar(&abs).unwrap() == v;
            let case = match region {
                0 => v.is_zero(),
                1 => v >= Rational::one(),
                _ => true,
            };
            let bounded = !v.is_negative() && v <= two_d;
            u64::from(!(even && case && bounded))
        })
        .collect();
    failures += regions.iter().sum::<u64>();

    let range: BTreeSet<i64> = (0..=10).collect();
    let w = p.n3_w.clone();
    for t_star in 0..=10 {
        let n3 = build_n3(&p, &range, t_star).unwrap();
        failures += (0..=10i64)
            .into_par_iter()
            .map(|t| {
                (0..1000i64)
                    .filter(|&k| {
                        let s = &w * rat(k, 999);
                        let ind = if t == t_star { int(1) } else { int(0) };
                        n3.eval_exact_scalar(&[s.clone(), int(t)]).unwrap() != relu(&(ind - s))
                    })
                    .count() as u64
            })
            .sum::<u64>();
    }
    verdict(
        failures == 0,
        format!("{failures} failures over 10^4 N1 + 3·10^4 N2 + 121000 N3 exact evaluations"),
    )
}

fn identity_suite(mode: &str) -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, cf) in families() {
        let params = default_params_for(&cf).unwrap();
        let (lifted, region): (LiftedNetwork, _) = match mode {
            "naive" => (lift_naive_family(&cf, &params).unwrap(), PointRegion::Anywhere),
            _ => (lift_compressed(&cf, &params).unwrap(), PointRegion::OffThreshold),
        };
        let reference = |z: &[Rational]| reference_eval_family(&cf, &params, z);
        let rep = verify_identity(&lifted, &reference, 100_000, 1_000, region, SEED).unwrap();
        ok &= rep.failures == 0 && rep.checked == 101_000;
        let mut part = format!("{name}: {}/{} fail", rep.failures, rep.checked);
        if mode == "compressed" {
            let naive = lift_naive_family(&cf, &params).unwrap();
            let l = cf.hidden_layers();
            let depths = (lifted.net.hidden_layers(), naive.net.hidden_layers());
            ok &= depths == (l + 1, l + 2) && depths == (2, 3);
            part += &format!(", depth {} vs naive {}", depths.0, depths.1);
        }
        parts.push(part);
    }
    verdict(ok, parts.join("; "))
}

fn case3_suite() -> Verdict {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, cf) in families() {
        let params = default_params_for(&cf).unwrap();
        let rep = case3_discrepancy(&cf, &params, 5_000, SEED).unwrap();
        ok &= rep.naive.nonzero_fraction == 0.0;
        parts.push(format!(
            "{name}: compressed max {:.4} mean {:.4} nonzero {:.3}, naive max {}",
            rep.compressed.max_abs_deviation,
            rep.compressed.mean_abs_deviation,
            rep.compressed.nonzero_fraction,
            rep.naive.max_abs_deviation
        ));
    }
    verdict(ok, parts.join("; "))
}

fn reduction_suite() -> Verdict {
    let cf = pm(FamilySpec::random_parity(10, SEED));
    let params = default_params_for(&cf).unwrap();
    let lifted = lift_naive_family(&cf, &params).unwrap();
    let boolean = sample_dataset(&cf, 100_000, LabelMode::Realizable, SEED).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, dist) in [("gaussian", DistributionSpec::gaussian()), ("uniform", DistributionSpec::symmetric_uniform())] {
        let real = transform_dataset(&boolean, &dist, &params, SEED).unwrap();
        let mismatches = real
            .par_iter()
            .filter(|e| lifted.eval_exact(&e.z_exact).unwrap() != e.y_tilde)
            .count();
        let max_ks = (0..cf.d())
            .map(|j| {
                let col: Vec<f64> = real.iter().map(|e| e.z[j]).collect();
                stats::ks_statistic(&col, |x| dist.marginal(j).cdf(x))
            })
            .fold(0.0, f64::max);
        ok &= mismatches == 0 && max_ks < 0.01;
        parts.push(format!("{name}: {mismatches} label mismatches, max KS {max_ks:.5}"));
    }
    verdict(ok, parts.join("; "))
}

/// `P[S]` for the standard Gaussian straight from the error function.
fn gaussian_good_set(d: usize) -> f64 {
    let r = 2.0 / (d * d) as f64;
    (1.0 - statrs::function::erf::erf(r / std::f64::consts::SQRT_2)).powi(d as i32)
}

fn good_set_suite() -> Verdict {
    let d = 10;
    let dist = DistributionSpec::gaussian();
    let integrated = good_set_prob(&dist, d);
    let oracle = gaussian_good_set(d);
    let n = 100_000u64;
    let hits = (0..n)
        .into_par_iter()
        .filter(|&i| in_good_set_f64(&dist.sample(&mut rng::stream(SEED, rng::ids::TEST_POINTS, i), d), d))
        .count();
    let empirical = hits as f64 / n as f64;
    let sd = stats::binomial_sd(integrated, n);
    let within = (empirical - integrated).abs() <= 3.0 * sd;
    let near_0851 = (integrated - 0.851).abs() < 5e-4 && (integrated - oracle).abs() < 1e-9;

    let ds = [5usize, 10, 20, 40];
    let probs: Vec<f64> = ds.iter().map(|&d| good_set_prob(&dist, d)).collect();
    let monotone = probs.windows(2).all(|w| w[0] < w[1]);
    // Least squares for 1 − P ≈ c/d, then require P ≥ 1 − c/d with c the worst case.
    let (num, den) = ds.iter().zip(&probs).fold((0.0, 0.0), |(a, b), (&d, &p)| {
        let x = 1.0 / d as f64;
        (a + x * (1.0 - p), b + x * x)
    });
    let c_fit = num / den;
    let c_max = ds.iter().zip(&probs).map(|(&d, &p)| d as f64 * (1.0 - p)).fold(0.0, f64::max);
    let fit_ok = ds.iter().zip(&probs).all(|(&d, &p)| p >= 1.0 - c_max / d as f64) && c_max < 1.25 * c_fit;
    verdict(
        within && near_0851 && monotone && fit_ok,
        format!(
            "d=10 empirical {empirical:.5} vs integrated {integrated:.5} (erf {oracle:.5}, 3σ = {:.5}); P = {probs:.4?}, c_fit {c_fit:.3}, c_max {c_max:.3}",
            3.0 * sd
        ),
    )
}

fn pairwise_suite() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for e in [FamilyEnsemble::all_boolean_functions(2).unwrap(), FamilyEnsemble::lwr(2, 4, 2).unwrap()] {
        let rep = pairwise_check(&e).unwrap();
        let violations = (0..100)
            .into_par_iter()
            .filter(|&i| !variance_check(&e, &QueryTable::random(&e, 16, SEED, i), &rep.eta_actual).holds)
            .count();
        ok &= violations == 0;
        if e.name.starts_with("all") {
            ok &= rep.eta_actual == rat(1, 4);
        }
        parts.push(format!(
            "{}: eta_actual {} ({} bad of {} pairs), {violations} variance violations",
            e.name,
            hardnet::rational::format(&rep.eta_actual),
            rep.bad_pairs,
            rep.pairs
        ));
    }
    verdict(ok, parts.join("; "))
}

fn game_suite() -> Verdict {
    let e = FamilyEnsemble::lwr(2, 8, 2).unwrap();
    let eta = pairwise_check(&e).unwrap().eta_actual;
    let mut violations = 0;
    let mut games = 0;
    for tau in [rat(1, 4), rat(1, 8)] {
        for s in [Strategy::Random, Strategy::Correlation, Strategy::Agreement, Strategy::Mixed] {
            let t = run_game(&e, s, 10, &tau, &eta, SEED);
            assert_eq!(t.keys, 64);
            violations += t.violations;
            games += 1;
        }
    }
    verdict(
        violations == 0,
        format!(
            "{games} games of 10 queries on 64 keys, eta_actual {}, {violations} violations",
            hardnet::rational::format(&eta)
        ),
    )
}

fn simulation_suite() -> Verdict {
    let cf = pm(FamilySpec::random_parity(10, SEED));
    let params = default_params_for(&cf).unwrap();
    let config = SimulatorConfig::for_tolerance(0.1, 0.05, 20).unwrap();
    let oracle = ExactCubeOracle::new(&cf).unwrap();
    let rep = run_simulation(&cf, &params, &DistributionSpec::gaussian(), &oracle, &config, 0.1, 100, 1_000_000, SEED)
        .unwrap();
    verdict(
        config.m == 5348 && rep.within_tau >= 95 && rep.passed,
        format!(
            "m = {}, {}/100 trials within τ = 0.1 (need 95), max error {:.4}, {} Boolean queries",
            config.m, rep.within_tau, rep.max_error, rep.boolean_queries
        ),
    )
}

fn attack_suite() -> Verdict {
    let mut good = 0;
    let mut slowest = Duration::ZERO;
    for run in 0..10 {
        let t = Instant::now();
        let rep = run_parity_attack(20, 2000, SEED + run).unwrap();
        slowest = slowest.max(t.elapsed());
        good += usize::from(rep.exact_recovery && rep.empirical_sq_loss < 1.0 / 16.0);
    }
    verdict(
        good >= 9 && slowest < Duration::from_secs(10),
        format!("{good}/10 runs recovered S with loss < 1/16, slowest {:.2}s", slowest.as_secs_f64()),
    )
}

fn mq_suite() -> Verdict {
    let cf = pm(FamilySpec::random_lwr(2, 8, 2, SEED));
    let params = default_params_for(&cf).unwrap();
    let mut oracle = LiftedQueryOracle::new(FamilyOracle::new(cf.clone()), params.clone());
    let mut mismatches = 0;
    for i in 0..10_000 {
        let z = random_point(&params, PointRegion::Anywhere, SEED, i);
        mismatches += usize::from(oracle.query(&z).unwrap() != reference_eval_family(&cf, &params, &z).unwrap());
    }
    let (real, boolean) = (oracle.real_queries(), oracle.boolean_queries());
    verdict(
        mismatches == 0 && real == 10_000 && boolean == real,
        format!("{mismatches} mismatches, {real} real queries, {boolean} Boolean queries"),
    )
}

fn determinism_suite() -> Verdict {
    let mut differing = Vec::new();
    for args in common::SMALL_RUNS {
        let outputs: Vec<(Option<i32>, Vec<u8>)> = [("1", "5"), ("1", "5"), ("8", "5")]
            .iter()
            .map(|(threads, seed)| {
                let mut full = vec!["--canonical-only", "--threads", threads, "--seed", seed];
                full.extend_from_slice(args);
                let out = common::run(&full);
                (out.status.code(), out.stdout)
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            differing.push(args.join(" "));
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} subcommands, differing: {differing:?}", common::SMALL_RUNS.len()),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        ("gadget exactness", gadget_suite),
        ("naive-lift identity", || identity_suite("naive")),
        ("compressed-lift identity and depth", || identity_suite("compressed")),
        ("case-3 discrepancy", case3_suite),
        ("reduction consistency and marginals", reduction_suite),
        ("good set", good_set_suite),
        ("pairwise independence", pairwise_suite),
        ("adversarial SQ game", game_suite),
        ("SQ simulation", simulation_suite),
        ("end-to-end attack", attack_suite),
        ("membership-query wrapper", mq_suite),
        ("CLI determinism", determinism_suite),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let v = run();
        if !v.pass {
            failed += 1;
        }
        println!(
            "{label}: {} ({:.1}s) {}",
            if v.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            v.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
