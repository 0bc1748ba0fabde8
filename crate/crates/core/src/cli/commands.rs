use super::args::{AttackTarget, Cli, Command, DistArg, FamilyArgs, GadgetArg, LiftMode, OracleArg, StrategyArg, VerifyCheck};
use super::{input_err, CliError, Outcome};
use crate::attacks::run_parity_attack;
use crate::families::{sample_dataset, CompressibleFn, LabelMode};
use crate::gadgets::{build_majority, build_n1, build_n1_vec, build_n2, build_n3, GadgetParams};
use crate::lift::{
    case3_discrepancy, default_params_for, good_set_prob, in_good_set_f64, lift_compressed, lift_naive_family,
    random_point, reference_eval_family, transform_dataset, verify_identity, DistributionSpec, FamilyOracle,
    LiftedNetwork, LiftedQueryOracle, PointRegion,
};
use crate::rational::{self, Rational};
use crate::relu_ir::{to_document, ReluNetwork};
use crate::sq::{
    pairwise_check, run_game, run_simulation, variance_check, ExactCubeOracle, FamilyEnsemble, MonteCarloOracle,
    QueryTable, SimulatorConfig, StatOracle, Strategy,
};
use crate::{rng, stats};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

pub(super) fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let seed = cli.seed;
    match &cli.command {
        Command::Compile { gadget, family, t_star, range_max, arity, out } => {
            compile(*gadget, family, *t_star, *range_max, *arity, out.as_deref(), seed)
        }
        Command::Lift { family, mode, out } => lift(family, *mode, out.as_deref(), seed),
        Command::Transform { family, dist, count, out } => transform(family, *dist, *count, out.as_deref(), seed),
        Command::Verify { check } => match check {
            VerifyCheck::Identity { family, mode, samples, adversarial } => {
                identity(family, *mode, *samples, *adversarial, seed)
            }
            VerifyCheck::Goodset { d, dist, samples } => goodset(*d, *dist, *samples, seed),
            VerifyCheck::Marginal { family, dist, samples } => marginal(family, *dist, *samples, seed),
            VerifyCheck::Case3 { family, samples } => case3(family, *samples, seed),
        },
        Command::VerifyPairwise { family, n, q, p, d, tables } => pairwise(family, *n, *q, *p, *d, *tables, seed),
        Command::SqGame { family, n, q, p, d, tau, queries, strategy } => {
            game(family, *n, *q, *p, *d, tau, *queries, *strategy, seed)
        }
        Command::SqSimulate { family, tau, delta, budget, trials, ground_truth_samples, oracle, oracle_samples, m } => {
            simulate(family, *tau, *delta, *budget, *trials, *ground_truth_samples, *oracle, *oracle_samples, *m, seed)
        }
        Command::Attack { target: AttackTarget::ParityLift { d, samples } } => attack(*d, *samples, seed),
        Command::MqDemo { family, queries } => mq_demo(family, *queries, seed),
    }
}

/// `"n/d"`, an integer, or a finite decimal such as `0.25`, exactly.
pub(super) fn parse_exact(text: &str) -> Result<Rational, CliError> {
    let t = text.trim();
    if let Some((int_part, frac)) = t.split_once('.') {
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() && int_part.is_empty() {
            return Err(CliError::Input(format!("bad number {text:?}")));
        }
        let digits: BigInt = format!("{int_part}{frac}")
            .parse()
            .map_err(|_| CliError::Input(format!("bad number {text:?}")))?;
        return Ok(Rational::new(digits, BigInt::from(10).pow(frac.len() as u32)));
    }
    rational::parse(t).map_err(input_err)
}

fn dist_spec(d: DistArg) -> DistributionSpec {
    match d {
        DistArg::Gaussian => DistributionSpec::gaussian(),
        DistArg::Uniform => DistributionSpec::symmetric_uniform(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<Value, CliError> {
    std::fs::write(path, bytes)?;
    Ok(json!(path.display().to_string()))
}

fn network_info(net: &ReluNetwork) -> Value {
    let m = net.meta();
    json!({
        "input_dim": net.input_dim(),
        "hidden_layers": m.hidden_layers,
        "unit_count": m.unit_count,
        "weight_bound": rational::format(&m.weight_bound),
        "widths": net.widths(),
    })
}

fn emit_network(net: &ReluNetwork, out: Option<&Path>) -> Result<Value, CliError> {
    let doc = to_document(net);
    match out {
        Some(p) => write_file(p, doc.as_bytes()),
        None => serde_json::from_str(&doc).map_err(input_err),
    }
}

/// Family on `{±1}` corners with its default lift parameters.
fn lift_setup(family: &FamilyArgs, seed: u64) -> Result<(Value, CompressibleFn, GadgetParams), CliError> {
    let (spec, cf) = family.build(seed)?;
    let pm = cf.to_pm_one().map_err(input_err)?;
    let params = default_params_for(&pm).map_err(input_err)?;
    Ok((serde_json::to_value(&spec).map_err(input_err)?, pm, params))
}

fn build_lift(cf: &CompressibleFn, params: &GadgetParams, mode: LiftMode) -> Result<LiftedNetwork, CliError> {
    match mode {
        LiftMode::Naive => lift_naive_family(cf, params),
        LiftMode::Compressed => lift_compressed(cf, params),
    }
    .map_err(input_err)
}

fn compile(
    gadget: GadgetArg,
    family: &FamilyArgs,
    t_star: i64,
    range_max: i64,
    arity: usize,
    out: Option<&Path>,
    seed: u64,
) -> Result<Outcome, CliError> {
    let params = || GadgetParams::new(family.d.unwrap_or(10)).map_err(input_err);
    let (net, spec) = match gadget {
        GadgetArg::N1 => (build_n1(&params()?), Value::Null),
        GadgetArg::N1Vec => (build_n1_vec(&params()?), Value::Null),
        GadgetArg::N2 => (build_n2(&params()?), Value::Null),
        GadgetArg::N3 => {
            if range_max < 0 {
                return Err(CliError::Input("range-max must be nonnegative".into()));
            }
            let range: BTreeSet<i64> = (0..=range_max).collect();
            (build_n3(&params()?, &range, t_star), Value::Null)
        }
        GadgetArg::Majority => (build_majority(arity), Value::Null),
        GadgetArg::Family => {
            let (spec, cf) = family.build(seed)?;
            let net = cf.to_network().map_err(input_err)?;
            let spec = serde_json::to_value(&spec).map_err(input_err)?;
            return Ok(Outcome::pass(json!({
                "gadget": gadget,
                "family": spec,
                "network": network_info(&net),
                "document": emit_network(&net, out)?,
            })));
        }
    };
    let net = net.map_err(input_err)?;
    Ok(Outcome::pass(json!({
        "gadget": gadget,
        "family": spec,
        "network": network_info(&net),
        "document": emit_network(&net, out)?,
    })))
}

fn lift(family: &FamilyArgs, mode: LiftMode, out: Option<&Path>, seed: u64) -> Result<Outcome, CliError> {
    let (spec, cf, params) = lift_setup(family, seed)?;
    let lifted = build_lift(&cf, &params, mode)?;
    Ok(Outcome::pass(json!({
        "family": spec,
        "lift": lifted.summary(),
        "network": network_info(&lifted.net),
        "document": emit_network(&lifted.net, out)?,
    })))
}

fn transform(family: &FamilyArgs, dist: DistArg, count: usize, out: Option<&Path>, seed: u64) -> Result<Outcome, CliError> {
    let (spec, cf, params) = lift_setup(family, seed)?;
    let dist = dist_spec(dist);
    let boolean = sample_dataset(&cf, count, LabelMode::Realizable, seed).map_err(input_err)?;
    let real = transform_dataset(&boolean, &dist, &params, seed).map_err(input_err)?;
    let d = cf.d();
    let good = real.iter().filter(|e| in_good_set_f64(&e.z, d)).count();
    let mean = |f: &dyn Fn(&crate::lift::RealExample) -> f64| {
        real.iter().map(f).sum::<f64>() / real.len().max(1) as f64
    };
    let mean_y = mean(&|e| rational::to_f64(&e.y));
    let mean_y_tilde = mean(&|e| rational::to_f64(&e.y_tilde));
    let written = match out {
        Some(path) => {
            let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
            for e in &real {
                let rec = json!({
                    "x": e.x,
                    "g": e.g,
                    "z": e.z,
                    "y_exact": rational::format(&e.y),
                    "y_tilde_exact": rational::format(&e.y_tilde),
                    "y_tilde_float": rational::to_f64(&e.y_tilde),
                });
                serde_json::to_writer(&mut w, &rec).map_err(input_err)?;
                w.write_all(b"\n")?;
            }
            w.flush()?;
            json!(path.display().to_string())
        }
        None => Value::Null,
    };
    Ok(Outcome::pass(json!({
        "family": spec,
        "distribution": dist,
        "count": count,
        "good_set_count": good,
        "good_set_fraction": good as f64 / count.max(1) as f64,
        "mean_y": mean_y,
        "mean_y_tilde": mean_y_tilde,
        "out": written,
    })))
}

fn identity(family: &FamilyArgs, mode: LiftMode, samples: u64, adversarial: u64, seed: u64) -> Result<Outcome, CliError> {
    let (spec, cf, params) = lift_setup(family, seed)?;
    let lifted = build_lift(&cf, &params, mode)?;
    let region = match mode {
        LiftMode::Naive => PointRegion::Anywhere,
        LiftMode::Compressed => PointRegion::OffThreshold,
    };
    let reference = |z: &[Rational]| reference_eval_family(&cf, &params, z);
    let report = verify_identity(&lifted, &reference, samples, adversarial, region, seed).map_err(input_err)?;
    let expected_hidden = cf.hidden_layers()
        + match mode {
            LiftMode::Naive => 2,
            LiftMode::Compressed => 1,
        };
    let depth_ok = lifted.net.hidden_layers() == expected_hidden;
    Ok(Outcome::checked(
        json!({
            "family": spec,
            "lift": lifted.summary(),
            "expected_hidden_layers": expected_hidden,
            "depth_ok": depth_ok,
            "checked": report.checked,
            "failures": report.failures,
            "max_abs_deviation": report.max_abs_deviation,
            "report": report,
        }),
        report.failures == 0 && depth_ok,
    ))
}

fn goodset(d: usize, dist: DistArg, samples: u64, seed: u64) -> Result<Outcome, CliError> {
    if d == 0 || samples == 0 {
        return Err(CliError::Input("d and samples must be positive".into()));
    }
    let spec = dist_spec(dist);
    let hits = (0..samples)
        .into_par_iter()
        .filter(|&i| {
            let mut r = rng::stream(seed, rng::ids::TEST_POINTS, i);
            in_good_set_f64(&spec.sample(&mut r, d), d)
        })
        .count() as u64;
    let empirical = hits as f64 / samples as f64;
    let integrated = good_set_prob(&spec, d);
    let sd = stats::binomial_sd(integrated, samples);
    let z = if sd > 0.0 { (empirical - integrated).abs() / sd } else { 0.0 };
    Ok(Outcome::checked(
        json!({
            "d": d,
            "distribution": spec,
            "samples": samples,
            "hits": hits,
            "empirical": empirical,
            "integrated": integrated,
            "binomial_sd": sd,
            "z_score": z,
            "within_3_sd": z <= 3.0,
            "certificate_holds": spec.certificate_holds(d),
        }),
        z <= 3.0,
    ))
}

/// KS critical value at family-wise level 1% over `d` coordinates,
/// `√(ln(2d/α)/2)/√n`, floored at 0.01.
fn ks_threshold(n: usize, d: usize) -> f64 {
    let alpha = 0.01 / d.max(1) as f64;
    ((2.0 / alpha).ln() / 2.0 / n as f64).sqrt().max(0.01)
}

fn marginal(family: &FamilyArgs, dist: DistArg, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    if samples == 0 {
        return Err(CliError::Input("samples must be positive".into()));
    }
    let (spec, cf, params) = lift_setup(family, seed)?;
    let law = dist_spec(dist);
    let boolean = sample_dataset(&cf, samples, LabelMode::Realizable, seed).map_err(input_err)?;
    let real = transform_dataset(&boolean, &law, &params, seed).map_err(input_err)?;
    let lifted = lift_naive_family(&cf, &params).map_err(input_err)?;
    let mismatches = real
        .par_iter()
        .map(|e| Ok(u64::from(lifted.eval_exact(&e.z_exact)? != e.y_tilde)))
        .collect::<Result<Vec<u64>, crate::lift::LiftError>>()
        .map_err(input_err)?
        .into_iter()
        .sum::<u64>();
    let ks: Vec<f64> = (0..cf.d())
        .map(|j| {
            let column: Vec<f64> = real.iter().map(|e| e.z[j]).collect();
            let m = law.marginal(j);
            stats::ks_statistic(&column, |x| m.cdf(x))
        })
        .collect();
    let max_ks = ks.iter().copied().fold(0.0, f64::max);
    let threshold = ks_threshold(samples, cf.d());
    Ok(Outcome::checked(
        json!({
            "family": spec,
            "distribution": law,
            "samples": samples,
            "ks": ks,
            "max_ks": max_ks,
            "ks_threshold": threshold,
            "label_checked": samples,
            "label_mismatches": mismatches,
        }),
        max_ks < threshold && mismatches == 0,
    ))
}

fn case3(family: &FamilyArgs, samples: u64, seed: u64) -> Result<Outcome, CliError> {
    let (spec, cf, params) = lift_setup(family, seed)?;
    let report = case3_discrepancy(&cf, &params, samples, seed).map_err(input_err)?;
    let naive_exact = report.naive.nonzero_fraction == 0.0;
    Ok(Outcome::checked(
        json!({ "family": spec, "naive_exact": naive_exact, "report": report }),
        naive_exact,
    ))
}

fn ensemble(family: &str, n: usize, q: u64, p: u64, d: usize) -> Result<FamilyEnsemble, CliError> {
    match family {
        "lwr" => FamilyEnsemble::lwr(n, q, p),
        "all-functions" | "all_functions" => FamilyEnsemble::all_boolean_functions(d),
        "parities" | "parity" => FamilyEnsemble::parities(d),
        other => {
            return Err(CliError::Input(format!(
                "unknown ensemble {other:?}: expected lwr, all-functions or parities"
            )))
        }
    }
    .map_err(input_err)
}

fn pairwise(family: &str, n: usize, q: u64, p: u64, d: usize, tables: u64, seed: u64) -> Result<Outcome, CliError> {
    let e = ensemble(family, n, q, p, d)?;
    let report = pairwise_check(&e).map_err(input_err)?;
    let checks: Vec<_> = (0..tables)
        .into_par_iter()
        .map(|i| variance_check(&e, &QueryTable::random(&e, 8, seed, i), &report.eta_actual))
        .collect();
    let violations = checks.iter().filter(|c| !c.holds).count() as u64;
    let max_variance = checks.iter().map(|c| c.variance.clone()).max().unwrap_or_else(Rational::zero);
    Ok(Outcome::checked(
        json!({
            "pairwise": report,
            "variance": {
                "tables": tables,
                "violations": violations,
                "max_variance": rational::format(&max_variance),
                "max_variance_f64": rational::to_f64(&max_variance),
                "bound": rational::format(&(Rational::from_integer(2.into()) * &report.eta_actual)),
            },
        }),
        violations == 0,
    ))
}

fn strategy(s: StrategyArg) -> Strategy {
    match s {
        StrategyArg::Random => Strategy::Random,
        StrategyArg::Correlation => Strategy::Correlation,
        StrategyArg::Agreement => Strategy::Agreement,
        StrategyArg::Mixed => Strategy::Mixed,
    }
}

#[allow(clippy::too_many_arguments)]
fn game(
    family: &str,
    n: usize,
    q: u64,
    p: u64,
    d: usize,
    tau: &str,
    queries: u64,
    strat: StrategyArg,
    seed: u64,
) -> Result<Outcome, CliError> {
    let tau = parse_exact(tau)?;
    if tau <= Rational::zero() || tau > Rational::one() {
        return Err(CliError::Input("tau must lie in (0, 1]".into()));
    }
    let e = ensemble(family, n, q, p, d)?;
    let eta = pairwise_check(&e).map_err(input_err)?.eta_actual;
    let transcript = run_game(&e, strategy(strat), queries, &tau, &eta, seed);
    let ok = transcript.violations == 0;
    Ok(Outcome::checked(json!({ "transcript": transcript }), ok))
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    family: &FamilyArgs,
    tau: f64,
    delta: f64,
    budget: u64,
    trials: u64,
    ground_truth_samples: u64,
    oracle: OracleArg,
    oracle_samples: u64,
    m: Option<u64>,
    seed: u64,
) -> Result<Outcome, CliError> {
    let (spec, cf, params) = lift_setup(family, seed)?;
    let mut config = SimulatorConfig::for_tolerance(tau, delta, budget).map_err(input_err)?;
    if let Some(m) = m {
        config.m = m.max(1);
    }
    if ground_truth_samples == 0 {
        return Err(CliError::Input("ground-truth-samples must be positive".into()));
    }
    let dist = DistributionSpec::gaussian();
    let boxed: Box<dyn StatOracle> = match oracle {
        OracleArg::Exact => Box::new(ExactCubeOracle::new(&cf).map_err(input_err)?),
        OracleArg::MonteCarlo => Box::new(MonteCarloOracle::new(cf.clone(), oracle_samples, seed)),
    };
    let report = run_simulation(&cf, &params, &dist, &*boxed, &config, tau, trials, ground_truth_samples, seed)
        .map_err(input_err)?;
    let passed = report.passed;
    Ok(Outcome::checked(json!({ "family": spec, "oracle": oracle, "simulation": report }), passed))
}

fn attack(d: usize, samples: usize, seed: u64) -> Result<Outcome, CliError> {
    if d == 0 {
        return Err(CliError::Input("d must be positive".into()));
    }
    let report = run_parity_attack(d, samples, seed).map_err(input_err)?;
    let ok = report.exact_recovery && report.weak_learning;
    Ok(Outcome::checked(serde_json::to_value(&report).map_err(input_err)?, ok))
}

fn mq_demo(family: &FamilyArgs, queries: u64, seed: u64) -> Result<Outcome, CliError> {
    let (spec, cf, params) = lift_setup(family, seed)?;
    let mut oracle = LiftedQueryOracle::new(FamilyOracle::new(cf.clone()), params.clone());
    let mut mismatches = 0u64;
    for i in 0..queries {
        let z = random_point(&params, PointRegion::Anywhere, seed ^ rng::ids::MQ_DEMO, i);
        let got = oracle.query(&z).map_err(input_err)?;
        let want = reference_eval_family(&cf, &params, &z).map_err(input_err)?;
        mismatches += u64::from(got != want);
    }
    let (real, boolean) = (oracle.real_queries(), oracle.boolean_queries());
    Ok(Outcome::checked(
        json!({
            "family": spec,
            "real_queries": real,
            "boolean_queries": boolean,
            "one_to_one": real == boolean,
            "mismatches": mismatches,
        }),
        mismatches == 0 && real == boolean,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_number_parsing() {
        assert_eq!(parse_exact("1/4").unwrap(), rational::rat(1, 4));
        assert_eq!(parse_exact("0.25").unwrap(), rational::rat(1, 4));
        assert_eq!(parse_exact("0.1").unwrap(), rational::rat(1, 10));
        assert_eq!(parse_exact("2").unwrap(), rational::int(2));
        assert!(parse_exact("0.x").is_err());
        assert!(parse_exact(".").is_err());
    }
}
