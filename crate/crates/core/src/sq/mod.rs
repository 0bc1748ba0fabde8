//! Statistical-query oracles, the Boolean-to-real query simulator, and the
//! finite pairwise-independence machinery.

mod ensemble;
mod game;
mod sim;

pub use ensemble::{pairwise_check, variance_check, FamilyEnsemble, PairwiseReport, QueryTable, VarianceCheck};
pub use game::{run_game, GameState, Response, Strategy, Transcript};
pub use sim::{query_catalogue, run_simulation, GroundTruth, NamedQuery, SimulationReport, TrialResult};

use crate::families::{CompressibleFn, DomainConvention, FamilyError};
use crate::gadgets::{n2_closed_form_f64, GadgetParams};
use crate::lift::{label_map, DistributionSpec, LiftError, LiftedNetwork};
use crate::rational::{self, Rational};
use crate::{rng, stats};
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

#[derive(Debug, thiserror::Error)]
pub enum SqError {
    #[error("{0}")]
    Invalid(String),
    #[error("enumeration needs {work} work units, limit is {limit}")]
    Budget { work: u64, limit: u64 },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

pub type Result<T> = std::result::Result<T, SqError>;

/// Largest cube dimension for exact enumeration.
pub const MAX_EXACT_D: usize = 20;

/// Boolean query `φ(x, y)` on `{±1}` corners.
pub type BoolQuery<'a> = dyn Fn(&[i8], f64) -> f64 + Sync + 'a;
/// Real query `ψ(z, y)`.
pub type RealQuery<'a> = dyn Fn(&[f64], f64) -> f64 + Sync + 'a;

static CLAMP_WARNED: AtomicBool = AtomicBool::new(false);

/// Clamps a query value into `[−1, 1]`, warning once per process.
pub fn clamp_query(v: f64) -> f64 {
    if !(-1.0..=1.0).contains(&v) && !CLAMP_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("query value {v} outside [-1, 1]; clamping");
    }
    v.clamp(-1.0, 1.0)
}

/// Tolerance-`τ` statistical oracle for a fixed Boolean target.
pub trait StatOracle: Sync {
    /// `query_id` identifies the call so randomized oracles stay
    /// deterministic under any evaluation order.
    fn answer(&self, phi: &BoolQuery<'_>, tolerance: f64, query_id: u64) -> Result<f64>;
    fn queries(&self) -> u64;
}

fn pm_table(cf: &CompressibleFn) -> Result<Vec<(Vec<i8>, f64)>> {
    let d = cf.d();
    if d > MAX_EXACT_D {
        return Err(SqError::Invalid(format!("d = {d} exceeds the enumeration limit {MAX_EXACT_D}")));
    }
    (0..1u64 << d)
        .map(|i| {
            let x = DomainConvention::PmOne.corner(i, d);
            let y = rational::to_f64(&cf.eval_pm(&x)?);
            Ok((x, y))
        })
        .collect()
}

/// `E_x φ(x, f(x))` over all `{±1}` corners, exactly.
pub fn exact_expectation(
    phi: &(dyn Fn(&[i8], &Rational) -> Rational + Sync),
    cf: &CompressibleFn,
) -> Result<Rational> {
    let d = cf.d();
    if d > MAX_EXACT_D {
        return Err(SqError::Invalid(format!("d = {d} exceeds the enumeration limit {MAX_EXACT_D}")));
    }
    let terms: Vec<Rational> = (0..1u64 << d)
        .into_par_iter()
        .map(|i| {
            let x = DomainConvention::PmOne.corner(i, d);
            Ok(phi(&x, &cf.eval_pm(&x)?))
        })
        .collect::<Result<_>>()?;
    let n = Rational::from_integer((1u64 << d).into());
    Ok(terms.into_iter().fold(Rational::zero(), |a, v| a + v) / n)
}

/// Answers with the exact enumerated mean (binary64, ascending corner order).
pub struct ExactCubeOracle {
    table: Vec<(Vec<i8>, f64)>,
    count: AtomicU64,
}

impl ExactCubeOracle {
    pub fn new(cf: &CompressibleFn) -> Result<Self> {
        Ok(Self {
            table: pm_table(cf)?,
            count: AtomicU64::new(0),
        })
    }
}

impl StatOracle for ExactCubeOracle {
    fn answer(&self, phi: &BoolQuery<'_>, _tolerance: f64, _query_id: u64) -> Result<f64> {
        self.count.fetch_add(1, Ordering::Relaxed);
        let total: f64 = self.table.iter().map(|(x, y)| clamp_query(phi(x, *y))).sum();
        Ok(total / self.table.len() as f64)
    }

    fn queries(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// Seeded empirical mean over `samples` uniform corners.
pub struct MonteCarloOracle {
    cf: CompressibleFn,
    samples: u64,
    seed: u64,
    count: AtomicU64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    /// Hoeffding half-width at 99% confidence.
    pub half_width: f64,
    pub samples: u64,
}

pub const HOEFFDING_ALPHA: f64 = 0.01;

impl MonteCarloOracle {
    pub fn new(cf: CompressibleFn, samples: u64, seed: u64) -> Self {
        Self {
            cf,
            samples: samples.max(1),
            seed,
            count: AtomicU64::new(0),
        }
    }

    pub fn estimate(&self, phi: &BoolQuery<'_>, query_id: u64) -> Result<Estimate> {
        self.count.fetch_add(1, Ordering::Relaxed);
        let mut r = rng::stream(self.seed, rng::ids::MONTE_CARLO, query_id);
        let d = self.cf.d();
        let mut total = 0.0;
        for _ in 0..self.samples {
            let x = DomainConvention::PmOne.random_corner(&mut r, d);
            let y = rational::to_f64(&self.cf.eval_pm(&x)?);
            total += clamp_query(phi(&x, y));
        }
        Ok(Estimate {
            value: total / self.samples as f64,
            half_width: stats::hoeffding_half_width(self.samples, HOEFFDING_ALPHA),
            samples: self.samples,
        })
    }
}

impl StatOracle for MonteCarloOracle {
    fn answer(&self, phi: &BoolQuery<'_>, _tolerance: f64, query_id: u64) -> Result<f64> {
        Ok(self.estimate(phi, query_id)?.value)
    }

    fn queries(&self) -> u64 {
        self.count.load(Ordering::Relaxed)
    }
}

/// Batch size and query budget of the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulatorConfig {
    pub m: u64,
    pub delta: f64,
    pub budget: u64,
}

impl SimulatorConfig {
    /// `m = ⌈(8/τ²) ln(2Q/δ)⌉`: with `m` half-samples, an average of
    /// `[−1, 1]` values deviates by more than `τ/2` with probability at most
    /// `δ/Q`, leaving `τ/2` for the Boolean oracle's slack.
    pub fn for_tolerance(tau: f64, delta: f64, budget: u64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) || !(delta > 0.0 && delta < 1.0) || budget == 0 {
            return Err(SqError::Invalid(format!("bad simulator parameters tau={tau} delta={delta} Q={budget}")));
        }
        let m = ((8.0 / (tau * tau)) * (2.0 * budget as f64 / delta).ln()).ceil() as u64;
        Ok(Self { m: m.max(1), delta, budget })
    }
}

/// The label `ỹ(y, g) = relu(y − K·N2(g))` in binary64.
pub fn y_tilde_f64(params: &GadgetParams, y: f64, g: &[f64]) -> f64 {
    (y - n2_closed_form_f64(params.d, rational::to_f64(&params.n2_scale), g)).max(0.0)
}

/// Answers a real query `ψ(z, ỹ)` about the lifted target using only a
/// Boolean oracle: for each of `m` seeded half-samples `g^i`, asks the
/// tolerance-`τ/2` query `φ_i(x, y) = ψ(x∘g^i, ỹ(y, g^i))` and averages.
#[allow(clippy::too_many_arguments)]
pub fn simulate_continuous_query(
    psi: &RealQuery<'_>,
    oracle: &dyn StatOracle,
    params: &GadgetParams,
    dist: &DistributionSpec,
    config: &SimulatorConfig,
    tau: f64,
    seed: u64,
    query_id: u64,
) -> Result<f64> {
    let d = params.d;
    let answers: Vec<f64> = (0..config.m)
        .into_par_iter()
        .map(|i| {
            let id = query_id * config.m + i;
            let mut r = rng::stream(seed, rng::ids::SIMULATOR, id);
            let g = dist.sample_half(&mut r, d);
            let n2 = n2_closed_form_f64(d, rational::to_f64(&params.n2_scale), &g);
            let phi = |x: &[i8], y: f64| {
                let z: Vec<f64> = g.iter().zip(x).map(|(&gj, &xj)| gj * xj as f64).collect();
                psi(&z, (y - n2).max(0.0))
            };
            oracle.answer(&phi, tau / 2.0, id)
        })
        .collect::<Result<_>>()?;
    Ok(answers.iter().sum::<f64>() / config.m as f64)
}

const GROUND_TRUTH_CHUNK: u64 = 1 << 14;

/// Direct Monte Carlo of `E ψ(z, f^lift(z))`, `z ∼ dist`, with the lift
/// evaluated in closed form.
pub fn continuous_monte_carlo(
    psi: &RealQuery<'_>,
    cf: &CompressibleFn,
    params: &GadgetParams,
    dist: &DistributionSpec,
    samples: u64,
    seed: u64,
    query_id: u64,
) -> Result<Estimate> {
    let table: Vec<f64> = pm_table(cf)?.into_iter().map(|(_, y)| y).collect();
    let d = cf.d();
    let chunks = samples.div_ceil(GROUND_TRUTH_CHUNK);
    let sums: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng::stream(seed, rng::ids::GROUND_TRUTH, (query_id << 32) | c);
            let n = GROUND_TRUTH_CHUNK.min(samples - c * GROUND_TRUTH_CHUNK);
            let mut s = 0.0;
            for _ in 0..n {
                let z = dist.sample(&mut r, d);
                let index = z
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (j, &v)| acc | (usize::from(v < 0.0) << j));
                let abs: Vec<f64> = z.iter().map(|v| v.abs()).collect();
                s += clamp_query(psi(&z, y_tilde_f64(params, table[index], &abs)));
            }
            s
        })
        .collect();
    Ok(Estimate {
        value: sums.iter().sum::<f64>() / samples as f64,
        half_width: stats::hoeffding_half_width(samples, HOEFFDING_ALPHA),
        samples,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnbiasednessReport {
    pub corners: u64,
    pub mismatches: u64,
    #[serde(with = "rational::serde_str")]
    pub boolean_expectation: Rational,
    #[serde(with = "rational::serde_str")]
    pub continuous_expectation: Rational,
}

/// For a fixed half-sample `g`, compares `E_x ỹ(f(x), g)` (what the Boolean
/// oracle sees) with `E_x f^lift(g∘x)` (the continuous expectation given
/// `g`) corner by corner, exactly.
pub fn unbiasedness_check(cf: &CompressibleFn, lifted: &LiftedNetwork, g: &[Rational]) -> Result<UnbiasednessReport> {
    let d = cf.d();
    if d > MAX_EXACT_D || g.len() != d {
        return Err(SqError::Invalid(format!("need g of length d = {d} ≤ {MAX_EXACT_D}")));
    }
    let pairs: Vec<(Rational, Rational)> = (0..1u64 << d)
        .into_par_iter()
        .map(|i| {
            let x = DomainConvention::PmOne.corner(i, d);
            let y = cf.eval_pm(&x)?;
            let z: Vec<Rational> = g.iter().zip(&x).map(|(gj, &xj)| gj * Rational::from_integer(xj.into())).collect();
            Ok((label_map(&y, g, &lifted.params), lifted.eval_exact(&z)?))
        })
        .collect::<Result<_>>()?;
    let mismatches = pairs.iter().filter(|(a, b)| a != b).count() as u64;
    let n = Rational::from_integer((1u64 << d).into());
    let (a, b) = pairs
        .into_iter()
        .fold((Rational::zero(), Rational::zero()), |(sa, sb), (a, b)| (sa + a, sb + b));
    Ok(UnbiasednessReport {
        corners: 1 << d,
        mismatches,
        boolean_expectation: a / &n,
        continuous_expectation: b / n,
    })
}
