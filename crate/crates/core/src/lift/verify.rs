use super::{lift_compressed, lift_naive_family, reference_eval_family, LiftedNetwork, Result};
use crate::families::CompressibleFn;
use crate::gadgets::GadgetParams;
use crate::rational::{self, int, Rational};
use crate::rng;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointRegion {
    Anywhere,
    /// Every `|z_j| > δ`.
    OffThreshold,
}

fn exact(v: f64) -> Rational {
    rational::from_f64(v).expect("finite sample")
}

fn signed(r: &mut ChaCha8Rng, v: Rational) -> Rational {
    if r.random::<bool>() {
        -v
    } else {
        v
    }
}

fn gaussian_coord(r: &mut ChaCha8Rng, delta: &Rational, region: PointRegion) -> Rational {
    loop {
        let v = exact(StandardNormal.sample(r));
        if region == PointRegion::Anywhere || v.abs() > *delta {
            return v;
        }
    }
}

/// `|v|` log-uniform on `(lo, hi]`, strictly above `lo`.
fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64, floor: &Rational) -> Rational {
    loop {
        let v = exact(r.random_range(lo.ln()..=hi.ln()).exp());
        if v > *floor && v.is_positive() {
            return v;
        }
    }
}

fn delta_f64(params: &GadgetParams) -> f64 {
    rational::to_f64(&params.delta)
}

/// Standard Gaussian point, exact; in `OffThreshold` mode coordinates with
/// `|z_j| ≤ δ` are redrawn.
pub fn random_point(params: &GadgetParams, region: PointRegion, seed: u64, index: u64) -> Vec<Rational> {
    let mut r = rng::stream(seed, rng::ids::IDENTITY_SWEEP, index);
    (0..params.d).map(|_| gaussian_coord(&mut r, &params.delta, region)).collect()
}

fn adversarial_with(r: &mut ChaCha8Rng, params: &GadgetParams, region: PointRegion) -> Vec<Rational> {
    let d = params.d;
    let delta = &params.delta;
    let two_delta = int(2) * delta;
    let (df, off) = (delta_f64(params), region == PointRegion::OffThreshold);
    let floor = if off { delta.clone() } else { Rational::zero() };
    let lo = if off { df } else { df * 1e-6 };
    let forced = r.random_range(0..d);
    (0..d)
        .map(|j| {
            let kind = if j == forced { 0 } else { r.random_range(0..5) };
            let v = match kind {
                0 => log_uniform(r, lo, 2.0 * df, &floor),
                1 => two_delta.clone(),
                2 if off => delta * rational::rat(3, 2),
                2 => delta.clone(),
                3 if off => log_uniform(r, lo, 2.0 * df, &floor),
                3 => Rational::zero(),
                _ => return gaussian_coord(r, delta, region),
            };
            signed(r, v)
        })
        .collect()
}

/// Boundary-stressing point: coordinates mix log-uniform draws from
/// `(0, 2δ]` (`(δ, 2δ]` off threshold), the exact values `0`, `δ`, `2δ`, and
/// Gaussian draws, with random signs. At least one coordinate is near zero.
pub fn adversarial_point(params: &GadgetParams, region: PointRegion, seed: u64, index: u64) -> Vec<Rational> {
    let mut r = rng::stream(seed, rng::ids::ADVERSARIAL, index);
    adversarial_with(&mut r, params, region)
}

/// Adversarial point with one coordinate forced into `[0, δ]`.
fn case3_point(params: &GadgetParams, seed: u64, index: u64) -> Vec<Rational> {
    let mut r = rng::stream(seed, rng::ids::ADVERSARIAL, index);
    let mut z = adversarial_with(&mut r, params, PointRegion::Anywhere);
    let j = r.random_range(0..params.d);
    let df = delta_f64(params);
    let v = match r.random_range(0..4) {
        0 => Rational::zero(),
        1 => params.delta.clone(),
        _ => log_uniform(&mut r, df * 1e-6, df, &Rational::zero()).min(params.delta.clone()),
    };
    z[j] = signed(&mut r, v);
    z
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub region: PointRegion,
    pub random: u64,
    pub adversarial: u64,
    pub checked: u64,
    pub failures: u64,
    pub max_abs_deviation: f64,
    pub max_abs_deviation_exact: String,
}

/// Compares `lifted` with `reference` exactly on `random` Gaussian and
/// `adversarial` boundary points.
pub fn verify_identity(
    lifted: &LiftedNetwork,
    reference: &(dyn Fn(&[Rational]) -> Result<Rational> + Sync),
    random: u64,
    adversarial: u64,
    region: PointRegion,
    seed: u64,
) -> Result<IdentityReport> {
    let params = &lifted.params;
    let deviations: Vec<Rational> = (0..random + adversarial)
        .into_par_iter()
        .map(|i| {
            let z = if i < random {
                random_point(params, region, seed, i)
            } else {
                adversarial_point(params, region, seed, i - random)
            };
            Ok((lifted.eval_exact(&z)? - reference(&z)?).abs())
        })
        .collect::<Result<_>>()?;
    let failures = deviations.iter().filter(|v| !v.is_zero()).count() as u64;
    let max = deviations.into_iter().max().unwrap_or_else(Rational::zero);
    Ok(IdentityReport {
        region,
        random,
        adversarial,
        checked: random + adversarial,
        failures,
        max_abs_deviation: rational::to_f64(&max),
        max_abs_deviation_exact: rational::format(&max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationStats {
    pub max_abs_deviation: f64,
    pub max_abs_deviation_exact: String,
    pub mean_abs_deviation: f64,
    pub nonzero_fraction: f64,
}

impl DeviationStats {
    fn from(devs: &[Rational]) -> Self {
        let n = devs.len().max(1) as f64;
        let max = devs.iter().max().cloned().unwrap_or_else(Rational::zero);
        Self {
            max_abs_deviation: rational::to_f64(&max),
            max_abs_deviation_exact: rational::format(&max),
            mean_abs_deviation: devs.iter().map(rational::to_f64).sum::<f64>() / n,
            nonzero_fraction: devs.iter().filter(|v| !v.is_zero()).count() as f64 / n,
        }
    }
}

/// Deviation of both lifts from the reference where some `|z_j| ≤ δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Case3Report {
    pub samples: u64,
    pub compressed: DeviationStats,
    pub naive: DeviationStats,
}

pub fn case3_discrepancy(cf: &CompressibleFn, params: &GadgetParams, samples: u64, seed: u64) -> Result<Case3Report> {
    let compressed = lift_compressed(cf, params)?;
    let naive = lift_naive_family(cf, params)?;
    let pairs: Vec<(Rational, Rational)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let z = case3_point(params, seed, i);
            let want = reference_eval_family(cf, params, &z)?;
            Ok((
                (compressed.eval_exact(&z)? - &want).abs(),
                (naive.eval_exact(&z)? - &want).abs(),
            ))
        })
        .collect::<Result<_>>()?;
    let (c, n): (Vec<Rational>, Vec<Rational>) = pairs.into_iter().unzip();
    Ok(Case3Report {
        samples,
        compressed: DeviationStats::from(&c),
        naive: DeviationStats::from(&n),
    })
}
