use super::{label_map, DistributionSpec, Result};
use crate::families::{BooleanExample, CompressibleFn, DomainConvention, FamilyError};
use crate::gadgets::GadgetParams;
use crate::rational::{self, Rational};
use crate::rng;
use rayon::prelude::*;

/// A real-input example `(z, ỹ)` with `z = g∘x`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealExample {
    pub x: Vec<i8>,
    pub g: Vec<f64>,
    pub z: Vec<f64>,
    /// `z` as exact rationals (every binary64 value is one).
    pub z_exact: Vec<Rational>,
    pub y: Rational,
    pub y_tilde: Rational,
}

fn exact(v: f64) -> Rational {
    rational::from_f64(v).expect("finite sample")
}

/// Transforms with a given half-sample `g ≥ 0`.
pub fn transform_with_half(ex: &BooleanExample, g: &[f64], params: &GadgetParams) -> Result<RealExample> {
    if ex.x.len() != g.len() || !DomainConvention::PmOne.admits(&ex.x) {
        return Err(FamilyError::NotACorner(ex.x.clone()).into());
    }
    let z: Vec<f64> = g.iter().zip(&ex.x).map(|(&gj, &xj)| gj * xj as f64).collect();
    let g_exact: Vec<Rational> = g.iter().map(|&v| exact(v)).collect();
    Ok(RealExample {
        x: ex.x.clone(),
        g: g.to_vec(),
        z_exact: z.iter().map(|&v| exact(v)).collect(),
        z,
        y: ex.y.clone(),
        y_tilde: label_map(&ex.y, &g_exact, params),
    })
}

/// Draws `g` from the positive half of `dist` on stream `(seed, index)`.
pub fn transform_example(
    ex: &BooleanExample,
    dist: &DistributionSpec,
    params: &GadgetParams,
    seed: u64,
    index: u64,
) -> Result<RealExample> {
    let mut r = rng::stream(seed, rng::ids::TRANSFORM, index);
    let g = dist.sample_half(&mut r, ex.x.len());
    transform_with_half(ex, &g, params)
}

pub fn transform_dataset(
    examples: &[BooleanExample],
    dist: &DistributionSpec,
    params: &GadgetParams,
    seed: u64,
) -> Result<Vec<RealExample>> {
    examples
        .par_iter()
        .enumerate()
        .map(|(i, ex)| transform_example(ex, dist, params, seed, i as u64))
        .collect()
}

/// `x ↦ 1[h(g∘x) ≥ 1/2]` with a fresh half-sample `g` per call and `h`
/// clamped to `[0, 1]`.
pub struct WeakPredictor<H> {
    h: H,
    dist: DistributionSpec,
    seed: u64,
}

impl<H: Fn(&[f64]) -> f64 + Sync> WeakPredictor<H> {
    pub fn new(h: H, dist: DistributionSpec, seed: u64) -> Self {
        Self { h, dist, seed }
    }

    pub fn hypothesis(&self, z: &[f64]) -> f64 {
        (self.h)(z).clamp(0.0, 1.0)
    }

    /// Prediction for the `index`-th call.
    pub fn predict(&self, x: &[i8], index: u64) -> u8 {
        let mut r = rng::stream(self.seed, rng::ids::WEAK_PREDICTOR, index);
        let g = self.dist.sample_half(&mut r, x.len());
        let z: Vec<f64> = g.iter().zip(x).map(|(&gj, &xj)| gj * xj as f64).collect();
        u8::from(self.hypothesis(&z) >= 0.5)
    }

    /// Mean of `(B(x) − f(x))²` over `count` seeded uniform `{±1}` corners.
    pub fn empirical_sq_loss(&self, cf: &CompressibleFn, count: u64, seed: u64) -> Result<f64> {
        let d = cf.d();
        let losses: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|i| {
                let mut r = rng::stream(seed, rng::ids::TEST_POINTS, i);
                let x = DomainConvention::PmOne.random_corner(&mut r, d);
                let y = rational::to_f64(&cf.eval_pm(&x)?);
                let b = self.predict(&x, i) as f64;
                Ok((b - y) * (b - y))
            })
            .collect::<Result<_>>()?;
        Ok(losses.iter().sum::<f64>() / count.max(1) as f64)
    }
}
