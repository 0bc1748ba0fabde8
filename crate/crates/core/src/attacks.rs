//! Learning lifted parities from raw examples by Gaussian elimination.
//!
//! Examples whose coordinates all satisfy `|z_j| ≥ 2/d²` carry the clean
//! Boolean pair `(sgn z, f(sgn z))`; for a parity each such pair is one
//! linear equation over GF(2).
//!
//! The attack consumes examples, never statistical queries. It cannot be
//! driven through an SQ oracle:
//!
//! ```compile_fail
//! use hardnet::attacks::attack_lifted_parity;
//! use hardnet::gadgets::GadgetParams;
//! use hardnet::sq::ExactCubeOracle;
//!
//! fn learn(oracle: &ExactCubeOracle, params: &GadgetParams) {
//!     let _ = attack_lifted_parity(oracle, params);
//! }
//! ```

use crate::families::{
    build_parity, sample_dataset, BooleanExample, CompressibleFn, FamilyError, FamilySpec, LabelMode, ParitySpec,
};
use crate::gadgets::{n2_closed_form_f64, GadgetParams};
use crate::lift::{
    default_params_for, in_good_set, sgn_vec, transform_dataset, DistributionSpec, LiftError, RealExample,
    WeakPredictor,
};
use crate::rational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum AttackError {
    #[error("kept example {index} has label {label}, not 0 or 1")]
    NonBooleanLabel { index: usize, label: String },
    #[error("parity system is inconsistent: the source is not a realizable lifted parity")]
    Inconsistent,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Lift(#[from] LiftError),
}

pub type Result<T> = std::result::Result<T, AttackError>;

const WORD: usize = 64;

/// Linear system over GF(2), rows packed into 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2System {
    cols: usize,
    rows: Vec<Vec<u64>>,
    rhs: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gf2Solution {
    pub bits: Vec<u8>,
    pub rank: usize,
    pub consistent: bool,
}

impl Gf2System {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Adds `Σ_{j : coeffs[j]} x_j = rhs`.
    pub fn push(&mut self, coeffs: &[bool], rhs: bool) {
        assert_eq!(coeffs.len(), self.cols, "row width");
        let mut row = vec![0u64; self.cols.div_ceil(WORD)];
        for (j, _) in coeffs.iter().enumerate().filter(|(_, &c)| c) {
            row[j / WORD] |= 1 << (j % WORD);
        }
        self.rows.push(row);
        self.rhs.push(rhs);
    }
}

fn bit(row: &[u64], j: usize) -> bool {
    row[j / WORD] >> (j % WORD) & 1 == 1
}

/// Gauss–Jordan elimination; free variables are set to 0.
pub fn gf2_solve(system: &Gf2System) -> Gf2Solution {
    let mut rows = system.rows.clone();
    let mut rhs = system.rhs.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..system.cols {
        let Some(p) = (r..rows.len()).find(|&i| bit(&rows[i], c)) else {
            continue;
        };
        rows.swap(r, p);
        rhs.swap(r, p);
        let (pivot_row, pivot_rhs) = (rows[r].clone(), rhs[r]);
        for i in 0..rows.len() {
            if i != r && bit(&rows[i], c) {
                rows[i].iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                rhs[i] ^= pivot_rhs;
            }
        }
        pivots.push(c);
        r += 1;
    }
    let consistent = rhs[r..].iter().all(|&b| !b);
    let mut bits = vec![0u8; system.cols];
    for (i, &c) in pivots.iter().enumerate() {
        bits[c] = rhs[i] as u8;
    }
    Gf2Solution {
        bits,
        rank: pivots.len(),
        consistent,
    }
}

/// Keeps examples with every `|z_j| ≥ 2/d²`, as `(sgn z, ỹ)`.
pub fn filter_dataset(data: &[RealExample], params: &GadgetParams) -> Result<Vec<BooleanExample>> {
    let kept: Vec<Option<BooleanExample>> = data
        .par_iter()
        .enumerate()
        .map(|(i, ex)| {
            if !in_good_set(&ex.z_exact, params) {
                return Ok(None);
            }
            if !(ex.y_tilde.is_zero() || ex.y_tilde.is_one()) {
                return Err(AttackError::NonBooleanLabel {
                    index: i,
                    label: rational::format(&ex.y_tilde),
                });
            }
            Ok(Some(BooleanExample {
                x: sgn_vec(&ex.z_exact),
                y: ex.y_tilde.clone(),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(kept.into_iter().flatten().collect())
}

/// `b ↦ Σ_{j∈S} b_j + c (mod 2)` over `b_j = (1 − x_j)/2`.
pub fn parity_system(clean: &[BooleanExample], d: usize) -> Gf2System {
    let mut sys = Gf2System::new(d + 1);
    for ex in clean {
        let mut coeffs: Vec<bool> = ex.x.iter().map(|&v| v == -1).collect();
        coeffs.push(true);
        sys.push(&coeffs, ex.y.is_one());
    }
    sys
}

/// A recovered affine parity lifted back to real inputs.
#[derive(Debug, Clone)]
pub struct LiftedParityHypothesis {
    pub subset: BTreeSet<usize>,
    pub constant: bool,
    pub params: GadgetParams,
}

impl LiftedParityHypothesis {
    pub fn boolean(&self, x: &[i8]) -> u8 {
        let flips = self.subset.iter().filter(|&&j| x[j - 1] == -1).count();
        ((flips % 2) as u8) ^ self.constant as u8
    }

    /// `relu(f̂(sgn z) − K·N2(z))` in binary64.
    pub fn eval(&self, z: &[f64]) -> f64 {
        let x: Vec<i8> = z.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect();
        let k = rational::to_f64(&self.params.n2_scale);
        (self.boolean(&x) as f64 - n2_closed_form_f64(self.params.d, k, z)).max(0.0)
    }

    pub fn as_family(&self) -> Result<Option<CompressibleFn>> {
        if self.constant {
            return Ok(None);
        }
        Ok(Some(build_parity(&ParitySpec::new(self.params.d, self.subset.clone())?)?))
    }
}

#[derive(Debug, Clone)]
pub struct AttackOutcome {
    pub kept: usize,
    pub rank: usize,
    pub underdetermined: bool,
    pub hypothesis: LiftedParityHypothesis,
}

/// Filter, encode one equation per kept example, eliminate.
pub fn attack_lifted_parity(data: &[RealExample], params: &GadgetParams) -> Result<AttackOutcome> {
    let d = params.d;
    let clean = filter_dataset(data, params)?;
    let solution = gf2_solve(&parity_system(&clean, d));
    if !solution.consistent {
        return Err(AttackError::Inconsistent);
    }
    let subset = (0..d).filter(|&j| solution.bits[j] == 1).map(|j| j + 1).collect();
    Ok(AttackOutcome {
        kept: clean.len(),
        rank: solution.rank,
        underdetermined: solution.rank < d + 1,
        hypothesis: LiftedParityHypothesis {
            subset,
            constant: solution.bits[d] == 1,
            params: params.clone(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub d: usize,
    pub samples: usize,
    pub planted_subset: Vec<usize>,
    pub kept: usize,
    pub rank: usize,
    pub underdetermined: bool,
    pub recovered_subset: Vec<usize>,
    pub recovered_constant: bool,
    pub exact_recovery: bool,
    pub test_corners: u64,
    pub empirical_sq_loss: f64,
    pub weak_learning: bool,
}

pub const TEST_CORNERS: u64 = 10_000;

/// End to end: plant a seeded parity, draw `samples` realizable Gaussian
/// examples of its naive lift, attack, and score the weak predictor built
/// from the hypothesis on seeded test corners.
pub fn run_parity_attack(d: usize, samples: usize, seed: u64) -> Result<AttackReport> {
    let FamilySpec::Parity { subset: planted, .. } = FamilySpec::random_parity(d, seed) else {
        unreachable!("random_parity builds a parity spec")
    };
    let cf = build_parity(&ParitySpec::new(d, planted.iter().copied().collect())?)?;
    let params = default_params_for(&cf)?;
    let dist = DistributionSpec::gaussian();
    let boolean = sample_dataset(&cf, samples, LabelMode::Realizable, seed)?;
    let real = transform_dataset(&boolean, &dist, &params, seed)?;
    let outcome = attack_lifted_parity(&real, &params)?;
    let h = &outcome.hypothesis;
    let predictor = WeakPredictor::new(|z: &[f64]| h.eval(z), dist, seed);
    let loss = predictor.empirical_sq_loss(&cf, TEST_CORNERS, seed)?;
    let recovered: Vec<usize> = h.subset.iter().copied().collect();
    Ok(AttackReport {
        d,
        samples,
        exact_recovery: recovered == planted && !h.constant,
        planted_subset: planted,
        kept: outcome.kept,
        rank: outcome.rank,
        underdetermined: outcome.underdetermined,
        recovered_subset: recovered,
        recovered_constant: h.constant,
        test_corners: TEST_CORNERS,
        empirical_sq_loss: loss,
        weak_learning: loss < 1.0 / 16.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub kept_rows: usize,
    pub trials: u64,
    pub exact_recoveries: u64,
    pub recovery_rate: f64,
}

/// Exact-recovery rate as a function of the number of kept rows. Each trial
/// draws Gaussian examples until `kept_rows` survive the filter.
pub fn recovery_curve(d: usize, kept_rows: &[usize], trials: u64, seed: u64) -> Result<Vec<CurvePoint>> {
    let dist = DistributionSpec::gaussian();
    kept_rows
        .iter()
        .map(|&k| {
            let hits: Vec<bool> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let trial_seed = seed ^ ((k as u64) << 32 | t).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                    let FamilySpec::Parity { subset, .. } = FamilySpec::random_parity(d, trial_seed) else {
                        unreachable!("random_parity builds a parity spec")
                    };
                    let cf = build_parity(&ParitySpec::new(d, subset.iter().copied().collect())?)?;
                    let params = default_params_for(&cf)?;
                    let mut clean = Vec::with_capacity(k);
                    let mut batch = 0u64;
                    while clean.len() < k {
                        let boolean = sample_dataset(&cf, 2 * k, LabelMode::Realizable, trial_seed.wrapping_add(batch))?;
                        let real = transform_dataset(&boolean, &dist, &params, trial_seed.wrapping_add(batch))?;
                        clean.extend(filter_dataset(&real, &params)?);
                        batch += 1;
                    }
                    clean.truncate(k);
                    let s = gf2_solve(&parity_system(&clean, d));
                    let got: Vec<usize> = (0..d).filter(|&j| s.bits[j] == 1).map(|j| j + 1).collect();
                    Ok(s.consistent && got == subset && s.bits[d] == 0)
                })
                .collect::<Result<_>>()?;
            let n = hits.iter().filter(|&&h| h).count() as u64;
            Ok(CurvePoint {
                kept_rows: k,
                trials,
                exact_recoveries: n,
                recovery_rate: n as f64 / trials.max(1) as f64,
            })
        })
        .collect()
}
