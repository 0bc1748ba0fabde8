//! Compressible Boolean families `f = σ ∘ h` and labeled dataset sampling.

mod dataset;
mod keyed;
mod lwr;
mod parity;

pub use dataset::{read_jsonl, sample_dataset, write_jsonl, BooleanExample, LabelMode};
pub use keyed::build_keyed_toy;
pub use lwr::{build_lwr, decode_zq, encode_zq, lwr_label, round_to_p, LwrInstance};
pub use parity::{build_parity, ParitySpec};

use crate::relu_ir::{self, compile_pwl, compose, NetworkError, PwlFunction, ReluNetwork};
use crate::rational::{int, rat, Rational};
use crate::rng;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, thiserror::Error)]
pub enum FamilyError {
    #[error("invalid family parameters: {0}")]
    InvalidParams(String),
    #[error("input {0:?} is not a corner of the cube for this family")]
    NotACorner(Vec<i8>),
    #[error("inner network value {0} is outside the declared range")]
    OutOfRange(String),
    #[error("value {value} out of range for modulus {modulus}")]
    OutOfModulus { value: u64, modulus: u64 },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Gadget(#[from] crate::gadgets::GadgetError),
    #[error("dataset line {line}: {reason}")]
    Dataset { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FamilyError>;

/// Whether corners are written in `{±1}` or `{0,1}`. The two are related by
/// `b = (1 − x)/2`, so corner index bit `j` set means `x_j = −1` / `b_j = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainConvention {
    PmOne,
    ZeroOne,
}

impl DomainConvention {
    pub fn corner(self, index: u64, d: usize) -> Vec<i8> {
        (0..d)
            .map(|j| {
                let bit = (index >> j & 1) as i8;
                match self {
                    DomainConvention::PmOne => 1 - 2 * bit,
                    DomainConvention::ZeroOne => bit,
                }
            })
            .collect()
    }

    pub fn admits(self, x: &[i8]) -> bool {
        x.iter().all(|&v| match self {
            DomainConvention::PmOne => v == 1 || v == -1,
            DomainConvention::ZeroOne => v == 0 || v == 1,
        })
    }

    pub fn random_corner<R: Rng>(self, rng: &mut R, d: usize) -> Vec<i8> {
        (0..d)
            .map(|_| {
                let bit: bool = rng.random();
                match (self, bit) {
                    (DomainConvention::PmOne, true) => -1,
                    (DomainConvention::PmOne, false) => 1,
                    (DomainConvention::ZeroOne, b) => b as i8,
                }
            })
            .collect()
    }
}

pub fn pm_to_zero_one(x: &[i8]) -> Vec<i8> {
    x.iter().map(|&v| (1 - v) / 2).collect()
}

pub fn zero_one_to_pm(b: &[i8]) -> Vec<i8> {
    b.iter().map(|&v| 1 - 2 * v).collect()
}

pub fn corner_rationals(x: &[i8]) -> Vec<Rational> {
    x.iter().map(|&v| int(v as i64)).collect()
}

/// `f(x) = σ(h(x))` with `h` integer-valued on the cube and `σ: T → [0, 1]`.
#[derive(Debug, Clone)]
pub struct CompressibleFn {
    name: String,
    inner_h: ReluNetwork,
    sigma: BTreeMap<i64, Rational>,
    convention: DomainConvention,
    labels: Vec<Rational>,
    h_bound: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RangeCertificate {
    pub checked: u64,
    pub violations: u64,
    pub exhaustive: bool,
}

impl CompressibleFn {
    /// `labels` is the declared codomain used for randomly labeled data.
    pub fn new(
        name: impl Into<String>,
        inner_h: ReluNetwork,
        sigma: BTreeMap<i64, Rational>,
        convention: DomainConvention,
        labels: Vec<Rational>,
    ) -> Result<Self> {
        if inner_h.output_dim() != 1 {
            return Err(FamilyError::InvalidParams("inner network must be scalar".into()));
        }
        if sigma.is_empty() {
            return Err(FamilyError::InvalidParams("range set is empty".into()));
        }
        if sigma.values().any(|v| v.is_negative() || *v > Rational::one()) {
            return Err(FamilyError::InvalidParams("sigma values must lie in [0, 1]".into()));
        }
        if labels.is_empty() {
            return Err(FamilyError::InvalidParams("label alphabet is empty".into()));
        }
        let h_bound = sigma.keys().map(|t| t.abs()).max().unwrap_or(0);
        Ok(Self {
            name: name.into(),
            inner_h,
            sigma,
            convention,
            labels,
            h_bound,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn d(&self) -> usize {
        self.inner_h.input_dim()
    }

    pub fn inner_h(&self) -> &ReluNetwork {
        &self.inner_h
    }

    pub fn range_t(&self) -> BTreeSet<i64> {
        self.sigma.keys().copied().collect()
    }

    pub fn sigma(&self) -> &BTreeMap<i64, Rational> {
        &self.sigma
    }

    pub fn convention(&self) -> DomainConvention {
        self.convention
    }

    pub fn labels(&self) -> &[Rational] {
        &self.labels
    }

    /// Stored bound on `|h(x)|` over the cube.
    pub fn h_bound(&self) -> i64 {
        self.h_bound
    }

    /// Hidden layers of the full network `σ ∘ h`.
    pub fn hidden_layers(&self) -> usize {
        self.inner_h.hidden_layers() + 1
    }

    pub fn inner_value(&self, x: &[i8]) -> Result<i64> {
        if x.len() != self.d() || !self.convention.admits(x) {
            return Err(FamilyError::NotACorner(x.to_vec()));
        }
        let t = self.inner_h.eval_exact_scalar(&corner_rationals(x))?;
        t.to_integer()
            .to_i64()
            .filter(|v| t.is_integer() && self.sigma.contains_key(v))
            .ok_or_else(|| FamilyError::OutOfRange(crate::rational::format(&t)))
    }

    /// `σ(h(x))` for a corner in this family's convention.
    pub fn eval(&self, x: &[i8]) -> Result<Rational> {
        let t = self.inner_value(x)?;
        Ok(self.sigma[&t].clone())
    }

    /// Evaluates on a `{±1}` corner regardless of the native convention.
    pub fn eval_pm(&self, x_pm: &[i8]) -> Result<Rational> {
        match self.convention {
            DomainConvention::PmOne => self.eval(x_pm),
            DomainConvention::ZeroOne => self.eval(&pm_to_zero_one(x_pm)),
        }
    }

    pub fn eval_index(&self, index: u64) -> Result<Rational> {
        self.eval(&self.convention.corner(index, self.d()))
    }

    pub fn sigma_pwl(&self) -> Result<PwlFunction> {
        Ok(PwlFunction::from_table(self.sigma.iter().map(|(t, v)| (*t, v)))?)
    }

    /// `compile_pwl(σ) ∘ h`: an `(L)`-hidden-layer network equal to `f` on
    /// the cube, with σ held constant outside `[min T, max T]`.
    pub fn to_network(&self) -> Result<ReluNetwork> {
        Ok(compose(&compile_pwl(&self.sigma_pwl()?)?, &self.inner_h)?)
    }

    /// The same family read on `{±1}` corners: the conversion `b = (1 − x)/2`
    /// is fused into `h`'s first layer.
    pub fn to_pm_one(&self) -> Result<Self> {
        if self.convention == DomainConvention::PmOne {
            return Ok(self.clone());
        }
        let d = self.d();
        let weights = (0..d)
            .map(|j| {
                let mut row = vec![Rational::zero(); d];
                row[j] = rat(-1, 2);
                row
            })
            .collect();
        let convert = ReluNetwork::affine(weights, vec![rat(1, 2); d])?;
        let inner_h = relu_ir::compose(&self.inner_h, &convert)?;
        Ok(Self {
            name: self.name.clone(),
            inner_h,
            sigma: self.sigma.clone(),
            convention: DomainConvention::PmOne,
            labels: self.labels.clone(),
            h_bound: self.h_bound,
        })
    }

    /// All `2^d` labels, indexed by corner index.
    pub fn truth_table(&self) -> Result<Vec<Rational>> {
        if self.d() > 24 {
            return Err(FamilyError::InvalidParams(format!("d = {} too large to tabulate", self.d())));
        }
        (0..1u64 << self.d()).map(|i| self.eval_index(i)).collect()
    }

    /// Checks `h(x) ∈ T` on every corner when `d ≤ exhaustive_limit`, else on
    /// `samples` seeded random corners.
    pub fn certify_range(&self, exhaustive_limit: usize, samples: u64, seed: u64) -> RangeCertificate {
        let d = self.d();
        let check = |x: &[i8]| self.inner_value(x).is_ok_and(|t| t.abs() <= self.h_bound);
        if d <= exhaustive_limit {
            let total = 1u64 << d;
            let violations = (0..total)
                .filter(|&i| !check(&self.convention.corner(i, d)))
                .count() as u64;
            RangeCertificate {
                checked: total,
                violations,
                exhaustive: true,
            }
        } else {
            let violations = (0..samples)
                .filter(|&i| {
                    let mut r = rng::stream(seed, rng::ids::TEST_POINTS, i);
                    !check(&self.convention.random_corner(&mut r, d))
                })
                .count() as u64;
            RangeCertificate {
                checked: samples,
                violations,
                exhaustive: false,
            }
        }
    }

    /// The family with every label replaced by zero.
    pub fn zeroed(&self) -> Self {
        let mut out = self.clone();
        for v in out.sigma.values_mut() {
            *v = Rational::zero();
        }
        out.name = format!("zero({})", self.name);
        out
    }
}

/// Serializable family description: `{ "kind": "parity" | "lwr" | "keyed_toy", ... }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Parity {
        d: usize,
        /// 1-based coordinates.
        subset: Vec<usize>,
    },
    Lwr {
        n: usize,
        q: u64,
        p: u64,
        w: Vec<u64>,
    },
    KeyedToy {
        d: usize,
        key: u64,
        depth_budget: usize,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<CompressibleFn> {
        match self {
            FamilySpec::Parity { d, subset } => build_parity(&ParitySpec::new(*d, subset.iter().copied().collect())?),
            FamilySpec::Lwr { n, q, p, w } => build_lwr(&LwrInstance::new(*n, *p, *q, w.clone())?),
            FamilySpec::KeyedToy { d, key, depth_budget } => build_keyed_toy(*key, *d, *depth_budget),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| FamilyError::InvalidParams(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family spec serializes")
    }

    /// Parity over a seeded, nonempty random subset of `{1, …, d}`.
    pub fn random_parity(d: usize, seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::ids::FAMILY_PARAMS, 0);
        let mut subset: Vec<usize> = (1..=d).filter(|_| r.random::<bool>()).collect();
        if subset.is_empty() && d > 0 {
            subset.push(r.random_range(1..=d));
        }
        FamilySpec::Parity { d, subset }
    }

    /// LWR instance with a seeded uniform secret.
    pub fn random_lwr(n: usize, q: u64, p: u64, seed: u64) -> Self {
        let mut r = rng::stream(seed, rng::ids::FAMILY_PARAMS, 1);
        let w = (0..n).map(|_| r.random_range(0..q)).collect();
        FamilySpec::Lwr { n, q, p, w }
    }
}
