//! Finite function families, pairwise independence and the variance bound.

use super::{Result, SqError};
use crate::families::{lwr_label, CompressibleFn};
use crate::rational::{self, int, rat, Rational};
use crate::rng;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Work limit for exhaustive pair enumeration (`|X|²·|C|`).
pub const PAIRWISE_BUDGET: u64 = 100_000_000;

/// Every member tabulated on a common finite domain under the uniform law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyEnsemble {
    pub name: String,
    /// Label alphabet `Y`.
    pub labels: Vec<Rational>,
    /// `members[k][x]` indexes into `labels`.
    pub members: Vec<Vec<u16>>,
    /// `2/q^{n−1}` for LWR ensembles.
    pub eta_bound: Option<Rational>,
}

impl FamilyEnsemble {
    pub fn new(name: impl Into<String>, labels: Vec<Rational>, members: Vec<Vec<u16>>) -> Result<Self> {
        let name = name.into();
        let domain = members.first().map(Vec::len).unwrap_or(0);
        if members.is_empty() || domain == 0 {
            return Err(SqError::Invalid(format!("ensemble {name} is empty")));
        }
        if members.iter().any(|m| m.len() != domain) {
            return Err(SqError::Invalid("members disagree on the domain".into()));
        }
        if members.iter().flatten().any(|&l| l as usize >= labels.len()) {
            return Err(SqError::Invalid("label index outside the alphabet".into()));
        }
        Ok(Self {
            name,
            labels,
            members,
            eta_bound: None,
        })
    }

    pub fn domain_size(&self) -> usize {
        self.members[0].len()
    }

    pub fn key_count(&self) -> usize {
        self.members.len()
    }

    /// All `2^(2^d)` Boolean functions on `{0,1}^d` (`d ≤ 4`).
    pub fn all_boolean_functions(d: usize) -> Result<Self> {
        if d > 4 {
            return Err(SqError::Invalid(format!("2^(2^{d}) functions is too many")));
        }
        let n = 1usize << d;
        let members = (0..1u64 << n)
            .map(|k| (0..n).map(|x| (k >> x & 1) as u16).collect())
            .collect();
        Self::new(format!("all_functions(d={d})"), vec![int(0), int(1)], members)
    }

    /// `{f_w : w ∈ Z_q^n}` on `Z_q^n` with `f_w(x) = (1/p)⌊(p/q)(w·x mod q)⌉`.
    /// Any `q ≥ 2` is accepted here so that non-power-of-two moduli can be
    /// measured.
    pub fn lwr(n: usize, q: u64, p: u64) -> Result<Self> {
        if n == 0 || q < 2 || p < 2 || p > q {
            return Err(SqError::Invalid(format!("bad LWR parameters n={n} q={q} p={p}")));
        }
        let size = q
            .checked_pow(n as u32)
            .filter(|&s| s <= 1 << 16)
            .ok_or_else(|| SqError::Invalid(format!("q^n = {q}^{n} is too large")))?;
        let point = |mut i: u64| {
            (0..n)
                .map(|_| {
                    let v = i % q;
                    i /= q;
                    v
                })
                .collect::<Vec<u64>>()
        };
        let points: Vec<Vec<u64>> = (0..size).map(point).collect();
        let members = points
            .par_iter()
            .map(|w| {
                points
                    .iter()
                    .map(|x| (lwr_label(w, x, p, q) * int(p as i64)).to_integer().to_u16().expect("label index"))
                    .collect()
            })
            .collect();
        let labels = (0..p as i64).map(|k| rat(k, p as i64)).collect();
        let mut e = Self::new(format!("lwr(n={n},q={q},p={p})"), labels, members)?;
        e.eta_bound = Some(rat(2, 1) / int(q as i64).pow(n as i32 - 1));
        Ok(e)
    }

    /// All parities `χ_S`, `S ⊆ [d]`, on `{0,1}^d`.
    pub fn parities(d: usize) -> Result<Self> {
        if d > 12 {
            return Err(SqError::Invalid(format!("d = {d} too large")));
        }
        let n = 1u32 << d;
        let members = (0..n)
            .map(|s| (0..n).map(|x| ((s & x).count_ones() % 2) as u16).collect())
            .collect();
        Self::new(format!("parities(d={d})"), vec![int(0), int(1)], members)
    }

    /// A compressible family with a set of keys, tabulated on its cube.
    pub fn from_members(name: &str, fns: &[CompressibleFn]) -> Result<Self> {
        let mut labels: Vec<Rational> = Vec::new();
        let mut members = Vec::with_capacity(fns.len());
        for f in fns {
            let table = f.truth_table().map_err(|e| SqError::Invalid(e.to_string()))?;
            members.push(
                table
                    .into_iter()
                    .map(|y| match labels.iter().position(|l| *l == y) {
                        Some(i) => i as u16,
                        None => {
                            labels.push(y);
                            (labels.len() - 1) as u16
                        }
                    })
                    .collect(),
            );
        }
        Self::new(name, labels, members)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseReport {
    pub ensemble: String,
    pub domain_size: usize,
    pub keys: usize,
    pub pairs: u64,
    pub bad_pairs: u64,
    #[serde(with = "rational::serde_str")]
    pub eta_actual: Rational,
    pub eta_actual_f64: f64,
    #[serde(skip_serializing_if = "Option::is_none", serialize_with = "opt_rational")]
    pub eta_bound: Option<Rational>,
    pub within_bound: Option<bool>,
    pub diagonal_bad: u64,
    /// Every input whose label varies with the key has a uniform label law.
    pub marginal_uniform: bool,
    /// Fraction of inputs whose label law over keys is exactly uniform.
    pub marginal_uniform_fraction: f64,
}

fn opt_rational<S: serde::Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(r) => s.serialize_str(&rational::format(r)),
        None => s.serialize_none(),
    }
}

/// Exhaustive `(1 − η)` measurement: for each ordered pair `(x, x′)`,
/// diagonal included, compares the key-averaged law of `(f(x), f(x′))`
/// with `unif(Y) ⊗ unif(Y)`.
pub fn pairwise_check(e: &FamilyEnsemble) -> Result<PairwiseReport> {
    let (n, k, y) = (e.domain_size(), e.key_count(), e.labels.len());
    let work = (n as u64) * (n as u64) * (k as u64);
    if work > PAIRWISE_BUDGET {
        return Err(SqError::Budget { work, limit: PAIRWISE_BUDGET });
    }
    let uniform_cell = |count: usize| count * y * y == k;
    let per_x: Vec<(u64, bool)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut bad = 0u64;
            let mut diag_bad = false;
            let mut cells = vec![0usize; y * y];
            for x2 in 0..n {
                cells.iter_mut().for_each(|c| *c = 0);
                for m in &e.members {
                    cells[m[x] as usize * y + m[x2] as usize] += 1;
                }
                if !cells.iter().all(|&c| uniform_cell(c)) {
                    bad += 1;
                    diag_bad |= x2 == x;
                }
            }
            (bad, diag_bad)
        })
        .collect();
    let bad_pairs: u64 = per_x.iter().map(|p| p.0).sum();
    let diagonal_bad = per_x.iter().filter(|p| p.1).count() as u64;

    let mut uniform_inputs = 0usize;
    let mut marginal_uniform = true;
    for x in 0..n {
        let mut counts = vec![0usize; y];
        for m in &e.members {
            counts[m[x] as usize] += 1;
        }
        let uniform = counts.iter().all(|&c| c * y == k);
        let degenerate = counts.iter().filter(|&&c| c > 0).count() == 1;
        uniform_inputs += usize::from(uniform);
        marginal_uniform &= uniform || degenerate;
    }

    let pairs = (n * n) as u64;
    let eta_actual = rat(bad_pairs as i64, pairs as i64);
    Ok(PairwiseReport {
        ensemble: e.name.clone(),
        domain_size: n,
        keys: k,
        pairs,
        bad_pairs,
        eta_actual_f64: rational::to_f64(&eta_actual),
        within_bound: e.eta_bound.as_ref().map(|b| eta_actual <= *b),
        eta_actual,
        eta_bound: e.eta_bound.clone(),
        diagonal_bad,
        marginal_uniform,
        marginal_uniform_fraction: uniform_inputs as f64 / n as f64,
    })
}

/// Query `φ(x, y)` tabulated as `values[x][label] / den`, all in `[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryTable {
    pub den: i64,
    pub values: Vec<Vec<i64>>,
}

impl QueryTable {
    pub fn new(den: i64, values: Vec<Vec<i64>>) -> Result<Self> {
        if den <= 0 {
            return Err(SqError::Invalid("query denominator must be positive".into()));
        }
        if values.iter().flatten().any(|v| v.abs() > den) {
            return Err(SqError::Invalid("query table leaves [-1, 1]".into()));
        }
        Ok(Self { den, values })
    }

    pub fn from_rationals(values: Vec<Vec<Rational>>) -> Result<Self> {
        let mut den: i128 = 1;
        for v in values.iter().flatten() {
            den = v
                .denom()
                .to_i128()
                .and_then(|d| rational::lcm_i128(den, d))
                .filter(|&d| d <= i64::MAX as i128)
                .ok_or_else(|| SqError::Invalid("query denominators too large".into()))?;
        }
        let scaled = values
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| (v * Rational::from_integer(den.into())).to_integer().to_i64().expect("bounded"))
                    .collect()
            })
            .collect();
        Self::new(den as i64, scaled)
    }

    pub fn constant(e: &FamilyEnsemble, value: &Rational) -> Result<Self> {
        let den = value.denom().to_i64().ok_or_else(|| SqError::Invalid("denominator too large".into()))?;
        let num = value.numer().to_i64().ok_or_else(|| SqError::Invalid("numerator too large".into()))?;
        Self::new(den, vec![vec![num; e.labels.len()]; e.domain_size()])
    }

    /// Entries uniform on `{−den, …, den}/den`.
    pub fn random(e: &FamilyEnsemble, den: i64, seed: u64, index: u64) -> Self {
        let mut r = rng::stream(seed, rng::ids::QUERY_TABLES, index);
        let values = (0..e.domain_size())
            .map(|_| (0..e.labels.len()).map(|_| r.random_range(-den..=den)).collect())
            .collect();
        Self { den, values }
    }

    pub fn value(&self, x: usize, label: usize) -> Rational {
        rat(self.values[x][label], self.den)
    }

    /// `N·den·φ[f]` for every key, as exact integers.
    fn scaled_expectations(&self, e: &FamilyEnsemble) -> Vec<i128> {
        e.members
            .par_iter()
            .map(|m| {
                m.iter()
                    .enumerate()
                    .map(|(x, &l)| self.values[x][l as usize] as i128)
                    .sum()
            })
            .collect()
    }

    /// `φ[f] = E_x φ(x, f(x))` for every key.
    pub fn expectations(&self, e: &FamilyEnsemble) -> Vec<Rational> {
        let scale = (e.domain_size() as i128) * self.den as i128;
        self.scaled_expectations(e)
            .into_iter()
            .map(|s| rational::from_i128_parts(s, scale))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceCheck {
    #[serde(with = "rational::serde_str")]
    pub variance: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
    pub holds: bool,
}

/// Exact `Var_f φ[f]` against `2·eta_actual`.
pub fn variance_check(e: &FamilyEnsemble, table: &QueryTable, eta_actual: &Rational) -> VarianceCheck {
    let phi = table.expectations(e);
    let k = int(phi.len() as i64);
    let mean = phi.iter().fold(Rational::zero(), |a, v| a + v) / &k;
    let variance = phi.iter().fold(Rational::zero(), |a, v| {
        let c = v - &mean;
        a + &c * &c
    }) / k;
    let bound = int(2) * eta_actual;
    VarianceCheck {
        holds: variance <= bound,
        variance,
        bound,
    }
}
