//! A small keyed family built from majorities and parities.
//!
//! Not pseudorandom: the key is recoverable from a handful of labeled
//! corners. It only exercises the lift and SQ plumbing on something other
//! than parity or LWR.

use super::{CompressibleFn, DomainConvention, FamilyError, Result};
use crate::gadgets::build_majority;
use crate::relu_ir::{compose, linear_combine, ReluNetwork};
use crate::rational::{int, rat, Rational};
use crate::rng;
use num_traits::Zero;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const MAJORITIES: usize = 4;

fn random_subset(r: &mut ChaCha8Rng, d: usize, size: usize) -> Vec<usize> {
    let mut s = sample(r, d, size).into_vec();
    s.sort_unstable();
    s
}

fn selector(d: usize, coords: &[usize]) -> Result<ReluNetwork> {
    let rows = coords
        .iter()
        .map(|&j| {
            let mut row = vec![Rational::zero(); d];
            row[j] = int(1);
            row
        })
        .collect();
    Ok(ReluNetwork::affine(rows, vec![Rational::zero(); coords.len()])?)
}

/// `Σ_{j∈P} c_j (1 − x_j)/2` as a 0-hidden-layer map.
fn weighted_flips(d: usize, coeffs: &[(usize, i64)]) -> Result<ReluNetwork> {
    let mut row = vec![Rational::zero(); d];
    let mut bias = Rational::zero();
    for &(j, c) in coeffs {
        row[j] = rat(-c, 2);
        bias += rat(c, 2);
    }
    Ok(ReluNetwork::affine(vec![row], vec![bias])?)
}

fn random_bits(r: &mut ChaCha8Rng, n: usize) -> Vec<i64> {
    loop {
        let bits: Vec<i64> = (0..n).map(|_| r.random_range(0..2)).collect();
        if bits.contains(&1) && bits.contains(&0) {
            return bits;
        }
    }
}

/// Keyed toy on `{±1}^d`.
///
/// With `depth_budget ≥ 2`, `h = Σ_k 2^k·MAJ_k(x) + 16·Σ_{j∈P} (1 − x_j)/2`
/// over four key-selected odd subsets and a key-selected parity set `P`, and
/// `σ(t) = table[t mod 16] ⊕ (⌊t/16⌋ mod 2)`. With budget 1, `h` is a keyed
/// weighted flip count and `σ` a keyed table on its range.
pub fn build_keyed_toy(key: u64, d: usize, depth_budget: usize) -> Result<CompressibleFn> {
    if depth_budget == 0 {
        return Err(FamilyError::InvalidParams("depth_budget must be at least 1".into()));
    }
    if d == 0 {
        return Err(FamilyError::InvalidParams("d must be at least 1".into()));
    }
    let mut r = rng::stream(key, rng::ids::KEYED_TOY, 0);
    let parity_size = r.random_range(1..=d);
    let parity_set = random_subset(&mut r, d, parity_size);

    let (inner, sigma) = if depth_budget >= 2 {
        let max_odd = if d % 2 == 1 { d } else { d - 1 };
        let mut terms = Vec::with_capacity(MAJORITIES + 1);
        for k in 0..MAJORITIES {
            let size = 2 * r.random_range(0..=(max_odd.min(5) - 1) / 2) + 1;
            let coords = random_subset(&mut r, d, size);
            let maj = compose(&build_majority(size)?, &selector(d, &coords)?)?;
            terms.push((int(1 << k), maj));
        }
        let flips: Vec<(usize, i64)> = parity_set.iter().map(|&j| (j, 16)).collect();
        terms.push((int(1), weighted_flips(d, &flips)?));
        let table = random_bits(&mut r, 16);
        let top = 15 + 16 * parity_set.len() as i64;
        let sigma = (0..=top)
            .map(|t| (t, int(table[(t % 16) as usize] ^ ((t / 16) % 2))))
            .collect::<BTreeMap<_, _>>();
        (linear_combine(&terms, &Rational::zero())?, sigma)
    } else {
        let coeffs: Vec<(usize, i64)> = parity_set.iter().map(|&j| (j, r.random_range(1..=3))).collect();
        let top: i64 = coeffs.iter().map(|c| c.1).sum();
        let table = random_bits(&mut r, top as usize + 1);
        let sigma = (0..=top).map(|t| (t, int(table[t as usize]))).collect();
        (weighted_flips(d, &coeffs)?, sigma)
    };
    CompressibleFn::new(
        format!("keyed_toy(d={d},key={key},depth={depth_budget})"),
        inner,
        sigma,
        DomainConvention::PmOne,
        vec![int(0), int(1)],
    )
}
