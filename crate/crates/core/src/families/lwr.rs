use super::{CompressibleFn, DomainConvention, FamilyError, Result};
use crate::relu_ir::ReluNetwork;
use crate::rational::{int, rat, Rational};
use std::collections::BTreeMap;

/// Learning-with-Rounding function `f_w(x) = (1/p)·⌊(p/q)(w·x mod q)⌉`.
///
/// `q` must be a power of two divisible by `p`; inputs are read in binary
/// (`d = n·log₂ q`, little-endian bits per coordinate).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LwrInstance {
    pub n: usize,
    pub p: u64,
    pub q: u64,
    pub w: Vec<u64>,
}

impl LwrInstance {
    pub fn new(n: usize, p: u64, q: u64, w: Vec<u64>) -> Result<Self> {
        let bad = |m: String| Err(FamilyError::InvalidParams(m));
        if n == 0 {
            return bad("n must be at least 1".into());
        }
        if p < 2 || p >= q {
            return bad(format!("need 2 <= p < q, got p={p}, q={q}"));
        }
        if !q.is_power_of_two() {
            return bad(format!("q={q} is not a power of two"));
        }
        if !q.is_multiple_of(p) {
            return bad(format!("p={p} does not divide q={q}"));
        }
        if w.len() != n {
            return bad(format!("secret has {} entries, expected {n}", w.len()));
        }
        if let Some(&v) = w.iter().find(|&&v| v >= q) {
            return Err(FamilyError::OutOfModulus { value: v, modulus: q });
        }
        Ok(Self { n, p, q, w })
    }

    pub fn bits(&self) -> usize {
        self.q.trailing_zeros() as usize
    }

    pub fn binary_dim(&self) -> usize {
        self.n * self.bits()
    }

    /// Label on a `Z_q^n` input by direct modular arithmetic.
    pub fn label(&self, x: &[u64]) -> Rational {
        lwr_label(&self.w, x, self.p, self.q)
    }
}

/// `⌊(p/q)(t mod q)⌉ mod p` with ties rounded up. Works for any `q ≥ 1`.
pub fn round_to_p(t: u64, p: u64, q: u64) -> u64 {
    let r = (t % q) as u128;
    let (p, q) = (p as u128, q as u128);
    (((2 * p * r + q) / (2 * q)) % p) as u64
}

pub fn lwr_label(w: &[u64], x: &[u64], p: u64, q: u64) -> Rational {
    let dot = w
        .iter()
        .zip(x)
        .fold(0u64, |acc, (a, b)| (acc + (a % q) * (b % q)) % q);
    rat(round_to_p(dot, p, q) as i64, p as i64)
}

/// Little-endian binary encoding of `x ∈ Z_q^n` (`q` a power of two).
pub fn encode_zq(x: &[u64], q: u64) -> Result<Vec<i8>> {
    if !q.is_power_of_two() || q < 2 {
        return Err(FamilyError::InvalidParams(format!("q={q} is not a power of two")));
    }
    let bits = q.trailing_zeros() as usize;
    let mut out = Vec::with_capacity(x.len() * bits);
    for &v in x {
        if v >= q {
            return Err(FamilyError::OutOfModulus { value: v, modulus: q });
        }
        out.extend((0..bits).map(|j| (v >> j & 1) as i8));
    }
    Ok(out)
}

pub fn decode_zq(bits: &[i8], q: u64) -> Result<Vec<u64>> {
    if !q.is_power_of_two() || q < 2 {
        return Err(FamilyError::InvalidParams(format!("q={q} is not a power of two")));
    }
    let width = q.trailing_zeros() as usize;
    if !bits.len().is_multiple_of(width) || bits.iter().any(|&b| b != 0 && b != 1) {
        return Err(FamilyError::NotACorner(bits.to_vec()));
    }
    Ok(bits
        .chunks(width)
        .map(|c| c.iter().enumerate().map(|(j, &b)| (b as u64) << j).sum())
        .collect())
}

/// `h(x̃) = w̃·x̃` with `w̃_{i,j} = w_i·2^j`; `T` is the exact set of
/// reachable subset sums, a subset of `{0, …, n(q−1)²}`.
pub fn build_lwr(inst: &LwrInstance) -> Result<CompressibleFn> {
    let bits = inst.bits();
    let weights: Vec<u64> = inst
        .w
        .iter()
        .flat_map(|&wi| (0..bits).map(move |j| wi << j))
        .collect();
    let total: u64 = weights.iter().sum();
    let mut reachable = vec![false; total as usize + 1];
    reachable[0] = true;
    for &c in &weights {
        for s in (c as usize..=total as usize).rev() {
            if reachable[s - c as usize] {
                reachable[s] = true;
            }
        }
    }
    let sigma: BTreeMap<i64, Rational> = reachable
        .iter()
        .enumerate()
        .filter(|(_, &r)| r)
        .map(|(t, _)| (t as i64, rat(round_to_p(t as u64, inst.p, inst.q) as i64, inst.p as i64)))
        .collect();
    let inner = ReluNetwork::affine(
        vec![weights.iter().map(|&c| int(c as i64)).collect()],
        vec![int(0)],
    )?;
    let labels = (0..inst.p as i64).map(|k| rat(k, inst.p as i64)).collect();
    let name = format!("lwr(n={},q={},p={},w={:?})", inst.n, inst.q, inst.p, inst.w);
    CompressibleFn::new(name, inner, sigma, DomainConvention::ZeroOne, labels)
}
