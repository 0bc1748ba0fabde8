use super::{CompressibleFn, DomainConvention, FamilyError, Result};
use crate::relu_ir::ReluNetwork;
use crate::rational::{int, rat, Rational};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};

/// Parity `χ_S` on `{±1}^d`: 1 when an odd number of `x_j`, `j ∈ S`, are −1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParitySpec {
    pub d: usize,
    /// 1-based coordinate indices.
    pub subset: BTreeSet<usize>,
}

impl ParitySpec {
    pub fn new(d: usize, subset: BTreeSet<usize>) -> Result<Self> {
        if d == 0 {
            return Err(FamilyError::InvalidParams("d must be at least 1".into()));
        }
        if let Some(bad) = subset.iter().find(|&&j| j == 0 || j > d) {
            return Err(FamilyError::InvalidParams(format!("coordinate {bad} outside 1..={d}")));
        }
        Ok(Self { d, subset })
    }

    /// Direct count of flipped coordinates, independent of any network.
    pub fn eval_direct(&self, x: &[i8]) -> u8 {
        (self.subset.iter().filter(|&&j| x[j - 1] == -1).count() % 2) as u8
    }
}

/// `h(x) = Σ_{j∈S} (1 − x_j)/2` (an affine map), `σ(t) = t mod 2`.
pub fn build_parity(spec: &ParitySpec) -> Result<CompressibleFn> {
    let d = spec.d;
    let mut row = vec![Rational::zero(); d];
    for &j in &spec.subset {
        row[j - 1] = rat(-1, 2);
    }
    let k = spec.subset.len() as i64;
    let inner = ReluNetwork::affine(vec![row], vec![rat(k, 2)])?;
    let sigma: BTreeMap<i64, Rational> = (0..=k).map(|t| (t, int(t % 2))).collect();
    let name = format!(
        "parity(d={d},S={{{}}})",
        spec.subset.iter().map(|j| j.to_string()).collect::<Vec<_>>().join(",")
    );
    CompressibleFn::new(name, inner, sigma, DomainConvention::PmOne, vec![int(0), int(1)])
}
