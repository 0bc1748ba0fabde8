use super::{sgn_vec, Result};
use crate::families::{CompressibleFn, FamilyError};
use crate::gadgets::{self, GadgetParams};
use crate::rational::{self, Rational};

/// Answers label queries at `{±1}` corners.
pub trait MembershipOracle {
    fn query(&mut self, x: &[i8]) -> std::result::Result<Rational, FamilyError>;
    fn queries(&self) -> u64;
}

/// Membership oracle backed by a family, counting every query.
#[derive(Debug, Clone)]
pub struct FamilyOracle {
    cf: CompressibleFn,
    count: u64,
}

impl FamilyOracle {
    pub fn new(cf: CompressibleFn) -> Self {
        Self { cf, count: 0 }
    }
}

impl MembershipOracle for FamilyOracle {
    fn query(&mut self, x: &[i8]) -> std::result::Result<Rational, FamilyError> {
        self.count += 1;
        self.cf.eval_pm(x)
    }

    fn queries(&self) -> u64 {
        self.count
    }
}

/// Real-point oracle for `f^lift` built from one Boolean query per call:
/// ask `f(sgn z)`, return `relu(f(sgn z) − K·N2(z))`.
pub struct LiftedQueryOracle<O> {
    inner: O,
    params: GadgetParams,
    count: u64,
}

impl<O: MembershipOracle> LiftedQueryOracle<O> {
    pub fn new(inner: O, params: GadgetParams) -> Self {
        Self { inner, params, count: 0 }
    }

    pub fn query(&mut self, z: &[Rational]) -> Result<Rational> {
        self.count += 1;
        let y = self.inner.query(&sgn_vec(z))?;
        Ok(rational::relu(&(y - gadgets::n2_closed_form(&self.params, z))))
    }

    pub fn real_queries(&self) -> u64 {
        self.count
    }

    pub fn boolean_queries(&self) -> u64 {
        self.inner.queries()
    }

    pub fn into_inner(self) -> O {
        self.inner
    }
}
