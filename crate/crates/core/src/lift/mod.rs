//! Naive and compressed lifts of Boolean families to real-input networks.
//!
//! Both lifts compute `f^lift(z) = relu(f(sgn z) − K·N2(z))` wherever it is
//! exact: the naive lift everywhere, the compressed lift whenever every
//! `|z_j| > δ`. The label map, example transform, good set and the
//! membership-query wrapper live in submodules.

mod dist;
mod mq;
mod transform;
mod verify;

pub use dist::{
    good_set_prob, in_good_set, in_good_set_f64, AntiConcentration, DistKind, DistributionSpec, Marginal,
};
pub use mq::{FamilyOracle, LiftedQueryOracle, MembershipOracle};
pub use transform::{transform_dataset, transform_example, transform_with_half, RealExample, WeakPredictor};
pub use verify::{
    adversarial_point, case3_discrepancy, random_point, verify_identity, Case3Report, IdentityReport, PointRegion,
};

use crate::families::{corner_rationals, CompressibleFn, FamilyError};
use crate::gadgets::{self, build_n1_vec, build_n2, build_n3_with_height, GadgetError, GadgetParams};
use crate::rational::{self, int, Rational};
use crate::relu_ir::{compose, Activation, AffineLayer, depth_pad, linear_combine, parallel, NetworkError, ReluNetwork};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum LiftError {
    #[error("N2 scale K = {k} is below the certified bound C = {c}")]
    ScaleBelowBound { k: String, c: String },
    #[error("N3 parameter W = {w} is below the reachable range {needed}")]
    WTooSmall { w: String, needed: String },
    #[error("source network: {0}")]
    Source(String),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Gadget(#[from] GadgetError),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

pub type Result<T> = std::result::Result<T, LiftError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftKind {
    Naive,
    Compressed,
}

/// Where `σ(t*)` enters the compressed lift's selector sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompressedVariant {
    /// `Σ N3_{σ(t*)}(s, t; t*)` with `σ(t*)` as the selector height, which is
    /// `relu(σ(t) − s)` on integer `t` for any `σ ∈ [0, 1]`.
    #[default]
    HeightInSelector,
    /// `Σ σ(t*)·N3(s, t; t*)`, which is `σ(t)·relu(1 − s)`. Agrees with the
    /// above only when `s = 0` or `σ(t) ∈ {0, 1}`.
    OuterCoefficient,
}

#[derive(Debug, Clone)]
pub struct LiftedNetwork {
    pub net: ReluNetwork,
    pub kind: LiftKind,
    pub source: String,
    pub params: GadgetParams,
    /// Certified bound on `|f∘N1|` over the solid cube.
    pub bound_c: Rational,
    /// Hidden layers `L` of the source `σ ∘ h` (or of the source network).
    pub source_hidden: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LiftSummary {
    pub kind: LiftKind,
    pub source: String,
    pub d: usize,
    pub source_hidden_layers: usize,
    pub hidden_layers: usize,
    pub unit_count: usize,
    #[serde(with = "rational::serde_str")]
    pub n2_scale: Rational,
    #[serde(with = "rational::serde_str")]
    pub n3_w: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound_c: Rational,
}

impl LiftedNetwork {
    pub fn d(&self) -> usize {
        self.params.d
    }

    pub fn eval_exact(&self, z: &[Rational]) -> Result<Rational> {
        Ok(self.net.eval_exact_scalar(z)?)
    }

    pub fn eval_f64(&self, z: &[f64]) -> Result<f64> {
        Ok(self.net.eval_f64_scalar(z)?)
    }

    pub fn summary(&self) -> LiftSummary {
        LiftSummary {
            kind: self.kind,
            source: self.source.clone(),
            d: self.d(),
            source_hidden_layers: self.source_hidden,
            hidden_layers: self.net.hidden_layers(),
            unit_count: self.net.meta().unit_count,
            n2_scale: self.params.n2_scale.clone(),
            n3_w: self.params.n3_w.clone(),
            bound_c: self.bound_c.clone(),
        }
    }
}

fn cube(d: usize) -> (Vec<Rational>, Vec<Rational>) {
    (vec![int(-1); d], vec![int(1); d])
}

/// Interval-arithmetic bound on `sup |f(u)|` over `u ∈ [−1, 1]^d`, which
/// contains the image of `N1`.
pub fn compute_bound_network(f_net: &ReluNetwork) -> Result<Rational> {
    let (lo, hi) = cube(f_net.input_dim());
    let bounds = f_net.output_bounds(&lo, &hi)?;
    let (l, h) = bounds
        .into_iter()
        .next()
        .ok_or_else(|| LiftError::Source("network has no output".into()))?;
    Ok(if l.abs() > h.abs() { l.abs() } else { h.abs() })
}

/// Certified `C ≥ sup |(σ∘h)(N1(z))|`. Because `σ` is held constant outside
/// the range of `h`, `max σ` is always a valid bound; the interval bound of
/// the compiled network is used when it is tighter.
pub fn compute_bound(cf: &CompressibleFn) -> Result<Rational> {
    let by_sigma = cf
        .sigma()
        .values()
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let by_interval = compute_bound_network(&cf.to_pm_one()?.to_network()?)?;
    Ok(by_sigma.min(by_interval))
}

/// `δ = 1/d²`, `K = max(1, C)`, `W = max(2, 2dK + 1, max |t|)`.
pub fn default_params(d: usize, bound_c: &Rational, max_abs_t: i64) -> Result<GadgetParams> {
    let k = if *bound_c > Rational::one() { bound_c.clone() } else { Rational::one() };
    let p = GadgetParams::new(d)?.with_scale(k)?;
    let w = p.n3_w.clone().max(int(2)).max(int(max_abs_t));
    Ok(p.with_w(w)?)
}

pub fn default_params_for(cf: &CompressibleFn) -> Result<GadgetParams> {
    default_params(cf.d(), &compute_bound(cf)?, cf.h_bound())
}

fn check_scale(params: &GadgetParams, c: &Rational) -> Result<()> {
    if params.n2_scale < *c || params.n2_scale < Rational::one() {
        return Err(LiftError::ScaleBelowBound {
            k: rational::format(&params.n2_scale),
            c: rational::format(c),
        });
    }
    Ok(())
}

fn naive_from(f_net: &ReluNetwork, params: &GadgetParams, bound_c: Rational, source: String) -> Result<LiftedNetwork> {
    if f_net.output_dim() != 1 {
        return Err(LiftError::Source(format!("expected scalar output, found {}", f_net.output_dim())));
    }
    if f_net.input_dim() != params.d {
        return Err(LiftError::Source(format!(
            "source has input dimension {}, parameters have d = {}",
            f_net.input_dim(),
            params.d
        )));
    }
    check_scale(params, &bound_c)?;
    let f_n1 = compose(f_net, &build_n1_vec(params)?)?;
    let n2 = depth_pad(&build_n2(params)?, f_n1.hidden_layers())?;
    let pair = parallel(&[f_n1, n2])?;
    let outer = ReluNetwork::new(
        2,
        vec![
            AffineLayer::new(2, vec![vec![int(1), int(-1)]], vec![int(0)], Activation::Relu)?,
            AffineLayer::new(1, vec![vec![int(1)]], vec![int(0)], Activation::Linear)?,
        ],
    )?;
    Ok(LiftedNetwork {
        net: compose(&outer, &pair)?,
        kind: LiftKind::Naive,
        source,
        params: params.clone(),
        bound_c,
        source_hidden: f_net.hidden_layers(),
    })
}

/// `relu(f(N1(z)) − K·N2(z))` for any scalar network `f` on `{±1}^d`.
pub fn lift_naive(f_net: &ReluNetwork, params: &GadgetParams) -> Result<LiftedNetwork> {
    let c = compute_bound_network(f_net)?;
    naive_from(f_net, params, c, "network".into())
}

/// Naive lift of a compressible family, read on `{±1}` corners.
pub fn lift_naive_family(cf: &CompressibleFn, params: &GadgetParams) -> Result<LiftedNetwork> {
    let net = cf.to_pm_one()?.to_network()?;
    naive_from(&net, params, compute_bound(cf)?, cf.name().to_string())
}

/// `Σ_{t*∈T} N3(K·N2(z), h(N1(z)); t*)`, one hidden layer shallower than the
/// naive lift.
pub fn lift_compressed(cf: &CompressibleFn, params: &GadgetParams) -> Result<LiftedNetwork> {
    lift_compressed_variant(cf, params, CompressedVariant::default())
}

pub fn lift_compressed_variant(
    cf: &CompressibleFn,
    params: &GadgetParams,
    variant: CompressedVariant,
) -> Result<LiftedNetwork> {
    let pm = cf.to_pm_one()?;
    if pm.d() != params.d {
        return Err(LiftError::Source(format!("family has d = {}, parameters have d = {}", pm.d(), params.d)));
    }
    let bound_c = compute_bound(cf)?;
    check_scale(params, &bound_c)?;
    let needed = int(2 * params.d as i64) * &params.n2_scale;
    if params.n3_w < needed {
        return Err(LiftError::WTooSmall {
            w: rational::format(&params.n3_w),
            needed: rational::format(&needed),
        });
    }
    let t = compose(pm.inner_h(), &build_n1_vec(params)?)?;
    let s = depth_pad(&build_n2(params)?, t.hidden_layers())?;
    let pair = parallel(&[s, t])?;

    let range = pm.range_t();
    let mut terms = Vec::new();
    for (&t_star, height) in pm.sigma() {
        if height.is_zero() {
            continue;
        }
        let term = match variant {
            CompressedVariant::HeightInSelector => (Rational::one(), build_n3_with_height(params, &range, t_star, height)?),
            CompressedVariant::OuterCoefficient => {
                (height.clone(), build_n3_with_height(params, &range, t_star, &Rational::one())?)
            }
        };
        terms.push(term);
    }
    if terms.is_empty() {
        let t_star = *range.iter().next().expect("range is nonempty");
        terms.push((Rational::zero(), build_n3_with_height(params, &range, t_star, &Rational::one())?));
    }
    let selector = linear_combine(&terms, &Rational::zero())?;
    Ok(LiftedNetwork {
        net: compose(&selector, &pair)?,
        kind: LiftKind::Compressed,
        source: cf.name().to_string(),
        params: params.clone(),
        bound_c,
        source_hidden: pm.hidden_layers(),
    })
}

pub fn sgn_vec(z: &[Rational]) -> Vec<i8> {
    z.iter().map(gadgets::sgn).collect()
}

pub fn sgn_vec_f64(z: &[f64]) -> Vec<i8> {
    z.iter().map(|&v| if v < 0.0 { -1 } else { 1 }).collect()
}

/// `relu(f(sgn z) − K·N2(z))` with `sgn(0) = +1`, computed from the closed
/// form of `N2`; `f` is read on `{±1}` corners.
pub fn reference_eval(f: impl Fn(&[i8]) -> Rational, params: &GadgetParams, z: &[Rational]) -> Rational {
    let y = f(&sgn_vec(z));
    rational::relu(&(y - gadgets::n2_closed_form(params, z)))
}

/// Reference lift of a family.
pub fn reference_eval_family(cf: &CompressibleFn, params: &GadgetParams, z: &[Rational]) -> Result<Rational> {
    let y = cf.eval_pm(&sgn_vec(z))?;
    Ok(rational::relu(&(y - gadgets::n2_closed_form(params, z))))
}

/// Reference lift of a Boolean network.
pub fn reference_eval_network(f_net: &ReluNetwork, params: &GadgetParams, z: &[Rational]) -> Result<Rational> {
    let y = f_net.eval_exact_scalar(&corner_rationals(&sgn_vec(z)))?;
    Ok(rational::relu(&(y - gadgets::n2_closed_form(params, z))))
}

/// The label `ỹ` attached to a transformed example:
/// `y` if every `|z_j| ≥ 2δ`, `0` if some `|z_j| ≤ δ`, else
/// `relu(y − K·N2(|z|))`.
pub fn label_map(y: &Rational, abs_z: &[Rational], params: &GadgetParams) -> Rational {
    let two_delta = int(2) * &params.delta;
    if abs_z.iter().all(|a| a.abs() >= two_delta) {
        y.clone()
    } else if abs_z.iter().any(|a| a.abs() <= params.delta) {
        Rational::zero()
    } else {
        let abs: Vec<Rational> = abs_z.iter().map(|a| a.abs()).collect();
        rational::relu(&(y - gadgets::n2_closed_form(params, &abs)))
    }
}

#[cfg(test)]
mod tests;
