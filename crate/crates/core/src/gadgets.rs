//! Sign, soft-indicator and selector gadgets, plus majority-gate lowering.
//!
//! With threshold `δ` (default `1/d²`):
//!
//! * `N1(t) = (1/δ)(relu(t + δ) − relu(t − δ)) − 1`, equal to `sgn t` once `|t| ≥ δ`;
//! * `N2(z) = K · Σ_j (1/δ)(relu(z_j + 2δ) + relu(z_j − 2δ) − 2 relu(z_j))`,
//!   zero when every `|z_j| ≥ 2δ` and at least `K` when some `|z_j| ≤ δ`;
//! * `N3(s, t; t*) = relu(c − s + 2W(t* − t)) − relu(−s + 2W(t* − t)) − c·1[t < t*]`,
//!   equal to `relu(c·1[t = t*] − s)` on integers `t` and `s ∈ [0, W]`.

use crate::relu_ir::{Activation, AffineLayer, NetworkError, ReluNetwork};
use crate::rational::{int, rat, Rational};
use num_traits::{One, Zero};
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum GadgetError {
    #[error("invalid gadget parameters: {0}")]
    InvalidParams(String),
    #[error("selector target {0} is not in the range set")]
    TargetNotInRange(i64),
    #[error("majority gate needs odd arity, got {0}")]
    EvenArity(usize),
    #[error(transparent)]
    Network(#[from] NetworkError),
}

pub type Result<T> = std::result::Result<T, GadgetError>;

/// How the `1[t < t*]` term of `N3` is realized on integer `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorVariant {
    /// `relu(t* − t) − relu(t* − 1 − t)`: exactly 1 for `t ≤ t* − 1`.
    #[default]
    UnitSlope,
    /// The same ramp multiplied by `1/δ`; evaluates to `1/δ`, not 1, for
    /// `t ≤ t* − 1`. Kept only to document that behavior.
    OneOverDelta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetParams {
    pub d: usize,
    pub delta: Rational,
    /// Output scale `K` of `N2`.
    pub n2_scale: Rational,
    /// Slope/domain parameter `W` of `N3`.
    pub n3_w: Rational,
    pub indicator: IndicatorVariant,
}

impl GadgetParams {
    /// `δ = 1/d²`, `K = 1`, `W = 2d + 1`.
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(GadgetError::InvalidParams("d must be at least 1".into()));
        }
        let dd = d as i64;
        Ok(Self {
            d,
            delta: rat(1, dd * dd),
            n2_scale: Rational::one(),
            n3_w: int(2 * dd + 1),
            indicator: IndicatorVariant::UnitSlope,
        })
    }

    /// Sets `K` and raises `W` to at least `2dK + 1`, the largest value `N2`
    /// can feed into `N3`, plus one.
    pub fn with_scale(mut self, k: Rational) -> Result<Self> {
        self.n2_scale = k;
        let needed = int(2 * self.d as i64) * &self.n2_scale + int(1);
        if self.n3_w < needed {
            self.n3_w = needed;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn with_w(mut self, w: Rational) -> Result<Self> {
        self.n3_w = w;
        self.validate()?;
        Ok(self)
    }

    pub fn with_indicator(mut self, indicator: IndicatorVariant) -> Self {
        self.indicator = indicator;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(GadgetError::InvalidParams("d must be at least 1".into()));
        }
        if self.delta <= Rational::zero() {
            return Err(GadgetError::InvalidParams("delta must be positive".into()));
        }
        if self.n2_scale < Rational::one() {
            return Err(GadgetError::InvalidParams("N2 scale K must be at least 1".into()));
        }
        if self.n3_w < Rational::one() {
            return Err(GadgetError::InvalidParams("N3 parameter W must be at least 1".into()));
        }
        Ok(())
    }

    pub fn inv_delta(&self) -> Rational {
        self.delta.recip()
    }
}

fn layer(input: usize, weights: Vec<Vec<Rational>>, bias: Vec<Rational>, act: Activation) -> Result<AffineLayer> {
    Ok(AffineLayer::new(input, weights, bias, act)?)
}

/// Scalar sign gadget `N1` (one hidden layer, two units).
pub fn build_n1(params: &GadgetParams) -> Result<ReluNetwork> {
    params.validate()?;
    let delta = &params.delta;
    let hidden = layer(1, vec![vec![int(1)], vec![int(1)]], vec![delta.clone(), -delta], Activation::Relu)?;
    let inv = params.inv_delta();
    let out = layer(2, vec![vec![inv.clone(), -inv]], vec![int(-1)], Activation::Linear)?;
    Ok(ReluNetwork::new(1, vec![hidden, out])?)
}

/// `N1` applied to each of the `d` coordinates (block-diagonal weights).
pub fn build_n1_vec(params: &GadgetParams) -> Result<ReluNetwork> {
    params.validate()?;
    let d = params.d;
    let delta = &params.delta;
    let inv = params.inv_delta();
    let mut w0 = Vec::with_capacity(2 * d);
    let mut b0 = Vec::with_capacity(2 * d);
    let mut w1 = Vec::with_capacity(d);
    for j in 0..d {
        for shift in [delta.clone(), -delta] {
            let mut row = vec![Rational::zero(); d];
            row[j] = int(1);
            w0.push(row);
            b0.push(shift);
        }
        let mut row = vec![Rational::zero(); 2 * d];
        row[2 * j] = inv.clone();
        row[2 * j + 1] = -&inv;
        w1.push(row);
    }
    Ok(ReluNetwork::new(
        d,
        vec![
            layer(d, w0, b0, Activation::Relu)?,
            layer(2 * d, w1, vec![int(-1); d], Activation::Linear)?,
        ],
    )?)
}

/// Soft indicator `N2`, scaled by `K` (one hidden layer, `3d` units).
pub fn build_n2(params: &GadgetParams) -> Result<ReluNetwork> {
    params.validate()?;
    let d = params.d;
    let two_delta = int(2) * &params.delta;
    let coeff = &params.n2_scale * params.inv_delta();
    let mut w0 = Vec::with_capacity(3 * d);
    let mut b0 = Vec::with_capacity(3 * d);
    let mut out = Vec::with_capacity(3 * d);
    for j in 0..d {
        for (shift, c) in [
            (two_delta.clone(), coeff.clone()),
            (-&two_delta, coeff.clone()),
            (Rational::zero(), int(-2) * &coeff),
        ] {
            let mut row = vec![Rational::zero(); d];
            row[j] = int(1);
            w0.push(row);
            b0.push(shift);
            out.push(c);
        }
    }
    Ok(ReluNetwork::new(
        d,
        vec![
            layer(d, w0, b0, Activation::Relu)?,
            layer(3 * d, vec![out], vec![Rational::zero()], Activation::Linear)?,
        ],
    )?)
}

/// Selector `N3(s, t; t*)` with unit height. Inputs are ordered `(s, t)`.
pub fn build_n3(params: &GadgetParams, range: &BTreeSet<i64>, t_star: i64) -> Result<ReluNetwork> {
    build_n3_with_height(params, range, t_star, &Rational::one())
}

/// Selector with height `c`: `relu(c·1[t = t*] − s)` on integer `t ∈ T`,
/// `s ∈ [0, W]`, for any `0 ≤ c ≤ 1`.
pub fn build_n3_with_height(
    params: &GadgetParams,
    range: &BTreeSet<i64>,
    t_star: i64,
    height: &Rational,
) -> Result<ReluNetwork> {
    params.validate()?;
    if !range.contains(&t_star) {
        return Err(GadgetError::TargetNotInRange(t_star));
    }
    let two_w = int(2) * &params.n3_w;
    let ts = int(t_star);
    let hidden = layer(
        2,
        vec![
            vec![int(-1), -&two_w],
            vec![int(-1), -&two_w],
            vec![int(0), int(-1)],
            vec![int(0), int(-1)],
        ],
        vec![
            height + &two_w * &ts,
            &two_w * &ts,
            ts.clone(),
            ts - int(1),
        ],
        Activation::Relu,
    )?;
    let ramp = match params.indicator {
        IndicatorVariant::UnitSlope => height.clone(),
        IndicatorVariant::OneOverDelta => height * params.inv_delta(),
    };
    let out = layer(4, vec![vec![int(1), int(-1), -&ramp, ramp]], vec![int(0)], Activation::Linear)?;
    Ok(ReluNetwork::new(2, vec![hidden, out])?)
}

/// The `1[t < t*]` sub-network alone (one hidden layer), for inspecting the
/// indicator variants.
pub fn build_lt_indicator(params: &GadgetParams, t_star: i64) -> Result<ReluNetwork> {
    let ts = int(t_star);
    let slope = match params.indicator {
        IndicatorVariant::UnitSlope => Rational::one(),
        IndicatorVariant::OneOverDelta => params.inv_delta(),
    };
    Ok(ReluNetwork::new(
        1,
        vec![
            layer(1, vec![vec![int(-1)], vec![int(-1)]], vec![ts.clone(), ts - int(1)], Activation::Relu)?,
            layer(2, vec![vec![slope.clone(), -slope]], vec![int(0)], Activation::Linear)?,
        ],
    )?)
}

/// Majority over `arity` inputs in `{±1}`: `relu((s+1)/2) − relu((s−1)/2)`
/// with `s = Σ x_j`, which is `1[s > 0]` on odd integer `s`.
pub fn build_majority(arity: usize) -> Result<ReluNetwork> {
    if arity.is_multiple_of(2) {
        return Err(GadgetError::EvenArity(arity));
    }
    let half = rat(1, 2);
    let row = vec![half.clone(); arity];
    Ok(ReluNetwork::new(
        arity,
        vec![
            layer(arity, vec![row.clone(), row], vec![half.clone(), -half], Activation::Relu)?,
            layer(2, vec![vec![int(1), int(-1)]], vec![int(0)], Activation::Linear)?,
        ],
    )?)
}

/// `sgn` with the convention `sgn(0) = +1`.
pub fn sgn(t: &Rational) -> i8 {
    if *t < Rational::zero() {
        -1
    } else {
        1
    }
}

/// Closed form of the (K-scaled) `N2`: each coordinate contributes the tent
/// `K(2δ − |z_j|)/δ` on `|z_j| < 2δ` and nothing elsewhere.
pub fn n2_closed_form(params: &GadgetParams, z: &[Rational]) -> Rational {
    let two_delta = int(2) * &params.delta;
    let total = z
        .iter()
        .map(|v| {
            let a = num_traits::Signed::abs(v);
            if a >= two_delta {
                Rational::zero()
            } else {
                (&two_delta - a) / &params.delta
            }
        })
        .fold(Rational::zero(), |acc, v| acc + v);
    total * &params.n2_scale
}

/// Binary64 version of [`n2_closed_form`].
pub fn n2_closed_form_f64(d: usize, k: f64, z: &[f64]) -> f64 {
    let delta = 1.0 / (d as f64 * d as f64);
    let total: f64 = z
        .iter()
        .map(|v| {
            let a = v.abs();
            if a >= 2.0 * delta {
                0.0
            } else {
                (2.0 * delta - a) / delta
            }
        })
        .sum();
    k * total
}
