//! Univariate piecewise-linear functions and their one-hidden-layer
//! compilation.

use super::{Activation, AffineLayer, NetworkError, ReluNetwork, Result};
use crate::rational::{int, Rational};
use num_traits::Zero;

/// Piecewise-linear interpolant through `(breakpoints[i], values[i])`,
/// constant to the left of the first and to the right of the last breakpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PwlFunction {
    breakpoints: Vec<Rational>,
    values: Vec<Rational>,
}

impl PwlFunction {
    pub fn new(breakpoints: Vec<Rational>, values: Vec<Rational>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(NetworkError::Invalid("piecewise-linear function needs a breakpoint".into()));
        }
        if breakpoints.len() != values.len() {
            return Err(NetworkError::Invalid(format!(
                "{} breakpoints but {} values",
                breakpoints.len(),
                values.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(NetworkError::Invalid("breakpoints must be strictly increasing".into()));
        }
        Ok(Self { breakpoints, values })
    }

    /// Table `{t ↦ value}` over integer points.
    pub fn from_table<'a>(table: impl IntoIterator<Item = (i64, &'a Rational)>) -> Result<Self> {
        let mut pairs: Vec<(i64, Rational)> = table.into_iter().map(|(t, v)| (t, v.clone())).collect();
        pairs.sort_by_key(|(t, _)| *t);
        let (xs, ys) = pairs.into_iter().map(|(t, v)| (int(t), v)).unzip();
        Self::new(xs, ys)
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Direct interpolation; the semantics the compiled network must match.
    pub fn eval(&self, t: &Rational) -> Rational {
        let n = self.breakpoints.len();
        if *t <= self.breakpoints[0] {
            return self.values[0].clone();
        }
        if *t >= self.breakpoints[n - 1] {
            return self.values[n - 1].clone();
        }
        let i = self.breakpoints.partition_point(|x| x <= t) - 1;
        let (x0, x1) = (&self.breakpoints[i], &self.breakpoints[i + 1]);
        let (y0, y1) = (&self.values[i], &self.values[i + 1]);
        y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    }

    fn slopes(&self) -> Vec<Rational> {
        self.breakpoints
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, y)| (&y[1] - &y[0]) / (&x[1] - &x[0]))
            .collect()
    }
}

/// One ReLU unit per breakpoint: `f(t) = v₀ + Σ (slope_i − slope_{i−1}) relu(t − x_i)`
/// with zero slope outside the breakpoint range.
pub fn compile_pwl(f: &PwlFunction) -> Result<ReluNetwork> {
    let slopes = f.slopes();
    let n = f.breakpoints.len();
    let slope = |i: isize| -> Rational {
        if i < 0 || i as usize >= slopes.len() {
            Rational::zero()
        } else {
            slopes[i as usize].clone()
        }
    };
    let coefficients: Vec<Rational> = (0..n as isize).map(|i| slope(i) - slope(i - 1)).collect();
    let hidden = AffineLayer::new(
        1,
        vec![vec![int(1)]; n],
        f.breakpoints.iter().map(|x| -x).collect(),
        Activation::Relu,
    )?;
    let output = AffineLayer::new(n, vec![coefficients], vec![f.values[0].clone()], Activation::Linear)?;
    ReluNetwork::new(1, vec![hidden, output])
}
