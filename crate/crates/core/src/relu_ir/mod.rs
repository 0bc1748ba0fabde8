//! Layered affine + ReLU networks with exact rational weights.
//!
//! A [`ReluNetwork`] is a sequence of [`AffineLayer`]s; every layer but the
//! last applies `max(0, ·)` coordinatewise, the last is linear. A "hidden
//! layer" is a ReLU layer, so an affine map is a 0-hidden-layer network.
//!
//! Networks are immutable. Evaluation runs on a precompiled kernel: exact
//! evaluation first tries a machine-integer common-denominator path and falls
//! back to arbitrary precision when an intermediate would overflow, so the
//! result is always exact.

mod doc;
mod kernel;
mod ops;
mod pwl;

pub use doc::{from_document, to_document, NetworkDocument};
pub use ops::{compose, depth_pad, linear_combine, parallel, scale_output};
pub use pwl::{compile_pwl, PwlFunction};

use crate::rational::{self, Rational};
use kernel::Kernel;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("layer {layer}: expected input of width {expected}, got {found}")]
    DimensionMismatch {
        layer: usize,
        expected: usize,
        found: usize,
    },
    #[error("layer {layer}: {reason}")]
    Shape { layer: usize, reason: String },
    #[error("network has no layers")]
    Empty,
    #[error("{0}")]
    Invalid(String),
    #[error("parse error at line {line}, column {column}: {reason}")]
    Parse {
        line: usize,
        column: usize,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, NetworkError>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineLayer {
    weights: Vec<Vec<Rational>>,
    bias: Vec<Rational>,
    activation: Activation,
    input_width: usize,
}

impl AffineLayer {
    /// `weights` has one row per output unit; every row must have
    /// `input_width` entries.
    pub fn new(
        input_width: usize,
        weights: Vec<Vec<Rational>>,
        bias: Vec<Rational>,
        activation: Activation,
    ) -> Result<Self> {
        if weights.len() != bias.len() {
            return Err(NetworkError::Invalid(format!(
                "{} weight rows but {} bias entries",
                weights.len(),
                bias.len()
            )));
        }
        if weights.is_empty() {
            return Err(NetworkError::Invalid("layer has no units".into()));
        }
        if let Some(row) = weights.iter().position(|r| r.len() != input_width) {
            return Err(NetworkError::Invalid(format!(
                "row {row} has {} entries, expected {input_width}",
                weights[row].len()
            )));
        }
        Ok(Self {
            weights,
            bias,
            activation,
            input_width,
        })
    }

    pub fn weights(&self) -> &[Vec<Rational>] {
        &self.weights
    }

    pub fn bias(&self) -> &[Rational] {
        &self.bias
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn input_width(&self) -> usize {
        self.input_width
    }

    pub fn output_width(&self) -> usize {
        self.bias.len()
    }

}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkMeta {
    pub hidden_layers: usize,
    pub unit_count: usize,
    #[serde(with = "rational::serde_str")]
    pub weight_bound: Rational,
}

impl NetworkMeta {
    fn recount(layers: &[AffineLayer]) -> Self {
        let relu_layers = layers
            .iter()
            .filter(|l| l.activation == Activation::Relu);
        let hidden_layers = relu_layers.clone().count();
        let unit_count = relu_layers.map(AffineLayer::output_width).sum();
        let weight_bound = layers
            .iter()
            .flat_map(|l| l.weights.iter().flatten().chain(l.bias.iter()))
            .map(|w| w.abs())
            .max()
            .unwrap_or_else(Rational::zero);
        Self {
            hidden_layers,
            unit_count,
            weight_bound,
        }
    }
}

#[derive(Clone)]
pub struct ReluNetwork {
    input_dim: usize,
    layers: Vec<AffineLayer>,
    meta: NetworkMeta,
    kernel: Arc<Kernel>,
}

impl PartialEq for ReluNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.input_dim == other.input_dim && self.layers == other.layers
    }
}

impl Eq for ReluNetwork {}

impl std::fmt::Debug for ReluNetwork {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReluNetwork")
            .field("input_dim", &self.input_dim)
            .field("widths", &self.widths())
            .field("meta", &self.meta)
            .finish()
    }
}

impl ReluNetwork {
    /// Validates the layer chain and recomputes the metadata.
    pub fn new(input_dim: usize, layers: Vec<AffineLayer>) -> Result<Self> {
        if input_dim == 0 {
            return Err(NetworkError::Invalid("input_dim must be positive".into()));
        }
        let Some(last) = layers.len().checked_sub(1) else {
            return Err(NetworkError::Empty);
        };
        let mut width = input_dim;
        for (i, layer) in layers.iter().enumerate() {
            if layer.input_width != width {
                return Err(NetworkError::DimensionMismatch {
                    layer: i,
                    expected: width,
                    found: layer.input_width,
                });
            }
            let expected = if i == last {
                Activation::Linear
            } else {
                Activation::Relu
            };
            if layer.activation != expected {
                return Err(NetworkError::Shape {
                    layer: i,
                    reason: format!("activation must be {expected:?}"),
                });
            }
            width = layer.output_width();
        }
        let meta = NetworkMeta::recount(&layers);
        let kernel = Arc::new(Kernel::compile(&layers));
        Ok(Self {
            input_dim,
            layers,
            meta,
            kernel,
        })
    }

    /// Affine map `z ↦ Wz + b` as a 0-hidden-layer network.
    pub fn affine(weights: Vec<Vec<Rational>>, bias: Vec<Rational>) -> Result<Self> {
        let input_dim = weights.first().map(Vec::len).unwrap_or(0);
        Self::new(
            input_dim,
            vec![AffineLayer::new(input_dim, weights, bias, Activation::Linear)?],
        )
    }

    /// The scalar identity `t ↦ relu(t) − relu(−t)` (one hidden layer).
    pub fn identity_1d() -> Self {
        use crate::rational::int;
        Self::new(
            1,
            vec![
                AffineLayer::new(1, vec![vec![int(1)], vec![int(-1)]], vec![int(0), int(0)], Activation::Relu)
                    .expect("static shape"),
                AffineLayer::new(2, vec![vec![int(1), int(-1)]], vec![int(0)], Activation::Linear)
                    .expect("static shape"),
            ],
        )
        .expect("static shape")
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map(AffineLayer::output_width).unwrap_or(0)
    }

    pub fn layers(&self) -> &[AffineLayer] {
        &self.layers
    }

    pub fn meta(&self) -> &NetworkMeta {
        &self.meta
    }

    pub fn hidden_layers(&self) -> usize {
        self.meta.hidden_layers
    }

    pub fn widths(&self) -> Vec<usize> {
        self.layers.iter().map(AffineLayer::output_width).collect()
    }

    fn check_input(&self, len: usize) -> Result<()> {
        if len != self.input_dim {
            return Err(NetworkError::DimensionMismatch {
                layer: 0,
                expected: self.input_dim,
                found: len,
            });
        }
        Ok(())
    }

    /// Exact evaluation of every output unit.
    pub fn eval_exact(&self, z: &[Rational]) -> Result<Vec<Rational>> {
        self.check_input(z.len())?;
        Ok(self
            .kernel
            .eval_int(z)
            .unwrap_or_else(|| self.kernel.eval_big(z)))
    }

    /// Exact evaluation through the arbitrary-precision path only. Slower;
    /// exists so the integer fast path can be cross-checked.
    pub fn eval_exact_reference(&self, z: &[Rational]) -> Result<Vec<Rational>> {
        self.check_input(z.len())?;
        Ok(self.kernel.eval_big(z))
    }

    pub fn eval_exact_scalar(&self, z: &[Rational]) -> Result<Rational> {
        let mut out = self.eval_exact(z)?;
        self.expect_scalar()?;
        Ok(out.swap_remove(0))
    }

    /// Binary64 evaluation. Each unit sums `w_j · x_j` in ascending `j`
    /// starting from 0.0 and adds the bias last, so results are reproducible.
    pub fn eval_f64(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_input(z.len())?;
        Ok(self.kernel.eval_f64(z))
    }

    pub fn eval_f64_scalar(&self, z: &[f64]) -> Result<f64> {
        self.check_input(z.len())?;
        self.expect_scalar()?;
        Ok(self.kernel.eval_f64(z)[0])
    }

    fn expect_scalar(&self) -> Result<()> {
        if self.output_dim() != 1 {
            return Err(NetworkError::Shape {
                layer: self.layers.len() - 1,
                reason: format!("expected scalar output, found width {}", self.output_dim()),
            });
        }
        Ok(())
    }

    /// Certified `[lo, hi]` enclosure of each output over the box
    /// `[lower_j, upper_j]`, by exact interval arithmetic layer by layer.
    pub fn output_bounds(&self, lower: &[Rational], upper: &[Rational]) -> Result<Vec<(Rational, Rational)>> {
        self.check_input(lower.len())?;
        self.check_input(upper.len())?;
        let mut lo: Vec<Rational> = lower.to_vec();
        let mut hi: Vec<Rational> = upper.to_vec();
        for layer in &self.layers {
            let mut next_lo = Vec::with_capacity(layer.output_width());
            let mut next_hi = Vec::with_capacity(layer.output_width());
            for (row, b) in layer.weights.iter().zip(&layer.bias) {
                let mut l = b.clone();
                let mut h = b.clone();
                for ((w, a), c) in row.iter().zip(&lo).zip(&hi) {
                    if w.is_zero() {
                        continue;
                    }
                    if w.is_positive() {
                        l += w * a;
                        h += w * c;
                    } else {
                        l += w * c;
                        h += w * a;
                    }
                }
                if layer.activation == Activation::Relu {
                    l = rational::relu(&l);
                    h = rational::relu(&h);
                }
                next_lo.push(l);
                next_hi.push(h);
            }
            lo = next_lo;
            hi = next_hi;
        }
        Ok(lo.into_iter().zip(hi).collect())
    }
}
