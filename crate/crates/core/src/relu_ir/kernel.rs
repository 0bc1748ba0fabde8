//! Precompiled evaluation kernels for a layer chain.

use super::{Activation, AffineLayer};
use crate::rational::{self, Rational};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

struct IntRow {
    bias: i128,
    terms: Vec<(usize, i128)>,
}

/// One layer scaled to integers: `weights = terms / den`, `bias = bias / den`.
struct IntLayer {
    den: i128,
    rows: Vec<IntRow>,
    relu: bool,
}

struct SparseRow<T> {
    bias: T,
    terms: Vec<(usize, T)>,
}

struct SparseLayer<T> {
    rows: Vec<SparseRow<T>>,
    relu: bool,
}

pub(super) struct Kernel {
    int_layers: Option<Vec<IntLayer>>,
    big_layers: Vec<SparseLayer<Rational>>,
    float_layers: Vec<SparseLayer<f64>>,
}

impl Kernel {
    pub(super) fn compile(layers: &[AffineLayer]) -> Self {
        let big_layers: Vec<SparseLayer<Rational>> = layers
            .iter()
            .map(|l| SparseLayer {
                relu: l.activation == Activation::Relu,
                rows: l
                    .weights
                    .iter()
                    .zip(&l.bias)
                    .map(|(row, b)| SparseRow {
                        bias: b.clone(),
                        terms: row
                            .iter()
                            .enumerate()
                            .filter(|(_, w)| !w.is_zero())
                            .map(|(j, w)| (j, w.clone()))
                            .collect(),
                    })
                    .collect(),
            })
            .collect();
        let float_layers = big_layers
            .iter()
            .map(|l| SparseLayer {
                relu: l.relu,
                rows: l
                    .rows
                    .iter()
                    .map(|r| SparseRow {
                        bias: rational::to_f64(&r.bias),
                        terms: r.terms.iter().map(|(j, w)| (*j, rational::to_f64(w))).collect(),
                    })
                    .collect(),
            })
            .collect();
        let int_layers = big_layers.iter().map(scale_layer).collect();
        Self {
            int_layers,
            big_layers,
            float_layers,
        }
    }

    /// Integer common-denominator evaluation; `None` on any overflow.
    pub(super) fn eval_int(&self, z: &[Rational]) -> Option<Vec<Rational>> {
        let layers = self.int_layers.as_ref()?;
        let mut den: i128 = 1;
        for v in z {
            den = rational::lcm_i128(den, v.denom().to_i128()?)?;
        }
        let mut nums: Vec<i128> = z
            .iter()
            .map(|v| {
                let (n, d) = rational::to_i128_parts(v)?;
                n.checked_mul(den / d)
            })
            .collect::<Option<_>>()?;
        for layer in layers {
            let next_den = layer.den.checked_mul(den)?;
            let mut next = Vec::with_capacity(layer.rows.len());
            for row in &layer.rows {
                let mut acc = row.bias.checked_mul(den)?;
                for &(j, w) in &row.terms {
                    acc = acc.checked_add(w.checked_mul(nums[j])?)?;
                }
                if layer.relu && acc < 0 {
                    acc = 0;
                }
                next.push(acc);
            }
            let g = next.iter().fold(next_den, |g, &n| g.gcd(&n));
            den = next_den / g;
            nums = next.into_iter().map(|n| n / g).collect();
        }
        Some(
            nums.into_iter()
                .map(|n| rational::from_i128_parts(n, den))
                .collect(),
        )
    }

    pub(super) fn eval_big(&self, z: &[Rational]) -> Vec<Rational> {
        let mut x = z.to_vec();
        for layer in &self.big_layers {
            x = layer
                .rows
                .iter()
                .map(|row| {
                    let mut acc = row.bias.clone();
                    for (j, w) in &row.terms {
                        acc += w * &x[*j];
                    }
                    if layer.relu {
                        rational::relu(&acc)
                    } else {
                        acc
                    }
                })
                .collect();
        }
        x
    }

    pub(super) fn eval_f64(&self, z: &[f64]) -> Vec<f64> {
        let mut x = z.to_vec();
        for layer in &self.float_layers {
            x = layer
                .rows
                .iter()
                .map(|row| {
                    let mut acc = 0.0;
                    for &(j, w) in &row.terms {
                        acc += w * x[j];
                    }
                    acc += row.bias;
                    if layer.relu {
                        acc.max(0.0)
                    } else {
                        acc
                    }
                })
                .collect();
        }
        x
    }
}

fn scale_layer(layer: &SparseLayer<Rational>) -> Option<IntLayer> {
    let mut den: i128 = 1;
    for row in &layer.rows {
        den = rational::lcm_i128(den, row.bias.denom().to_i128()?)?;
        for (_, w) in &row.terms {
            den = rational::lcm_i128(den, w.denom().to_i128()?)?;
        }
    }
    let scale = |v: &Rational| -> Option<i128> {
        let (n, d) = rational::to_i128_parts(v)?;
        n.checked_mul(den / d)
    };
    let rows = layer
        .rows
        .iter()
        .map(|row| {
            Some(IntRow {
                bias: scale(&row.bias)?,
                terms: row
                    .terms
                    .iter()
                    .map(|(j, w)| Some((*j, scale(w)?)))
                    .collect::<Option<_>>()?,
            })
        })
        .collect::<Option<_>>()?;
    Some(IntLayer {
        den,
        rows,
        relu: layer.relu,
    })
}
