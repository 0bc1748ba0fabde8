//! Structural operations: composition, stacking, linear combination, padding.

use super::{Activation, AffineLayer, NetworkError, ReluNetwork, Result};
use crate::rational::{int, Rational};
use num_traits::{One, Zero};

fn matmul(outer: &[Vec<Rational>], inner: &[Vec<Rational>], inner_cols: usize) -> Vec<Vec<Rational>> {
    outer
        .iter()
        .map(|row| {
            let mut out = vec![Rational::zero(); inner_cols];
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (o, b) in out.iter_mut().zip(&inner[k]) {
                    if !b.is_zero() {
                        *o += a * b;
                    }
                }
            }
            out
        })
        .collect()
}

/// `outer ∘ inner`, fusing inner's final linear layer into outer's first
/// affine map so the hidden-layer counts add.
pub fn compose(outer: &ReluNetwork, inner: &ReluNetwork) -> Result<ReluNetwork> {
    if inner.output_dim() != outer.input_dim() {
        return Err(NetworkError::DimensionMismatch {
            layer: 0,
            expected: outer.input_dim(),
            found: inner.output_dim(),
        });
    }
    let (inner_last, inner_rest) = inner.layers.split_last().ok_or(NetworkError::Empty)?;
    let (outer_first, outer_rest) = outer.layers.split_first().ok_or(NetworkError::Empty)?;
    let weights = matmul(&outer_first.weights, &inner_last.weights, inner_last.input_width);
    let bias = outer_first
        .weights
        .iter()
        .zip(&outer_first.bias)
        .map(|(row, b)| {
            row.iter()
                .zip(&inner_last.bias)
                .filter(|(w, _)| !w.is_zero())
                .fold(b.clone(), |acc, (w, c)| acc + w * c)
        })
        .collect();
    let fused = AffineLayer::new(inner_last.input_width, weights, bias, outer_first.activation)?;
    let layers = inner_rest
        .iter()
        .cloned()
        .chain(std::iter::once(fused))
        .chain(outer_rest.iter().cloned())
        .collect();
    ReluNetwork::new(inner.input_dim(), layers)
}

/// Pads `net` with identity pairs `t ↦ relu(t) − relu(−t)` until it has
/// exactly `target_hidden` hidden layers.
pub fn depth_pad(net: &ReluNetwork, target_hidden: usize) -> Result<ReluNetwork> {
    let current = net.hidden_layers();
    if target_hidden < current {
        return Err(NetworkError::Invalid(format!(
            "cannot pad a {current}-hidden-layer network down to {target_hidden}"
        )));
    }
    if target_hidden == current {
        return Ok(net.clone());
    }
    let extra = target_hidden - current;
    let (last, rest) = net.layers.split_last().ok_or(NetworkError::Empty)?;
    let k = last.output_width();
    let mut layers: Vec<AffineLayer> = rest.to_vec();

    let split_weights = last
        .weights
        .iter()
        .cloned()
        .chain(last.weights.iter().map(|r| r.iter().map(|w| -w).collect()))
        .collect();
    let split_bias = last
        .bias
        .iter()
        .cloned()
        .chain(last.bias.iter().map(|b| -b))
        .collect();
    layers.push(AffineLayer::new(last.input_width, split_weights, split_bias, Activation::Relu)?);

    let pos_neg = |i: usize, sign: i64| -> Vec<Rational> {
        let mut row = vec![Rational::zero(); 2 * k];
        row[i] = int(sign);
        row[k + i] = int(-sign);
        row
    };
    for _ in 1..extra {
        let weights = (0..k)
            .map(|i| pos_neg(i, 1))
            .chain((0..k).map(|i| pos_neg(i, -1)))
            .collect();
        layers.push(AffineLayer::new(2 * k, weights, vec![Rational::zero(); 2 * k], Activation::Relu)?);
    }
    let merge = (0..k).map(|i| pos_neg(i, 1)).collect();
    layers.push(AffineLayer::new(2 * k, merge, vec![Rational::zero(); k], Activation::Linear)?);
    ReluNetwork::new(net.input_dim(), layers)
}

/// Runs every network on the same input and concatenates their outputs.
/// Shallower networks are depth-padded to the deepest one first.
pub fn parallel(nets: &[ReluNetwork]) -> Result<ReluNetwork> {
    let first = nets.first().ok_or(NetworkError::Invalid("no networks to stack".into()))?;
    let input_dim = first.input_dim();
    if let Some(bad) = nets.iter().find(|n| n.input_dim() != input_dim) {
        return Err(NetworkError::DimensionMismatch {
            layer: 0,
            expected: input_dim,
            found: bad.input_dim(),
        });
    }
    let depth = nets.iter().map(ReluNetwork::hidden_layers).max().unwrap_or(0);
    let padded: Vec<ReluNetwork> = nets.iter().map(|n| depth_pad(n, depth)).collect::<Result<_>>()?;
    let mut layers = Vec::with_capacity(depth + 1);
    for li in 0..=depth {
        let in_width: usize = if li == 0 {
            input_dim
        } else {
            padded.iter().map(|n| n.layers[li].input_width).sum()
        };
        let mut weights = Vec::new();
        let mut bias = Vec::new();
        let mut offset = 0;
        for n in &padded {
            let layer = &n.layers[li];
            for (row, b) in layer.weights.iter().zip(&layer.bias) {
                if li == 0 {
                    weights.push(row.clone());
                } else {
                    let mut full = vec![Rational::zero(); in_width];
                    full[offset..offset + row.len()].clone_from_slice(row);
                    weights.push(full);
                }
                bias.push(b.clone());
            }
            if li > 0 {
                offset += layer.input_width;
            }
        }
        let activation = if li == depth { Activation::Linear } else { Activation::Relu };
        layers.push(AffineLayer::new(in_width, weights, bias, activation)?);
    }
    ReluNetwork::new(input_dim, layers)
}

/// `offset + Σ coefficient_i · net_i(z)` for scalar-output networks sharing
/// an input dimension. Hidden layers equal the maximum over the terms.
pub fn linear_combine(terms: &[(Rational, ReluNetwork)], offset: &Rational) -> Result<ReluNetwork> {
    if terms.is_empty() {
        return Err(NetworkError::Invalid("linear combination needs at least one term".into()));
    }
    if let Some((_, bad)) = terms.iter().find(|(_, n)| n.output_dim() != 1) {
        return Err(NetworkError::Invalid(format!(
            "term has output width {}, expected 1",
            bad.output_dim()
        )));
    }
    let nets: Vec<ReluNetwork> = terms.iter().map(|(_, n)| n.clone()).collect();
    let stacked = parallel(&nets)?;
    let coefficients = vec![terms.iter().map(|(c, _)| c.clone()).collect()];
    let outer = ReluNetwork::affine(coefficients, vec![offset.clone()])?;
    compose(&outer, &stacked)
}

/// Multiplies every output of `net` by `factor`.
pub fn scale_output(net: &ReluNetwork, factor: &Rational) -> Result<ReluNetwork> {
    if factor.is_one() {
        return Ok(net.clone());
    }
    let k = net.output_dim();
    let weights = (0..k)
        .map(|i| {
            let mut row = vec![Rational::zero(); k];
            row[i] = factor.clone();
            row
        })
        .collect();
    compose(&ReluNetwork::affine(weights, vec![Rational::zero(); k])?, net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    fn relu_shift(shift: i64) -> ReluNetwork {
        ReluNetwork::new(
            1,
            vec![
                AffineLayer::new(1, vec![vec![int(1)]], vec![int(shift)], Activation::Relu).unwrap(),
                AffineLayer::new(1, vec![vec![int(2)]], vec![int(-1)], Activation::Linear).unwrap(),
            ],
        )
        .unwrap()
    }

    fn small_rational() -> impl Strategy<Value = Rational> {
        (-400i64..400, 1i64..40).prop_map(|(n, d)| rat(n, d))
    }

    #[test]
    fn compose_adds_hidden_layers() {
        let f = relu_shift(1);
        let g = relu_shift(-2);
        let fg = compose(&f, &g).unwrap();
        assert_eq!(fg.hidden_layers(), 2);
    }

    #[test]
    fn pad_affine_map_to_one_hidden_layer() {
        let affine = ReluNetwork::affine(vec![vec![rat(3, 2), int(-2)]], vec![int(1)]).unwrap();
        let padded = depth_pad(&affine, 1).unwrap();
        assert_eq!(padded.hidden_layers(), 1);
        for i in -5..5 {
            let z = [rat(i, 3), rat(7 - i, 5)];
            assert_eq!(affine.eval_exact(&z).unwrap(), padded.eval_exact(&z).unwrap());
        }
    }

    #[test]
    fn pad_to_current_depth_is_identity() {
        let f = relu_shift(0);
        assert_eq!(depth_pad(&f, 1).unwrap(), f);
        assert!(depth_pad(&f, 0).is_err());
    }

    #[test]
    fn combine_rejects_empty_and_keeps_offset() {
        assert!(linear_combine(&[], &int(1)).is_err());
        let f = relu_shift(2);
        let constant = linear_combine(&[(int(0), f)], &int(5)).unwrap();
        for i in -10..10 {
            assert_eq!(constant.eval_exact_scalar(&[rat(i, 7)]).unwrap(), int(5));
        }
    }

    #[test]
    fn compose_width_mismatch() {
        let two = ReluNetwork::affine(vec![vec![int(1), int(1)]], vec![int(0)]).unwrap();
        let one = relu_shift(0);
        assert!(compose(&one, &two).is_ok());
        assert!(compose(&two, &one).is_err());
    }

    proptest! {
        #[test]
        fn composition_matches_sequential_evaluation(t in small_rational(), a in -3i64..3, b in -3i64..3) {
            let f = relu_shift(a);
            let g = depth_pad(&relu_shift(b), 2).unwrap();
            let fg = compose(&f, &g).unwrap();
            let inner = g.eval_exact(std::slice::from_ref(&t)).unwrap();
            prop_assert_eq!(fg.eval_exact(&[t]).unwrap(), f.eval_exact(&inner).unwrap());
            prop_assert_eq!(fg.hidden_layers(), 3);
        }

        #[test]
        fn cancellation_gives_zero(t in small_rational(), a in -3i64..3) {
            let f = relu_shift(a);
            let zero = linear_combine(&[(int(1), f.clone()), (int(-1), f)], &Rational::zero()).unwrap();
            prop_assert_eq!(zero.eval_exact_scalar(&[t]).unwrap(), Rational::zero());
        }

        #[test]
        fn combine_matches_weighted_sum(t in small_rational(), c1 in small_rational(), c2 in small_rational()) {
            let f = relu_shift(1);
            let g = compose(&relu_shift(-1), &relu_shift(2)).unwrap();
            let comb = linear_combine(&[(c1.clone(), f.clone()), (c2.clone(), g.clone())], &rat(1, 3)).unwrap();
            prop_assert_eq!(comb.hidden_layers(), 2);
            let z = [t];
            let expect = rat(1, 3) + c1 * f.eval_exact_scalar(&z).unwrap() + c2 * g.eval_exact_scalar(&z).unwrap();
            prop_assert_eq!(comb.eval_exact_scalar(&z).unwrap(), expect);
        }
    }
}
