//! Canonical text document for networks.
//!
//! ```text
//! { "input_dim": d,
//!   "layers": [ { "weights": [["n/d", ...], ...], "bias": ["n/d", ...], "activation": "relu"|"linear" } ],
//!   "meta": { "hidden_layers": L, "unit_count": k, "weight_bound": "n/d" } }
//! ```
//!
//! Key order is fixed and rationals are always reduced `n/d` strings, so two
//! structurally equal networks serialize to identical bytes. `meta` is
//! written for readers but recomputed on load.

use super::{Activation, AffineLayer, NetworkError, NetworkMeta, ReluNetwork, Result};
use crate::rational::{self, Rational};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerDocument {
    pub weights: Vec<Vec<String>>,
    pub bias: Vec<String>,
    pub activation: Activation,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub input_dim: usize,
    pub layers: Vec<LayerDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<NetworkMeta>,
}

impl From<&ReluNetwork> for NetworkDocument {
    fn from(net: &ReluNetwork) -> Self {
        Self {
            input_dim: net.input_dim,
            layers: net
                .layers
                .iter()
                .map(|l| LayerDocument {
                    weights: l
                        .weights
                        .iter()
                        .map(|r| r.iter().map(rational::format).collect())
                        .collect(),
                    bias: l.bias.iter().map(rational::format).collect(),
                    activation: l.activation,
                })
                .collect(),
            meta: Some(net.meta.clone()),
        }
    }
}

pub fn to_document(net: &ReluNetwork) -> String {
    let mut text = serde_json::to_string_pretty(&NetworkDocument::from(net)).expect("document serializes");
    text.push('\n');
    text
}

pub fn from_document(text: &str) -> Result<ReluNetwork> {
    let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| NetworkError::Parse {
        line: e.line(),
        column: e.column(),
        reason: e.to_string(),
    })?;
    ReluNetwork::try_from(doc)
}

impl TryFrom<NetworkDocument> for ReluNetwork {
    type Error = NetworkError;

    fn try_from(doc: NetworkDocument) -> Result<Self> {
        let mut width = doc.input_dim;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for (i, l) in doc.layers.into_iter().enumerate() {
            let parse = |s: &String, what: String| -> Result<Rational> {
                rational::parse(s).map_err(|e| NetworkError::Shape {
                    layer: i,
                    reason: format!("{what}: {e}"),
                })
            };
            let weights = l
                .weights
                .iter()
                .enumerate()
                .map(|(r, row)| {
                    row.iter()
                        .enumerate()
                        .map(|(c, s)| parse(s, format!("weights[{r}][{c}]")))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            let bias = l
                .bias
                .iter()
                .enumerate()
                .map(|(r, s)| parse(s, format!("bias[{r}]")))
                .collect::<Result<Vec<_>>>()?;
            let layer = AffineLayer::new(width, weights, bias, l.activation).map_err(|e| match e {
                NetworkError::Invalid(reason) => NetworkError::Shape { layer: i, reason },
                other => other,
            })?;
            width = layer.output_width();
            layers.push(layer);
        }
        ReluNetwork::new(doc.input_dim, layers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn third_net() -> ReluNetwork {
        ReluNetwork::new(
            2,
            vec![
                AffineLayer::new(2, vec![vec![rat(1, 3), int(-2)], vec![int(0), int(5)]], vec![rat(-1, 7), int(0)], Activation::Relu)
                    .unwrap(),
                AffineLayer::new(2, vec![vec![int(1), rat(2, 9)]], vec![int(3)], Activation::Linear).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_exact_thirds() {
        let net = third_net();
        let text = to_document(&net);
        assert!(text.contains("\"1/3\""));
        let back = from_document(&text).unwrap();
        assert_eq!(back, net);
        assert_eq!(back.layers()[0].weights()[0][0], rat(1, 3));
        assert_eq!(to_document(&back), text);
    }

    #[test]
    fn meta_in_document_is_not_trusted() {
        let text = to_document(&third_net()).replace("\"hidden_layers\": 1", "\"hidden_layers\": 9");
        let back = from_document(&text).unwrap();
        assert_eq!(back.meta().hidden_layers, 1);
    }

    #[test]
    fn corrupted_width_is_a_structured_error() {
        let text = to_document(&third_net()).replace("\"input_dim\": 2", "\"input_dim\": 3");
        match from_document(&text) {
            Err(NetworkError::Shape { layer: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_json_reports_location() {
        match from_document("{\n  \"input_dim\": 2,\n  \"layers\": [ oops ]\n}") {
            Err(NetworkError::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_rational_names_position() {
        let text = to_document(&third_net()).replace("\"-1/7\"", "\"-1/0\"");
        let err = from_document(&text).unwrap_err().to_string();
        assert!(err.contains("bias[0]"), "{err}");
    }
}
