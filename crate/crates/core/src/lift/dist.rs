use crate::gadgets::GadgetParams;
use crate::rational::{int, Rational};
use crate::stats;
use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

/// A symmetric one-dimensional law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum Marginal {
    Gaussian { std: f64 },
    Uniform { half_width: f64 },
}

impl Marginal {
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            Marginal::Gaussian { std } => {
                (-(x / std).powi(2) / 2.0).exp() / (std * (2.0 * std::f64::consts::PI).sqrt())
            }
            Marginal::Uniform { half_width } => {
                if x.abs() <= half_width {
                    0.5 / half_width
                } else {
                    0.0
                }
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Marginal::Gaussian { std } => stats::normal_cdf(x, std),
            Marginal::Uniform { half_width } => ((x + half_width) / (2.0 * half_width)).clamp(0.0, 1.0),
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            Marginal::Gaussian { std } => Normal::new(0.0, std).expect("validated std").sample(rng),
            Marginal::Uniform { half_width } => Uniform::new_inclusive(-half_width, half_width)
                .expect("validated width")
                .sample(rng),
        }
    }

    /// A draw of `|X|`.
    pub fn sample_half<R: Rng>(&self, rng: &mut R) -> f64 {
        self.sample(rng).abs()
    }

    /// `P(|X| < r)` by Simpson integration of the density; the panel count
    /// keeps the error far below `10⁻⁶` for the radii used here.
    pub fn mass_within(&self, r: f64) -> f64 {
        let r = match *self {
            Marginal::Uniform { half_width } => r.min(half_width),
            Marginal::Gaussian { .. } => r,
        };
        stats::simpson(|x| self.density(x), -r, r, 2000)
    }

    fn validate(&self) -> Result<(), String> {
        match *self {
            Marginal::Gaussian { std } if !(std > 0.0 && std.is_finite()) => Err(format!("bad std {std}")),
            Marginal::Uniform { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
                Err(format!("bad half width {half_width}"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistKind {
    Gaussian,
    SymmetricUniform,
    CustomProduct,
}

/// Claim that an interval of width `d^{−a}` around the median carries mass at
/// most `d^{−b}`, with `b > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntiConcentration {
    pub a: f64,
    pub b: f64,
}

/// Product law on `ℝ^d` with symmetric marginals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub kind: DistKind,
    /// One marginal shared by every coordinate, or one per coordinate.
    pub marginals: Vec<Marginal>,
    pub certificate: AntiConcentration,
}

impl DistributionSpec {
    pub fn gaussian() -> Self {
        Self {
            kind: DistKind::Gaussian,
            marginals: vec![Marginal::Gaussian { std: 1.0 }],
            certificate: AntiConcentration { a: 2.0, b: 2.0 },
        }
    }

    /// Uniform on `[−√3, √3]` (unit variance).
    pub fn symmetric_uniform() -> Self {
        Self::uniform_with_width(3f64.sqrt())
    }

    pub fn uniform_with_width(half_width: f64) -> Self {
        Self {
            kind: DistKind::SymmetricUniform,
            marginals: vec![Marginal::Uniform { half_width }],
            certificate: AntiConcentration { a: 2.0, b: 2.0 },
        }
    }

    pub fn custom_product(marginals: Vec<Marginal>, certificate: AntiConcentration) -> Result<Self, String> {
        let spec = Self {
            kind: DistKind::CustomProduct,
            marginals,
            certificate,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.marginals.is_empty() {
            return Err("no marginals".into());
        }
        if self.certificate.b <= 1.0 {
            return Err(format!("certificate exponent b = {} must exceed 1", self.certificate.b));
        }
        self.marginals.iter().try_for_each(Marginal::validate)
    }

    pub fn marginal(&self, j: usize) -> &Marginal {
        if self.marginals.len() == 1 {
            &self.marginals[0]
        } else {
            &self.marginals[j]
        }
    }

    /// Checks the anticoncentration certificate at dimension `d`.
    pub fn certificate_holds(&self, d: usize) -> bool {
        let width = (d as f64).powf(-self.certificate.a);
        let cap = (d as f64).powf(-self.certificate.b);
        (0..d).all(|j| self.marginal(j).mass_within(width / 2.0) <= cap)
    }

    pub fn sample_half<R: Rng>(&self, rng: &mut R, d: usize) -> Vec<f64> {
        (0..d).map(|j| self.marginal(j).sample_half(rng)).collect()
    }

    pub fn sample<R: Rng>(&self, rng: &mut R, d: usize) -> Vec<f64> {
        (0..d).map(|j| self.marginal(j).sample(rng)).collect()
    }
}

/// `∀j, |z_j| ≥ 2δ`.
pub fn in_good_set(z: &[Rational], params: &GadgetParams) -> bool {
    let two_delta = int(2) * &params.delta;
    z.iter().all(|v| num_traits::Signed::abs(v) >= two_delta)
}

/// Binary64 version with `δ = 1/d²`.
pub fn in_good_set_f64(z: &[f64], d: usize) -> bool {
    let t = 2.0 / (d as f64 * d as f64);
    z.iter().all(|v| v.abs() >= t)
}

/// `Π_j (1 − P(|X_j| < 2/d²))`.
pub fn good_set_prob(dist: &DistributionSpec, d: usize) -> f64 {
    let r = 2.0 / (d as f64 * d as f64);
    (0..d).map(|j| 1.0 - dist.marginal(j).mass_within(r)).product()
}
