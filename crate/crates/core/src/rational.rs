//! Exact rational helpers shared by every module.
//!
//! All identities in this crate are checked with [`Rational`] (an arbitrary
//! precision `num` rational). Binary64 values are only ever a derived view.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

pub type Rational = BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn relu(value: &Rational) -> Rational {
    if value.is_negative() {
        Rational::zero()
    } else {
        value.clone()
    }
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite binary64 value; `None` for NaN or infinities.
pub fn from_f64(value: f64) -> Option<Rational> {
    Rational::from_float(value)
}

/// Canonical `"numerator/denominator"` rendering. The denominator is always
/// present, so integers render as `"3/1"`.
pub fn format(value: &Rational) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

/// Parses `"n/d"` or a bare integer `"n"`.
pub fn parse(literal: &str) -> Result<Rational, ParseRationalError> {
    let err = |reason| ParseRationalError {
        literal: literal.to_string(),
        reason,
    };
    let trimmed = literal.trim();
    let (num, den) = match trimmed.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (trimmed, "1"),
    };
    let numer: BigInt = num.parse().map_err(|_| err("bad numerator"))?;
    let denom: BigInt = den.parse().map_err(|_| err("bad denominator"))?;
    if denom.is_zero() {
        return Err(err("zero denominator"));
    }
    Ok(Rational::new(numer, denom))
}

/// Wrapper whose `Display` is the canonical `n/d` form.
pub struct Canonical<'a>(pub &'a Rational);

impl fmt::Display for Canonical<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

pub fn lcm_i128(a: i128, b: i128) -> Option<i128> {
    if a == 0 || b == 0 {
        return Some(0);
    }
    let g = a.gcd(&b);
    (a / g).checked_mul(b).map(|v| v.abs())
}

/// Splits a rational into `(numer, denom)` as machine integers when it fits.
pub fn to_i128_parts(value: &Rational) -> Option<(i128, i128)> {
    Some((value.numer().to_i128()?, value.denom().to_i128()?))
}

pub fn from_i128_parts(numer: i128, denom: i128) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn is_integer(value: &Rational) -> bool {
    value.denom().is_one()
}

pub fn abs(value: &Rational) -> Rational {
    value.abs()
}

/// Serde adapters rendering rationals as canonical strings.
pub mod serde_str {
    use super::{format, parse, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(value))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let literal = String::deserialize(d)?;
        parse(&literal).map_err(D::Error::custom)
    }

    pub mod vec {
        use super::super::{format, parse, Rational};
        use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};

        pub fn serialize<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(values.len()))?;
            for v in values {
                seq.serialize_element(&format(v))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let literals = Vec::<String>::deserialize(d)?;
            literals
                .iter()
                .map(|l| parse(l).map_err(D::Error::custom))
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_always_has_denominator() {
        assert_eq!(format(&int(3)), "3/1");
        assert_eq!(format(&rat(2, -6)), "-1/3");
        assert_eq!(format(&rat(0, 5)), "0/1");
    }

    #[test]
    fn parse_accepts_both_forms() {
        assert_eq!(parse("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse("-7").unwrap(), int(-7));
        assert!(parse("1/0").is_err());
        assert!(parse("x/2").is_err());
    }

    #[test]
    fn f64_conversion_is_exact() {
        let r = from_f64(0.1).unwrap();
        assert_ne!(r, rat(1, 10));
        assert_eq!(to_f64(&r), 0.1);
        assert!(from_f64(f64::NAN).is_none());
    }
}
