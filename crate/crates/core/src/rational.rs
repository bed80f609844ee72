//! Exact rationals and their text forms.
//!
//! Thresholds, probabilities and loads are kept exact. The canonical text
//! form is `"num/den"` (or just `"num"` for integers); decimal input such as
//! `"0.6"` is accepted and read exactly as `3/5`.

use num::bigint::{BigInt, BigUint};
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serializer};

use crate::error::{Error, Result};

pub type Rational = num::BigRational;

pub fn from_ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_int(v: impl Into<BigInt>) -> Rational {
    Rational::from_integer(v.into())
}

pub fn from_biguint(v: &BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v.clone()))
}

/// Parses `"a/b"`, a plain integer, or a finite decimal like `"0.75"`.
pub fn parse(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::invalid(format!("cannot parse {s:?} as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let den = num::pow(BigInt::from(10), frac_part.len());
    let v = Rational::new(num, den);
    Ok(if neg { -v } else { v })
}

/// Canonical `"num/den"` rendering (`"num"` for integers).
pub fn render(v: &Rational) -> String {
    if v.denom().is_one() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= v` for nonnegative `v`.
pub fn ceil_u64(v: &Rational) -> u64 {
    debug_assert!(!v.is_negative());
    v.ceil().to_integer().to_u64().expect("value fits in u64")
}

/// Serde adapter: rationals as canonical strings, accepting strings or numbers on input.
pub mod as_string {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let input = RationalInput::deserialize(d)?;
        input.into_rational().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for sequences of rationals.
pub mod vec_as_string {
    use super::*;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&render(x))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Vec<Rational>, D::Error> {
        let inputs = Vec::<RationalInput>::deserialize(d)?;
        inputs
            .into_iter()
            .map(|i| i.into_rational().map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalInput {
    Text(String),
    Int(i64),
    // Floats are read through their shortest decimal rendering, so 0.6 means 3/5.
    Float(f64),
}

impl RationalInput {
    fn into_rational(self) -> Result<Rational> {
        match self {
            RationalInput::Text(s) => parse(&s),
            RationalInput::Int(i) => Ok(from_int(i)),
            RationalInput::Float(f) if f.is_finite() => parse(&format!("{f}")),
            RationalInput::Float(f) => Err(Error::invalid(format!("non-finite rational {f}"))),
        }
    }
}
