use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Real exponent with an exact rational value when one is known.
///
/// Decimal and fraction strings ("1.5", "-3/2") keep their exact value, so
/// falling factorials of integer exponents vanish exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Exponent {
    value: f64,
    exact: Option<BigRational>,
}

impl Exponent {
    pub fn from_f64(value: f64) -> Self {
        Exponent { value, exact: None }
    }

    pub fn integer(n: i64) -> Self {
        Exponent {
            value: n as f64,
            exact: Some(BigRational::from_integer(BigInt::from(n))),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        Exponent {
            value: r.to_f64().unwrap_or(num as f64 / den as f64),
            exact: Some(r),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn neg(&self) -> Exponent {
        Exponent {
            value: -self.value,
            exact: self.exact.as_ref().map(|r| -r.clone()),
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_zero(),
            None => self.value == 0.0,
        }
    }

    pub fn is_nonnegative_integer(&self) -> bool {
        match &self.exact {
            Some(r) => r.is_integer() && !r.is_negative(),
            None => self.value >= 0.0 && self.value.fract() == 0.0,
        }
    }

    /// μ(μ−1)…(μ−k+1), exactly zero when μ is a non-negative integer < k.
    pub fn falling_factorial(&self, k: u32) -> f64 {
        match &self.exact {
            Some(r) => {
                let mut acc = BigRational::one();
                for j in 0..k {
                    acc *= r - BigRational::from_integer(BigInt::from(j));
                    if acc.is_zero() {
                        return 0.0;
                    }
                }
                acc.to_f64().unwrap_or(f64::NAN)
            }
            None => {
                let mut acc = 1.0;
                for j in 0..k {
                    acc *= self.value - j as f64;
                }
                acc
            }
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Parses "2", "-1.25", "3/2" exactly; anything else that parses as a float
/// (e.g. "1e-3", "nan") falls back to an inexact value.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let num = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let r = BigRational::new(num, den);
    Some(if neg { -r } else { r })
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(r) = parse_rational(s) {
            let value = r
                .to_f64()
                .ok_or_else(|| Error::Parse(format!("exponent {s} out of range")))?;
            return Ok(Exponent {
                value,
                exact: Some(r),
            });
        }
        let value: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("cannot parse exponent {s:?}")))?;
        if !value.is_finite() {
            return Err(Error::Parse(format!("exponent {s} is not finite")));
        }
        Ok(Exponent::from_f64(value))
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.exact {
            Some(_) => serializer.serialize_str(&self.to_string()),
            None => serializer.serialize_f64(self.value),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExpVisitor;

        impl Visitor<'_> for ExpVisitor {
            type Value = Exponent;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a decimal/fraction string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Exponent, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Exponent, E> {
                Ok(Exponent::integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Exponent, E> {
                i64::try_from(v)
                    .map(Exponent::integer)
                    .map_err(|_| E::custom("exponent too large"))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Exponent, E> {
                // Shortest round-trip decimal, so 0.1 becomes 1/10.
                format!("{v}")
                    .parse()
                    .map_err(|e: Error| E::custom(e.to_string()))
            }
        }

        deserializer.deserialize_any(ExpVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        let e: Exponent = "1.5".parse().unwrap();
        assert_eq!(e.exact().unwrap(), &BigRational::new(3.into(), 2.into()));
        let e: Exponent = "-3/2".parse().unwrap();
        assert_eq!(e.value(), -1.5);
        let e: Exponent = "1e-3".parse().unwrap();
        assert!(e.exact().is_none());
        assert!("abc".parse::<Exponent>().is_err());
        assert!("1/0".parse::<Exponent>().is_err());
    }

    #[test]
    fn integer_falling_factorial_vanishes() {
        let e = Exponent::integer(3);
        assert_eq!(e.falling_factorial(3), 6.0);
        assert_eq!(e.falling_factorial(4), 0.0);
        let h = Exponent::ratio(1, 2);
        assert_eq!(h.falling_factorial(2), -0.25);
    }

    #[test]
    fn json_round_trip() {
        let v: Vec<Exponent> = serde_json::from_str(r#"["3", -1, 0.5, "1.25"]"#).unwrap();
        assert_eq!(v[1].value(), -1.0);
        assert_eq!(v[2].exact().unwrap(), &BigRational::new(1.into(), 2.into()));
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"["3","-1","1/2","5/4"]"#);
    }
}
