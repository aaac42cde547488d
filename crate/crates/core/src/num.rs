//! Exact integer and rational helpers shared by the other modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// `⌊(p/q)^n⌋` computed as `p^n div q^n` with floor division.
pub fn floor_pow(r: &BigRational, n: u32) -> BigInt {
    let num = num_traits::pow(r.numer().clone(), n as usize);
    let den = num_traits::pow(r.denom().clone(), n as usize);
    num.div_floor(&den)
}

pub fn floor_rat(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

pub fn ceil_rat(x: &BigRational) -> BigInt {
    -((-x.numer()).div_floor(x.denom()))
}

/// Largest `i` with `2^i <= x`, for `x >= 1`.
pub fn floor_log2_rat(x: &BigRational) -> Option<u64> {
    if *x < BigRational::one() {
        return None;
    }
    let fl = floor_rat(x);
    Some(fl.bits() - 1)
}

pub fn rat(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

/// Renders a rational as `p/q`, or `p` when the denominator is one.
pub fn fmt_rat(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn digits(&mut self) -> Option<&'a str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            None
        } else {
            // ASCII digits only, so the slice is valid UTF-8.
            Some(std::str::from_utf8(&self.bytes[start..self.pos]).unwrap())
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }
}

/// Parses an arbitrary-precision decimal integer with an optional sign.
pub fn parse_int(text: &str) -> Result<BigInt> {
    let text = text.trim();
    let mut c = Cursor::new(text);
    let neg = match c.peek() {
        Some(b'-') => {
            c.pos += 1;
            true
        }
        Some(b'+') => {
            c.pos += 1;
            false
        }
        _ => false,
    };
    let digits = c.digits().ok_or_else(|| c.err("expected digits"))?;
    if c.pos != text.len() {
        return Err(c.err("unexpected trailing input"));
    }
    let v: BigInt = digits.parse().map_err(|_| c.err("bad integer"))?;
    Ok(if neg { -v } else { v })
}

/// Parses `integer ('/' positive-integer)?` into an exact rational.
pub fn parse_fraction(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let (num_txt, den_txt) = match text.find('/') {
        Some(i) => (&text[..i], Some((i + 1, &text[i + 1..]))),
        None => (text, None),
    };
    let num = parse_int(num_txt)?;
    let den = match den_txt {
        None => BigInt::one(),
        Some((offset, d)) => {
            let d = d.trim();
            if d.starts_with(['-', '+']) {
                return Err(Error::Parse {
                    pos: offset,
                    msg: "denominator must be a positive integer".into(),
                });
            }
            let v = parse_int(d).map_err(|e| match e {
                Error::Parse { pos, msg } => Error::Parse {
                    pos: pos + offset,
                    msg,
                },
                other => other,
            })?;
            if v.is_zero() {
                return Err(Error::Parse {
                    pos: offset,
                    msg: "denominator must be a positive integer".into(),
                });
            }
            v
        }
    };
    Ok(BigRational::new(num, den))
}

/// Integer literal in a config document: a decimal string, or a JSON
/// number for small values. Always serialized as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLit(pub BigInt);

impl Serialize for IntLit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for IntLit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => parse_int(&s).map(IntLit).map_err(de::Error::custom),
            serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => {
                parse_int(&n.to_string()).map(IntLit).map_err(de::Error::custom)
            }
            other => Err(de::Error::custom(format!(
                "expected a decimal integer string, got {other}"
            ))),
        }
    }
}

/// Rational literal: `"p/q"`, `"p"`, or a JSON integer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FracLit(pub BigRational);

impl Serialize for FracLit {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rat(&self.0))
    }
}

impl<'de> Deserialize<'de> for FracLit {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => {
                parse_fraction(&s).map(FracLit).map_err(de::Error::custom)
            }
            serde_json::Value::Number(n) if n.is_i64() || n.is_u64() => {
                parse_fraction(&n.to_string()).map(FracLit).map_err(de::Error::custom)
            }
            other => Err(de::Error::custom(format!(
                "expected a fraction string, got {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn floor_pow_examples() {
        assert_eq!(floor_pow(&q(3, 2), 4), BigInt::from(5));
        assert_eq!(floor_pow(&q(3, 2), 0), BigInt::from(1));
        assert_eq!(floor_pow(&q(3, 2), 9), BigInt::from(38));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(floor_rat(&q(-1, 3)), BigInt::from(-1));
        assert_eq!(ceil_rat(&q(-1, 3)), BigInt::from(0));
        assert_eq!(ceil_rat(&q(15, 2)), BigInt::from(8));
        assert_eq!(floor_rat(&q(21, 2)), BigInt::from(10));
        assert_eq!(ceil_rat(&q(4, 1)), BigInt::from(4));
    }

    #[test]
    fn log2_floor() {
        assert_eq!(floor_log2_rat(&q(1, 1)), Some(0));
        assert_eq!(floor_log2_rat(&q(5, 1)), Some(2));
        assert_eq!(floor_log2_rat(&q(15, 2)), Some(2));
        assert_eq!(floor_log2_rat(&q(1, 2)), None);
    }

    #[test]
    fn fractions_parse() {
        assert_eq!(parse_fraction("3/2").unwrap(), q(3, 2));
        assert_eq!(parse_fraction("-6/4").unwrap(), q(-3, 2));
        assert_eq!(parse_fraction("7").unwrap(), q(7, 1));
        assert!(matches!(
            parse_fraction("3/0"),
            Err(Error::Parse { pos: 2, .. })
        ));
        assert!(matches!(
            parse_fraction("3/-2"),
            Err(Error::Parse { pos: 2, .. })
        ));
        assert!(matches!(
            parse_fraction("3x"),
            Err(Error::Parse { pos: 1, .. })
        ));
    }

    #[test]
    fn big_integers_parse() {
        let v = parse_int("123456789012345678901234567890").unwrap();
        assert_eq!(v.to_string(), "123456789012345678901234567890");
        assert!(parse_int("").is_err());
        assert!(parse_int("--1").is_err());
    }
}
