//! Exact rational arithmetic used throughout the pipeline.
//!
//! Every quantity an algorithm compares (disutilities, prices, fractions,
//! incomes, the slack `epsilon`) is a [`Rat`]. Floating point never enters
//! the algorithmic path.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Arbitrary-precision rational in canonical reduced form.
pub type Rat = BigRational;

/// `num / den` as a [`Rat`]. Panics if `den == 0`.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Integer `v` as a [`Rat`].
pub fn int(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

pub fn zero() -> Rat {
    Rat::zero()
}

pub fn one() -> Rat {
    Rat::one()
}

/// Sum of an iterator of rationals.
pub fn sum<'a>(it: impl IntoIterator<Item = &'a Rat>) -> Rat {
    it.into_iter().fold(Rat::zero(), |acc, v| acc + v)
}

/// Lossy conversion for diagnostics only.
pub fn to_f64(v: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap_or(f64::NAN)
}

/// Error produced when a rational literal cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRatError(pub String);

impl fmt::Display for ParseRatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal {:?}", self.0)
    }
}

impl std::error::Error for ParseRatError {}

/// Parses `"p/q"`, `"p"` or a decimal such as `"0.25"` into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ParseRatError> {
    let t = s.trim();
    let err = || ParseRatError(s.to_string());
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(p, q));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits.parse().map_err(|_| err())?
        };
        let f: BigInt = frac.parse().map_err(|_| err())?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rat::new(w * &scale + f, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let v: BigInt = t.parse().map_err(|_| err())?;
    Ok(Rat::from_integer(v))
}

/// Canonical text form: bare integer when the denominator is 1, else `"p/q"`.
pub fn format_rat(v: &Rat) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Least common multiple of the denominators of `values` (1 for an empty input).
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    use num_integer::Integer;
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_nonnegative(v: &Rat) -> bool {
    !v.is_negative()
}

/// Serde adapters that write rationals as `"p/q"` strings (or bare integers) and
/// accept JSON integers, decimal numbers, or such strings on input.
pub mod serde_rat {
    use super::{format_rat, parse_rat, Rat};
    use num_bigint::BigInt;
    use serde::de::{self, Deserializer, Visitor};
    use serde::ser::Serializer;
    use std::fmt;

    pub fn serialize<S: Serializer>(v: &Rat, s: S) -> Result<S::Ok, S::Error> {
        if v.is_integer() {
            if let Ok(i) = i64::try_from(v.numer().clone()) {
                return s.serialize_i64(i);
            }
        }
        s.serialize_str(&format_rat(v))
    }

    struct RatVisitor;

    impl<'de> Visitor<'de> for RatVisitor {
        type Value = Rat;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an integer or a rational string such as \"3/4\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
            Ok(Rat::from_integer(BigInt::from(v)))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
            Ok(Rat::from_integer(BigInt::from(v)))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rat, E> {
            // JSON decimals are reparsed from their shortest text form so that
            // 0.1 means 1/10 rather than the nearest binary double.
            parse_rat(&format!("{v}")).map_err(E::custom)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
            parse_rat(v).map_err(E::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        d.deserialize_any(RatVisitor)
    }

    pub mod vec {
        use super::Rat;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct W(#[serde(with = "super")] Rat);

        pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|r| W(r.clone())))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
            let v: Vec<W> = Vec::deserialize(d)?;
            Ok(v.into_iter().map(|w| w.0).collect())
        }
    }

    pub mod matrix {
        use super::Rat;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Row(#[serde(with = "super::vec")] Vec<Rat>);

        pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|r| Row(r.clone())))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
            let v: Vec<Row> = Vec::deserialize(d)?;
            Ok(v.into_iter().map(|r| r.0).collect())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rat("3/4").unwrap(), rat(3, 4));
        assert_eq!(parse_rat(" 6/8 ").unwrap(), rat(3, 4));
        assert_eq!(parse_rat("-2").unwrap(), int(-2));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("abc").is_err());
        assert!(parse_rat("1.").is_err());
    }

    #[test]
    fn format_is_canonical() {
        assert_eq!(format_rat(&rat(6, 8)), "3/4");
        assert_eq!(format_rat(&int(5)), "5");
        assert_eq!(format_rat(&rat(-1, 3)), "-1/3");
    }

    #[test]
    fn lcm_of_denominators() {
        let vals = [rat(1, 4), rat(5, 6), int(3)];
        assert_eq!(common_denominator(vals.iter()), BigInt::from(12));
    }
}
