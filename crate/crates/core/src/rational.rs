//! Exact rational helpers shared by every module.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `base^-exp` as an exact rational.
pub fn inv_pow(base: u32, exp: usize) -> Rational {
    Rational::new(BigInt::one(), num_traits::pow(BigInt::from(base), exp))
}

/// Exact conversion of a finite float (every finite f64 is a dyadic rational).
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// Nearest f64. Falls back to a quotient of rounded parts when the
/// numerator or denominator overflows.
pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn fmt_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        format!("{}/1", q.numer())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

pub fn abs(q: &Rational) -> Rational {
    q.abs()
}

/// Base-`base` value of a digit string, `sum d_i base^-i`.
pub fn digit_value(digits: &[u8], base: u32) -> Rational {
    let mut num = BigInt::zero();
    for &d in digits {
        num = num * base + BigInt::from(d);
    }
    Rational::new(num, num_traits::pow(BigInt::from(base), digits.len()))
}

/// Serde adapter: a rational as `{"num": "...", "den": "..."}` with decimal strings.
pub mod serde_rational {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Pair {
        num: String,
        den: String,
    }

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Pair {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        use serde::de::Error as _;
        let p = Pair::deserialize(d)?;
        let n: BigInt = p.num.parse().map_err(D::Error::custom)?;
        let den: BigInt = p.den.parse().map_err(D::Error::custom)?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::new(n, den))
    }
}

pub mod serde_rational_vec {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Wrapped(#[serde(with = "super::serde_rational")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Wrapped> = v.iter().cloned().map(Wrapped).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let w = Vec::<Wrapped>::deserialize(d)?;
        Ok(w.into_iter().map(|w| w.0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digit_values() {
        assert_eq!(digit_value(&[1, 0, 1], 2), rat(5, 8));
        assert_eq!(digit_value(&[3], 4), rat(3, 4));
        assert_eq!(digit_value(&[], 4), int(0));
    }

    #[test]
    fn float_conversion_is_exact() {
        let q = from_f64(0.7).unwrap();
        assert_eq!(to_f64(&q), 0.7);
        assert_ne!(q, rat(7, 10));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("7/64"), Some(rat(7, 64)));
        assert_eq!(parse_rational("3"), Some(int(3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(fmt_rational(&rat(14, 128)), "7/64");
    }
}
