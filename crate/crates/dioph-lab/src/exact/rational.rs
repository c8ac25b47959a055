//! Arbitrary-precision rationals plus the handful of integer-rounding
//! helpers the rest of the crate leans on. Serialized form is always the
//! string `"p/q"` (or `"p"` when the denominator is one).

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::str::FromStr;

pub type Rat = BigRational;

pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rat {
    Rat::from_integer(BigInt::from(p))
}

pub fn rat_zero() -> Rat {
    Rat::zero()
}

pub fn rat_one() -> Rat {
    Rat::one()
}

/// `floor(x)` as a `BigInt`.
pub fn floor_int(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

/// Nearest integer, ties rounded up. Exact.
pub fn round_int(x: &Rat) -> BigInt {
    floor_int(&(x + Rat::new(BigInt::one(), BigInt::from(2))))
}

/// Distance from `x` to the nearest integer, in `[0, 1/2]`.
pub fn dist_to_int(x: &Rat) -> Rat {
    let f = x - Rat::from_integer(floor_int(x));
    let g = Rat::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// Integer power with signed exponent; `base` must be nonzero for negative
/// exponents.
pub fn pow_i64(base: &Rat, e: i64) -> Rat {
    if e == 0 {
        return Rat::one();
    }
    let exp = i32::try_from(e.unsigned_abs()).expect("exponent too large");
    let p = base.pow(exp);
    if e > 0 {
        p
    } else {
        p.recip()
    }
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|e| format!("bad numerator {p:?}: {e}"))?;
        let q = BigInt::from_str(q.trim()).map_err(|e| format!("bad denominator {q:?}: {e}"))?;
        if q.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rat::new(p, q))
    } else if s.contains('.') {
        // Decimal literals are convenient in configs; they are exact
        // base-ten rationals, not floats.
        let neg = s.starts_with('-');
        let body = s.trim_start_matches(['-', '+']);
        let (int, frac) = body.split_once('.').unwrap();
        let digits = format!("{int}{frac}");
        let num = BigInt::from_str(&digits).map_err(|e| format!("bad decimal {s:?}: {e}"))?;
        let den = BigInt::from(10u32).pow(frac.len() as u32);
        let r = Rat::new(num, den);
        Ok(if neg { -r } else { r })
    } else {
        let p = BigInt::from_str(s).map_err(|e| format!("bad integer {s:?}: {e}"))?;
        Ok(Rat::from_integer(p))
    }
}

pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Out-of-range ratios: fall back on sign times infinity.
        match x.numer().sign() {
            Sign::Minus => f64::NEG_INFINITY,
            Sign::NoSign => 0.0,
            Sign::Plus => f64::INFINITY,
        }
    })
}

/// Exact square root when one exists.
pub fn rat_sqrt_exact(x: &Rat) -> Option<Rat> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

/// gcd of a slice of integers, nonnegative.
pub fn gcd_all(xs: &[BigInt]) -> BigInt {
    let mut g = BigInt::zero();
    for x in xs {
        g = g.gcd(x);
    }
    g
}

/// Serde adapter: rationals as `"p/q"` strings.
pub mod rat_string {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(D::Error::custom)
    }
}

/// Serde adapter for vectors of rationals.
pub mod rat_vec_string {
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(xs: &[Rat], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(xs.iter().map(|x| format_rat(x)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
        let raw = Vec::<String>::deserialize(d)?;
        raw.iter().map(|s| parse_rat(s).map_err(D::Error::custom)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0", "-12"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("6/4").unwrap(), rat(3, 2));
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn dist_to_int_basic() {
        assert_eq!(dist_to_int(&rat(2, 5)), rat(2, 5));
        assert_eq!(dist_to_int(&rat(7, 10)), rat(3, 10));
        assert_eq!(dist_to_int(&rat(-7, 10)), rat(3, 10));
        assert_eq!(dist_to_int(&rat_int(4)), rat_zero());
        assert_eq!(dist_to_int(&rat(1, 2)), rat(1, 2));
    }

    #[test]
    fn rounding() {
        assert_eq!(round_int(&rat(5, 3)), BigInt::from(2));
        assert_eq!(round_int(&rat(-5, 3)), BigInt::from(-2));
        assert_eq!(round_int(&rat(1, 2)), BigInt::from(1));
        assert_eq!(floor_int(&rat(-1, 3)), BigInt::from(-1));
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(rat_sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(rat_sqrt_exact(&rat(2, 1)), None);
        assert_eq!(rat_sqrt_exact(&rat(0, 1)), Some(rat_zero()));
    }
}
