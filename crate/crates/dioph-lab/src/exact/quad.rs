//! Elements of a real quadratic extension: `a + b*sqrt(d)` with rational
//! `a`, `b` and a fixed nonnegative rational discriminant `d`.
//!
//! The discriminant is not required to be a squarefree integer; any
//! nonnegative rational works, which lets callers form square roots of
//! computed quantities (squared lattice minima, say) without factoring.
//! Signs, orderings and nearest-integer distances are all decided exactly.
//! Elements from different extensions cannot be mixed, except through the
//! rationals (`b = 0`), which embed in every extension.

use super::rational::{format_rat, parse_rat, rat_sqrt_exact, rat_to_f64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Clone, PartialEq, Eq)]
pub struct Quad {
    pub a: Rat,
    pub b: Rat,
    pub disc: Rat,
}

/// Wire format: plain rationals serialize as `"p/q"`, proper quadratic
/// elements as `{"a":"p/q","b":"r/s","disc":D}`.
impl Serialize for Quad {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.b.is_zero() {
            s.serialize_str(&format_rat(&self.a))
        } else {
            use serde::ser::SerializeStruct;
            let mut st = s.serialize_struct("Quad", 3)?;
            st.serialize_field("a", &format_rat(&self.a))?;
            st.serialize_field("b", &format_rat(&self.b))?;
            if self.disc.is_integer() {
                if let Some(d) = self.disc.to_integer().to_i64() {
                    st.serialize_field("disc", &d)?;
                    return st.end();
                }
            }
            st.serialize_field("disc", &format_rat(&self.disc))?;
            st.end()
        }
    }
}

impl<'de> Deserialize<'de> for Quad {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Quad, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum DiscRepr {
            Int(i64),
            Str(String),
        }
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Str(String),
            Obj { a: String, b: String, disc: DiscRepr },
        }
        match Repr::deserialize(d)? {
            Repr::Str(s) => parse_quad(&s).map_err(D::Error::custom),
            Repr::Obj { a, b, disc } => {
                let disc = match disc {
                    DiscRepr::Int(i) => Rat::from_integer(BigInt::from(i)),
                    DiscRepr::Str(s) => parse_rat(&s).map_err(D::Error::custom)?,
                };
                Ok(Quad::new(
                    parse_rat(&a).map_err(D::Error::custom)?,
                    parse_rat(&b).map_err(D::Error::custom)?,
                    disc,
                ))
            }
        }
    }
}

impl Quad {
    pub fn new(a: Rat, b: Rat, disc: Rat) -> Self {
        assert!(!disc.is_negative(), "discriminant must be nonnegative");
        let mut q = Quad { a, b, disc };
        q.normalize();
        q
    }

    pub fn from_rat(a: Rat) -> Self {
        Quad { a, b: Rat::zero(), disc: Rat::zero() }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rat(Rat::from_integer(BigInt::from(n)))
    }

    /// `sqrt(d)` as an element of Q(sqrt(d)).
    pub fn sqrt_of(disc: Rat) -> Self {
        Quad::new(Rat::zero(), Rat::one(), disc)
    }

    fn normalize(&mut self) {
        if self.b.is_zero() {
            self.disc = Rat::zero();
        } else if self.disc.is_zero() {
            self.b = Rat::zero();
        } else if let Some(r) = rat_sqrt_exact(&self.disc) {
            // Perfect-square discriminant folds into the rational part.
            self.a += &self.b * r;
            self.b = Rat::zero();
            self.disc = Rat::zero();
        }
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        if self.b.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }

    /// Common discriminant of two elements; errors only when both carry
    /// distinct irrational parts.
    fn join_disc(&self, other: &Quad) -> Rat {
        if self.b.is_zero() {
            other.disc.clone()
        } else if other.b.is_zero() || self.disc == other.disc {
            self.disc.clone()
        } else {
            panic!(
                "mixed quadratic discriminants {} and {}",
                format_rat(&self.disc),
                format_rat(&other.disc)
            );
        }
    }

    /// Exact sign: -1, 0, or 1.
    pub fn signum(&self) -> i8 {
        if self.b.is_zero() {
            return if self.a.is_zero() {
                0
            } else if self.a.is_positive() {
                1
            } else {
                -1
            };
        }
        if self.a.is_zero() {
            return if self.b.is_positive() { 1 } else { -1 };
        }
        let sa = self.a.is_positive();
        let sb = self.b.is_positive();
        if sa && sb {
            return 1;
        }
        if !sa && !sb {
            return -1;
        }
        // Opposite signs: compare a^2 with b^2 d; sqrt(d) is irrational
        // here, so equality cannot occur.
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * &self.disc;
        match a2.cmp(&b2d) {
            Ordering::Greater => {
                if sa {
                    1
                } else {
                    -1
                }
            }
            Ordering::Less => {
                if sb {
                    1
                } else {
                    -1
                }
            }
            Ordering::Equal => unreachable!("irrational sqrt matched a rational"),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn abs(&self) -> Quad {
        if self.is_negative() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Quad {
        assert!(!self.is_zero(), "division by zero");
        if self.b.is_zero() {
            return Quad::from_rat(self.a.recip());
        }
        // 1/(a + b sqrt d) = (a - b sqrt d) / (a^2 - b^2 d)
        let denom = &self.a * &self.a - &self.b * &self.b * &self.disc;
        Quad::new(&self.a / &denom, -(&self.b / &denom), self.disc.clone())
    }

    pub fn pow(&self, e: u32) -> Quad {
        let mut acc = Quad::from_int(1);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// `floor` of the real value, exact.
    pub fn floor_int(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        let mut k = BigInt::from(self.to_f64().floor() as i64);
        // The float estimate is off by at most a few units; fix it exactly.
        while (self - &Quad::from_rat(Rat::from_integer(k.clone()))).is_negative() {
            k -= 1;
        }
        loop {
            let next: BigInt = &k + 1;
            if (self - &Quad::from_rat(Rat::from_integer(next.clone()))).is_negative() {
                break;
            }
            k = next;
        }
        k
    }

    /// Distance to the nearest integer, in `[0, 1/2]`, exact.
    pub fn dist_to_int(&self) -> Quad {
        let f = self - &Quad::from_rat(Rat::from_integer(self.floor_int()));
        let g = &Quad::from_int(1) - &f;
        if (&g - &f).is_negative() {
            g
        } else {
            f
        }
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.a) + rat_to_f64(&self.b) * rat_to_f64(&self.disc).sqrt()
    }
}

impl fmt::Debug for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Quad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", format_rat(&self.a))
        } else {
            write!(
                f,
                "{}+{}*sqrt({})",
                format_rat(&self.a),
                format_rat(&self.b),
                format_rat(&self.disc)
            )
        }
    }
}

/// Parse either a plain rational `"p/q"` or `"p/q+r/s*sqrt(D)"`.
pub fn parse_quad(s: &str) -> Result<Quad, String> {
    let s = s.trim();
    if let Some(idx) = s.find("*sqrt(") {
        let close = s.rfind(')').ok_or_else(|| format!("missing ')' in {s:?}"))?;
        let disc = parse_rat(&s[idx + 6..close])?;
        let head = &s[..idx];
        // Split the rational part from the sqrt coefficient at the last
        // '+' or '-' that is not the leading sign.
        let mut split = None;
        for (i, c) in head.char_indices().skip(1) {
            if (c == '+' || c == '-') && !head[..i].ends_with(['e', 'E', '/']) {
                split = Some(i);
            }
        }
        match split {
            Some(i) => {
                let a = parse_rat(&head[..i])?;
                let b_str = &head[i..];
                let b = if b_str == "+" {
                    Rat::one()
                } else if b_str == "-" {
                    -Rat::one()
                } else {
                    parse_rat(b_str)?
                };
                Ok(Quad::new(a, b, disc))
            }
            None => {
                let b = if head.is_empty() { Rat::one() } else { parse_rat(head)? };
                Ok(Quad::new(Rat::zero(), b, disc))
            }
        }
    } else {
        Ok(Quad::from_rat(parse_rat(s)?))
    }
}

macro_rules! quad_binop {
    ($trait:ident, $fn:ident, |$a:ident, $b:ident, $d:ident| $body:expr) => {
        impl $trait for &Quad {
            type Output = Quad;
            fn $fn(self, rhs: &Quad) -> Quad {
                let $d = self.join_disc(rhs);
                let ($a, $b) = (self, rhs);
                $body
            }
        }
        impl $trait for Quad {
            type Output = Quad;
            fn $fn(self, rhs: Quad) -> Quad {
                (&self).$fn(&rhs)
            }
        }
    };
}

quad_binop!(Add, add, |x, y, d| Quad::new(&x.a + &y.a, &x.b + &y.b, d));
quad_binop!(Sub, sub, |x, y, d| Quad::new(&x.a - &y.a, &x.b - &y.b, d));
quad_binop!(Mul, mul, |x, y, d| {
    let a = &x.a * &y.a + &x.b * &y.b * &d;
    let b = &x.a * &y.b + &x.b * &y.a;
    Quad::new(a, b, d)
});

impl Div for &Quad {
    type Output = Quad;
    fn div(self, rhs: &Quad) -> Quad {
        self * &rhs.recip()
    }
}

impl Neg for Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        Quad { a: -self.a, b: -self.b, disc: self.disc }
    }
}

impl Neg for &Quad {
    type Output = Quad;
    fn neg(self) -> Quad {
        -self.clone()
    }
}

impl PartialOrd for Quad {
    fn partial_cmp(&self, other: &Quad) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Quad {
    fn cmp(&self, other: &Quad) -> Ordering {
        match (self - other).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

/// Sup norm of the componentwise distance to the nearest integer vector.
pub fn dist_to_int_sup(v: &[Quad]) -> Quad {
    let mut best = Quad::from_int(0);
    for x in v {
        let d = x.dist_to_int();
        if (&d - &best).is_positive() {
            best = d;
        }
    }
    best
}

pub fn dot(u: &[Quad], v: &[Quad]) -> Quad {
    assert_eq!(u.len(), v.len());
    let mut acc = Quad::from_int(0);
    for (a, b) in u.iter().zip(v) {
        acc = &acc + &(a * b);
    }
    acc
}

/// Dot product of a quadratic vector with an integer vector.
pub fn dot_int(u: &[Quad], v: &[i64]) -> Quad {
    assert_eq!(u.len(), v.len());
    let mut acc = Quad::from_int(0);
    for (a, &b) in u.iter().zip(v) {
        acc = &acc + &(a * &Quad::from_int(b));
    }
    acc
}

/// Row-major matrix over a quadratic extension (or plain rationals).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Quad>,
}

impl QuadMat {
    pub fn from_rows(rows: Vec<Vec<Quad>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        QuadMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuadMat { rows, cols, data: vec![Quad::from_int(0); rows * cols] }
    }

    pub fn from_rat_rows(rows: Vec<Vec<Rat>>) -> Self {
        Self::from_rows(
            rows.into_iter().map(|r| r.into_iter().map(Quad::from_rat).collect()).collect(),
        )
    }

    pub fn at(&self, i: usize, j: usize) -> &Quad {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Quad] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> QuadMat {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.at(i, j).clone());
            }
        }
        QuadMat { rows: self.cols, cols: self.rows, data }
    }

    pub fn is_rational(&self) -> bool {
        self.data.iter().all(|x| x.is_rational())
    }

    pub fn to_rat_rows(&self) -> Option<Vec<Vec<Rat>>> {
        if !self.is_rational() {
            return None;
        }
        Some((0..self.rows).map(|i| self.row(i).iter().map(|x| x.a.clone()).collect()).collect())
    }

    /// Matrix times integer vector.
    pub fn mul_int_vec(&self, v: &[i64]) -> Vec<Quad> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot_int(self.row(i), v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};

    fn sqrt2() -> Quad {
        Quad::sqrt_of(rat_int(2))
    }

    #[test]
    fn sign_of_sqrt2_minus_one() {
        let x = &sqrt2() - &Quad::from_int(1);
        assert_eq!(x.signum(), 1);
        let y = &sqrt2() - &Quad::from_rat(rat(3, 2));
        assert_eq!(y.signum(), -1);
        let z = &sqrt2() - &Quad::from_rat(rat(7, 5));
        assert_eq!(z.signum(), 1); // 2 > 49/25
    }

    #[test]
    fn arithmetic_and_recip() {
        let x = Quad::new(rat_int(1), rat_int(1), rat_int(2)); // 1 + sqrt2
        let inv = x.recip(); // sqrt2 - 1
        assert_eq!(&x * &inv, Quad::from_int(1));
        assert_eq!(inv, Quad::new(rat_int(-1), rat_int(1), rat_int(2)));
    }

    #[test]
    fn perfect_square_disc_collapses() {
        let x = Quad::new(rat(1, 2), rat(1, 3), rat(9, 4)); // 1/2 + (1/3)(3/2) = 1
        assert!(x.is_rational());
        assert_eq!(x.as_rat().unwrap(), &rat_int(1));
    }

    #[test]
    fn floor_and_dist() {
        let x = &sqrt2() - &Quad::from_int(1); // 0.4142...
        assert_eq!(x.floor_int(), BigInt::from(0));
        assert_eq!(x.dist_to_int(), x);
        let y = &sqrt2() + &Quad::from_int(3); // 4.414
        assert_eq!(y.floor_int(), BigInt::from(4));
        // dist = sqrt2 - 1
        assert_eq!(y.dist_to_int(), &sqrt2() - &Quad::from_int(1));
        let z = Quad::from_rat(rat(-7, 10));
        assert_eq!(z.dist_to_int(), Quad::from_rat(rat(3, 10)));
    }

    #[test]
    fn parse_quad_forms() {
        let q = parse_quad("-1+1*sqrt(2)").unwrap();
        assert_eq!(q, Quad::new(rat_int(-1), rat_int(1), rat_int(2)));
        let r = parse_quad("3/4").unwrap();
        assert_eq!(r, Quad::from_rat(rat(3, 4)));
        let s = parse_quad("1/2*sqrt(5)").unwrap();
        assert_eq!(s, Quad::new(rat_int(0), rat(1, 2), rat_int(5)));
    }

    #[test]
    fn ordering_is_total() {
        let xs = [
            Quad::from_int(0),
            &sqrt2() - &Quad::from_int(1),
            Quad::from_rat(rat(1, 2)),
            sqrt2(),
            Quad::from_int(2),
        ];
        for w in xs.windows(2) {
            assert!(w[0] < w[1]);
        }
    }
}
