//! Exact comparison of rational powers.
//!
//! Two families of values occur all over the verdict paths:
//! - [`Root`]: `base^(1/index)` for a nonnegative rational base (sup-norm
//!   values have index 1, Euclidean values are carried as squared bases
//!   with index 2, normalized minima bring higher indices);
//! - [`PowProd`]: `coeff * prod_i base_i^(e_i)` with positive rational
//!   bases and rational exponents (the transference constants `D`, `U`,
//!   schedule bounds, fractal radii).
//!
//! Every ordering question is decided by clearing denominators in the
//! exponents and comparing integer powers of rationals. No floating point
//! is involved; `to_f64` exists only for report display.

use super::rational::{pow_i64, rat_to_f64, Rat};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// `base^(1/index)`, `base >= 0`, `index >= 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct Root {
    base: Rat,
    index: u32,
}

impl Root {
    pub fn new(base: Rat, index: u32) -> Self {
        assert!(index >= 1);
        assert!(!base.is_negative(), "root of a negative rational");
        Root { base, index }
    }

    pub fn rational(x: Rat) -> Self {
        assert!(!x.is_negative());
        Root { base: x, index: 1 }
    }

    pub fn sqrt(square: Rat) -> Self {
        Root::new(square, 2)
    }

    pub fn zero() -> Self {
        Root::rational(Rat::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_zero()
    }

    pub fn base(&self) -> &Rat {
        &self.base
    }

    pub fn index(&self) -> u32 {
        self.index
    }

    /// Exact rational value when the root simplifies (index 1, zero, or one).
    pub fn as_rat(&self) -> Option<Rat> {
        if self.index == 1 || self.base.is_zero() || self.base.is_one() {
            Some(self.base.clone())
        } else {
            None
        }
    }

    /// `self^k` as a root with the same index.
    pub fn pow_int(&self, k: u32) -> Root {
        Root::new(self.base.pow(k as i32), self.index)
    }

    pub fn mul(&self, other: &Root) -> Root {
        let l = (self.index as u64).lcm(&(other.index as u64)) as u32;
        let a = self.base.pow((l / self.index) as i32);
        let b = other.base.pow((l / other.index) as i32);
        Root::new(a * b, l)
    }

    pub fn scale(&self, c: &Rat) -> Root {
        assert!(!c.is_negative());
        Root::new(&self.base * c.pow(self.index as i32), self.index)
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.base).powf(1.0 / self.index as f64)
    }

    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        if r.is_negative() {
            return Ordering::Greater;
        }
        self.base.cmp(&r.pow(self.index as i32))
    }
}

impl PartialOrd for Root {
    fn partial_cmp(&self, other: &Root) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Root {
    fn cmp(&self, other: &Root) -> Ordering {
        let l = (self.index as u64).lcm(&(other.index as u64)) as u32;
        let a = self.base.pow((l / self.index) as i32);
        let b = other.base.pow((l / other.index) as i32);
        a.cmp(&b)
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.index == 1 {
            write!(f, "{}", self.base)
        } else {
            write!(f, "({})^(1/{})", self.base, self.index)
        }
    }
}

/// `coeff * prod base_i^(exp_i)`; the value is zero iff `coeff` is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PowProd {
    pub coeff: Rat,
    pub factors: Vec<(Rat, Rat)>,
}

impl serde::Serialize for PowProd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use crate::exact::rational::format_rat;
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("PowProd", 3)?;
        st.serialize_field("coeff", &format_rat(&self.coeff))?;
        let factors: Vec<[String; 2]> = self
            .factors
            .iter()
            .map(|(b, e)| [format_rat(b), format_rat(e)])
            .collect();
        st.serialize_field("factors", &factors)?;
        st.serialize_field("value", &self.to_f64())?;
        st.end()
    }
}

impl PowProd {
    pub fn rational(coeff: Rat) -> Self {
        assert!(!coeff.is_negative());
        PowProd { coeff, factors: Vec::new() }
    }

    pub fn one() -> Self {
        Self::rational(Rat::one())
    }

    pub fn new(coeff: Rat, factors: Vec<(Rat, Rat)>) -> Self {
        assert!(!coeff.is_negative());
        for (b, _) in &factors {
            assert!(b.is_positive(), "power-product bases must be positive");
        }
        let mut p = PowProd { coeff, factors };
        p.simplify();
        p
    }

    fn simplify(&mut self) {
        if self.coeff.is_zero() {
            self.factors.clear();
            return;
        }
        let mut kept = Vec::new();
        for (b, e) in self.factors.drain(..) {
            if e.is_zero() || b.is_one() {
                continue;
            }
            if e.is_integer() {
                if let Some(k) = e.to_integer().to_i64() {
                    if k.unsigned_abs() <= 64 {
                        self.coeff *= pow_i64(&b, k);
                        continue;
                    }
                }
            }
            kept.push((b, e));
        }
        self.factors = kept;
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn mul(&self, other: &PowProd) -> PowProd {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        PowProd::new(&self.coeff * &other.coeff, factors)
    }

    pub fn scale(&self, c: &Rat) -> PowProd {
        PowProd::new(&self.coeff * c, self.factors.clone())
    }

    /// `self^e` for rational `e`; requires a nonzero value when `e < 0`.
    pub fn pow(&self, e: &Rat) -> PowProd {
        assert!(!self.coeff.is_zero() || !e.is_negative());
        if self.coeff.is_zero() {
            return if e.is_zero() { PowProd::one() } else { PowProd::rational(Rat::zero()) };
        }
        let mut factors: Vec<(Rat, Rat)> =
            self.factors.iter().map(|(b, x)| (b.clone(), x * e)).collect();
        if !self.coeff.is_one() {
            factors.push((self.coeff.clone(), e.clone()));
        }
        PowProd::new(Rat::one(), factors)
    }

    pub fn recip(&self) -> PowProd {
        self.pow(&-Rat::one())
    }

    /// Exact rational value when every exponent clears.
    pub fn as_rat(&self) -> Option<Rat> {
        if self.factors.is_empty() {
            Some(self.coeff.clone())
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        let mut v = rat_to_f64(&self.coeff);
        for (b, e) in &self.factors {
            v *= rat_to_f64(b).powf(rat_to_f64(e));
        }
        v
    }

    /// Exact comparison with another power product.
    pub fn cmp(&self, other: &PowProd) -> Ordering {
        if self.coeff.is_zero() || other.coeff.is_zero() {
            return self.coeff.cmp(&other.coeff);
        }
        // self / other compared against 1 after clearing exponent
        // denominators: prod base_i^(n_i / L) vs 1  <=>  prod base_i^(n_i) vs 1.
        let mut bases: Vec<Rat> = vec![&self.coeff / &other.coeff];
        let mut exps: Vec<Rat> = vec![Rat::one()];
        for (b, e) in &self.factors {
            bases.push(b.clone());
            exps.push(e.clone());
        }
        for (b, e) in &other.factors {
            bases.push(b.clone());
            exps.push(-e);
        }
        let mut l = num_bigint::BigInt::one();
        for e in &exps {
            l = l.lcm(e.denom());
        }
        let mut lhs = Rat::one();
        let mut rhs = Rat::one();
        for (b, e) in bases.iter().zip(&exps) {
            let k = (e * Rat::from_integer(l.clone())).to_integer();
            let k = k.to_i64().expect("cleared exponent fits in i64");
            if k >= 0 {
                lhs *= pow_i64(b, k);
            } else {
                rhs *= pow_i64(b, -k);
            }
        }
        lhs.cmp(&rhs)
    }

    pub fn cmp_rat(&self, r: &Rat) -> Ordering {
        if r.is_negative() {
            return Ordering::Greater;
        }
        self.cmp(&PowProd::rational(r.clone()))
    }
}

/// Compare `a^pa` with `b^pb` for positive rationals `a`, `b` and rational
/// exponents.
pub fn cmp_pow(a: &Rat, pa: &Rat, b: &Rat, pb: &Rat) -> Ordering {
    PowProd::new(Rat::one(), vec![(a.clone(), pa.clone())])
        .cmp(&PowProd::new(Rat::one(), vec![(b.clone(), pb.clone())]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};

    #[test]
    fn root_ordering() {
        // sqrt(2) vs 3/2: 2 vs 9/4 => less
        let r = Root::sqrt(rat_int(2));
        assert_eq!(r.cmp_rat(&rat(3, 2)), Ordering::Less);
        assert_eq!(r.cmp_rat(&rat(7, 5)), Ordering::Greater);
        // cbrt(3) vs sqrt(2): 3^2 vs 2^3 => greater
        let c = Root::new(rat_int(3), 3);
        assert_eq!(c.cmp(&r), Ordering::Greater);
    }

    #[test]
    fn root_mul_scale() {
        let r = Root::sqrt(rat_int(2)).scale(&rat(3, 1)); // 3 sqrt 2 = sqrt 18
        assert_eq!(r, Root::sqrt(rat_int(18)));
        let p = Root::sqrt(rat_int(2)).mul(&Root::sqrt(rat_int(8)));
        assert_eq!(p.as_rat(), None);
        assert_eq!(p.cmp_rat(&rat_int(4)), Ordering::Equal); // sqrt 16
    }

    #[test]
    fn powprod_transfer_values() {
        // D = 2 * (1/100)^(1/2) for (m,n)=(1,2), C=1/100: equals 1/5.
        let d = PowProd::new(rat_int(2), vec![(rat(1, 100), rat(1, 2))]);
        assert_eq!(d.cmp_rat(&rat(1, 5)), Ordering::Equal);
        // U = 2 * 10 * (1/100)^(-1/2) = 200.
        let u = PowProd::new(rat_int(20), vec![(rat(1, 100), rat(-1, 2))]);
        assert_eq!(u.cmp_rat(&rat_int(200)), Ordering::Equal);
        assert!(d.cmp(&u) == Ordering::Less);
    }

    #[test]
    fn powprod_pow_and_recip() {
        let x = PowProd::new(rat_int(3), vec![(rat_int(2), rat(1, 3))]); // 3*2^(1/3)
        let cube = x.pow(&rat_int(3));
        assert_eq!(cube.as_rat(), Some(rat_int(54)));
        let inv = x.recip();
        assert_eq!(x.mul(&inv).cmp_rat(&rat_int(1)), Ordering::Equal);
    }

    #[test]
    fn cmp_pow_cross() {
        // 8^(1/3) vs 4^(1/2): 2 vs 2 equal.
        assert_eq!(cmp_pow(&rat_int(8), &rat(1, 3), &rat_int(4), &rat(1, 2)), Ordering::Equal);
        // 2^(3/2) vs 3: 8 vs 9 => less.
        assert_eq!(cmp_pow(&rat_int(2), &rat(3, 2), &rat_int(3), &rat_int(1)), Ordering::Less);
    }
}
