//! Certified rational interval arithmetic.
//!
//! Used for the two places exact algebra cannot reach: values of the
//! exponential at nonzero rationals (diagonal-flow comparisons) and real
//! powers with irrational exponents (display-grade sums with certified
//! verdicts). Intervals always contain the true value; outward rounding
//! keeps denominators at a bounded bit size.

use super::rational::{pow_i64, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug, PartialEq)]
pub struct RatInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RatInterval {
    pub fn point(x: Rat) -> Self {
        RatInterval { lo: x.clone(), hi: x }
    }

    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi);
        RatInterval { lo, hi }
    }

    pub fn add(&self, other: &RatInterval) -> RatInterval {
        RatInterval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    pub fn mul(&self, other: &RatInterval) -> RatInterval {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        RatInterval { lo, hi }
    }

    pub fn scale(&self, c: &Rat) -> RatInterval {
        if c.is_negative() {
            RatInterval { lo: &self.hi * c, hi: &self.lo * c }
        } else {
            RatInterval { lo: &self.lo * c, hi: &self.hi * c }
        }
    }

    pub fn square(&self) -> RatInterval {
        self.mul(self)
    }

    /// Round endpoints outward to denominators `2^bits`.
    pub fn round_out(&self, bits: u32) -> RatInterval {
        let scale = Rat::from_integer(BigInt::one() << bits);
        let lo = Rat::new((&self.lo * &scale).floor().to_integer(), scale.numer().clone());
        let hi = Rat::new((&self.hi * &scale).ceil().to_integer(), scale.numer().clone());
        RatInterval { lo, hi }
    }

    /// Ordering relative to a rational, when the interval decides it.
    pub fn cmp_rat(&self, r: &Rat) -> Option<Ordering> {
        if &self.lo > r {
            Some(Ordering::Greater)
        } else if &self.hi < r {
            Some(Ordering::Less)
        } else {
            None
        }
    }

    pub fn cmp_interval(&self, other: &RatInterval) -> Option<Ordering> {
        if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.hi < other.lo {
            Some(Ordering::Less)
        } else {
            None
        }
    }
}

/// Certified enclosure of `e^x` for rational `x`.
///
/// Argument reduction `x = 2^j h` with `|h| <= 1/2`, a Taylor tail bound,
/// then `j` interval squarings with outward rounding at `bits` precision.
pub fn exp_interval(x: &Rat, bits: u32) -> RatInterval {
    if x.is_zero() {
        return RatInterval::point(Rat::one());
    }
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let mut j = 0u32;
    let mut h = x.clone();
    while h.abs() > half {
        h /= Rat::from_integer(BigInt::from(2));
        j += 1;
    }
    // Taylor sum of e^h to K terms; remainder < |h|^(K+1)/(K+1)! * 2
    // since the tail is dominated by a geometric series of ratio <= 1/2.
    let terms = (bits / 4 + 8) as usize;
    let mut sum = Rat::one();
    let mut term = Rat::one();
    for k in 1..=terms {
        term = term * &h / Rat::from_integer(BigInt::from(k as u64));
        sum += &term;
    }
    let rem = term.abs() * &half * Rat::from_integer(BigInt::from(4)); // safe slack
    let mut iv = RatInterval::new(&sum - &rem, &sum + &rem).round_out(bits + 8);
    assert!(iv.lo.is_positive(), "exp enclosure lost positivity");
    for _ in 0..j {
        iv = iv.square().round_out(bits + 8);
    }
    iv
}

/// Compare `e^x` with a rational `c` exactly. `e^x` is irrational for
/// nonzero rational `x`, so refinement always terminates.
pub fn cmp_exp_rat(x: &Rat, c: &Rat) -> Ordering {
    if !c.is_positive() {
        return Ordering::Greater;
    }
    if x.is_zero() {
        return Rat::one().cmp(c);
    }
    let mut bits = 32;
    loop {
        let iv = exp_interval(x, bits);
        if let Some(ord) = iv.cmp_rat(c) {
            return ord;
        }
        bits *= 2;
        assert!(bits <= 1 << 16, "exp comparison failed to converge");
    }
}

/// Certified enclosure of `x^(1/k)` for `x >= 0` via bisection to the
/// requested bit precision.
pub fn nth_root_interval(x: &Rat, k: u32, bits: u32) -> RatInterval {
    assert!(k >= 1 && !x.is_negative());
    if x.is_zero() {
        return RatInterval::point(Rat::zero());
    }
    if k == 1 {
        return RatInterval::point(x.clone());
    }
    let one = Rat::one();
    let (mut lo, mut hi) = if *x >= one {
        (Rat::one(), x.clone())
    } else {
        (x.clone(), Rat::one())
    };
    let tol = Rat::new(BigInt::one(), BigInt::one() << bits);
    // Bisection: robust and exact; the loop count is bits + log2(width).
    while &hi - &lo > tol {
        let mid = (&lo + &hi) / Rat::from_integer(BigInt::from(2));
        if pow_i64(&mid, k as i64) <= *x {
            lo = mid;
        } else {
            hi = mid;
        }
        let w = RatInterval::new(lo, hi).round_out(bits + 16);
        lo = w.lo;
        hi = w.hi;
    }
    RatInterval { lo, hi }
}

/// Certified enclosure of `base^exp` for `base > 0` and rational `exp`.
pub fn pow_interval(base: &Rat, exp: &Rat, bits: u32) -> RatInterval {
    assert!(base.is_positive());
    let p = exp.numer().clone();
    let q = exp.denom().clone();
    let pi = i64::try_from(&p).expect("exponent numerator fits i64");
    let qi = u32::try_from(&q).expect("exponent denominator fits u32");
    let powed = pow_i64(base, pi);
    nth_root_interval(&powed, qi, bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int, rat_to_f64};

    #[test]
    fn exp_encloses_true_value() {
        for (x, bits) in [(rat_int(1), 64), (rat(-3, 2), 64), (rat_int(20), 96), (rat(5, 7), 64)]
        {
            let iv = exp_interval(&x, bits);
            let v = rat_to_f64(&x).exp();
            assert!(rat_to_f64(&iv.lo) <= v && v <= rat_to_f64(&iv.hi), "{x} -> {iv:?}");
            let width = rat_to_f64(&(&iv.hi - &iv.lo));
            assert!(width / v < 1e-6, "width {width} too wide for {x}");
        }
    }

    #[test]
    fn exp_comparison_decides() {
        // e^1 vs 2.7182 (less than e) and 2.7183 (greater than e)
        assert_eq!(cmp_exp_rat(&rat_int(1), &rat(27182, 10000)), Ordering::Greater);
        assert_eq!(cmp_exp_rat(&rat_int(1), &rat(27183, 10000)), Ordering::Less);
        assert_eq!(cmp_exp_rat(&rat_int(0), &rat_int(1)), Ordering::Equal);
    }

    #[test]
    fn nth_root_brackets() {
        let iv = nth_root_interval(&rat_int(2), 2, 40);
        assert!(rat_to_f64(&iv.lo) <= 1.41421357);
        assert!(rat_to_f64(&iv.hi) >= 1.41421356);
        let cube = nth_root_interval(&rat(27, 8), 3, 40);
        assert!(iv.lo.is_positive());
        assert!(cube.cmp_rat(&rat(3, 2)).is_none(), "exact root stays inside: {cube:?}");
    }

    #[test]
    fn pow_interval_matches_float() {
        let iv = pow_interval(&rat_int(5), &rat(3, 4), 50);
        let v = 5f64.powf(0.75);
        assert!(rat_to_f64(&iv.lo) <= v && v <= rat_to_f64(&iv.hi));
    }
}
