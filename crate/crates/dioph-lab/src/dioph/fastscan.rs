//! Common-denominator integer fast path for affine-form scans.
//!
//! When a pair `(A, b)` is entirely rational and small, `||Aq - b||_Z`
//! reduces to residue arithmetic over one denominator, which keeps the
//! brute-force witness scans in machine integers. Builders return `None`
//! whenever an overflow bound cannot be certified for the requested
//! coordinate range; callers then take the exact path. The two paths are
//! value-identical (covered by tests), the fast one is just fast.

use crate::exact::quad::{Quad, QuadMat};
use crate::exact::rational::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

#[derive(Clone, Debug)]
pub struct FastAffine {
    pub rows: usize,
    pub cols: usize,
    pub den: i64,
    a_num: Vec<i64>,
    b_num: Vec<i64>,
}

const DEN_CAP: i64 = 1 << 24;

impl FastAffine {
    /// Build the scaled form, certifying that every intermediate stays
    /// within `i64` for coordinates up to `max_coord` in absolute value.
    pub fn build(a: &QuadMat, b: &[Quad], max_coord: i64) -> Option<FastAffine> {
        if !a.is_rational() || b.iter().any(|x| !x.is_rational()) {
            return None;
        }
        assert_eq!(b.len(), a.rows);
        let mut lcm = BigInt::one();
        for x in &a.data {
            lcm = lcm.lcm(x.a.denom());
        }
        for x in b {
            lcm = lcm.lcm(x.a.denom());
        }
        let den = lcm.to_i64().filter(|&d| d > 0 && d <= DEN_CAP)?;
        let l = Rat::from_integer(BigInt::from(den));
        let to_i64 = |r: &Rat| -> Option<i64> { (r * &l).to_integer().to_i64() };
        let a_num: Option<Vec<i64>> = a.data.iter().map(|x| to_i64(&x.a)).collect();
        let b_num: Option<Vec<i64>> = b.iter().map(|x| to_i64(&x.a)).collect();
        let (a_num, b_num) = (a_num?, b_num?);
        // Row-sum overflow certificate.
        for i in 0..a.rows {
            let mut bound: i128 = b_num[i].unsigned_abs() as i128;
            for j in 0..a.cols {
                bound += (a_num[i * a.cols + j].unsigned_abs() as i128) * (max_coord as i128);
            }
            if bound > (i64::MAX / 4) as i128 {
                return None;
            }
        }
        Some(FastAffine { rows: a.rows, cols: a.cols, den, a_num, b_num })
    }

    /// Numerator of `||A q - b||_Z` over the common denominator.
    #[inline]
    pub fn dist_num(&self, q: &[i64]) -> i64 {
        debug_assert_eq!(q.len(), self.cols);
        let mut worst = 0i64;
        for i in 0..self.rows {
            let mut s = -self.b_num[i];
            let row = &self.a_num[i * self.cols..(i + 1) * self.cols];
            for (aij, qj) in row.iter().zip(q) {
                s += aij * qj;
            }
            let r = s.rem_euclid(self.den);
            let d = r.min(self.den - r);
            if d > worst {
                worst = d;
            }
        }
        worst
    }

    pub fn dist(&self, q: &[i64]) -> Quad {
        Quad::from_rat(Rat::new(BigInt::from(self.dist_num(q)), BigInt::from(self.den)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::quad::dist_to_int_sup;
    use crate::exact::rational::rat;
    use proptest::prelude::*;

    fn small_mat(m: usize, n: usize) -> impl Strategy<Value = QuadMat> {
        proptest::collection::vec((-20i64..20, 1i64..12), m * n).prop_map(move |es| QuadMat {
            rows: m,
            cols: n,
            data: es.into_iter().map(|(p, q)| Quad::from_rat(rat(p, q))).collect(),
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn fast_matches_exact(a in small_mat(2, 2), bp in -15i64..15, bq in 1i64..9,
                              q1 in -50i64..50, q2 in -50i64..50) {
            let b = vec![Quad::from_rat(rat(bp, bq)), Quad::from_rat(rat(bp + 1, bq))];
            let fast = FastAffine::build(&a, &b, 64).unwrap();
            let q = [q1, q2];
            let mut res = a.mul_int_vec(&q);
            for (r, bi) in res.iter_mut().zip(&b) {
                *r = &*r - bi;
            }
            let exact = dist_to_int_sup(&res);
            prop_assert_eq!(fast.dist(&q), exact);
        }
    }

    #[test]
    fn irrational_entries_refuse_fast_path() {
        let a = QuadMat::from_rows(vec![vec![Quad::sqrt_of(rat(2, 1))]]);
        assert!(FastAffine::build(&a, &[Quad::from_int(0)], 10).is_none());
    }
}
