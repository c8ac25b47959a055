//! The cone-slice distribution sum: for each slice level `k`, the fraction
//! of lattice points that are primitive with normalized perpendicular
//! minimum above `eps`, weighted by `k^{-1-(t-n)n/(n-1)}`.

use super::cone::ConeDecomposition;
use super::{lambda1_perp, FareyLattice};
use crate::exact::rational::{rat_to_f64, Rat};
use crate::exact::ExactError;
use num_bigint::BigInt;
use num_traits::One;
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Clone, Debug, Serialize)]
pub struct S1Term {
    pub k: u64,
    /// All lattice points of the slice.
    pub count_all: u64,
    /// Primitive points passing the `eps` cut.
    pub count_eps: u64,
    /// `k^{-1-(t-n)n/(n-1)} * count_eps / count_all` (display).
    pub term: f64,
    /// The bare weight `k^{-1-(t-n)n/(n-1)}` (display).
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct S1Report {
    #[serde(with = "crate::exact::rational::rat_string")]
    pub t: Rat,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub eps: Rat,
    pub terms: Vec<S1Term>,
    pub sum: f64,
    /// The unweighted comparison sum `sum_k k^{-1-(t-n)n/(n-1)}`.
    pub comparison_sum: f64,
}

/// Exact counts per slice with a display-float sum.
pub fn s1_diagnostic(
    lat: &FareyLattice,
    cone: &ConeDecomposition,
    eps: &Rat,
    n_levels: u64,
    t: &Rat,
) -> Result<S1Report, ExactError> {
    assert!(n_levels >= 1);
    let n = lat.point.dim() as i64;
    // exponent 1 + (t - n) n/(n-1)
    let exponent = Rat::one()
        + (t - Rat::from_integer(BigInt::from(n))) * Rat::new(BigInt::from(n), BigInt::from(n - 1));
    let e = rat_to_f64(&exponent);
    let mut terms = Vec::new();
    let mut sum = 0.0;
    let mut comparison = 0.0;
    for k in 1..=n_levels {
        let pts = cone.slice_points(lat, k)?;
        let count_all = pts.len() as u64;
        let mut count_eps = 0u64;
        for p in &pts {
            if crate::exact::rational::gcd_all(&p.coeffs) != BigInt::one() {
                continue;
            }
            let lh = lambda1_perp(lat, &p.coeffs)?;
            if lh.cmp_rat(eps) == Ordering::Greater {
                count_eps += 1;
            }
        }
        let weight = (k as f64).powf(-e);
        let term = if count_all == 0 {
            0.0
        } else {
            weight * count_eps as f64 / count_all as f64
        };
        sum += term;
        comparison += weight;
        terms.push(S1Term { k, count_all, count_eps, term, weight });
    }
    Ok(S1Report { t: t.clone(), eps: eps.clone(), terms, sum, comparison_sum: comparison })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};
    use crate::farey::cone::cone_decomposition;
    use crate::farey::{farey_lattice, QPoint};

    #[test]
    fn standard_lattice_counts_and_harmonic_case() {
        let lat = farey_lattice(&QPoint::new(vec![1, 0], 1)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        // t = n: exponent is 1, the weight is the harmonic sequence.
        let rep = s1_diagnostic(&lat, &cone, &rat(1, 2), 4, &rat_int(2)).unwrap();
        for (i, term) in rep.terms.iter().enumerate() {
            let k = (i + 1) as u64;
            assert_eq!(term.count_all, 2 * k + 1);
            assert!((term.weight - 1.0 / k as f64).abs() < 1e-12);
            // n = 2: every primitive point passes the eps cut for eps < 1.
            assert!(term.count_eps <= term.count_all);
        }
        // k = 1: points (a, 1), |a| <= 1: all primitive: ratio 1.
        assert_eq!(rep.terms[0].count_eps, 3);
        assert!(rep.sum <= rep.comparison_sum + 1e-12);
    }

    #[test]
    fn eps_to_zero_keeps_all_primitives() {
        let lat = farey_lattice(&QPoint::new(vec![0, 1], 3)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        let tiny = s1_diagnostic(&lat, &cone, &rat(1, 1000), 3, &rat(3, 2)).unwrap();
        for term in &tiny.terms {
            // count_eps equals the primitive count when eps is small
            // (lambda-hat = 1 for n = 2 always clears a tiny cut).
            let pts = cone.slice_primitive(&lat, term.k).unwrap();
            assert_eq!(term.count_eps as usize, pts.len());
        }
    }
}
