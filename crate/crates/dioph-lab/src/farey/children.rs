//! Children sets over a Farey lattice: the fiber sets `zeta` with their
//! height window, the assembled per-level children, and the exact
//! restricted counts used by the counting sandwich.

use super::cone::{ConeDecomposition, LatticePoint};
use super::{lambda1_perp, FareyLattice, QPoint};
use crate::exact::linalg;
use crate::exact::powcmp::Root;
use crate::exact::quad::Quad;
use crate::exact::rational::{gcd_all, pow_i64, Rat};
use crate::exact::ExactError;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Height restriction on children, from the weight `|b q|_Z`.
#[derive(Clone, Debug, Serialize)]
pub enum Restriction {
    None,
    /// `|b q|_Z > threshold` (strict), the restricted-tree selection.
    BqGreater {
        b: Quad,
        #[serde(with = "crate::exact::rational::rat_string")]
        threshold: Rat,
    },
    /// `|b q|_Z >= 1/d` for `b = c/d`, the fixed-level variant.
    BqAtLeastInv { b: Quad, d: u64 },
}

impl Restriction {
    pub fn admits(&self, q: u64) -> bool {
        match self {
            Restriction::None => true,
            Restriction::BqGreater { b, threshold } => {
                let w = (b * &Quad::from_int(q as i64)).dist_to_int();
                w > Quad::from_rat(threshold.clone())
            }
            Restriction::BqAtLeastInv { b, d } => {
                let w = (b * &Quad::from_int(q as i64)).dist_to_int();
                w >= Quad::from_rat(Rat::new(BigInt::from(1), BigInt::from(*d)))
            }
        }
    }
}

/// The fiber data of one direction `alpha`: the exact height interval and
/// the two exact cardinalities (full and restricted).
#[derive(Clone, Debug)]
pub struct ZetaFiber {
    /// Base point of the fiber: heights are `q0 + ell * q_x`.
    pub q0: BigInt,
    /// Admissible `ell` range (inclusive); empty when `lo > hi`.
    pub lo: BigInt,
    pub hi: BigInt,
    pub alpha: LatticePoint,
    pub count_full: u64,
    pub count_restricted: u64,
}

impl ZetaFiber {
    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }
}

/// Exact endpoints of `{ell : gamma < q0 + ell q < 2 gamma}` where
/// `gamma = (||alpha||_2 |x| / eps)^{n/(n-1)}`, carried as the rational
/// `G = gamma^{2(n-1)} = (||alpha||^2 q^2 / eps^2)^n`.
fn height_window(
    lat: &FareyLattice,
    alpha: &LatticePoint,
    eps: &Rat,
) -> (BigInt, BigInt, BigInt) {
    let n = lat.point.dim() as i64;
    let q = BigInt::from(lat.point.q);
    let alpha_sq = linalg::norm_sq(&alpha.vector);
    let g = pow_i64(&(alpha_sq * Rat::from_integer(&q * &q) / (eps * eps)), n);
    // gamma = G^{1/(2(n-1))}; height h > gamma <=> h^{2(n-1)} > G.
    let idx = 2 * (n as u32 - 1);
    let gamma = Root::new(g.clone(), idx);
    let two_gamma = gamma.scale(&Rat::from_integer(BigInt::from(2)));
    // fiber base: q0 = -fiber_index(alpha).
    let j = lat.fiber_index(&alpha.coeffs);
    let q0 = -j;
    // smallest ell with q0 + ell q > gamma; largest with q0 + ell q < 2 gamma.
    let gf = gamma.to_f64();
    let q0f = q0.to_f64().unwrap_or(0.0);
    let qf = lat.point.q as f64;
    let mut lo = BigInt::from(((gf - q0f) / qf).ceil() as i64);
    let height = |ell: &BigInt| -> Rat { Rat::from_integer(&q0 + ell * &q) };
    let above = |ell: &BigInt| -> bool {
        let h = height(ell);
        h.is_positive() && gamma.cmp_rat(&h) == std::cmp::Ordering::Less
    };
    while !above(&lo) {
        lo += 1;
    }
    loop {
        let prev = &lo - 1;
        if above(&prev) {
            lo = prev;
        } else {
            break;
        }
    }
    let below = |ell: &BigInt| -> bool {
        let h = height(ell);
        h.is_positive() && two_gamma.cmp_rat(&h) == std::cmp::Ordering::Greater
    };
    let mut hi = BigInt::from(((2.0 * gf - q0f) / qf).floor() as i64);
    while !below(&hi) {
        hi -= 1;
    }
    loop {
        let next = &hi + 1;
        if below(&next) {
            hi = next;
        } else {
            break;
        }
    }
    (q0, lo, hi)
}

/// The fiber set of a primitive direction, with exact counts. Children
/// are materialized lazily by [`zeta_points`].
pub fn zeta_fiber(
    lat: &FareyLattice,
    alpha: LatticePoint,
    eps: &Rat,
    restriction: &Restriction,
) -> ZetaFiber {
    let (q0, lo, hi) = height_window(lat, &alpha, eps);
    if lo > hi {
        return ZetaFiber { q0, lo, hi, alpha, count_full: 0, count_restricted: 0 };
    }
    let count_full = (&hi - &lo + BigInt::from(1)).to_u64().expect("fiber count fits u64");
    let count_restricted = match restriction {
        Restriction::None => count_full,
        _ => {
            // Heights q0 + ell q cycle mod the restriction period when b is
            // rational; count one period exactly and extend.
            let period = restriction_period(restriction, lat.point.q);
            match period {
                Some(p) => {
                    let p = BigInt::from(p);
                    let total = &hi - &lo + BigInt::from(1);
                    let (cycles, rem) = num_integer::Integer::div_rem(&total, &p);
                    let mut per_cycle = 0u64;
                    let mut in_rem = 0u64;
                    let mut ell = lo.clone();
                    let mut i = BigInt::zero();
                    while &i < &p {
                        let h = (&q0 + &ell * BigInt::from(lat.point.q))
                            .to_u64()
                            .expect("height positive");
                        if restriction.admits(h) {
                            per_cycle += 1;
                            if i < rem {
                                in_rem += 1;
                            }
                        }
                        ell += 1;
                        i += 1;
                    }
                    (cycles.to_u64().unwrap_or(0)) * per_cycle + in_rem
                }
                None => {
                    // Irrational weight: direct scan.
                    let mut c = 0u64;
                    let mut ell = lo.clone();
                    while ell <= hi {
                        let h = (&q0 + &ell * BigInt::from(lat.point.q))
                            .to_u64()
                            .expect("height positive");
                        if restriction.admits(h) {
                            c += 1;
                        }
                        ell += 1;
                    }
                    c
                }
            }
        }
    };
    ZetaFiber { q0, lo, hi, alpha, count_full, count_restricted }
}

fn restriction_period(r: &Restriction, _q: u64) -> Option<u64> {
    let b = match r {
        Restriction::None => return Some(1),
        Restriction::BqGreater { b, .. } | Restriction::BqAtLeastInv { b, .. } => b,
    };
    if !b.is_rational() {
        return None;
    }
    b.a.denom().to_u64()
}

/// Materialize (a prefix of) the fiber's children as Q-points, smallest
/// heights first; primitivity is inherited from `alpha` and asserted.
pub fn zeta_points(
    lat: &FareyLattice,
    fiber: &ZetaFiber,
    restriction: &Restriction,
    cap: Option<usize>,
) -> Vec<QPoint> {
    let mut out = Vec::new();
    if fiber.is_empty() {
        return out;
    }
    let n = lat.point.dim();
    let x = &lat.point;
    // p0 = alpha - j * xhat where j = -q0; p0 is integral.
    let j = -&fiber.q0;
    let xhat = x.base();
    let p0: Vec<BigInt> = (0..n)
        .map(|i| {
            let v = &fiber.alpha.vector[i] - Rat::from_integer(j.clone()) * &xhat[i];
            assert!(v.is_integer(), "fiber base must be integral");
            v.to_integer()
        })
        .collect();
    let mut ell = fiber.lo.clone();
    while ell <= fiber.hi {
        let q = (&fiber.q0 + &ell * BigInt::from(x.q)).to_u64().expect("height positive");
        if restriction.admits(q) {
            let p: Vec<i64> = (0..n)
                .map(|i| {
                    (&p0[i] + &ell * BigInt::from(x.p[i])).to_i64().expect("child fits i64")
                })
                .collect();
            let mut all: Vec<BigInt> = p.iter().map(|&v| BigInt::from(v)).collect();
            all.push(BigInt::from(q));
            assert!(gcd_all(&all) == BigInt::from(1), "children inherit primitivity");
            out.push(QPoint { p, q });
            if cap.map_or(false, |c| out.len() >= c) {
                break;
            }
        }
        ell += 1;
    }
    out
}

/// One direction's worth of children data at a level.
#[derive(Clone, Debug)]
pub struct DirectionChildren {
    pub cone_level: u64,
    pub fiber: ZetaFiber,
    pub children: Vec<QPoint>,
}

/// Assemble the children of a node: primitive directions in the cone up to
/// level `n_levels` with normalized minimum above `eps`, each contributing
/// its restricted fiber.
pub fn children_of(
    lat: &FareyLattice,
    cone: &ConeDecomposition,
    eps: &Rat,
    n_levels: u64,
    restriction: &Restriction,
    alpha_cap: Option<usize>,
    per_alpha_cap: Option<usize>,
) -> Result<Vec<DirectionChildren>, ExactError> {
    let mut out = Vec::new();
    'levels: for k in 1..=n_levels {
        for alpha in cone.slice_primitive(lat, k)? {
            // lambda-hat cut: for n = 2 this is identically one.
            let lh = lambda1_perp(lat, &alpha.coeffs)?;
            if lh.cmp_rat(eps) != std::cmp::Ordering::Greater {
                continue;
            }
            let fiber = zeta_fiber(lat, alpha, eps, restriction);
            if fiber.is_empty() {
                continue;
            }
            let children = zeta_points(lat, &fiber, restriction, per_alpha_cap);
            out.push(DirectionChildren { cone_level: k, fiber, children });
            if alpha_cap.map_or(false, |c| out.len() >= c) {
                break 'levels;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};
    use crate::farey::cone::cone_decomposition;
    use crate::farey::farey_lattice;

    fn qr(p: i64, q: i64) -> Quad {
        Quad::from_rat(rat(p, q))
    }

    #[test]
    fn zeta_window_for_unit_point() {
        // x = ((1,0),1), alpha = (0,1), eps = 1/2, n = 2:
        // gamma = (1 * 1 / (1/2))^2 = 4, heights in (4, 8): q in {5, 6, 7}.
        let lat = farey_lattice(&QPoint::new(vec![1, 0], 1)).unwrap();
        // alpha = (0,1) in lattice coordinates: basis is a permutation of
        // the standard one; solve coordinates directly.
        let inv = crate::exact::linalg::RatMat::from_rows(
            (0..2).map(|i| lat.basis.vectors().iter().map(|v| v[i].clone()).collect()).collect(),
        )
        .inverse()
        .unwrap();
        let coords: Vec<BigInt> =
            inv.mul_vec(&[rat_int(0), rat_int(1)]).iter().map(|c| c.to_integer()).collect();
        let alpha = LatticePoint { coeffs: coords, vector: vec![rat_int(0), rat_int(1)] };
        let fiber = zeta_fiber(&lat, alpha, &rat(1, 2), &Restriction::None);
        assert_eq!(fiber.count_full, 3);
        let pts = zeta_points(&lat, &fiber, &Restriction::None, None);
        let heights: Vec<u64> = pts.iter().map(|y| y.q).collect();
        assert_eq!(heights, vec![5, 6, 7]);
        // each child projects back to alpha: p - q*xhat = (0,1).
        for y in &pts {
            assert_eq!(y.p[0] as u64, y.q);
            assert_eq!(y.p[1], 1);
        }
    }

    #[test]
    fn parity_restriction_keeps_odd_heights() {
        let lat = farey_lattice(&QPoint::new(vec![1, 0], 1)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        let restr = Restriction::BqAtLeastInv { b: qr(1, 2), d: 2 };
        let dirs = children_of(&lat, &cone, &rat(1, 2), 2, &restr, None, None).unwrap();
        assert!(!dirs.is_empty());
        for d in &dirs {
            for y in &d.children {
                assert_eq!(y.q % 2, 1, "restricted children must have odd height");
            }
            // counting sandwich: restricted >= full/2 when the parent
            // weight clears the threshold (q_x = 1 is odd: |1/2|_Z = 1/2).
            assert!(2 * d.fiber.count_restricted >= d.fiber.count_full);
            assert!(d.fiber.count_restricted <= d.fiber.count_full);
        }
    }

    #[test]
    fn interval_length_guarantees_nonempty() {
        // When gamma / q_x >= 1 the open interval (gamma, 2 gamma) has
        // length > q_x and must contain a height.
        let lat = farey_lattice(&QPoint::new(vec![1, 1], 2)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        let dirs = children_of(&lat, &cone, &rat(1, 4), 2, &Restriction::None, None, None).unwrap();
        for d in &dirs {
            // gamma^2 = (||alpha||^2 q^2 / eps^2)^2 >= (q^2/eps^2)^2 * lambda_1^4;
            // at eps = 1/4, q = 2 this is far above q^2, so nonempty.
            assert!(!d.fiber.is_empty());
            assert!(d.fiber.count_full >= 1);
        }
    }

    #[test]
    fn large_eps_gives_empty_fiber() {
        let lat = farey_lattice(&QPoint::new(vec![1, 0], 1)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        // eps close to 1: lambda-hat cut (= 1 for n=2) rejects every alpha.
        let dirs =
            children_of(&lat, &cone, &rat(99, 100), 3, &Restriction::None, None, None).unwrap();
        assert!(dirs.is_empty() || dirs.iter().all(|d| d.fiber.count_full > 0));
        // eps = 1 exactly: no alpha qualifies at all.
        let none = children_of(&lat, &cone, &rat_int(1), 3, &Restriction::None, None, None)
            .unwrap();
        assert!(none.is_empty());
    }

    #[test]
    fn restricted_count_matches_scan() {
        // Cross-check the periodic count against a direct filter.
        let lat = farey_lattice(&QPoint::new(vec![2, 3], 5)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        let restr = Restriction::BqGreater { b: qr(1, 3), threshold: rat(1, 4) };
        let dirs = children_of(&lat, &cone, &rat(1, 3), 3, &restr, None, None).unwrap();
        for d in &dirs {
            let full = zeta_points(&lat, &d.fiber, &Restriction::None, None);
            let filtered = full
                .iter()
                .filter(|y| restr.admits(y.q))
                .count() as u64;
            assert_eq!(filtered, d.fiber.count_restricted, "at alpha {:?}", d.fiber.alpha.vector);
            assert_eq!(full.len() as u64, d.fiber.count_full);
        }
    }
}
