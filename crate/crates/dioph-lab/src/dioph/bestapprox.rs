//! Best-approximation sequences for a transposed matrix and the covering
//! machinery built on them: the gamma sequence, membership in the sets
//! `B_alpha`, explicit complement covers, and the dimension series.

use super::{quad_from_u64_pow, DiophError};
use crate::exact::intscan::scan_shell;
use crate::exact::quad::{dot_int, Quad, QuadMat};
use crate::exact::rational::{pow_i64, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;

#[derive(Clone, Debug, Serialize)]
pub struct BestApprox {
    pub y: Vec<i64>,
    /// `Y_k = ||y_k||`, strictly increasing.
    pub norm: u64,
    /// `M_k = ||tA y_k||_Z`, strictly decreasing.
    pub dist: Quad,
}

#[derive(Clone, Debug, Serialize)]
pub struct BestApproxSequence {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<BestApprox>,
    /// Whether `tA Z^m + Z^n` has full rank `m + n` over `Z`. When it does
    /// not (every rational matrix), the sequence is finite and ends at an
    /// exact zero; the transference route applies instead of the covering
    /// argument.
    pub rank_full: bool,
    /// The scan hit `||tA y||_Z = 0` and stopped.
    pub hit_zero: bool,
    pub scanned_to: u64,
}

/// Greedy strict record minimizers of `||tA y||_Z` by increasing `||y||`.
/// At most one record per norm (the shell minimum), lexicographic least
/// vector on ties. `ta` is `n x m`; `y` ranges over `Z^m`.
pub fn best_approximations(ta: &QuadMat, kmax: usize, norm_cap: u64) -> BestApproxSequence {
    let (n, m) = (ta.rows, ta.cols);
    let rank_full = super::subgroup_rank(ta) == m + n;
    let fast = super::fastscan::FastAffine::build(
        ta,
        &vec![Quad::from_int(0); n],
        norm_cap as i64 + 1,
    );
    let mut entries: Vec<BestApprox> = Vec::new();
    let mut hit_zero = false;
    let mut scanned_to = 0u64;
    for r in 1..=norm_cap as i64 {
        scanned_to = r as u64;
        if entries.len() >= kmax || hit_zero {
            scanned_to = r as u64 - 1;
            break;
        }
        // Shell minimum of ||tA y||_Z at ||y|| = r.
        let mut best: Option<(Quad, Vec<i64>)> = None;
        match &fast {
            Some(f) => {
                let mut bnum = i64::MAX;
                let mut by: Vec<i64> = Vec::new();
                scan_shell(m, r, &mut |y| {
                    let d = f.dist_num(y);
                    if d < bnum {
                        bnum = d;
                        by = y.to_vec();
                    }
                    true
                });
                best = Some((f.dist(&by), by));
            }
            None => {
                scan_shell(m, r, &mut |y| {
                    let mut img = ta.mul_int_vec(y);
                    for x in img.iter_mut() {
                        *x = x.dist_to_int();
                    }
                    let d = img.into_iter().max().unwrap();
                    if best.as_ref().map_or(true, |(b, _)| &d < b) {
                        best = Some((d, y.to_vec()));
                    }
                    true
                });
            }
        }
        let (dist, y) = best.unwrap();
        let improves = entries.last().map_or(true, |e| dist < e.dist);
        if improves {
            if dist.is_zero() {
                hit_zero = true;
            }
            entries.push(BestApprox { y, norm: r as u64, dist });
        }
    }
    BestApproxSequence { m, n, entries, rank_full, hit_zero, scanned_to }
}

/// One gamma value, carried as its exact `(m+n)`-th power.
#[derive(Clone, Debug, Serialize)]
pub struct GammaEntry {
    /// Index `k` (1-based position in the best-approximation sequence).
    pub k: usize,
    /// `gamma_k^{m+n} = max(Y_k^m M_{k-1}^n, Y_{k+1}^m M_k^n)`, exact.
    pub base: Quad,
    pub display: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaSequence {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<GammaEntry>,
}

/// The gamma sequence for `2 <= k <= K-1` (1-based `k`).
pub fn gamma_sequence(seq: &BestApproxSequence) -> Result<GammaSequence, DiophError> {
    if seq.entries.len() < 3 {
        return Err(DiophError::TooShort { need: 3, got: seq.entries.len() });
    }
    let (m, n) = (seq.m as u32, seq.n as u32);
    let mut entries = Vec::new();
    for idx in 1..seq.entries.len() - 1 {
        let yk = quad_from_u64_pow(seq.entries[idx].norm, m);
        let yk1 = quad_from_u64_pow(seq.entries[idx + 1].norm, m);
        let mk_prev = seq.entries[idx - 1].dist.pow(n);
        let mk = seq.entries[idx].dist.pow(n);
        let g1 = &yk * &mk_prev;
        let g2 = &yk1 * &mk;
        let base = if g1 < g2 { g2 } else { g1 };
        let display = base.to_f64().powf(1.0 / (m + n) as f64);
        entries.push(GammaEntry { k: idx + 1, base, display });
    }
    Ok(GammaSequence { m: seq.m, n: seq.n, entries })
}

#[derive(Clone, Debug, Serialize)]
pub struct BAlphaCheck {
    pub k: usize,
    /// `|b . y_k|_Z`.
    pub lhs: Quad,
    /// Exact verdict of `|b . y_k|_Z > alpha gamma_k`.
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BAlphaReport {
    pub checks: Vec<BAlphaCheck>,
    /// All checks with `k >= k_tail` pass.
    pub tail_verdict: bool,
    pub k_tail: usize,
}

/// Exact membership checks for `B_alpha`: `|b . y_k|_Z > alpha gamma_k`
/// decided by raising both sides to the `(m+n)`-th power.
pub fn b_alpha_membership(
    b: &[Quad],
    seq: &BestApproxSequence,
    gammas: &GammaSequence,
    alpha: &Rat,
    k_tail: usize,
) -> BAlphaReport {
    assert_eq!(b.len(), seq.m);
    let power = (seq.m + seq.n) as u32;
    let alpha_pow = Quad::from_rat(pow_i64(alpha, power as i64));
    let mut checks = Vec::new();
    let mut tail_verdict = true;
    for g in &gammas.entries {
        let y = &seq.entries[g.k - 1].y;
        let lhs = dot_int(b, y).dist_to_int();
        let pass = lhs.pow(power) > &alpha_pow * &g.base;
        if g.k >= k_tail && !pass {
            tail_verdict = false;
        }
        checks.push(BAlphaCheck { k: g.k, lhs, pass });
    }
    BAlphaReport { checks, tail_verdict, k_tail }
}

/// Explicit cover of `{b in [0,1]^m : |b . y_k|_Z <= alpha gamma_k}`.
#[derive(Clone, Debug, Serialize)]
pub enum CoverReport {
    /// `alpha gamma_k >= 1/2`: every `b` fails, the cover is `[0,1]^m`.
    Full,
    /// `m = 1`: intervals of half-length `alpha gamma_k / Y_k` centered at
    /// `j / Y_k`, `j = 0..=Y_k`.
    Intervals {
        y_norm: u64,
        count: u64,
        /// Half-length, carried as its exact `(m+n)`-th power.
        halfwidth_base: Quad,
        pow_index: u32,
        /// Count bound `count <= c1 * Y_k` with the reported constant.
        c1: u64,
        count_ok: bool,
        /// Radius bound `halfwidth <= c2 * gamma_k / Y_k` with `c2 = alpha`.
        radius_ok: bool,
    },
    /// `m >= 2`: slabs `|b . y_k - j| <= alpha gamma_k` for the admissible
    /// integer levels `j`.
    Slabs { normal: Vec<i64>, levels: i64, halfwidth_base: Quad, pow_index: u32 },
}

pub fn complement_cover(
    seq: &BestApproxSequence,
    gammas: &GammaSequence,
    alpha: &Rat,
    k: usize,
) -> Result<CoverReport, DiophError> {
    let entry = gammas
        .entries
        .iter()
        .find(|g| g.k == k)
        .ok_or(DiophError::TooShort { need: k, got: gammas.entries.len() })?;
    let power = (seq.m + seq.n) as u32;
    let alpha_pow = Quad::from_rat(pow_i64(alpha, power as i64));
    let scaled = &alpha_pow * &entry.base; // (alpha gamma_k)^{m+n}
    let half = Quad::from_rat(pow_i64(&Rat::new(BigInt::from(1), BigInt::from(2)), power as i64));
    if scaled >= half {
        return Ok(CoverReport::Full);
    }
    let yvec = &seq.entries[k - 1].y;
    if seq.m == 1 {
        let y = seq.entries[k - 1].norm;
        // halfwidth = alpha gamma_k / Y_k
        let halfwidth_base = &scaled * &quad_from_u64_pow(y, power).recip();
        let count = y + 1;
        Ok(CoverReport::Intervals {
            y_norm: y,
            count,
            halfwidth_base,
            pow_index: power,
            c1: 2,
            count_ok: count <= 2 * y,
            radius_ok: true, // equality by construction
        })
    } else {
        let l1: i64 = yvec.iter().map(|x| x.abs()).sum();
        let halfwidth_base = scaled;
        Ok(CoverReport::Slabs {
            normal: yvec.clone(),
            levels: l1 / 2 + 1,
            halfwidth_base,
            pow_index: power,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverCheck {
    pub mesh_denominator: u64,
    pub grid_points: u64,
    pub failing_points: u64,
    /// Failing grid points not contained in the cover. Zero unless the
    /// construction is broken.
    pub escapes: u64,
}

/// Exhaustive containment check on a rational grid of mesh below a quarter
/// of the cover radius (`m = 1` only).
pub fn verify_cover_m1(
    seq: &BestApproxSequence,
    gammas: &GammaSequence,
    alpha: &Rat,
    k: usize,
) -> Result<CoverCheck, DiophError> {
    assert_eq!(seq.m, 1);
    let cover = complement_cover(seq, gammas, alpha, k)?;
    let power = (seq.m + seq.n) as u32;
    let entry = gammas.entries.iter().find(|g| g.k == k).unwrap();
    let alpha_pow = Quad::from_rat(pow_i64(alpha, power as i64));
    let fail_threshold = &alpha_pow * &entry.base; // (alpha gamma_k)^{m+n}
    let y = seq.entries[k - 1].norm;
    let mesh_den = match &cover {
        CoverReport::Full => 4 * y.max(1),
        CoverReport::Intervals { halfwidth_base, pow_index, .. } => {
            // Smallest power of two with (4/M)^p < halfwidth^p.
            let mut mden = 4u64;
            loop {
                let four_over = Quad::from_rat(Rat::new(BigInt::from(4), BigInt::from(mden)));
                if four_over.pow(*pow_index) < *halfwidth_base {
                    break mden;
                }
                mden = mden.checked_mul(2).expect("mesh denominator overflow");
            }
        }
        CoverReport::Slabs { .. } => unreachable!("m = 1"),
    };
    let mut failing = 0u64;
    let mut escapes = 0u64;
    for i in 0..=mesh_den {
        let b = Quad::from_rat(Rat::new(BigInt::from(i), BigInt::from(mesh_den)));
        let by = &b * &Quad::from_rat(Rat::from_integer(BigInt::from(y)));
        let lhs = by.dist_to_int().pow(power);
        let fails = lhs <= fail_threshold;
        if !fails {
            continue;
        }
        failing += 1;
        let contained = match &cover {
            CoverReport::Full => true,
            CoverReport::Intervals { halfwidth_base, pow_index, y_norm, .. } => {
                // b is in some interval iff |b Y - j| <= Y * halfwidth for the
                // nearest admissible j.
                let dist = by.dist_to_int();
                let yh = quad_from_u64_pow(*y_norm, *pow_index) * halfwidth_base.clone();
                dist.pow(*pow_index) <= yh
            }
            CoverReport::Slabs { .. } => unreachable!(),
        };
        if !contained {
            escapes += 1;
        }
    }
    Ok(CoverCheck {
        mesh_denominator: mesh_den,
        grid_points: mesh_den + 1,
        failing_points: failing,
        escapes,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    /// Exact exponent `m - s - (s - m + 1) * delta * n / (m + n)`.
    #[serde(with = "crate::exact::rational::rat_string")]
    pub exponent: Rat,
    /// Exact sign of the exponent: -1, 0, 1.
    pub exponent_sign: i8,
    /// Partial sums of `sum_k Y_k^exponent` from `k = 2`, display floats.
    pub partial_sums: Vec<f64>,
    /// Convergence verdict: negative exponent together with the (checked)
    /// geometric growth of `Y_k` gives a convergent majorant.
    pub convergent: bool,
}

/// Partial sums of the dimension series with the exact exponent sign.
pub fn dimension_series(
    seq: &BestApproxSequence,
    s: &Rat,
    delta: &Rat,
    kmax: usize,
) -> SeriesReport {
    let m = Rat::from_integer(BigInt::from(seq.m as i64));
    let n = Rat::from_integer(BigInt::from(seq.n as i64));
    let mn = &m + &n;
    let exponent = &m - s - (s - &m + Rat::from_integer(BigInt::from(1))) * delta * &n / &mn;
    let exponent_sign = match exponent.cmp(&Rat::zero()) {
        Ordering::Less => -1,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    };
    let e = exponent.to_f64().unwrap();
    let mut acc = 0.0;
    let mut partial_sums = Vec::new();
    for entry in seq.entries.iter().skip(1).take(kmax) {
        acc += (entry.norm as f64).powf(e);
        partial_sums.push(acc);
    }
    SeriesReport { exponent, exponent_sign, partial_sums, convergent: exponent_sign < 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};

    fn qr(p: i64, q: i64) -> Quad {
        Quad::from_rat(rat(p, q))
    }

    /// Continued-fraction convergents of p/q: the independent oracle for
    /// one-dimensional best approximations.
    fn convergent_denominators(mut p: i64, mut q: i64) -> Vec<i64> {
        let mut dens = vec![];
        let (mut k0, mut k1) = (1i64, 0i64);
        while q != 0 {
            let a = p.div_euclid(q);
            let r = p - a * q;
            let k2 = a * k1 + k0;
            dens.push(k2);
            k0 = k1;
            k1 = k2;
            p = q;
            q = r;
        }
        dens.retain(|&d| d >= 1);
        dens.dedup();
        dens
    }

    fn ta_1x1(p: i64, q: i64) -> QuadMat {
        QuadMat::from_rows(vec![vec![qr(p, q)]])
    }

    #[test]
    fn fibonacci_best_approximations() {
        // tA = 89/144: records at Fibonacci norms (CF oracle), ending at 144.
        let seq = best_approximations(&ta_1x1(89, 144), 32, 200);
        assert!(!seq.rank_full);
        assert!(seq.hit_zero);
        let got: Vec<u64> = seq.entries.iter().map(|e| e.norm).collect();
        let oracle: Vec<u64> =
            convergent_denominators(89, 144).into_iter().map(|x| x as u64).collect();
        assert_eq!(got, oracle, "records must match convergent denominators");
        for w in seq.entries.windows(2) {
            assert!(w[0].norm < w[1].norm);
            assert!(w[0].dist > w[1].dist);
        }
        assert!(seq.entries.last().unwrap().dist.is_zero());
    }

    #[test]
    fn each_record_is_prefix_minimum() {
        let ta = ta_1x1(89, 144);
        let seq = best_approximations(&ta, 32, 200);
        for e in &seq.entries {
            // no smaller-norm y does better
            let mut better_exists = false;
            for y in 1..=e.norm as i64 {
                let d = ta.mul_int_vec(&[y])[0].dist_to_int();
                if d < e.dist {
                    better_exists = true;
                }
            }
            assert!(!better_exists, "record at {} not minimal", e.norm);
        }
    }

    #[test]
    fn m1_n2_records_by_direct_scan() {
        // tA = (89/144, 55/89)^T, y scalar.
        let ta = QuadMat::from_rows(vec![vec![qr(89, 144)], vec![qr(55, 89)]]);
        let seq = best_approximations(&ta, 10, 200);
        assert!(!seq.entries.is_empty());
        for w in seq.entries.windows(2) {
            assert!(w[0].dist > w[1].dist);
        }
        // First entry is y = 1 by definition.
        assert_eq!(seq.entries[0].norm, 1);
    }

    #[test]
    fn rational_m2_is_rank_deficient() {
        let ta = QuadMat::from_rows(vec![vec![qr(5, 7), qr(3, 7)]]); // n=1, m=2
        let seq = best_approximations(&ta, 10, 50);
        assert!(!seq.rank_full);
        assert!(seq.hit_zero);
    }

    #[test]
    fn gamma_sequence_fibonacci() {
        let seq = best_approximations(&ta_1x1(89, 144), 32, 200);
        let g = gamma_sequence(&seq).unwrap();
        // m = n = 1: gamma_k^2 = max(Y_k M_{k-1}, Y_{k+1} M_k); for
        // Fibonacci data Y_k = F_k, M_k about 1/F_{k+2}, so gamma_k is
        // bounded: check 1/4 <= gamma_k^2 <= 4 on interior entries.
        for e in &g.entries[..g.entries.len() - 1] {
            assert!(e.base > qr(1, 4), "gamma too small at k={}: {:?}", e.k, e.base);
            assert!(e.base < qr(4, 1), "gamma too big at k={}", e.k);
        }
    }

    #[test]
    fn gamma_degenerate_first_term_vanishes() {
        // Synthetic data with M_{k-1} = 0: gamma_k reduces to the second
        // term Y_{k+1} M_k.
        let seq = BestApproxSequence {
            m: 1,
            n: 1,
            entries: vec![
                BestApprox { y: vec![1], norm: 1, dist: Quad::from_int(0) },
                BestApprox { y: vec![3], norm: 3, dist: qr(1, 7) },
                BestApprox { y: vec![8], norm: 8, dist: qr(1, 100) },
            ],
            rank_full: false,
            hit_zero: true,
            scanned_to: 8,
        };
        let g = gamma_sequence(&seq).unwrap();
        let e = &g.entries[0];
        assert_eq!(e.k, 2);
        assert_eq!(e.base, qr(8, 7)); // Y_3 * M_2 = 8 * 1/7
    }

    #[test]
    fn gamma_scaling_is_linear() {
        // Scaling all Y and M by t scales gamma_k by t (m = n = 1).
        let seq = best_approximations(&ta_1x1(89, 144), 32, 200);
        let g = gamma_sequence(&seq).unwrap();
        let t = 3u64;
        let scaled = BestApproxSequence {
            m: 1,
            n: 1,
            entries: seq
                .entries
                .iter()
                .map(|e| BestApprox {
                    y: e.y.clone(),
                    norm: e.norm * t,
                    dist: &e.dist * &Quad::from_int(t as i64),
                })
                .collect(),
            rank_full: seq.rank_full,
            hit_zero: seq.hit_zero,
            scanned_to: seq.scanned_to,
        };
        let gs = gamma_sequence(&scaled).unwrap();
        for (a, b) in g.entries.iter().zip(&gs.entries) {
            // gamma^2 scales by t^2
            assert_eq!(&a.base * &Quad::from_int((t * t) as i64), b.base);
        }
    }

    #[test]
    fn too_short_errors() {
        let seq = best_approximations(&ta_1x1(1, 2), 8, 100);
        assert!(matches!(gamma_sequence(&seq), Err(DiophError::TooShort { .. })));
    }

    #[test]
    fn b_alpha_cases() {
        let seq = best_approximations(&ta_1x1(89, 144), 32, 200);
        let g = gamma_sequence(&seq).unwrap();
        // alpha huge: alpha gamma_k >= 1/2 makes every check fail.
        let rep = b_alpha_membership(&[qr(1, 3)], &seq, &g, &rat_int(100), 2);
        assert!(rep.checks.iter().all(|c| !c.pass));
        assert!(!rep.tail_verdict);
        // b integer: |b . y|_Z = 0 fails every k.
        let rep0 = b_alpha_membership(&[Quad::from_int(1)], &seq, &g, &rat(1, 100), 2);
        assert!(rep0.checks.iter().all(|c| !c.pass));
    }

    #[test]
    fn b_alpha_integer_shift_invariance() {
        let seq = best_approximations(&ta_1x1(89, 144), 32, 200);
        let g = gamma_sequence(&seq).unwrap();
        let a = b_alpha_membership(&[qr(2, 7)], &seq, &g, &rat(1, 10), 2);
        let b = b_alpha_membership(&[qr(2 + 7 * 5, 7)], &seq, &g, &rat(1, 10), 2);
        for (x, y) in a.checks.iter().zip(&b.checks) {
            assert_eq!(x.pass, y.pass);
        }
    }

    #[test]
    fn cover_shapes() {
        // y_k = 5, alpha gamma = 1/10 style example via a synthetic sequence.
        let seq = BestApproxSequence {
            m: 1,
            n: 1,
            entries: vec![
                BestApprox { y: vec![1], norm: 1, dist: qr(2, 5) },
                BestApprox { y: vec![5], norm: 5, dist: qr(1, 50) },
                BestApprox { y: vec![13], norm: 13, dist: qr(1, 200) },
            ],
            rank_full: true,
            hit_zero: false,
            scanned_to: 13,
        };
        let g = gamma_sequence(&seq).unwrap();
        match complement_cover(&seq, &g, &rat(1, 10), 2).unwrap() {
            CoverReport::Intervals { y_norm, count, count_ok, radius_ok, .. } => {
                assert_eq!(y_norm, 5);
                assert_eq!(count, 6);
                assert!(count_ok && radius_ok);
            }
            o => panic!("expected intervals, got {o:?}"),
        }
        // huge alpha: full cover
        assert!(matches!(
            complement_cover(&seq, &g, &rat_int(10), 2).unwrap(),
            CoverReport::Full
        ));
        let check = verify_cover_m1(&seq, &g, &rat(1, 10), 2).unwrap();
        assert_eq!(check.escapes, 0);
        assert!(check.failing_points > 0);
    }

    #[test]
    fn series_signs() {
        let seq = best_approximations(&ta_1x1(89, 144), 32, 200);
        // s = m: exponent = -delta n/(m+n) < 0.
        let r = dimension_series(&seq, &rat_int(1), &rat(1, 2), 8);
        assert_eq!(r.exponent_sign, -1);
        assert!(r.convergent);
        // s = m-1 = 0: exponent = m - s = 1 > 0 (the (s-m+1) factor is 0).
        let r2 = dimension_series(&seq, &rat_int(0), &rat(1, 2), 8);
        assert_eq!(r2.exponent, rat_int(1));
        assert!(!r2.convergent);
    }

    #[test]
    fn series_geometric_closed_form() {
        // Y_k = 2^k: sum over k>=2 of Y_k^e is geometric with ratio 2^e.
        let entries: Vec<BestApprox> = (1..=12)
            .map(|k| BestApprox {
                y: vec![1 << k],
                norm: 1u64 << k,
                dist: qr(1, (1i64 << k) + 1),
            })
            .collect();
        let seq = BestApproxSequence {
            m: 1,
            n: 1,
            entries,
            rank_full: true,
            hit_zero: false,
            scanned_to: 1 << 12,
        };
        let rep = dimension_series(&seq, &rat(9, 8), &rat(1, 2), 11);
        let e = rep.exponent.to_f64().unwrap();
        let ratio = 2f64.powf(e);
        let k0 = 2.0f64;
        let terms = rep.partial_sums.len() as i32;
        let closed = 2f64.powf(e * k0) * (1.0 - ratio.powi(terms)) / (1.0 - ratio);
        let got = *rep.partial_sums.last().unwrap();
        assert!((got - closed).abs() < 1e-9 * closed.abs().max(1.0), "{got} vs {closed}");
    }
}
