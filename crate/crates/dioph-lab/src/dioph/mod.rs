//! Badness functionals, approximation exponents and witness scans for
//! affine forms `q -> Aq - b`.
//!
//! All verdicts here are finite-range certificates: a scan up to a bound
//! says what happens up to that bound and nothing more. The asymptotic
//! notions (badly approximable, singular, the exponent `w-hat`) are only
//! ever reported through their finite truncations.

pub mod bestapprox;
pub mod fastscan;

use crate::exact::intscan::scan_shell;
use crate::exact::quad::{dist_to_int_sup, Quad, QuadMat};
use crate::exact::rational::{pow_i64, Rat};
use fastscan::FastAffine;
use num_bigint::BigInt;
use num_traits::Signed;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiophError {
    #[error("sequence too short: need at least {need} best approximations, have {got}")]
    TooShort { need: usize, got: usize },
    #[error("rank of the subgroup is {rank}, expected {expect}; transference route applies")]
    RankDeficient { rank: usize, expect: usize },
}

/// An affine form: `A` is `m x n`, `b` has dimension `m`. Entries may be
/// rational or live in a common real quadratic extension.
#[derive(Clone, Debug, Serialize)]
pub struct AffinePair {
    pub a: QuadMat,
    pub b: Vec<Quad>,
}

impl AffinePair {
    pub fn new(a: QuadMat, b: Vec<Quad>) -> Self {
        assert_eq!(a.rows, b.len(), "b must have one entry per row of A");
        AffinePair { a, b }
    }

    pub fn m(&self) -> usize {
        self.a.rows
    }

    pub fn n(&self) -> usize {
        self.a.cols
    }

    /// `||A q - b||_Z` in the sup norm, exact.
    pub fn dist(&self, q: &[i64]) -> Quad {
        let mut r = self.a.mul_int_vec(q);
        for (x, bi) in r.iter_mut().zip(&self.b) {
            *x = &*x - bi;
        }
        dist_to_int_sup(&r)
    }
}

/// Minimum of the badness functional at a fixed sup norm `r`.
#[derive(Clone, Debug, Serialize)]
pub struct NormMin {
    pub q_norm: u64,
    /// `||A q - b||_Z` at the minimizing `q`.
    pub dist: Quad,
    /// Lexicographically least minimizer on the shell.
    pub argmin: Vec<i64>,
    /// Exact comparison key `r^n * dist^m` = (badness value)^m.
    pub value_base: Quad,
    /// `r^{n/m} * dist`, display only.
    pub value_display: f64,
}

fn norm_min(pair: &AffinePair, fast: Option<&FastAffine>, r: i64) -> NormMin {
    let n = pair.n();
    let mut best_dist: Option<Quad> = None;
    let mut best_q: Vec<i64> = Vec::new();
    match fast {
        Some(f) => {
            let mut best_num = i64::MAX;
            scan_shell(n, r, &mut |q| {
                let d = f.dist_num(q);
                if d < best_num {
                    best_num = d;
                    best_q = q.to_vec();
                }
                true
            });
            best_dist = Some(Quad::from_rat(Rat::new(
                BigInt::from(best_num),
                BigInt::from(f.den),
            )));
        }
        None => {
            scan_shell(n, r, &mut |q| {
                let d = pair.dist(q);
                if best_dist.as_ref().map_or(true, |b| &d < b) {
                    best_dist = Some(d);
                    best_q = q.to_vec();
                }
                true
            });
        }
    }
    let dist = best_dist.expect("shells are nonempty");
    finish_norm_min(pair, r as u64, dist, best_q)
}

fn finish_norm_min(pair: &AffinePair, r: u64, dist: Quad, argmin: Vec<i64>) -> NormMin {
    let (m, n) = (pair.m() as u32, pair.n() as u32);
    let rn = Quad::from_rat(Rat::from_integer(BigInt::from(r).pow(n)));
    let value_base = &rn * &dist.pow(m);
    let value_display = (r as f64).powf(n as f64 / m as f64) * dist.to_f64();
    NormMin { q_norm: r, dist, argmin, value_base, value_display }
}

#[derive(Clone, Debug, Serialize)]
pub struct BadnessProfile {
    pub m: usize,
    pub n: usize,
    pub qmax: u64,
    /// Per `Q`: exact minimum of `||q||^{n/m} ||Aq-b||_Z` over the dyadic
    /// shell `Q/2 < ||q|| <= Q`.
    pub shell: Vec<(u64, NormMin)>,
    /// Running minimum over `0 < ||q|| <= Q` (the liminf inner minimum).
    pub envelope: Vec<(u64, NormMin)>,
}

/// Shell-wise minima of the badness functional, plus the monotone envelope.
pub fn badness_profile(pair: &AffinePair, qmax: u64) -> BadnessProfile {
    assert!(qmax >= 1);
    let fast = FastAffine::build(&pair.a, &pair.b, qmax as i64 + 1);
    let per_norm: Vec<NormMin> =
        (1..=qmax as i64).map(|r| norm_min(pair, fast.as_ref(), r)).collect();
    let better = |a: &NormMin, b: &NormMin| a.value_base < b.value_base;
    let mut shell = Vec::with_capacity(qmax as usize);
    let mut envelope = Vec::with_capacity(qmax as usize);
    let mut running: Option<NormMin> = None;
    for q in 1..=qmax {
        let lo = (q / 2) as usize; // shell = norms q/2 < r <= q, i.e. indices lo..q
        let sh = per_norm[lo..q as usize]
            .iter()
            .cloned()
            .reduce(|a, b| if better(&b, &a) { b } else { a })
            .expect("dyadic shell is nonempty");
        let nm = per_norm[q as usize - 1].clone();
        running = Some(match running.take() {
            None => nm,
            Some(cur) => {
                if better(&nm, &cur) {
                    nm
                } else {
                    cur
                }
            }
        });
        shell.push((q, sh));
        envelope.push((q, running.clone().unwrap()));
    }
    BadnessProfile { m: pair.m(), n: pair.n(), qmax, shell, envelope }
}

#[derive(Clone, Debug, Serialize)]
pub enum WitnessOutcome {
    /// `q` with `||q||^{n/m} ||Aq-b||_Z < eps`, minimal norm, lex least.
    CounterexampleFound(NormMin),
    NoCounterexampleUpTo(u64),
}

/// First witness breaking `eps`-badness, scanning by increasing norm.
pub fn eps_bad_witness(pair: &AffinePair, eps: &Rat, qmax: u64) -> WitnessOutcome {
    assert!(eps.is_positive() && qmax >= 1);
    let (m, n) = (pair.m() as u32, pair.n() as u32);
    let eps_pow_m = pow_i64(eps, m as i64);
    let fast = FastAffine::build(&pair.a, &pair.b, qmax as i64 + 1);
    // Fast-path threshold: r^n * dnum^m * eden^m < enum^m * den^m.
    let fast_rhs: Option<(i128, &FastAffine)> = fast.as_ref().and_then(|f| {
        let e_num = eps_pow_m.numer().to_string().parse::<i128>().ok()?;
        let e_den = eps_pow_m.denom().to_string().parse::<i128>().ok()?;
        let den_m = (f.den as i128).checked_pow(m)?;
        let rhs = e_num.checked_mul(den_m)?;
        // keep eden^m on the lhs side
        let _ = e_den;
        Some((rhs, f))
    });
    for r in 1..=qmax as i64 {
        let mut found: Option<Vec<i64>> = None;
        match (&fast_rhs, &fast) {
            (Some((rhs, f)), _) => {
                let e_den: i128 = eps_pow_m.denom().to_string().parse().unwrap();
                let rn = (r as i128).pow(n);
                scan_shell(pair.n(), r, &mut |q| {
                    let d = f.dist_num(q) as i128;
                    let lhs = rn
                        .checked_mul(d.pow(m))
                        .and_then(|x| x.checked_mul(e_den));
                    if let Some(lhs) = lhs {
                        if lhs < *rhs {
                            found = Some(q.to_vec());
                            return false;
                        }
                    }
                    true
                });
            }
            _ => {
                let rn = Quad::from_rat(Rat::from_integer(BigInt::from(r).pow(n)));
                let bound = Quad::from_rat(eps_pow_m.clone());
                scan_shell(pair.n(), r, &mut |q| {
                    let d = pair.dist(q);
                    if &rn * &d.pow(m) < bound {
                        found = Some(q.to_vec());
                        return false;
                    }
                    true
                });
            }
        }
        if let Some(q) = found {
            let dist = pair.dist(&q);
            return WitnessOutcome::CounterexampleFound(finish_norm_min(
                pair, r as u64, dist, q,
            ));
        }
    }
    WitnessOutcome::NoCounterexampleUpTo(qmax)
}

#[derive(Clone, Debug, Serialize)]
pub struct WHatPoint {
    pub x: u64,
    /// Exact minimum of `||Aq||_Z` over `0 < ||q|| < X`.
    pub min_dist: Quad,
    pub argmin: Vec<i64>,
    /// `-log(min)/log X`; `None` when the minimum is exactly zero (the
    /// exponent is unbounded — rational rows).
    pub w: Option<f64>,
    /// Running infimum of `w` over the schedule tail starting here.
    pub w_tail_inf: Option<f64>,
}

/// Finite-X profile of the uniform exponent: for each scheduled `X`, the
/// best exponent `w` with a solution of `||Aq||_Z < X^{-w}`, `0<||q||<X`.
pub fn w_hat_profile(a: &QuadMat, schedule: &[u64]) -> Vec<WHatPoint> {
    assert!(schedule.windows(2).all(|w| w[0] < w[1]), "schedule must increase");
    let m = a.rows;
    let b = vec![Quad::from_int(0); m];
    let pair = AffinePair::new(a.clone(), b);
    let xmax = *schedule.last().expect("nonempty schedule") as i64;
    let fast = FastAffine::build(&pair.a, &pair.b, xmax + 1);
    let mut points: Vec<WHatPoint> = Vec::with_capacity(schedule.len());
    let mut best: Option<NormMin> = None;
    let mut r = 1i64;
    for &x in schedule {
        while (r as u64) < x {
            let nm = norm_min(&pair, fast.as_ref(), r);
            let better = match &best {
                None => true,
                Some(b) => nm.dist < b.dist,
            };
            if better {
                best = Some(nm);
            }
            r += 1;
        }
        let cur = best.clone().expect("X > 1 so at least norm 1 scanned");
        let w = if cur.dist.is_zero() {
            None
        } else {
            Some(-cur.dist.to_f64().ln() / (x as f64).ln())
        };
        points.push(WHatPoint { x, min_dist: cur.dist, argmin: cur.argmin, w, w_tail_inf: None });
    }
    let mut tail: Option<f64> = None;
    for p in points.iter_mut().rev() {
        if let Some(w) = p.w {
            tail = Some(tail.map_or(w, |t: f64| t.min(w)));
        }
        p.w_tail_inf = tail;
    }
    points
}

/// Rank over `Z` of the subgroup `tA Z^m + Z^n` of `R^n`. For entries in
/// `Q(sqrt D)` this is `n` plus the rational rank of the irrational parts;
/// for rational matrices it is just `n`.
pub fn subgroup_rank(ta: &QuadMat) -> usize {
    use crate::exact::linalg::RatMat;
    let n = ta.rows;
    let m = ta.cols;
    let rows: Vec<Vec<Rat>> =
        (0..m).map(|j| (0..n).map(|i| ta.at(i, j).b.clone()).collect()).collect();
    n + RatMat::from_rows(rows).rank()
}

pub(crate) fn quad_from_u64_pow(base: u64, exp: u32) -> Quad {
    Quad::from_rat(Rat::from_integer(BigInt::from(base).pow(exp)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};

    fn qr(p: i64, q: i64) -> Quad {
        Quad::from_rat(rat(p, q))
    }

    fn pair_1x1(a: Rat, b: Rat) -> AffinePair {
        AffinePair::new(
            QuadMat::from_rows(vec![vec![Quad::from_rat(a)]]),
            vec![Quad::from_rat(b)],
        )
    }

    #[test]
    fn badness_profile_constant_b() {
        // A = 0, b = 1/2: on each shell the minimum is Q' * 1/2 at the
        // smallest norm Q' in the shell; the profile grows linearly.
        let pair = pair_1x1(rat_int(0), rat(1, 2));
        let prof = badness_profile(&pair, 8);
        for (q, sh) in &prof.shell {
            let r_small = q / 2 + 1;
            assert_eq!(sh.q_norm, r_small);
            assert_eq!(sh.dist, qr(1, 2));
        }
        // envelope stays at norm 1
        assert!(prof.envelope.iter().all(|(_, e)| e.q_norm == 1));
    }

    #[test]
    fn badness_profile_rational_a_hits_zero() {
        let pair = pair_1x1(rat(1, 3), rat_int(0));
        let prof = badness_profile(&pair, 9);
        let (_, sh3) = &prof.shell[2]; // Q = 3, shell {2,3}
        assert!(sh3.dist.is_zero());
        assert_eq!(sh3.argmin, vec![-3]);
    }

    #[test]
    fn badness_profile_m1_n2_zero_shell() {
        let a = QuadMat::from_rows(vec![vec![qr(1, 2), qr(1, 2)]]);
        let pair = AffinePair::new(a, vec![qr(1, 2)]);
        let prof = badness_profile(&pair, 2);
        assert!(prof.shell[0].1.dist.is_zero(), "q=(-1,0) gives |1/2 - 1/2| = 0... got {:?}", prof.shell[0]);
    }

    #[test]
    fn badness_periodic_in_b() {
        let p1 = pair_1x1(rat(2, 7), rat(1, 3));
        let p2 = pair_1x1(rat(2, 7), rat(4, 3));
        let (a, b) = (badness_profile(&p1, 12), badness_profile(&p2, 12));
        for ((_, x), (_, y)) in a.shell.iter().zip(&b.shell) {
            assert_eq!(x.dist, y.dist);
            assert_eq!(x.q_norm, y.q_norm);
        }
    }

    #[test]
    fn eps_witness_cases() {
        let pair = pair_1x1(rat_int(0), rat(1, 2));
        match eps_bad_witness(&pair, &rat_int(10), 100) {
            WitnessOutcome::CounterexampleFound(w) => {
                assert_eq!(w.q_norm, 1);
                assert_eq!(w.argmin, vec![-1]);
            }
            o => panic!("expected witness, got {o:?}"),
        }
        // |q| * 1/2 >= 1/2 >= 1/4 always: no witness.
        match eps_bad_witness(&pair, &rat(1, 4), 100) {
            WitnessOutcome::NoCounterexampleUpTo(100) => {}
            o => panic!("expected none, got {o:?}"),
        }
    }

    #[test]
    fn eps_witness_golden_surrogate() {
        // A = 34/55 (a golden-ratio convergent). The CF oracle gives
        // q |qA|_Z >= 21/55 > 1/5 for 0 < q < 55, so eps = 1/5 has no
        // witness below the final denominator; at q = 55 the distance is
        // exactly zero.
        let pair = pair_1x1(rat(34, 55), rat_int(0));
        match eps_bad_witness(&pair, &rat(1, 5), 54) {
            WitnessOutcome::NoCounterexampleUpTo(54) => {}
            o => panic!("expected none below 55, got {o:?}"),
        }
        match eps_bad_witness(&pair, &rat(1, 5), 60) {
            WitnessOutcome::CounterexampleFound(w) => {
                assert_eq!(w.q_norm, 55);
                assert!(w.dist.is_zero());
            }
            o => panic!("expected witness at 55, got {o:?}"),
        }
        // eps = 2/5 clears the oracle floor 21/55 already at q = 1.
        match eps_bad_witness(&pair, &rat(2, 5), 54) {
            WitnessOutcome::CounterexampleFound(w) => assert_eq!(w.q_norm, 1),
            o => panic!("expected witness, got {o:?}"),
        }
    }

    #[test]
    fn w_hat_rational_is_infinite() {
        let a = QuadMat::from_rows(vec![vec![qr(2, 7)]]);
        let pts = w_hat_profile(&a, &[4, 8, 16]);
        assert!(pts[0].w.is_some()); // X=4: min over |q|<4 is nonzero
        assert!(pts[1].w.is_none()); // q=7 < 8 gives exact zero
        assert!(pts[2].w.is_none());
        assert_eq!(pts[2].min_dist, Quad::from_int(0));
    }

    #[test]
    fn w_hat_irrational_exact_field() {
        // m=1, n=2, A = (sqrt2 - 1, 2 sqrt2 + 1/3): exact comparisons in
        // Q(sqrt 2). Zero distance needs q1 = -2 q2 with 3 | q2, which is
        // out of reach for ||q|| < 6.
        let a = QuadMat::from_rows(vec![vec![
            Quad::new(rat_int(-1), rat_int(1), rat_int(2)),
            Quad::new(rat(1, 3), rat_int(2), rat_int(2)),
        ]]);
        let pts = w_hat_profile(&a, &[2, 4, 6]);
        for p in &pts {
            assert!(!p.min_dist.is_zero());
            assert!(p.w.unwrap() > 0.0);
        }
        // mins decrease along the schedule
        assert!(pts[2].min_dist <= pts[0].min_dist);
        // and the exact zero shows up once the box admits (-6, 3)
        let wide = w_hat_profile(&a, &[8]);
        assert!(wide[0].min_dist.is_zero());
        assert_eq!(wide[0].argmin, vec![-6, 3]);
    }

    #[test]
    fn subgroup_rank_cases() {
        // rational 1x1: rank 1 < 2.
        let a = QuadMat::from_rows(vec![vec![qr(89, 144)]]);
        assert_eq!(subgroup_rank(&a), 1);
        // sqrt2 entry: rank 2 = m + n.
        let b = QuadMat::from_rows(vec![vec![Quad::new(rat_int(0), rat_int(1), rat_int(2))]]);
        assert_eq!(subgroup_rank(&b), 2);
    }

    #[test]
    fn fast_and_exact_profiles_agree() {
        let a = QuadMat::from_rows(vec![vec![qr(3, 7), qr(5, 11)]]);
        let pair = AffinePair::new(a, vec![qr(1, 2)]);
        // Exact route: rebuild with an irrational disc-0 trick is not
        // possible, so compare norm_min with fast disabled directly.
        for r in 1..=6i64 {
            let f = FastAffine::build(&pair.a, &pair.b, 10).unwrap();
            let with_fast = norm_min(&pair, Some(&f), r);
            let without = norm_min(&pair, None, r);
            assert_eq!(with_fast.dist, without.dist);
            assert_eq!(with_fast.argmin, without.argmin);
        }
    }
}
