//! Finite-X detectors for classical singularity and for the weighted
//! system "singular for b", where every bound carries the `|b.y|_Z` factor.
//!
//! The weighted system at scale `X` is decided on the finite box
//! `0 < ||y|| <= X/2` (the weight never exceeds one half), so every cell
//! of a verdict grid is an exact, reproducible computation. Verdicts about
//! "all sufficiently large X" are always relative to the scheduled range.

use crate::dioph::fastscan::FastAffine;
use crate::exact::intscan::scan_shell;
use crate::exact::quad::{dist_to_int_sup, dot_int, Quad, QuadMat};
use crate::exact::rational::{floor_int, pow_i64, rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;

/// A single weighted-system query at level `eps` and scale `x`.
#[derive(Clone, Debug, Serialize)]
pub struct DiQuery {
    /// `n x m`; the transposed matrix acting on `y in Z^m`.
    pub ta: QuadMat,
    pub b: Vec<Quad>,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub eps: Rat,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub x: Rat,
}

impl DiQuery {
    pub fn new(ta: QuadMat, b: Vec<Quad>, eps: Rat, x: Rat) -> Self {
        assert_eq!(ta.cols, b.len());
        assert!(eps.is_positive() && x > Rat::one());
        DiQuery { ta, b, eps, x }
    }

    pub fn m(&self) -> usize {
        self.ta.cols
    }

    pub fn n(&self) -> usize {
        self.ta.rows
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiWitness {
    pub y: Vec<i64>,
    /// `||tA y||_Z`.
    pub lhs: Quad,
    /// `|b . y|_Z`, the weight.
    pub scale: Quad,
}

/// First `y` (by increasing norm, lexicographic within a shell) with
/// `||tA y||_Z < eps |b.y|_Z X^{-m/n}` and `||y|| < |b.y|_Z X`.
///
/// Both inequalities are strict; the first is decided by raising to the
/// `n`-th power, which clears `X^{-m/n}` to the rational `X^{-m}`.
pub fn di_witness(query: &DiQuery) -> Option<DiWitness> {
    let (m, n) = (query.m(), query.n());
    // The weight is at most 1/2, so ||y|| < X/2.
    let ybound = {
        let half_x = &query.x / rat_int(2);
        let f = floor_int(&half_x);
        let f = if Rat::from_integer(f.clone()) == half_x { f - 1 } else { f };
        f.to_i64().expect("X bound fits i64")
    };
    if ybound < 1 {
        return None;
    }
    let eps_n = pow_i64(&query.eps, n as i64);
    let x_m = pow_i64(&query.x, m as i64);
    let fast = FastAffine::build(&query.ta, &vec![Quad::from_int(0); n], ybound + 1);
    let xq = Quad::from_rat(query.x.clone());
    let thr = Quad::from_rat(&eps_n / &x_m); // witness iff lhs^n < thr * scale^n
    for r in 1..=ybound {
        let mut hit: Option<DiWitness> = None;
        scan_shell(m, r, &mut |y| {
            let scale = dot_int(&query.b, y).dist_to_int();
            if Quad::from_int(r) >= &scale * &xq {
                return true;
            }
            let lhs = match &fast {
                Some(f) => f.dist(y),
                None => dist_to_int_sup(&query.ta.mul_int_vec(y)),
            };
            if lhs.pow(n as u32) < &thr * &scale.pow(n as u32) {
                hit = Some(DiWitness { y: y.to_vec(), lhs, scale });
                return false;
            }
            true
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

/// One cell of the verdict grid.
#[derive(Clone, Debug, Serialize)]
pub struct GridCell {
    #[serde(with = "crate::exact::rational::rat_string")]
    pub eps: Rat,
    pub x: u64,
    pub witness: Option<DiWitness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingForBProfile {
    pub cells: Vec<Vec<GridCell>>,
    /// For each `eps` row: the first scheduled `X` index such that every
    /// scheduled `X` from there on has a witness.
    pub thresholds: Vec<Option<usize>>,
    /// Every `eps` row admits a threshold: consistent with membership in
    /// the weighted singular set, up to the scheduled range.
    pub consistent_up_to_range: bool,
}

/// Verdict grid over decreasing `eps` and increasing `X`.
pub fn sing_for_b_profile(
    ta: &QuadMat,
    b: &[Quad],
    eps_schedule: &[Rat],
    x_schedule: &[u64],
) -> SingForBProfile {
    assert!(!eps_schedule.is_empty() && !x_schedule.is_empty());
    assert!(eps_schedule.windows(2).all(|w| w[0] > w[1]), "eps schedule must decrease");
    assert!(x_schedule.windows(2).all(|w| w[0] < w[1]), "X schedule must increase");
    let mut cells = Vec::new();
    let mut thresholds = Vec::new();
    for eps in eps_schedule {
        let row: Vec<GridCell> = x_schedule
            .iter()
            .map(|&x| {
                let q = DiQuery::new(ta.clone(), b.to_vec(), eps.clone(), rat_int(x as i64));
                GridCell { eps: eps.clone(), x, witness: di_witness(&q) }
            })
            .collect();
        // Threshold: start of the final run of witnessed cells, if the run
        // reaches the end of the schedule.
        let mut thr = None;
        for i in (0..row.len()).rev() {
            if row[i].witness.is_some() {
                thr = Some(i);
            } else {
                break;
            }
        }
        thresholds.push(thr);
        cells.push(row);
    }
    let consistent = thresholds.iter().all(|t| t.is_some());
    SingForBProfile { cells, thresholds, consistent_up_to_range: consistent }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalWitness {
    pub q: Vec<i64>,
    pub dist: Quad,
}

/// First `q` with `||Aq||_Z < eps X^{-n/m}` and `0 < ||q|| < X`.
pub fn classical_singular_witness(a: &QuadMat, eps: &Rat, x: u64) -> Option<ClassicalWitness> {
    assert!(eps.is_positive() && x > 1);
    let (m, n) = (a.rows, a.cols);
    let eps_m = pow_i64(eps, m as i64);
    let x_n = pow_i64(&rat_int(x as i64), n as i64);
    let thr = Quad::from_rat(&eps_m / &x_n); // dist^m < eps^m X^{-n}
    let fast = FastAffine::build(a, &vec![Quad::from_int(0); m], x as i64);
    for r in 1..x as i64 {
        let mut hit = None;
        scan_shell(n, r, &mut |q| {
            let dist = match &fast {
                Some(f) => f.dist(q),
                None => dist_to_int_sup(&a.mul_int_vec(q)),
            };
            if dist.pow(m as u32) < thr {
                hit = Some(ClassicalWitness { q: q.to_vec(), dist });
                return false;
            }
            true
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationReport {
    /// `||tA y||_Z < (eps/2) X^{-m/n}`: the witness already beats the
    /// unweighted bound with room to spare.
    pub lhs_within_half: bool,
    /// `||y|| < X/2`.
    pub norm_within_half: bool,
    pub vacuous: bool,
}

/// A weighted witness is in particular a classical witness at the same
/// level: the weight is at most `1/2`, so the weighted bounds imply
/// `||tA y||_Z < eps X^{-m/n} / 2` and `||y|| < X/2 < X`.
pub fn remark_implication_check(query: &DiQuery, witness: Option<&DiWitness>) -> ImplicationReport {
    let Some(w) = witness else {
        return ImplicationReport { lhs_within_half: true, norm_within_half: true, vacuous: true };
    };
    let (m, n) = (query.m(), query.n());
    // lhs^n X^m < (eps/2)^n
    let rhs = pow_i64(&(&query.eps / rat_int(2)), n as i64);
    let x_m = pow_i64(&query.x, m as i64);
    let lhs_within_half = w.lhs.pow(n as u32) * Quad::from_rat(x_m) < Quad::from_rat(rhs);
    let norm = w.y.iter().map(|v| v.abs()).max().unwrap_or(0);
    let norm_within_half = Rat::from_integer(BigInt::from(2 * norm)) < query.x;
    ImplicationReport { lhs_within_half, norm_within_half, vacuous: false }
}
