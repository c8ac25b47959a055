//! Explicit transference inequalities as finite-range checks.
//!
//! Three layers, all with exact constants:
//! - the inhomogeneous two-directional principle (necessary and sufficient
//!   conditions linking `||Aq - b||_Z`-solvability to a dot-product bound
//!   over a finite dual box);
//! - the sandwich between `1/eps`-badness and Dirichlet improvability with
//!   the explicit constants `c1 = (m+n)^{-1-m/n}` and
//!   `c2 = (2^{m-1}((m+n)!)^{-2})^{-1-m/n}`;
//! - the homogeneous transfer with its `(D, U)` bounds, and the derived
//!   very-singular exponent transfer.
//!
//! Scans run in machine integers through [`FastAffine`] whenever the input
//! is rational with a small denominator; every comparison that decides an
//! outcome cross-multiplies to integers (no floating point).

use crate::dioph::fastscan::FastAffine;
use crate::exact::intscan::scan_shell;
use crate::exact::powcmp::PowProd;
use crate::exact::quad::{dist_to_int_sup, dot_int, Quad, QuadMat};
use crate::exact::rational::{floor_int, pow_i64, rat_int, Rat};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransferError {
    #[error("hypothesis verified but no solution found at C={c}, X={x}: implementation bug")]
    InternalInconsistency { c: String, x: String },
    #[error("domain error: need 0 < C < 1 <= X, got C={c}, X={x}")]
    DomainError { c: String, x: String },
}

/// Exact transference constants for a given shape `(m, n)`.
#[derive(Clone, Debug, Serialize)]
pub struct TransferConstants {
    pub m: usize,
    pub n: usize,
    /// Necessary-direction constant `gamma = m + n`.
    #[serde(with = "crate::exact::rational::rat_string")]
    pub gamma_nec: Rat,
    /// Sufficient-direction constant `gamma = 2^{m-1} ((m+n)!)^{-2}`.
    #[serde(with = "crate::exact::rational::rat_string")]
    pub gamma_suf: Rat,
    /// `c1 = gamma_nec^{-1-m/n}`.
    pub c1: PowProd,
    /// `c2 = gamma_suf^{-1-m/n}`.
    pub c2: PowProd,
}

fn factorial(k: usize) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn transfer_constants(m: usize, n: usize) -> TransferConstants {
    assert!(m >= 1 && n >= 1);
    let gamma_nec = rat_int((m + n) as i64);
    let fact = factorial(m + n);
    let gamma_suf = Rat::new(BigInt::from(2).pow(m as u32 - 1), &fact * &fact);
    let exp = -(rat_int(1) + Rat::new(BigInt::from(m), BigInt::from(n)));
    let c1 = PowProd::new(Rat::one(), vec![(gamma_nec.clone(), exp.clone())]);
    let c2 = PowProd::new(Rat::one(), vec![(gamma_suf.clone(), exp)]);
    if m + n >= 2 {
        assert!(gamma_suf < Rat::one() && Rat::one() <= gamma_nec);
    }
    assert!(c1.cmp(&c2) != Ordering::Greater, "c1 <= c2 must hold");
    TransferConstants { m, n, gamma_nec, gamma_suf, c1, c2 }
}

/// Largest integer strictly below `x` (so `strict_floor(3) = 2`).
fn strict_floor(x: &Rat) -> BigInt {
    let f = floor_int(x);
    if &Rat::from_integer(f.clone()) == x {
        f - 1
    } else {
        f
    }
}

fn to_i64(b: &BigInt) -> i64 {
    b.to_i64().expect("bound fits in i64")
}

/// Scan `0 < ||q|| <= qmax` for `||Aq - b||_Z <= c`; first hit in
/// (norm, lex) order.
fn find_q_solution(a: &QuadMat, b: &[Quad], c: &Rat, qmax: i64) -> Option<Vec<i64>> {
    if qmax < 1 {
        return None;
    }
    if let Some(f) = FastAffine::build(a, b, qmax + 1) {
        let cn = c.numer().to_i128();
        let cd = c.denom().to_i128();
        if let (Some(cn), Some(cd)) = (cn, cd) {
            let mut hit: Option<Vec<i64>> = None;
            for r in 1..=qmax {
                scan_shell(a.cols, r, &mut |q| {
                    let d = f.dist_num(q) as i128;
                    if d * cd <= cn * f.den as i128 {
                        hit = Some(q.to_vec());
                        return false;
                    }
                    true
                });
                if hit.is_some() {
                    return hit;
                }
            }
            return None;
        }
    }
    let cq = Quad::from_rat(c.clone());
    let mut hit: Option<Vec<i64>> = None;
    for r in 1..=qmax {
        scan_shell(a.cols, r, &mut |q| {
            let mut res = a.mul_int_vec(q);
            for (x, bi) in res.iter_mut().zip(b) {
                *x = &*x - bi;
            }
            if dist_to_int_sup(&res) <= cq {
                hit = Some(q.to_vec());
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
pub enum NecessaryOutcome {
    /// No `q` solves the inhomogeneous system; the implication is vacuous.
    PremiseUnsatisfied,
    /// Premise holds and every `y` in the nontrivial box satisfies the
    /// dot-product bound.
    AllYPass { q: Vec<i64>, y_box: u64 },
    /// Premise holds but some `y` violates the bound: a theorem violation.
    HomogeneousWitnessViolated { q: Vec<i64>, y: Vec<i64> },
}

/// Necessary direction: a `q`-solution of `||Aq-b||_Z <= C, ||q|| <= X`
/// forces `|b.y|_Z <= gamma max(X ||tA y||_Z, C ||y||)` for all `y`, with
/// `gamma = m + n`. The check is finite: once `gamma C ||y|| >= 1/2` the
/// bound holds automatically.
pub fn check_necessary(a: &QuadMat, b: &[Quad], c: &Rat, x: &Rat) -> NecessaryOutcome {
    assert!(c.is_positive() && *x > Rat::one());
    let m = a.rows;
    let gamma = rat_int((a.rows + a.cols) as i64);
    let qmax = to_i64(&floor_int(x));
    let Some(q) = find_q_solution(a, b, c, qmax) else {
        return NecessaryOutcome::PremiseUnsatisfied;
    };
    let ta = a.transpose();
    let y_box = to_i64(&strict_floor(&(Rat::one() / (rat_int(2) * &gamma * c)))).max(0);
    let gx = Quad::from_rat(&gamma * x);
    let gc = Quad::from_rat(&gamma * c);
    for r in 1..=y_box {
        let mut violated: Option<Vec<i64>> = None;
        scan_shell(m, r, &mut |y| {
            let lhs = dot_int(b, y).dist_to_int();
            let dist = dist_to_int_sup(&ta.mul_int_vec(y));
            let rhs1 = &gx * &dist;
            let rhs2 = &gc * &Quad::from_int(r);
            let rhs = if rhs1 < rhs2 { rhs2 } else { rhs1 };
            if lhs > rhs {
                violated = Some(y.to_vec());
                return false;
            }
            true
        });
        if let Some(y) = violated {
            return NecessaryOutcome::HomogeneousWitnessViolated { q, y };
        }
    }
    NecessaryOutcome::AllYPass { q, y_box: y_box as u64 }
}

#[derive(Clone, Debug, Serialize)]
pub enum SufficientOutcome {
    /// Some `y` in the nontrivial box breaks the hypothesis; nothing is
    /// claimed about `q`.
    HypothesisFailed { y: Vec<i64> },
    /// Hypothesis verified; the guaranteed solution, found by scan.
    InhomogeneousSolution { q: Vec<i64>, y_box: u64 },
}

/// Sufficient direction with `gamma = 2^{m-1}((m+n)!)^{-2}`: if the
/// dot-product bound holds for all `y`, the inhomogeneous system is
/// solvable; the solution is found by exhaustive scan.
pub fn check_sufficient(
    a: &QuadMat,
    b: &[Quad],
    c: &Rat,
    x: &Rat,
) -> Result<SufficientOutcome, TransferError> {
    assert!(c.is_positive() && *x > Rat::one());
    let m = a.rows;
    let gamma = transfer_constants(a.rows, a.cols).gamma_suf;
    let ta = a.transpose();
    let y_box = to_i64(&strict_floor(&(Rat::one() / (rat_int(2) * &gamma * c)))).max(0);
    let gx = Quad::from_rat(&gamma * x);
    let gc = Quad::from_rat(&gamma * c);
    for r in 1..=y_box {
        let mut failed: Option<Vec<i64>> = None;
        scan_shell(m, r, &mut |y| {
            let lhs = dot_int(b, y).dist_to_int();
            let dist = dist_to_int_sup(&ta.mul_int_vec(y));
            let rhs1 = &gx * &dist;
            let rhs2 = &gc * &Quad::from_int(r);
            let rhs = if rhs1 < rhs2 { rhs2 } else { rhs1 };
            if lhs > rhs {
                failed = Some(y.to_vec());
                return false;
            }
            true
        });
        if let Some(y) = failed {
            return Ok(SufficientOutcome::HypothesisFailed { y });
        }
    }
    let qmax = to_i64(&floor_int(x));
    match find_q_solution(a, b, c, qmax) {
        Some(q) => Ok(SufficientOutcome::InhomogeneousSolution { q, y_box: y_box as u64 }),
        None => Err(TransferError::InternalInconsistency {
            c: crate::exact::rational::format_rat(c),
            x: crate::exact::rational::format_rat(x),
        }),
    }
}

/// One scheduled point of the sandwich check.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichPoint {
    /// `X` (direction one) or `T` (direction two).
    pub scale: u64,
    pub premise: bool,
    pub witness: Option<Vec<i64>>,
    /// False exactly when the theorem's conclusion failed (a violation).
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub m: usize,
    pub n: usize,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub eps: Rat,
    pub dir1: Vec<SandwichPoint>,
    pub dir2: Vec<SandwichPoint>,
    pub violations: usize,
}

/// Both inclusions of the badness/improvability sandwich at finite range,
/// for rational pairs.
///
/// Direction one: a Dirichlet-improvability witness at level
/// `c1 eps^{m/n}` and scale `X` forbids any `q` with
/// `||Aq-b||_Z <= 1/((m+n) X)` and `||q|| <= ((m+n) X / eps)^{m/n}`.
///
/// Direction two: if no `q` with `||q|| <= T` has
/// `||Aq-b||_Z <= eps^{-1} T^{-n/m}`, some `y` must satisfy
/// `||tA y||_Z < |b.y|_Z gamma^{-1} T^{-1}` and
/// `||y|| < |b.y|_Z gamma^{-1} eps T^{n/m}` with `gamma = gamma_suf`.
pub fn sandwich_check(
    a: &QuadMat,
    b: &[Quad],
    eps: &Rat,
    x_schedule: &[u64],
    t_schedule: &[u64],
) -> SandwichReport {
    assert!(a.is_rational() && b.iter().all(|x| x.is_rational()), "sandwich scans are rational");
    assert!(eps.is_positive());
    let (m, n) = (a.rows, a.cols);
    let consts = transfer_constants(m, n);
    let ta = a.transpose();
    let mut violations = 0usize;

    let mut dir1 = Vec::new();
    for &x in x_schedule {
        let witness = di_witness_scaled(&ta, b, m, n, &consts.gamma_nec, eps, x);
        let premise = witness.is_some();
        let mut ok = true;
        if premise {
            // T: largest integer with T^n <= ((m+n) X / eps)^m.
            let gx_over_eps = &consts.gamma_nec * rat_int(x as i64) / eps;
            let tmax = int_power_floor(&gx_over_eps, m as u32, n as u32);
            let c = Rat::one() / (&consts.gamma_nec * rat_int(x as i64));
            if find_q_solution(a, b, &c, tmax).is_some() {
                ok = false;
                violations += 1;
            }
        }
        dir1.push(SandwichPoint { scale: x, premise, witness, ok });
    }

    let mut dir2 = Vec::new();
    for &t in t_schedule {
        let premise = premise_bad_at(a, b, m, n, eps, t);
        let mut witness = None;
        let mut ok = true;
        if premise {
            witness = dir2_witness(&ta, b, m, n, &consts.gamma_suf, eps, t);
            if witness.is_none() {
                ok = false;
                violations += 1;
            }
        }
        dir2.push(SandwichPoint { scale: t, premise, witness, ok });
    }

    SandwichReport { m, n, eps: eps.clone(), dir1, dir2, violations }
}

/// Largest integer `r >= 0` with `r^n <= base^m` (`base > 0`).
fn int_power_floor(base: &Rat, m: u32, n: u32) -> i64 {
    if !base.is_positive() {
        return 0;
    }
    let target = pow_i64(base, m as i64);
    let guess = base.to_f64().map(|f| f.powf(m as f64 / n as f64).floor() as i64).unwrap_or(0);
    let mut r = guess.max(0);
    let fits =
        |r: i64| -> bool { r >= 0 && Rat::from_integer(BigInt::from(r).pow(n)) <= target };
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r
}

/// Direction-one witness: `y` with `||tA y||_Z^n X^m < c1^n eps^m |b.y|_Z^n`
/// and `||y|| < |b.y|_Z X`. Both conditions clear to integers because
/// `c1^n = (m+n)^{-(m+n)}` is rational.
fn di_witness_scaled(
    ta: &QuadMat,
    b: &[Quad],
    m: usize,
    n: usize,
    gamma: &Rat,
    eps: &Rat,
    x: u64,
) -> Option<Vec<i64>> {
    let ybound = (x as i64 - 1) / 2;
    if ybound < 1 {
        return None;
    }
    let scale = pow_i64(eps, m as i64) / pow_i64(gamma, (m + n) as i64);
    let xm = pow_i64(&rat_int(x as i64), m as i64);
    let fast = FastAffine::build(ta, &vec![Quad::from_int(0); n], ybound + 1);
    let bfast = rational_dot_parts(b);
    if let (Some(f), Some((bnum, bden))) = (&fast, &bfast) {
        let sc_n = scale.numer().to_i128();
        let sc_d = scale.denom().to_i128();
        let xm_i = xm.to_integer().to_i128();
        if let (Some(sc_n), Some(sc_d), Some(xm_i)) = (sc_n, sc_d, xm_i) {
            let mut hit = None;
            for r in 1..=ybound {
                scan_shell(m, r, &mut |y| {
                    let raw = dot_num(bnum, y).rem_euclid(*bden);
                    let db = raw.min(*bden - raw);
                    if (r as i128) * (*bden as i128) >= db as i128 * x as i128 {
                        return true;
                    }
                    let da = f.dist_num(y) as i128;
                    let lhs = checked_prod(&[
                        pow_i128(da, n as u32).unwrap_or(i128::MAX),
                        xm_i,
                        sc_d,
                        pow_i128(*bden as i128, n as u32).unwrap_or(i128::MAX),
                    ]);
                    let rhs = checked_prod(&[
                        sc_n,
                        pow_i128(db as i128, n as u32).unwrap_or(i128::MAX),
                        pow_i128(f.den as i128, n as u32).unwrap_or(i128::MAX),
                    ]);
                    let is_witness = match (lhs, rhs) {
                        (Some(l), Some(rr)) => l < rr,
                        _ => di_cond1_exact(ta, b, n, &scale, &xm, y),
                    };
                    if is_witness {
                        hit = Some(y.to_vec());
                        return false;
                    }
                    true
                });
                if hit.is_some() {
                    return hit;
                }
            }
            return None;
        }
    }
    for r in 1..=ybound {
        let mut hit = None;
        scan_shell(m, r, &mut |y| {
            let db = dot_int(b, y).dist_to_int().as_rat().unwrap().clone();
            if Rat::from_integer(BigInt::from(r)) >= &db * rat_int(x as i64) {
                return true;
            }
            if di_cond1_exact(ta, b, n, &scale, &xm, y) {
                hit = Some(y.to_vec());
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

fn di_cond1_exact(ta: &QuadMat, b: &[Quad], n: usize, scale: &Rat, xm: &Rat, y: &[i64]) -> bool {
    let da = dist_to_int_sup(&ta.mul_int_vec(y)).as_rat().unwrap().clone();
    let db = dot_int(b, y).dist_to_int().as_rat().unwrap().clone();
    pow_i64(&da, n as i64) * xm < scale * pow_i64(&db, n as i64)
}

/// Premise of direction two: no `q` with `0 < ||q|| <= T` and
/// `||Aq - b||_Z^m <= eps^{-m} T^{-n}`.
fn premise_bad_at(a: &QuadMat, b: &[Quad], m: usize, n: usize, eps: &Rat, t: u64) -> bool {
    let thr = pow_i64(eps, m as i64) * pow_i64(&rat_int(t as i64), n as i64);
    let fast = FastAffine::build(a, b, t as i64 + 1);
    if let Some(f) = &fast {
        let tn = thr.numer().to_i128();
        let td = thr.denom().to_i128();
        if let (Some(tn), Some(td)) = (tn, td) {
            let mut found = false;
            for r in 1..=t as i64 {
                scan_shell(n, r, &mut |q| {
                    let d = f.dist_num(q) as i128;
                    let lhs = checked_prod(&[pow_i128(d, m as u32).unwrap_or(i128::MAX), tn]);
                    let rhs =
                        checked_prod(&[pow_i128(f.den as i128, m as u32).unwrap_or(i128::MAX), td]);
                    let hit = match (lhs, rhs) {
                        (Some(l), Some(rr)) => l <= rr,
                        _ => {
                            let dq = Rat::new(BigInt::from(d as i64), BigInt::from(f.den));
                            pow_i64(&dq, m as i64) * &thr <= Rat::one()
                        }
                    };
                    if hit {
                        found = true;
                        return false;
                    }
                    true
                });
                if found {
                    return false;
                }
            }
            return true;
        }
    }
    for r in 1..=t as i64 {
        let mut found = false;
        scan_shell(n, r, &mut |q| {
            let mut res = a.mul_int_vec(q);
            for (xx, bi) in res.iter_mut().zip(b) {
                *xx = &*xx - bi;
            }
            let d = dist_to_int_sup(&res).as_rat().unwrap().clone();
            if pow_i64(&d, m as i64) * &thr <= Rat::one() {
                found = true;
                return false;
            }
            true
        });
        if found {
            return false;
        }
    }
    true
}

/// Direction-two witness: `y` with `||tA y||_Z < |b.y|_Z gamma^{-1} T^{-1}`
/// and `||y|| < |b.y|_Z gamma^{-1} eps T^{n/m}`.
fn dir2_witness(
    ta: &QuadMat,
    b: &[Quad],
    m: usize,
    n: usize,
    gamma: &Rat,
    eps: &Rat,
    t: u64,
) -> Option<Vec<i64>> {
    let g_inv_eps = eps / gamma;
    // ||y|| < X/2 with X = gamma^{-1} eps T^{n/m}:
    // ybound = floor of ((g_inv_eps/2)^m T^n)^{1/m}.
    let half_pow = pow_i64(&(&g_inv_eps / rat_int(2)), m as i64)
        * pow_i64(&rat_int(t as i64), n as i64);
    let ybound = int_power_floor(&half_pow, 1, m as u32);
    if ybound < 1 {
        return None;
    }
    let fast = FastAffine::build(ta, &vec![Quad::from_int(0); n], ybound + 1);
    let bfast = rational_dot_parts(b);
    if let (Some(f), Some((bnum, bden))) = (&fast, &bfast) {
        let g1 = gamma.numer().to_i128();
        let g2 = gamma.denom().to_i128();
        let ie1 = g_inv_eps.numer().to_i128();
        let ie2 = g_inv_eps.denom().to_i128();
        if let (Some(g1), Some(g2), Some(ie1), Some(ie2)) = (g1, g2, ie1, ie2) {
            let mut hit = None;
            for r in 1..=ybound {
                scan_shell(m, r, &mut |y| {
                    let raw = dot_num(bnum, y).rem_euclid(*bden);
                    let db = (raw.min(*bden - raw)) as i128;
                    if db == 0 {
                        return true;
                    }
                    let l2 = checked_prod(&[
                        pow_i128(r as i128, m as u32).unwrap_or(i128::MAX),
                        pow_i128(*bden as i128, m as u32).unwrap_or(i128::MAX),
                        pow_i128(ie2, m as u32).unwrap_or(i128::MAX),
                    ]);
                    let r2 = checked_prod(&[
                        pow_i128(db, m as u32).unwrap_or(i128::MAX),
                        pow_i128(ie1, m as u32).unwrap_or(i128::MAX),
                        pow_i128(t as i128, n as u32).unwrap_or(i128::MAX),
                    ]);
                    let c2_ok = match (l2, r2) {
                        (Some(l), Some(rr)) => l < rr,
                        _ => dir2_cond2_exact(b, &g_inv_eps, m, n, t, r, y),
                    };
                    if !c2_ok {
                        return true;
                    }
                    let da = f.dist_num(y) as i128;
                    let l1 = checked_prod(&[da, *bden as i128, g1, t as i128]);
                    let r1 = checked_prod(&[db, g2, f.den as i128]);
                    let c1_ok = match (l1, r1) {
                        (Some(l), Some(rr)) => l < rr,
                        _ => dir2_cond1_exact(ta, b, gamma, t, y),
                    };
                    if c1_ok {
                        hit = Some(y.to_vec());
                        return false;
                    }
                    true
                });
                if hit.is_some() {
                    return hit;
                }
            }
            return None;
        }
    }
    for r in 1..=ybound {
        let mut hit = None;
        scan_shell(m, r, &mut |y| {
            if dir2_cond2_exact(b, &g_inv_eps, m, n, t, r, y)
                && dir2_cond1_exact(ta, b, gamma, t, y)
            {
                hit = Some(y.to_vec());
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

fn dir2_cond1_exact(ta: &QuadMat, b: &[Quad], gamma: &Rat, t: u64, y: &[i64]) -> bool {
    let da = dist_to_int_sup(&ta.mul_int_vec(y)).as_rat().unwrap().clone();
    let db = dot_int(b, y).dist_to_int().as_rat().unwrap().clone();
    &da * gamma * rat_int(t as i64) < db
}

fn dir2_cond2_exact(
    b: &[Quad],
    g_inv_eps: &Rat,
    m: usize,
    n: usize,
    t: u64,
    r: i64,
    y: &[i64],
) -> bool {
    let db = dot_int(b, y).dist_to_int().as_rat().unwrap().clone();
    if db.is_zero() {
        return false;
    }
    pow_i64(&rat_int(r), m as i64)
        < pow_i64(&(db * g_inv_eps), m as i64) * pow_i64(&rat_int(t as i64), n as i64)
}

fn rational_dot_parts(b: &[Quad]) -> Option<(Vec<i64>, i64)> {
    use num_integer::Integer;
    if b.iter().any(|x| !x.is_rational()) {
        return None;
    }
    let mut l = BigInt::one();
    for x in b {
        l = l.lcm(x.a.denom());
    }
    let den = l.to_i64().filter(|&d| d > 0 && d < (1 << 20))?;
    let lr = Rat::from_integer(BigInt::from(den));
    let num: Option<Vec<i64>> = b.iter().map(|x| (&x.a * &lr).to_integer().to_i64()).collect();
    Some((num?, den))
}

#[inline]
fn dot_num(num: &[i64], y: &[i64]) -> i64 {
    num.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
fn pow_i128(x: i128, e: u32) -> Option<i128> {
    x.checked_pow(e)
}

fn checked_prod(xs: &[i128]) -> Option<i128> {
    let mut acc: i128 = 1;
    for &x in xs {
        if x == i128::MAX {
            return None;
        }
        acc = acc.checked_mul(x)?;
    }
    Some(acc)
}

/// Exact `(D, U)` of the homogeneous transfer:
/// `D = (m+n-1) X^{(1-m)/(m+n-1)} C^{m/(m+n-1)}`,
/// `U = (m+n-1) X^{n/(m+n-1)} C^{(1-n)/(m+n-1)}`.
pub fn transfer_du(
    m: usize,
    n: usize,
    c: &Rat,
    x: &Rat,
) -> Result<(PowProd, PowProd), TransferError> {
    if !(c.is_positive() && *c < Rat::one() && *x >= Rat::one()) {
        return Err(TransferError::DomainError {
            c: crate::exact::rational::format_rat(c),
            x: crate::exact::rational::format_rat(x),
        });
    }
    let k = rat_int((m + n - 1) as i64);
    let denom = BigInt::from((m + n - 1) as i64);
    let d = PowProd::new(
        k.clone(),
        vec![
            (x.clone(), Rat::new(BigInt::from(1 - m as i64), denom.clone())),
            (c.clone(), Rat::new(BigInt::from(m as i64), denom.clone())),
        ],
    );
    let u = PowProd::new(
        k,
        vec![
            (x.clone(), Rat::new(BigInt::from(n as i64), denom.clone())),
            (c.clone(), Rat::new(BigInt::from(1 - (n as i64)), denom)),
        ],
    );
    Ok((d, u))
}

#[derive(Clone, Debug, Serialize)]
pub enum SingularTransferOutcome {
    PremiseUnsatisfied,
    /// `q` solves the primal system and `y` the transferred one.
    Transferred { q: Vec<i64>, y: Vec<i64> },
}

/// Homogeneous transfer check: a `q` with `||Aq||_Z <= C`, `0<||q||<=X`
/// yields a `y` with `||tA y||_Z <= D`, `0<||y||<=U`. Absence of `y` after
/// an exhaustive scan is an internal inconsistency.
pub fn check_singular_transfer(
    a: &QuadMat,
    c: &Rat,
    x: u64,
) -> Result<SingularTransferOutcome, TransferError> {
    assert!(a.is_rational(), "homogeneous transfer scans are rational");
    let (m, n) = (a.rows, a.cols);
    let b0 = vec![Quad::from_int(0); m];
    let Some(q) = find_q_solution(a, &b0, c, x as i64) else {
        return Ok(SingularTransferOutcome::PremiseUnsatisfied);
    };
    let (d, u) = transfer_du(m, n, c, &rat_int(x as i64))?;
    let ubound = powprod_floor(&u);
    let ta = a.transpose();
    for r in 1..=ubound {
        let mut hit = None;
        scan_shell(m, r, &mut |y| {
            let dist = dist_to_int_sup(&ta.mul_int_vec(y)).as_rat().unwrap().clone();
            if d.cmp_rat(&dist) != Ordering::Less {
                hit = Some(y.to_vec());
                return false;
            }
            true
        });
        if let Some(y) = hit {
            return Ok(SingularTransferOutcome::Transferred { q, y });
        }
    }
    Err(TransferError::InternalInconsistency {
        c: crate::exact::rational::format_rat(c),
        x: x.to_string(),
    })
}

/// Largest integer not exceeding a positive power product.
pub fn powprod_floor(p: &PowProd) -> i64 {
    let mut r = p.to_f64().floor() as i64;
    if r < 0 {
        r = 0;
    }
    while r > 0 && p.cmp_rat(&rat_int(r)) == Ordering::Less {
        r -= 1;
    }
    while p.cmp_rat(&rat_int(r + 1)) != Ordering::Less {
        r += 1;
    }
    r
}

#[derive(Clone, Debug, Serialize)]
pub struct VerySingularPoint {
    pub x: u64,
    /// Witness of `||Aq||_Z < X^{-n/m-delta}`, `0 < ||q|| < X`, if any.
    pub q_witness: Option<Vec<i64>>,
    /// Transferred witness with the proof's exponents, when premise holds.
    pub y_witness: Option<Vec<i64>>,
    /// Bound `Y = (m+n) X^{n/m + delta (n-1)/(m+n-1)}` (display).
    pub y_bound_display: f64,
    /// Derived exponent with `||tA y||_Z <= Y^{-m/n - delta'}` (display;
    /// the exact exponent identities are asserted in tests).
    pub delta_prime_display: f64,
}

/// Per-`X` verdicts for the very-singular system and its transfer to the
/// transpose, with explicit exponents.
pub fn very_singular_check(a: &QuadMat, delta: &Rat, schedule: &[u64]) -> Vec<VerySingularPoint> {
    assert!(a.is_rational() && delta.is_positive());
    let (m, n) = (a.rows, a.cols);
    let ta = a.transpose();
    let mn1 = rat_int((m + n - 1) as i64);
    schedule
        .iter()
        .map(|&x| {
            let xr = rat_int(x as i64);
            let e_q = -(Rat::new(BigInt::from(n), BigInt::from(m)) + delta);
            let thr_q = PowProd::new(Rat::one(), vec![(xr.clone(), e_q)]);
            let mut q_witness = None;
            for r in 1..x as i64 {
                let mut found = None;
                scan_shell(n, r, &mut |q| {
                    let d = dist_to_int_sup(&a.mul_int_vec(q)).as_rat().unwrap().clone();
                    if thr_q.cmp_rat(&d) == Ordering::Greater {
                        found = Some(q.to_vec());
                        return false;
                    }
                    true
                });
                if found.is_some() {
                    q_witness = found;
                    break;
                }
            }
            let e_d = -(Rat::one() + delta * Rat::new(BigInt::from(m), BigInt::from(m + n - 1)));
            let thr_y = PowProd::new(mn1.clone(), vec![(xr.clone(), e_d)]);
            let e_u = Rat::new(BigInt::from(n), BigInt::from(m))
                + delta * Rat::new(BigInt::from(n as i64 - 1), BigInt::from(m + n - 1));
            let u = PowProd::new(mn1.clone(), vec![(xr.clone(), e_u.clone())]);
            let mut y_witness = None;
            if q_witness.is_some() {
                let ub = powprod_floor(&u);
                for r in 1..=ub {
                    let mut found = None;
                    scan_shell(m, r, &mut |y| {
                        let d = dist_to_int_sup(&ta.mul_int_vec(y)).as_rat().unwrap().clone();
                        if thr_y.cmp_rat(&d) != Ordering::Less {
                            found = Some(y.to_vec());
                            return false;
                        }
                        true
                    });
                    if found.is_some() {
                        y_witness = found;
                        break;
                    }
                }
            }
            let y_bound = PowProd::new(rat_int((m + n) as i64), vec![(xr.clone(), e_u)]);
            let y_bound_display = y_bound.to_f64();
            let delta_prime_display =
                -thr_y.to_f64().ln() / y_bound_display.ln() - (m as f64) / (n as f64);
            VerySingularPoint { x, q_witness, y_witness, y_bound_display, delta_prime_display }
        })
        .collect()
}
