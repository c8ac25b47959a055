//! Unimodular grids, the diagonal flow and the shortest-vector functions
//! along it.
//!
//! At time `t` the flow scales the first `m` coordinates by `e^{t/m}` and
//! the last `n` by `e^{-t/n}`. Every length that matters is then a
//! monomial `c e^{u}` with rational `c >= 0` and `u`, and the sup norm of
//! any grid vector is the larger of two such monomials. Comparisons
//! between monomials reduce to comparing `e^x` with a rational for
//! rational `x`, which certified interval refinement decides exactly
//! (`e^x` is irrational for `x != 0`, so refinement terminates).
//!
//! Minima along the flow are computed per top-class: vectors with zero top
//! part form a sublattice handled by a plain rational enumeration on their
//! bottom parts; every other candidate class contributes a rational
//! closest-vector problem. The expanding factor prunes classes exactly.

use crate::exact::interval::cmp_exp_rat;
use crate::exact::lattice::{cmp_vec_lex, LatticeBasis, Norm};
use crate::exact::linalg::{self, RatMat, RatVec};
use crate::exact::powcmp::PowProd;
use crate::exact::rational::{format_rat, rat_int, Rat};
use crate::exact::ExactError;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use std::cmp::Ordering;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("block shapes are not in the nonexpanding subgroup: {0}")]
    BlockShapeError(String),
    #[error("coset search exhausted its budget")]
    ResourceExhausted,
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// A value `coeff * e^{exponent}` with rational data, compared exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonoVal {
    #[serde(with = "crate::exact::rational::rat_string")]
    pub coeff: Rat,
    #[serde(with = "crate::exact::rational::rat_string")]
    pub exponent: Rat,
}

impl MonoVal {
    pub fn zero() -> Self {
        MonoVal { coeff: Rat::zero(), exponent: Rat::zero() }
    }

    pub fn rational(c: Rat) -> Self {
        MonoVal { coeff: c, exponent: Rat::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn scale(&self, c: &Rat) -> MonoVal {
        MonoVal { coeff: &self.coeff * c, exponent: self.exponent.clone() }
    }

    pub fn mul(&self, other: &MonoVal) -> MonoVal {
        MonoVal { coeff: &self.coeff * &other.coeff, exponent: &self.exponent + &other.exponent }
    }

    pub fn to_f64(&self) -> f64 {
        crate::exact::rational::rat_to_f64(&self.coeff)
            * crate::exact::rational::rat_to_f64(&self.exponent).exp()
    }

    /// Exact comparison: `c1 e^{u1} <=> c2 e^{u2}` via `e^{u1-u2}` against
    /// `c2/c1`.
    pub fn cmp_exact(&self, other: &MonoVal) -> Ordering {
        if self.coeff.is_zero() || other.coeff.is_zero() {
            return self.coeff.cmp(&other.coeff);
        }
        assert!(self.coeff.is_positive() && other.coeff.is_positive());
        if self.exponent == other.exponent {
            return self.coeff.cmp(&other.coeff);
        }
        let x = &self.exponent - &other.exponent;
        let c = &other.coeff / &self.coeff;
        cmp_exp_rat(&x, &c)
    }
}

impl Eq for MonoVal {}
impl PartialOrd for MonoVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for MonoVal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_exact(other)
    }
}

/// A unimodular grid: lattice basis plus shift, with the flow shape `(m, n)`.
#[derive(Clone, Debug, Serialize)]
pub struct Grid {
    pub m: usize,
    pub n: usize,
    #[serde(serialize_with = "serialize_basis")]
    pub basis: LatticeBasis,
    #[serde(with = "crate::exact::rational::rat_vec_string")]
    pub shift: RatVec,
}

fn serialize_basis<S: serde::Serializer>(b: &LatticeBasis, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(b.rank()))?;
    for v in b.vectors() {
        let row: Vec<String> = v.iter().map(format_rat).collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

/// Build the grid of an affine pair: basis `[[I_m, A], [0, I_n]]` applied
/// to the standard lattice, shifted by `(b, 0)` reduced to a fundamental
/// domain.
pub fn make_grid(a: &[Vec<Rat>], b: &[Rat]) -> Grid {
    let m = a.len();
    assert!(m >= 1, "need at least one row");
    let n = a[0].len();
    assert!(a.iter().all(|r| r.len() == n));
    assert_eq!(b.len(), m);
    let d = m + n;
    let mut vectors = Vec::with_capacity(d);
    for i in 0..m {
        let mut v = vec![Rat::zero(); d];
        v[i] = Rat::one();
        vectors.push(v);
    }
    for j in 0..n {
        let mut v = vec![Rat::zero(); d];
        for i in 0..m {
            v[i] = a[i][j].clone();
        }
        v[m + j] = Rat::one();
        vectors.push(v);
    }
    let basis = LatticeBasis::new(vectors);
    debug_assert_eq!(basis.column_matrix().det().abs(), Rat::one());
    let mut shift = vec![Rat::zero(); d];
    shift[..m].clone_from_slice(b);
    let reduced = reduce_shift(&basis, &shift);
    Grid { m, n, basis, shift: reduced }
}

/// Canonical representative of the shift modulo the lattice: coefficients
/// in `[0, 1)`.
pub fn reduce_shift(basis: &LatticeBasis, shift: &[Rat]) -> RatVec {
    let inv = basis.column_matrix().inverse().expect("unimodular basis");
    let coeffs = inv.mul_vec(shift);
    let frac: Vec<Rat> = coeffs
        .iter()
        .map(|c| c - Rat::from_integer(crate::exact::rational::floor_int(c)))
        .collect();
    let mut out = vec![Rat::zero(); shift.len()];
    for (f, bvec) in frac.iter().zip(basis.vectors()) {
        for (o, x) in out.iter_mut().zip(bvec) {
            *o += f * x;
        }
    }
    out
}

impl Grid {
    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// The underlying lattice (shift dropped).
    pub fn underlying(&self) -> Grid {
        Grid {
            m: self.m,
            n: self.n,
            basis: self.basis.clone(),
            shift: vec![Rat::zero(); self.dim()],
        }
    }

    pub fn is_lattice(&self) -> bool {
        self.shift.iter().all(|x| x.is_zero())
    }
}

/// Precomputed class decomposition of a grid for flow-time queries.
struct FlowDecomp {
    m: usize,
    n: usize,
    basis: LatticeBasis,
    shift: RatVec,
    /// Bottom parts of the top-kernel sublattice (may be empty).
    kernel_bot: Option<LatticeBasis>,
    /// Full coefficient vectors of the kernel basis.
    kernel_coeffs: Vec<Vec<BigInt>>,
    /// Basis of the top-image lattice in `R^m` with coefficient reps.
    image: Option<LatticeBasis>,
    image_reps: Vec<Vec<BigInt>>,
}

fn split_top_bot(v: &[Rat], m: usize) -> (RatVec, RatVec) {
    (v[..m].to_vec(), v[m..].to_vec())
}

fn build_decomp(grid: &Grid) -> Result<FlowDecomp, FlowError> {
    let d = grid.dim();
    if d > crate::exact::lattice::ENUM_DIM_CAP {
        return Err(ExactError::DimensionTooLarge(d, crate::exact::lattice::ENUM_DIM_CAP).into());
    }
    let (m, _n) = (grid.m, grid.n);
    // Top map on coefficients: rows = top coordinates of basis vectors.
    let t_mat = RatMat::from_rows(
        (0..m).map(|i| grid.basis.vectors().iter().map(|v| v[i].clone()).collect()).collect(),
    );
    let kernel_coeffs = linalg::int_kernel(&t_mat);
    let kernel_bot = if kernel_coeffs.is_empty() {
        None
    } else {
        let vecs: Vec<RatVec> = kernel_coeffs
            .iter()
            .map(|c| {
                let full = grid.basis.point(c);
                full[m..].to_vec()
            })
            .collect();
        Some(LatticeBasis::new(vecs))
    };
    // Image lattice with coefficient representatives.
    let (img_vecs, image_reps) = image_with_reps(&t_mat);
    let image = if img_vecs.is_empty() { None } else { Some(LatticeBasis::new(img_vecs)) };
    Ok(FlowDecomp {
        m,
        n: grid.n,
        basis: grid.basis.clone(),
        shift: grid.shift.clone(),
        kernel_bot,
        kernel_coeffs,
        image,
        image_reps,
    })
}

fn image_with_reps(mat: &RatMat) -> (Vec<RatVec>, Vec<Vec<BigInt>>) {
    let mut l = BigInt::one();
    for i in 0..mat.rows {
        for j in 0..mat.cols {
            l = l.lcm(mat.at(i, j).denom());
        }
    }
    let int_rows: Vec<Vec<BigInt>> = (0..mat.rows)
        .map(|i| {
            (0..mat.cols)
                .map(|j| (mat.at(i, j) * Rat::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();
    let (ech, u, rank) = linalg::col_echelon_with_transform(&int_rows);
    let vecs = (0..rank)
        .map(|j| (0..mat.rows).map(|i| Rat::new(ech[i][j].clone(), l.clone())).collect())
        .collect();
    let reps = (0..rank).map(|j| u[j].clone()).collect();
    (vecs, reps)
}

impl FlowDecomp {
    fn top_rate(&self) -> Rat {
        Rat::new(BigInt::one(), BigInt::from(self.m as i64))
    }

    fn bot_rate(&self) -> Rat {
        -Rat::new(BigInt::one(), BigInt::from(self.n as i64))
    }

    /// Norm of a vector at time `t`: the larger of the two scaled parts.
    /// Ties prefer the contracting side, so the reported monomial is
    /// canonical.
    fn norm_at(&self, v: &[Rat], t: &Rat) -> MonoVal {
        let (top, bot) = split_top_bot(v, self.m);
        let mt = MonoVal { coeff: linalg::sup_norm(&top), exponent: self.top_rate() * t };
        let mb = MonoVal { coeff: linalg::sup_norm(&bot), exponent: self.bot_rate() * t };
        if mt.cmp_exact(&mb) == Ordering::Greater {
            mt
        } else {
            mb
        }
    }

    /// Coefficient representative of an image point (exact solve against
    /// the image basis).
    fn rep_for(&self, img_coeffs: &[BigInt]) -> Vec<BigInt> {
        let d = self.basis.rank();
        let mut rep = vec![BigInt::zero(); d];
        for (c, r) in img_coeffs.iter().zip(&self.image_reps) {
            for (acc, x) in rep.iter_mut().zip(r) {
                *acc += c * x;
            }
        }
        rep
    }

    /// Minimum norm over the grid at time `t`, over vectors `v = Bc + s`
    /// with an optional exclusion of the zero vector. Returns the value,
    /// an attaining vector, and whether the value was tied between the
    /// expanding and contracting sides.
    fn grid_min(
        &self,
        t: &Rat,
        exclude_zero: bool,
    ) -> Result<(MonoVal, RatVec, bool), FlowError> {
        assert!(!t.is_negative(), "negative times are handled by swapping");
        let s = &self.shift;
        let (s_top, _s_bot) = split_top_bot(s, self.m);
        // Candidate classes: image points a; the class norm is
        // max(e^{t/m} ||a + s_top||, e^{-t/n} botmin(a)).
        // Start from the class nearest to -s_top.
        let mut best: Option<(MonoVal, RatVec)> = None;
        let mut consider = |cand: Option<(MonoVal, RatVec)>, best: &mut Option<(MonoVal, RatVec)>| {
            if let Some((v, vec)) = cand {
                let better = match best {
                    None => true,
                    Some((bv, bvec)) => match v.cmp_exact(bv) {
                        Ordering::Less => true,
                        Ordering::Equal => cmp_vec_lex(&vec, bvec) == Ordering::Less,
                        Ordering::Greater => false,
                    },
                };
                if better {
                    *best = Some((v, vec));
                }
            }
        };

        // Zero-top class (a + s_top = s_top if s_top happens to be in the
        // image; handled uniformly below when the image exists). When the
        // image is trivial, the only class is the kernel itself.
        if self.image.is_none() {
            let cand = self.class_min(&[], t, exclude_zero)?;
            consider(cand, &mut best);
            let (v, vec) = best.ok_or(FlowError::ResourceExhausted)?;
            let tie = self.tie_at(&vec, t);
            return Ok((v, vec, tie));
        }
        let image = self.image.as_ref().unwrap();
        // Initial candidate: the image point closest to -s_top.
        let target: RatVec = s_top.iter().map(|x| -x).collect();
        let (_, a0) = image.closest_vector(&target, Norm::Sup)?;
        let a0_coeffs = solve_int_coeffs(image, &a0);
        let cand0 = self.class_min(&a0_coeffs, t, exclude_zero)?;
        consider(cand0, &mut best);
        // Fallback: basis vectors (plus shift) as candidates, to guarantee
        // a bound when the nearest class is excluded.
        for bvec in self.basis.vectors() {
            let v = linalg::vec_add(bvec, s);
            if exclude_zero && v.iter().all(|x| x.is_zero()) {
                continue;
            }
            consider(Some((self.norm_at(&v, t), v)), &mut best);
        }
        let bound = best.as_ref().expect("candidates exist").0.clone();
        // Enumerate all classes with e^{t/m} ||a + s_top|| <= bound:
        // ||a + s_top|| <= bound * e^{-t/m}, for which a rational upper
        // bound is enough (missing classes are strictly worse).
        let top_budget = mono_div_rat_upper(&bound, &(self.top_rate() * t));
        let ball_sq = {
            let mr = Rat::from_integer(BigInt::from(self.m as i64));
            mr * &top_budget * &top_budget
        };
        for (a_coeffs, _a_vec) in image.points_in_ball(&target, &ball_sq)? {
            let cand = self.class_min(&a_coeffs, t, exclude_zero)?;
            consider(cand, &mut best);
        }
        let (v, vec) = best.ok_or(FlowError::ResourceExhausted)?;
        let tie = self.tie_at(&vec, t);
        Ok((v, vec, tie))
    }

    /// Whether both scaled parts attain the norm simultaneously at `t`.
    fn tie_at(&self, v: &[Rat], t: &Rat) -> bool {
        let (top, bot) = split_top_bot(v, self.m);
        let mt = MonoVal { coeff: linalg::sup_norm(&top), exponent: self.top_rate() * t };
        let mb = MonoVal { coeff: linalg::sup_norm(&bot), exponent: self.bot_rate() * t };
        !mt.is_zero() && mt.cmp_exact(&mb) == Ordering::Equal
    }

    /// Minimum over one class (fixed image coefficients).
    fn class_min(
        &self,
        img_coeffs: &[BigInt],
        t: &Rat,
        exclude_zero: bool,
    ) -> Result<Option<(MonoVal, RatVec)>, FlowError> {
        let rep = if img_coeffs.is_empty() {
            vec![BigInt::zero(); self.basis.rank()]
        } else {
            self.rep_for(img_coeffs)
        };
        let base = linalg::vec_add(&self.basis.point(&rep), &self.shift);
        let (base_top, base_bot) = split_top_bot(&base, self.m);
        let top_norm = linalg::sup_norm(&base_top);
        let is_zero_class = top_norm.is_zero();
        match &self.kernel_bot {
            None => {
                // Single vector in the class.
                if exclude_zero && base.iter().all(|x| x.is_zero()) {
                    return Ok(None);
                }
                Ok(Some((self.norm_at(&base, t), base)))
            }
            Some(kb) => {
                let target: RatVec = base_bot.iter().map(|x| -x).collect();
                let (_, u) = kb.closest_vector(&target, Norm::Sup)?;
                let u_coeffs = solve_int_coeffs(kb, &u);
                let v = self.assemble(&rep, &u_coeffs);
                if exclude_zero && v.iter().all(|x| x.is_zero()) {
                    // Zero was the class minimum: take the shortest nonzero
                    // kernel vector instead (only possible in the zero class).
                    assert!(is_zero_class);
                    let (val, w) = kb.shortest_vector(Norm::Sup)?;
                    let w_coeffs = solve_int_coeffs(kb, &w);
                    let v2 = self.assemble(&rep, &w_coeffs);
                    let _ = val;
                    return Ok(Some((self.norm_at(&v2, t), v2)));
                }
                Ok(Some((self.norm_at(&v, t), v)))
            }
        }
    }

    /// Full vector from an image representative plus kernel coefficients.
    fn assemble(&self, rep: &[BigInt], kernel_c: &[BigInt]) -> RatVec {
        let mut coeffs = rep.to_vec();
        for (c, k) in kernel_c.iter().zip(&self.kernel_coeffs) {
            for (acc, x) in coeffs.iter_mut().zip(k) {
                *acc += c * x;
            }
        }
        linalg::vec_add(&self.basis.point(&coeffs), &self.shift)
    }

    /// Successive minima of the (shift-free) lattice at time `t`: greedy
    /// shortest-vector-outside-the-span, which is exact.
    fn minima_at(&self, t: &Rat, count: usize) -> Result<Vec<(MonoVal, RatVec)>, FlowError> {
        assert!(self.shift.iter().all(|x| x.is_zero()), "minima are for lattices");
        let mut chosen: Vec<(MonoVal, RatVec)> = Vec::new();
        while chosen.len() < count {
            let span: Vec<RatVec> = chosen.iter().map(|(_, v)| v.clone()).collect();
            let next = self.shortest_outside(t, &span)?;
            chosen.push(next);
        }
        Ok(chosen)
    }

    fn in_span(span: &[RatVec], v: &[Rat]) -> bool {
        if span.is_empty() {
            return v.iter().all(|x| x.is_zero());
        }
        let mut rows = span.to_vec();
        let base_rank = RatMat::from_rows(rows.clone()).rank();
        rows.push(v.to_vec());
        RatMat::from_rows(rows).rank() == base_rank
    }

    /// Shortest lattice vector at time `t` outside the span of `span`.
    fn shortest_outside(&self, t: &Rat, span: &[RatVec]) -> Result<(MonoVal, RatVec), FlowError> {
        // Fallback bound from the basis.
        let mut best: Option<(MonoVal, RatVec)> = None;
        let mut consider = |v: RatVec, best: &mut Option<(MonoVal, RatVec)>| {
            if Self::in_span(span, &v) {
                return;
            }
            let val = self.norm_at(&v, t);
            let canon = crate::exact::lattice::canonical_sign(&v);
            let better = match best {
                None => true,
                Some((bv, bvec)) => match val.cmp_exact(bv) {
                    Ordering::Less => true,
                    Ordering::Equal => cmp_vec_lex(&canon, bvec) == Ordering::Less,
                    Ordering::Greater => false,
                },
            };
            if better {
                *best = Some((val, canon));
            }
        };
        for bvec in self.basis.vectors() {
            consider(bvec.clone(), &mut best);
        }
        // Kernel stream: enumerate kernel vectors by bottom norm within the
        // current bound.
        if let Some(kb) = &self.kernel_bot {
            let bound = best.as_ref().unwrap().0.clone();
            let bot_budget = mono_div_rat_upper(&bound, &(self.bot_rate() * t));
            let ball_sq = {
                let nr = Rat::from_integer(BigInt::from(self.n as i64));
                nr * &bot_budget * &bot_budget
            };
            let zero_center = vec![Rat::zero(); self.n];
            for (kc, _bot) in kb.points_in_ball(&zero_center, &ball_sq)? {
                if kc.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let v = self.assemble(&vec![BigInt::zero(); self.basis.rank()], &kc);
                consider(v, &mut best);
            }
        }
        // Class streams within the current bound.
        if let Some(image) = &self.image {
            let bound = best.as_ref().unwrap().0.clone();
            let top_budget = mono_div_rat_upper(&bound, &(self.top_rate() * t));
            let ball_sq = {
                let mr = Rat::from_integer(BigInt::from(self.m as i64));
                mr * &top_budget * &top_budget
            };
            let zero_center = vec![Rat::zero(); self.m];
            for (a_coeffs, a_vec) in image.points_in_ball(&zero_center, &ball_sq)? {
                if a_vec.iter().all(|x| x.is_zero()) {
                    continue; // kernel stream covers the zero class
                }
                // Within the class, scan coset vectors by increasing
                // bottom norm until one leaves the span.
                let rep = self.rep_for(&a_coeffs);
                let base = self.basis.point(&rep);
                let (_, base_bot) = split_top_bot(&base, self.m);
                match &self.kernel_bot {
                    None => consider(base, &mut best),
                    Some(kb) => {
                        let target: RatVec = base_bot.iter().map(|x| -x).collect();
                        let (d0, _) = kb.closest_vector(&target, Norm::Sup)?;
                        let start_sq = match d0.as_rat() {
                            Some(r) => &r * &r,
                            None => d0.base().clone(),
                        };
                        let mut radius_sq =
                            (start_sq + Rat::one()) * Rat::from_integer(BigInt::from(self.n as i64));
                        let mut found = false;
                        for _ in 0..24 {
                            for (kc, _) in kb.points_in_ball(&target, &radius_sq)? {
                                let v = self.assemble(&rep, &kc);
                                if !Self::in_span(span, &v) {
                                    consider(v, &mut best);
                                    found = true;
                                }
                            }
                            if found {
                                break;
                            }
                            radius_sq *= rat_int(4);
                        }
                        if !found {
                            // The entire class lies in the span (possible
                            // when the coset affine hull is contained in
                            // it); the class contributes nothing.
                            continue;
                        }
                    }
                }
            }
        }
        best.ok_or(FlowError::ResourceExhausted)
    }
}

/// Rational upper bound on `mono * e^{-u}` valid for the comparison
/// `value <= bound`: exact when the exponents cancel, a certified upper
/// enclosure otherwise.
fn mono_div_rat_upper(mono: &MonoVal, u: &Rat) -> Rat {
    let e = &mono.exponent - u;
    if e.is_zero() {
        return mono.coeff.clone();
    }
    if mono.coeff.is_zero() {
        return Rat::zero();
    }
    let iv = crate::exact::interval::exp_interval(&e, 64);
    &mono.coeff * &iv.hi
}

fn solve_int_coeffs(basis: &LatticeBasis, point: &[Rat]) -> Vec<BigInt> {
    // Solve B c = point in the least-squares sense (point lies in the
    // span); for full-rank square bases this is the exact solve.
    let r = basis.rank();
    let gram = {
        let mut g = RatMat::zero(r, r);
        for i in 0..r {
            for j in 0..r {
                *g.at_mut(i, j) = linalg::dot(&basis.vectors()[i], &basis.vectors()[j]);
            }
        }
        g
    };
    let rhs: RatVec = (0..r).map(|i| linalg::dot(&basis.vectors()[i], point)).collect();
    let sol = gram.solve(&rhs).expect("Gram matrix is invertible");
    sol.iter()
        .map(|x| {
            assert!(x.is_integer(), "point must be a lattice point");
            x.to_integer()
        })
        .collect()
}

/// One sample of the flow: `Delta` of the grid and `Delta_0` of the
/// underlying lattice, both exact monomials with attaining vectors.
#[derive(Clone, Debug, Serialize)]
pub struct TrajectorySample {
    #[serde(with = "crate::exact::rational::rat_string")]
    pub t: Rat,
    pub delta: MonoVal,
    #[serde(with = "crate::exact::rational::rat_vec_string")]
    pub delta_argmin: RatVec,
    pub delta_tied: bool,
    pub delta0: MonoVal,
    #[serde(with = "crate::exact::rational::rat_vec_string")]
    pub delta0_argmin: RatVec,
    pub delta0_tied: bool,
}

/// `Delta` and `Delta_0` at one time.
pub fn flow_delta(grid: &Grid, t: &Rat) -> Result<TrajectorySample, FlowError> {
    let (g, tt) = if t.is_negative() { (swap_grid(grid), -t.clone()) } else { (grid.clone(), t.clone()) };
    let decomp = build_decomp(&g)?;
    let (delta, delta_argmin, delta_tied) = decomp.grid_min(&tt, false)?;
    let lat = build_decomp(&g.underlying())?;
    let (delta0, delta0_argmin, delta0_tied) = lat.grid_min(&tt, true)?;
    Ok(TrajectorySample {
        t: t.clone(),
        delta,
        delta_argmin,
        delta_tied,
        delta0,
        delta0_argmin,
        delta0_tied,
    })
}

/// Negative times swap the expanding and contracting blocks.
fn swap_grid(grid: &Grid) -> Grid {
    let (m, n) = (grid.m, grid.n);
    let d = m + n;
    let perm = |v: &[Rat]| -> RatVec {
        let mut w = Vec::with_capacity(d);
        w.extend_from_slice(&v[m..]);
        w.extend_from_slice(&v[..m]);
        w
    };
    let vectors = grid.basis.vectors().iter().map(|v| perm(v)).collect();
    Grid { m: n, n: m, basis: LatticeBasis::new(vectors), shift: perm(&grid.shift) }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    /// Running minimum of `Delta` along the schedule.
    pub delta_running_min: Vec<MonoVal>,
    /// Running maximum of `Delta_0` along the schedule.
    pub delta0_running_max: Vec<MonoVal>,
}

pub fn trajectory(grid: &Grid, schedule: &[Rat]) -> Result<Trajectory, FlowError> {
    assert!(schedule.windows(2).all(|w| w[0] < w[1]), "schedule must increase");
    let mut samples = Vec::with_capacity(schedule.len());
    for t in schedule {
        samples.push(flow_delta(grid, t)?);
    }
    let mut delta_running_min: Vec<MonoVal> = Vec::with_capacity(samples.len());
    let mut delta0_running_max: Vec<MonoVal> = Vec::with_capacity(samples.len());
    for s in &samples {
        let dmin = match delta_running_min.last() {
            None => s.delta.clone(),
            Some(prev) => {
                if s.delta.cmp_exact(prev) == Ordering::Less {
                    s.delta.clone()
                } else {
                    prev.clone()
                }
            }
        };
        delta_running_min.push(dmin);
        let dmax = match delta0_running_max.last() {
            None => s.delta0.clone(),
            Some(prev) => {
                if s.delta0.cmp_exact(prev) == Ordering::Greater {
                    s.delta0.clone()
                } else {
                    prev.clone()
                }
            }
        };
        delta0_running_max.push(dmax);
    }
    Ok(Trajectory { samples, delta_running_min, delta0_running_max })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimaCheckPoint {
    #[serde(with = "crate::exact::rational::rat_string")]
    pub t: Rat,
    pub delta: MonoVal,
    pub lambda_last: MonoVal,
    /// `Delta(a_t x) <= (m+n) lambda_{m+n}(a_t pi(x))`, exact.
    pub domination_ok: bool,
    /// `1/(m+n)! <= prod lambda_i <= 1`, exact.
    pub minkowski_ok: bool,
}

/// The grid/lattice comparison along the flow: the grid minimum is
/// dominated by `(m+n)` times the last successive minimum of the
/// underlying lattice, and the minima satisfy the second-theorem product
/// bounds (sup norm, covolume one).
pub fn prop_minima_check(grid: &Grid, schedule: &[Rat]) -> Result<Vec<MinimaCheckPoint>, FlowError> {
    let d = grid.dim();
    let fact: i64 = (1..=d as i64).product();
    let mut out = Vec::new();
    for t in schedule {
        let (g, tt) =
            if t.is_negative() { (swap_grid(grid), -t.clone()) } else { (grid.clone(), t.clone()) };
        let decomp = build_decomp(&g)?;
        let (delta, _, _) = decomp.grid_min(&tt, false)?;
        let lat = build_decomp(&g.underlying())?;
        let minima = lat.minima_at(&tt, d)?;
        let lambda_last = minima.last().unwrap().0.clone();
        let scaled = lambda_last.scale(&rat_int(d as i64));
        let domination_ok = delta.cmp_exact(&scaled) != Ordering::Greater;
        let product = minima.iter().fold(MonoVal::rational(Rat::one()), |acc, (v, _)| acc.mul(v));
        let minkowski_ok = product.cmp_exact(&MonoVal::rational(Rat::one())) != Ordering::Greater
            && product.cmp_exact(&MonoVal::rational(Rat::new(BigInt::one(), BigInt::from(fact))))
                != Ordering::Less;
        out.push(MinimaCheckPoint { t: t.clone(), delta, lambda_last, domination_ok, minkowski_ok });
    }
    Ok(out)
}

/// An element of the nonexpanding subgroup: blocks `(S, 0; R, Q)` with a
/// translation part `(0; c)`, `det S det Q = 1`.
#[derive(Clone, Debug)]
pub struct PElement {
    pub s: RatMat,
    pub r: RatMat,
    pub q: RatMat,
    pub c: RatVec,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjugatedP {
    /// Unchanged diagonal blocks.
    pub s_unchanged: bool,
    pub q_unchanged: bool,
    /// The lower-left block decays with this exact rate under conjugation.
    #[serde(with = "crate::exact::rational::rat_string")]
    pub r_rate: Rat,
    /// The translation part decays with this exact rate.
    #[serde(with = "crate::exact::rational::rat_string")]
    pub c_rate: Rat,
    /// Exact sup-operator-norm bound of the conjugated element, valid for
    /// all nonnegative times (attained at zero).
    #[serde(with = "crate::exact::rational::rat_string")]
    pub op_bound: Rat,
    /// The same bound for the inverse element: together they give the
    /// two-sided comparison constant for norms along the flow.
    #[serde(with = "crate::exact::rational::rat_string")]
    pub instance_constant: Rat,
}

/// Conjugation by the flow: the `R`-block picks up `e^{-(1/m + 1/n)t}`,
/// the translation `e^{-t/n}`, the diagonal blocks are unchanged. The
/// exact rates and a uniform operator bound are returned.
pub fn p_conjugation(p: &PElement, m: usize, n: usize) -> Result<ConjugatedP, FlowError> {
    if p.s.rows != m || p.s.cols != m || p.q.rows != n || p.q.cols != n || p.r.rows != n
        || p.r.cols != m || p.c.len() != n
    {
        return Err(FlowError::BlockShapeError(format!(
            "expected S {m}x{m}, R {n}x{m}, Q {n}x{n}, c in R^{n}"
        )));
    }
    let det_prod = p.s.det() * p.q.det();
    if det_prod != Rat::one() {
        return Err(FlowError::BlockShapeError(format!(
            "det S det Q = {} is not one",
            format_rat(&det_prod)
        )));
    }
    let r_rate = -(Rat::new(BigInt::one(), BigInt::from(m as i64))
        + Rat::new(BigInt::one(), BigInt::from(n as i64)));
    let c_rate = -Rat::new(BigInt::one(), BigInt::from(n as i64));
    let op_bound = op_bound_at_zero(p, m, n);
    let inv = invert_p(p);
    let inv_bound = op_bound_at_zero(&inv, m, n);
    let instance_constant = if op_bound >= inv_bound { op_bound.clone() } else { inv_bound };
    Ok(ConjugatedP {
        s_unchanged: true,
        q_unchanged: true,
        r_rate,
        c_rate,
        op_bound,
        instance_constant,
    })
}

/// Sup-operator-norm bound (max row sum) of the conjugated linear part at
/// time zero; the conjugated blocks only shrink for positive times.
fn op_bound_at_zero(p: &PElement, m: usize, n: usize) -> Rat {
    let mut worst = Rat::zero();
    for i in 0..m {
        let mut row = Rat::zero();
        for j in 0..m {
            row += p.s.at(i, j).abs();
        }
        if row > worst {
            worst = row;
        }
    }
    for i in 0..n {
        let mut row = Rat::zero();
        for j in 0..m {
            row += p.r.at(i, j).abs();
        }
        for j in 0..n {
            row += p.q.at(i, j).abs();
        }
        if row > worst {
            worst = row;
        }
    }
    worst.max(Rat::one())
}

fn invert_p(p: &PElement) -> PElement {
    let s_inv = p.s.inverse().expect("S invertible");
    let q_inv = p.q.inverse().expect("Q invertible");
    // (S 0; R Q)^{-1} = (S^{-1} 0; -Q^{-1} R S^{-1} Q^{-1})
    let r_inv = {
        let t = q_inv.mul_mat(&p.r).mul_mat(&s_inv);
        let mut neg = t.clone();
        for i in 0..neg.rows {
            for j in 0..neg.cols {
                *neg.at_mut(i, j) = -t.at(i, j).clone();
            }
        }
        neg
    };
    // translation of inverse: -g^{-1} v with v = (0; c):
    // top part: -S^{-1} * 0 = 0; bottom: -(Q^{-1} c) after the linear part.
    let c_inv: RatVec = {
        let qc = q_inv.mul_vec(&p.c);
        qc.iter().map(|x| -x).collect()
    };
    PElement { s: s_inv, r: r_inv, q: q_inv, c: c_inv }
}

/// Verify `||a_t p v|| <= kappa ||a_t v||` on the grid's basis vectors and
/// shift, exactly, at each scheduled time.
pub fn verify_conjugation_bound(
    p: &PElement,
    grid: &Grid,
    schedule: &[Rat],
) -> Result<bool, FlowError> {
    let (m, n) = (grid.m, grid.n);
    let conj = p_conjugation(p, m, n)?;
    let kappa = conj.instance_constant.clone();
    let decomp = build_decomp(grid)?;
    let mut vectors: Vec<RatVec> = grid.basis.vectors().to_vec();
    if !grid.is_lattice() {
        vectors.push(grid.shift.clone());
    }
    for t in schedule {
        for v in &vectors {
            let pv = apply_p(p, v, m, n);
            let lhs = decomp.norm_at(&pv, t);
            let rhs = decomp.norm_at(v, t).scale(&kappa);
            if lhs.cmp_exact(&rhs) == Ordering::Greater {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn apply_p(p: &PElement, v: &[Rat], m: usize, n: usize) -> RatVec {
    let (top, bot) = (&v[..m], &v[m..]);
    let new_top = p.s.mul_vec(top);
    let mut new_bot = p.r.mul_vec(top);
    let qb = p.q.mul_vec(bot);
    for (a, b) in new_bot.iter_mut().zip(&qb) {
        *a += b;
    }
    for (a, c) in new_bot.iter_mut().zip(&p.c) {
        *a += c;
    }
    let mut out = new_top;
    out.extend(new_bot);
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnessReport {
    /// Dynamical side: strictly growing running minimum of `Delta` across
    /// the two halves of the schedule, by at least the slack factor.
    pub dyn_diverging: bool,
    /// `Delta` is exactly zero somewhere (rational pair through a lattice
    /// point).
    pub dyn_hits_zero: bool,
    /// Diophantine side: dyadic-shell badness minima grow across the two
    /// halves by at least the slack factor.
    pub dioph_growing: bool,
    /// The badness functional hits exact zero in range.
    pub dioph_hits_zero: bool,
    /// Strong opposite-direction evidence (a calibration signal).
    pub contradiction: bool,
    pub delta_samples: Vec<(String, f64)>,
    pub shell_samples: Vec<(u64, f64)>,
}

/// Joint evidence report: trajectory divergence against finite-range
/// badness growth, with a configured slack factor.
pub fn correspondence_harness(
    a: &[Vec<Rat>],
    b: &[Rat],
    t_schedule: &[Rat],
    qmax: u64,
    slack: &Rat,
) -> Result<HarnessReport, FlowError> {
    assert!(slack >= &Rat::one());
    let grid = make_grid(a, b);
    let traj = trajectory(&grid, t_schedule)?;
    let half = traj.samples.len().div_ceil(2);
    let min_of = |xs: &[TrajectorySample]| -> MonoVal {
        xs.iter().map(|s| s.delta.clone()).min().expect("nonempty half")
    };
    let h1 = min_of(&traj.samples[..half]);
    let h2 = min_of(&traj.samples[half..]);
    let dyn_hits_zero = traj.samples.iter().any(|s| s.delta.is_zero());
    let dyn_diverging =
        !h1.is_zero() && h2.cmp_exact(&h1.scale(slack)) != Ordering::Less;

    let m = a.len();
    let qa = crate::exact::quad::QuadMat::from_rat_rows(a.to_vec());
    let qb: Vec<crate::exact::quad::Quad> =
        b.iter().cloned().map(crate::exact::quad::Quad::from_rat).collect();
    let pair = crate::dioph::AffinePair::new(qa, qb);
    let profile = crate::dioph::badness_profile(&pair, qmax);
    // Dyadic shells only.
    let dyadic: Vec<&(u64, crate::dioph::NormMin)> = profile
        .shell
        .iter()
        .filter(|(q, _)| q.is_power_of_two())
        .collect();
    let halfd = dyadic.len().div_ceil(2);
    let shell_min = |xs: &[&(u64, crate::dioph::NormMin)]| -> crate::exact::quad::Quad {
        xs.iter().map(|(_, nm)| nm.value_base.clone()).min().expect("nonempty shells")
    };
    let s1 = shell_min(&dyadic[..halfd]);
    let s2 = shell_min(&dyadic[halfd..]);
    let dioph_hits_zero = profile.envelope.last().map(|(_, nm)| nm.dist.is_zero()).unwrap_or(false);
    // value_base = (value)^m: compare with slack^m.
    let slack_m = crate::exact::rational::pow_i64(slack, m as i64);
    let dioph_growing = !s1.is_zero()
        && s2 >= &s1 * &crate::exact::quad::Quad::from_rat(slack_m);

    // Opposite directions: divergence evidence on one side with exact
    // collapse on the other.
    let contradiction = (dyn_diverging && dioph_hits_zero) || (dioph_growing && dyn_hits_zero);
    Ok(HarnessReport {
        dyn_diverging,
        dyn_hits_zero,
        dioph_growing,
        dioph_hits_zero,
        contradiction,
        delta_samples: traj
            .samples
            .iter()
            .map(|s| (format_rat(&s.t), s.delta.to_f64()))
            .collect(),
        shell_samples: dyadic.iter().map(|(q, nm)| (*q, nm.value_display)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::rat;

    fn half_shift_grid() -> Grid {
        // m=1, n=2, A = 0, b = 1/2: the grid Z^3 + (1/2, 0, 0).
        make_grid(&[vec![rat_int(0), rat_int(0)]], &[rat(1, 2)])
    }

    #[test]
    fn make_grid_shapes() {
        let g = half_shift_grid();
        assert_eq!(g.dim(), 3);
        assert_eq!(g.shift, vec![rat(1, 2), rat_int(0), rat_int(0)]);
        let g2 = make_grid(&[vec![rat(1, 3), rat(1, 3)]], &[rat(1, 2)]);
        assert_eq!(g2.basis.vectors()[1][0], rat(1, 3));
        // shift reduction puts coefficients in [0,1): b = 5/2 reduces to 1/2.
        let g3 = make_grid(&[vec![rat_int(0), rat_int(0)]], &[rat(5, 2)]);
        assert_eq!(g3.shift[0], rat(1, 2));
    }

    #[test]
    fn closed_form_half_shift() {
        // Delta = e^t / 2 with argmin (1/2, 0, 0); Delta_0 = e^{-t/2}.
        let g = half_shift_grid();
        for t in [rat_int(0), rat_int(1), rat_int(3), rat(7, 2), rat_int(20)] {
            let s = flow_delta(&g, &t).unwrap();
            assert_eq!(s.delta, MonoVal { coeff: rat(1, 2), exponent: t.clone() });
            assert_eq!(
                s.delta0,
                MonoVal { coeff: rat_int(1), exponent: -&t / rat_int(2) },
                "t = {t}"
            );
            assert_eq!(linalg::sup_norm(&s.delta_argmin), rat(1, 2));
        }
    }

    #[test]
    fn lattice_grid_is_zero_forever() {
        let g = make_grid(&[vec![rat_int(0), rat_int(0)]], &[rat_int(0)]);
        for t in [rat_int(0), rat_int(5)] {
            let s = flow_delta(&g, &t).unwrap();
            assert!(s.delta.is_zero());
            assert!(!s.delta0.is_zero());
        }
    }

    #[test]
    fn t_zero_matches_static_enumeration() {
        let g = make_grid(&[vec![rat(1, 3), rat(1, 3)]], &[rat(1, 2)]);
        let s = flow_delta(&g, &rat_int(0)).unwrap();
        let (st, _) = g.basis.shortest_grid_vector(&g.shift, Norm::Sup).unwrap();
        assert_eq!(MonoVal::rational(st.as_rat().unwrap()), s.delta);
        let (sv, _) = g.basis.shortest_vector(Norm::Sup).unwrap();
        assert_eq!(MonoVal::rational(sv.as_rat().unwrap()), s.delta0);
    }

    #[test]
    fn kronecker_grid_grows() {
        // A = (1/3, 1/3), b = 1/2: numerators are odd sixths, so
        // Delta >= e^t/6 and equals e^t/6 eventually.
        let g = make_grid(&[vec![rat(1, 3), rat(1, 3)]], &[rat(1, 2)]);
        let s = flow_delta(&g, &rat_int(6)).unwrap();
        assert_eq!(s.delta, MonoVal { coeff: rat(1, 6), exponent: rat_int(6) });
    }

    #[test]
    fn trajectory_envelopes() {
        let g = half_shift_grid();
        let sched: Vec<Rat> = (0..=6).map(rat_int).collect();
        let tr = trajectory(&g, &sched).unwrap();
        // Delta is increasing here, so the running min stays at t=0.
        assert_eq!(tr.delta_running_min.last().unwrap(), &MonoVal::rational(rat(1, 2)));
        // Delta_0 decreases, so the running max stays at t=0.
        assert_eq!(tr.delta0_running_max.last().unwrap(), &MonoVal::rational(rat_int(1)));
    }

    #[test]
    fn minima_and_domination() {
        let g = half_shift_grid();
        let sched: Vec<Rat> = vec![rat_int(0), rat_int(1), rat_int(4), rat_int(10)];
        let pts = prop_minima_check(&g, &sched).unwrap();
        for p in &pts {
            assert!(p.domination_ok, "domination at t={}", p.t);
            assert!(p.minkowski_ok, "second theorem at t={}", p.t);
        }
        // lambda_3 of a_t Z^3 is e^t (the expanding axis).
        assert_eq!(pts[3].lambda_last, MonoVal { coeff: rat_int(1), exponent: rat_int(10) });
    }

    #[test]
    fn minima_scaled_diagonal() {
        // diag(4, 1/2, 1/2) Z^3 (unimodular), m=1, n=2 at t=0: minima
        // (1/2, 1/2, 4), product 1, bound holds with lambda_3 = 4.
        let basis = LatticeBasis::new(vec![
            vec![rat_int(4), rat_int(0), rat_int(0)],
            vec![rat_int(0), rat(1, 2), rat_int(0)],
            vec![rat_int(0), rat_int(0), rat(1, 2)],
        ]);
        let g = Grid { m: 1, n: 2, basis, shift: vec![rat_int(0); 3] };
        let pts = prop_minima_check(&g, &[rat_int(0), rat_int(1)]).unwrap();
        assert!(pts.iter().all(|p| p.domination_ok && p.minkowski_ok));
        let d = build_decomp(&g.underlying()).unwrap();
        let m0 = d.minima_at(&rat_int(0), 3).unwrap();
        assert_eq!(m0[0].0, MonoVal::rational(rat(1, 2)));
        assert_eq!(m0[2].0, MonoVal::rational(rat_int(4)));
    }

    #[test]
    fn golden_surrogate_stays_fat_until_denominator() {
        // m = n = 1, A = 89/144, b = 0: Delta_0 along the flow stays above
        // e^{-t} * (CF floor) until the denominator scale.
        let g = make_grid(&[vec![rat(89, 144)]], &[rat_int(0)]);
        let sched: Vec<Rat> = (0..=4).map(rat_int).collect();
        let tr = trajectory(&g, &sched).unwrap();
        for s in &tr.samples {
            assert!(!s.delta0.is_zero());
            // Delta_0 >= 1/(2*144) e^{-t}-ish: just check positivity and
            // that the value does not collapse below the lattice floor.
            let floor = MonoVal { coeff: rat(1, 288), exponent: -s.t.clone() };
            assert!(s.delta0.cmp_exact(&floor) != Ordering::Less, "t = {}", s.t);
        }
    }

    #[test]
    fn conjugation_rates_and_bounds() {
        // m=1, n=2: R-block rate -(1 + 1/2) = -3/2, c rate -1/2.
        let p = PElement {
            s: RatMat::from_rows(vec![vec![rat_int(1)]]),
            r: RatMat::from_rows(vec![vec![rat_int(1)], vec![rat_int(0)]]),
            q: RatMat::identity(2),
            c: vec![rat_int(0), rat_int(1)],
        };
        let conj = p_conjugation(&p, 1, 2).unwrap();
        assert_eq!(conj.r_rate, rat(-3, 2));
        assert_eq!(conj.c_rate, rat(-1, 2));
        assert!(conj.instance_constant >= Rat::one());
        // identity conjugates to itself
        let id = PElement {
            s: RatMat::identity(1),
            r: RatMat::from_rows(vec![vec![rat_int(0)], vec![rat_int(0)]]),
            q: RatMat::identity(2),
            c: vec![rat_int(0), rat_int(0)],
        };
        let cid = p_conjugation(&id, 1, 2).unwrap();
        assert_eq!(cid.op_bound, Rat::one());
        // norm equivalence on a grid
        let g = half_shift_grid();
        let sched: Vec<Rat> = vec![rat_int(0), rat_int(2), rat_int(5)];
        assert!(verify_conjugation_bound(&p, &g, &sched).unwrap());
        // block-shape errors
        let bad = PElement {
            s: RatMat::from_rows(vec![vec![rat_int(2)]]),
            r: RatMat::from_rows(vec![vec![rat_int(0)], vec![rat_int(0)]]),
            q: RatMat::identity(2),
            c: vec![rat_int(0), rat_int(0)],
        };
        assert!(matches!(p_conjugation(&bad, 1, 2), Err(FlowError::BlockShapeError(_))));
    }

    #[test]
    fn shift_reduction_invariance() {
        // Shifting b by an integer vector leaves the whole trajectory
        // unchanged (canonical reduction).
        let g1 = make_grid(&[vec![rat(1, 3), rat(1, 3)]], &[rat(1, 2)]);
        let g2 = make_grid(&[vec![rat(1, 3), rat(1, 3)]], &[rat(7, 2)]);
        for t in [rat_int(0), rat_int(2)] {
            let a = flow_delta(&g1, &t).unwrap();
            let b = flow_delta(&g2, &t).unwrap();
            assert_eq!(a.delta, b.delta);
        }
    }

    #[test]
    fn harness_fixture_directions() {
        let slack = rat_int(2);
        let ts: Vec<Rat> = (0..=8).map(rat_int).collect();
        // (0, 1/2): both sides grow.
        let rep = correspondence_harness(
            &[vec![rat_int(0), rat_int(0)]],
            &[rat(1, 2)],
            &ts,
            64,
            &slack,
        )
        .unwrap();
        assert!(rep.dyn_diverging);
        assert!(rep.dioph_growing);
        assert!(!rep.contradiction);
        // rational solvable pair: both collapse to zero.
        let rep0 = correspondence_harness(
            &[vec![rat(1, 3), rat(1, 3)]],
            &[rat(1, 3)],
            &ts,
            64,
            &slack,
        )
        .unwrap();
        assert!(rep0.dyn_hits_zero);
        assert!(rep0.dioph_hits_zero);
        assert!(!rep0.contradiction);
        // golden-surrogate homogeneous control: no divergence, no growth.
        let repg = correspondence_harness(&[vec![rat(89, 144)]], &[rat_int(0)], &ts, 64, &slack)
            .unwrap();
        assert!(repg.dyn_hits_zero); // shift is zero: Delta = 0 exactly
        assert!(!repg.dioph_growing);
        assert!(!repg.contradiction);
    }

    use crate::exact::rational::rat_int;
}
