//! Farey lattices and the self-similar structures built from them.
//!
//! Specialized to one linear form in `n >= 2` variables. A primitive
//! integer point `x = (p, q)` with `q > 0` has height `|x| = q` and base
//! point `p/q`; its Farey lattice is `Z^n + Z(p/q)`, of covolume `1/q`.
//! Children of `x` live over primitive directions `alpha` of that lattice
//! inside a cone around the densest hyperplane, with heights confined to
//! an explicit interval. Everything here is exact: Euclidean quantities
//! are carried as squared rationals, normalized minima as formal roots.

pub mod cone;
pub mod children;
pub mod s1;
pub mod tree;

use crate::exact::lattice::{LatticeBasis, Norm};
use crate::exact::linalg::{self, RatVec};
use crate::exact::powcmp::Root;
use crate::exact::rational::{gcd_all, Rat};
use crate::exact::ExactError;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FareyError {
    #[error("empty restricted children set at node (level {level}, height {height})")]
    EmptyLevel { level: usize, height: u64 },
    #[error("chain certificate failed at path index {index}: {what}")]
    CertificateFailure { index: usize, what: String },
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// Primitive integer point `(p, q)`, `q > 0`, `gcd(p_1, .., p_n, q) = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QPoint {
    pub p: Vec<i64>,
    pub q: u64,
}

impl QPoint {
    pub fn new(p: Vec<i64>, q: u64) -> Self {
        assert!(q > 0, "height must be positive");
        let mut all: Vec<BigInt> = p.iter().map(|&x| BigInt::from(x)).collect();
        all.push(BigInt::from(q));
        assert!(gcd_all(&all) == BigInt::one(), "point must be primitive");
        QPoint { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// Base point `p / q`.
    pub fn base(&self) -> RatVec {
        self.p.iter().map(|&x| Rat::new(BigInt::from(x), BigInt::from(self.q))).collect()
    }
}

/// `|x ^ y| = |x| |y| ||p/q - p'/q'||_2`, as an exact square root.
pub fn wedge(x: &QPoint, y: &QPoint) -> Root {
    assert_eq!(x.dim(), y.dim());
    let d = linalg::vec_sub(&x.base(), &y.base());
    let sq = linalg::norm_sq(&d);
    let scale = Rat::from_integer(BigInt::from(x.q) * BigInt::from(y.q));
    Root::sqrt(sq * &scale * &scale)
}

/// The Farey lattice of a point, with cached Euclidean minima.
#[derive(Clone, Debug)]
pub struct FareyLattice {
    pub point: QPoint,
    pub basis: LatticeBasis,
    /// Coefficient of the `p/q` generator in each basis vector; recovers
    /// the fiber index of any lattice point from its basis coordinates.
    pub xhat_coeff: Vec<BigInt>,
    /// Euclidean successive minima with attaining vectors.
    pub minima: Vec<(Root, RatVec)>,
}

impl FareyLattice {
    /// `lambda_1(x)^2`, rational.
    pub fn lambda1_sq(&self) -> Rat {
        self.minima[0].0.base().clone()
    }

    /// Normalized minimum `|x|^{1/n} lambda_i`, as a root of index `2n`.
    pub fn lambda_hat(&self, i: usize) -> Root {
        let n = self.point.dim() as u32;
        let q2 = Rat::from_integer(BigInt::from(self.point.q).pow(2));
        let base = q2 * self.minima[i].0.base().pow(n as i32);
        Root::new(base, 2 * n)
    }

    /// Ball radius squared: `(lambda_1 / (2 q))^2`.
    pub fn ball_radius_sq(&self) -> Rat {
        self.lambda1_sq() / Rat::from_integer(BigInt::from(4u64) * BigInt::from(self.point.q).pow(2))
    }

    /// Fiber index of a lattice point given in basis coordinates: the
    /// coefficient `j` with `v = a + j p/q`, `a` integral.
    pub fn fiber_index(&self, coeffs: &[BigInt]) -> BigInt {
        coeffs.iter().zip(&self.xhat_coeff).map(|(c, h)| c * h).sum()
    }
}

/// Build the Farey lattice `Z^n + Z(p/q)` with an exact basis, covolume
/// `1/q`, and cached minima.
pub fn farey_lattice(x: &QPoint) -> Result<FareyLattice, ExactError> {
    let n = x.dim();
    // q * lattice = q Z^n + Z p: column echelon of [qI | p].
    let mut gen_rows: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for i in 0..n {
        let mut row = vec![BigInt::zero(); n + 1];
        row[i] = BigInt::from(x.q);
        row[n] = BigInt::from(x.p[i]);
        gen_rows.push(row);
    }
    let (ech, transform, rank) = linalg::col_echelon_with_transform(&gen_rows);
    assert_eq!(rank, n, "Farey lattice has full rank");
    let qrat = Rat::from_integer(BigInt::from(x.q));
    let mut vectors = Vec::with_capacity(n);
    let mut xhat_coeff = Vec::with_capacity(n);
    for j in 0..n {
        let v: RatVec =
            (0..n).map(|i| Rat::from_integer(ech[i][j].clone()) / &qrat).collect();
        vectors.push(v);
        // Generator n is p itself: p = q * (p/q), so its coefficient in
        // units of p/q is q * transform[n][j] ... the echelon columns are
        // integer combos of the n+1 generators {q e_i, p}; dividing by q
        // turns them into combos of {e_i, p/q} with the p-coefficient
        // unchanged.
        xhat_coeff.push(transform[j][n].clone());
    }
    let basis = LatticeBasis::new(vectors);
    debug_assert_eq!(basis.covolume(), Root::rational(Rat::one() / &qrat));
    let minima = basis.successive_minima(Norm::Euclid)?;
    Ok(FareyLattice { point: x.clone(), basis, xhat_coeff, minima })
}

/// `lambda_1` of the projection of the lattice orthogonal to a primitive
/// lattice direction `alpha` (given by its basis coordinates), normalized
/// by the covolume: the result is a root of index `2(n-1)`.
///
/// The projection has covolume `1 / (q ||alpha||_2)`; the normalization
/// multiplies `lambda_1(alpha)` by `(q ||alpha||_2)^{1/(n-1)}`, making the
/// value scale-free. For `n = 2` it is identically one.
pub fn lambda1_perp(lat: &FareyLattice, alpha_coeffs: &[BigInt]) -> Result<Root, ExactError> {
    let n = lat.point.dim();
    assert!(n >= 2);
    assert!(gcd_all(alpha_coeffs) == BigInt::one(), "alpha must be primitive");
    let alpha = lat.basis.point(alpha_coeffs);
    let alpha_sq = linalg::norm_sq(&alpha);
    // Complete alpha to a basis of the lattice, project the rest.
    let rest = linalg::complete_primitive(alpha_coeffs);
    let mut proj_vecs = Vec::with_capacity(n - 1);
    for c in &rest {
        let v = lat.basis.point(c);
        let t = linalg::dot(&v, &alpha) / &alpha_sq;
        proj_vecs.push(linalg::vec_sub(&v, &linalg::vec_scale(&alpha, &t)));
    }
    let proj = LatticeBasis::new(proj_vecs);
    let (lam1, _) = proj.shortest_vector(Norm::Euclid)?;
    // normalized^{2(n-1)} = (q^2 ||alpha||^2) * (lambda_1^2)^{n-1}
    let q2 = Rat::from_integer(BigInt::from(lat.point.q).pow(2));
    let base = q2 * &alpha_sq * lam1.base().pow((n - 1) as i32);
    Ok(Root::new(base, 2 * (n as u32 - 1)))
}

/// Covolume of the orthogonal projection lattice, for cross-checks:
/// equals `1 / (q ||alpha||_2)`.
pub fn perp_covolume(lat: &FareyLattice, alpha_coeffs: &[BigInt]) -> Root {
    let n = lat.point.dim();
    let alpha = lat.basis.point(alpha_coeffs);
    let alpha_sq = linalg::norm_sq(&alpha);
    let rest = linalg::complete_primitive(alpha_coeffs);
    let mut proj_vecs = Vec::with_capacity(n - 1);
    for c in &rest {
        let v = lat.basis.point(c);
        let t = linalg::dot(&v, &alpha) / &alpha_sq;
        proj_vecs.push(linalg::vec_sub(&v, &linalg::vec_scale(&alpha, &t)));
    }
    LatticeBasis::new(proj_vecs).covolume()
}
