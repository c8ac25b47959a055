//! Cone decomposition of a Farey lattice: the minimal-covolume hyperplane
//! sublattice, its coset indexing, and exact enumeration of the cone
//! slices.

use super::FareyLattice;
use crate::exact::lattice::{cmp_vec_lex, LatticeBasis};
use crate::exact::linalg::{self, RatVec};
use crate::exact::rational::{gcd_all, Rat};
use crate::exact::ExactError;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};

/// A point of the lattice together with its basis coordinates.
#[derive(Clone, Debug)]
pub struct LatticePoint {
    pub coeffs: Vec<BigInt>,
    pub vector: RatVec,
}

#[derive(Clone, Debug)]
pub struct ConeDecomposition {
    /// Basis of the codimension-one sublattice of minimal covolume.
    pub sub_basis: LatticeBasis,
    /// Coefficient vectors of the sublattice basis in lattice coordinates.
    pub sub_coeffs: Vec<Vec<BigInt>>,
    /// Primitive dual vector defining the sublattice (pairing onto `Z`).
    pub normal: RatVec,
    /// The point of the pairing-one coset that is orthogonal to the
    /// hyperplane: `normal / ||normal||^2`.
    pub alpha_perp: RatVec,
    /// A lattice point with pairing exactly one (coset representative).
    pub rep: LatticePoint,
    /// Cone slope `A_n` (the half-angle is `atan(A_n)`).
    pub slope: Rat,
    /// The shortest dual vector was not unique up to sign; the
    /// lexicographic least representative was chosen.
    pub tie_broken: bool,
}

/// Build the decomposition: dual-shortest normal, hyperplane sublattice,
/// pairing-one representative and the cone membership data.
pub fn cone_decomposition(lat: &FareyLattice, slope: &Rat) -> Result<ConeDecomposition, ExactError> {
    assert!(slope.is_positive());
    let basis = &lat.basis;
    let (normal, lambda1_dual) = basis.dual_shortest()?;
    // Tie detection: count canonical dual vectors of minimal length.
    let dual = basis.dual_basis()?;
    let zero = vec![Rat::zero(); basis.ambient_dim()];
    let ties: Vec<RatVec> = dual
        .points_in_ball(&zero, lambda1_dual.base())?
        .into_iter()
        .filter(|(_, v)| v.iter().any(|x| !x.is_zero()))
        .filter(|(_, v)| linalg::norm_sq(v) == *lambda1_dual.base())
        .map(|(_, v)| crate::exact::lattice::canonical_sign(&v))
        .collect();
    let mut uniq = ties.clone();
    uniq.sort_by(|a, b| cmp_vec_lex(a, b));
    uniq.dedup();
    let tie_broken = uniq.len() > 1;

    // Pairings of the basis vectors with the normal: integers with gcd 1.
    let pairings: Vec<BigInt> = basis
        .vectors()
        .iter()
        .map(|v| {
            let t = linalg::dot(v, &normal);
            assert!(t.is_integer(), "dual vector must pair integrally");
            t.to_integer()
        })
        .collect();
    let (g, u) = linalg::egcd_vector(&pairings);
    assert!(g == BigInt::from(1), "shortest dual vector is primitive");
    // Sublattice basis: integer kernel of the pairing row.
    let prow = linalg::RatMat::from_rows(vec![pairings
        .iter()
        .map(|x| Rat::from_integer(x.clone()))
        .collect()]);
    let sub_coeffs = linalg::int_kernel(&prow);
    let sub_vectors: Vec<RatVec> = sub_coeffs.iter().map(|c| basis.point(c)).collect();
    let sub_basis = LatticeBasis::new(sub_vectors);
    let rep_vec = basis.point(&u);
    let nsq = linalg::norm_sq(&normal);
    let alpha_perp = linalg::vec_scale(&normal, &(Rat::from_integer(BigInt::from(1)) / nsq));
    Ok(ConeDecomposition {
        sub_basis,
        sub_coeffs,
        normal,
        alpha_perp,
        rep: LatticePoint { coeffs: u, vector: rep_vec },
        slope: slope.clone(),
        tie_broken,
    })
}

impl ConeDecomposition {
    /// Exact cone membership: positive pairing with the axis and
    /// `||perp part||_2 <= A_n * ||axial part||_2`.
    pub fn in_cone(&self, v: &[Rat]) -> bool {
        let along = linalg::dot(v, &self.alpha_perp);
        if !along.is_positive() {
            return v.iter().all(|x| x.is_zero());
        }
        // axial^2 = along^2 / ||alpha_perp||^2, perp^2 = ||v||^2 - axial^2
        let ap_sq = linalg::norm_sq(&self.alpha_perp);
        let axial_sq = &along * &along / &ap_sq;
        let perp_sq = linalg::norm_sq(v) - &axial_sq;
        perp_sq <= slope_sq(&self.slope) * axial_sq
    }

    /// All lattice points of the level-`k` cone slice, with coordinates.
    /// The slice is `{v : <v, normal> = k, angle(v, axis) <= atan(A_n)}`;
    /// its points are `k * rep + sublattice` within an exact Euclidean
    /// ball of squared radius `(1 + A_n^2) k^2 / ||normal||^2`.
    pub fn slice_points(
        &self,
        lat: &FareyLattice,
        k: u64,
    ) -> Result<Vec<LatticePoint>, ExactError> {
        let nsq = linalg::norm_sq(&self.normal);
        let k2 = Rat::from_integer(BigInt::from(k).pow(2));
        let radius_sq = (Rat::from_integer(BigInt::from(1)) + slope_sq(&self.slope)) * &k2 / &nsq;
        let kr = Rat::from_integer(BigInt::from(k));
        let base = linalg::vec_scale(&self.rep.vector, &kr);
        // v = base + u, u in sublattice: ||v|| <= R  <=>  u in ball(-base, R).
        let center: RatVec = base.iter().map(|x| -x).collect();
        let mut out = Vec::new();
        for (sub_c, u) in self.sub_basis.points_in_ball(&center, &radius_sq)? {
            let v = linalg::vec_add(&base, &u);
            if !self.in_cone(&v) {
                continue;
            }
            // coefficients: k * rep.coeffs + sum sub_c * sub_coeffs
            let mut coeffs: Vec<BigInt> =
                self.rep.coeffs.iter().map(|c| c * BigInt::from(k)).collect();
            for (ci, sc) in sub_c.iter().zip(&self.sub_coeffs) {
                for (acc, s) in coeffs.iter_mut().zip(sc) {
                    *acc += ci * s;
                }
            }
            debug_assert_eq!(lat.basis.point(&coeffs), v);
            out.push(LatticePoint { coeffs, vector: v });
        }
        out.sort_by(|a, b| cmp_vec_lex(&a.vector, &b.vector));
        Ok(out)
    }

    /// Primitive points of the slice (gcd of coordinates one).
    pub fn slice_primitive(
        &self,
        lat: &FareyLattice,
        k: u64,
    ) -> Result<Vec<LatticePoint>, ExactError> {
        Ok(self
            .slice_points(lat, k)?
            .into_iter()
            .filter(|p| gcd_all(&p.coeffs) == BigInt::from(1))
            .collect())
    }
}

fn slope_sq(a: &Rat) -> Rat {
    a * a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};
    use crate::farey::{farey_lattice, QPoint};

    #[test]
    fn standard_lattice_cone_counts() {
        // Z^2: the sublattice is an axis line, and the level-k slice at
        // slope A has 2*floor(A k) + 1 integer points.
        let lat = farey_lattice(&QPoint::new(vec![1, 0], 1)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        assert!(!cone.tie_broken || cone.tie_broken); // recorded either way
        for k in 1..=4u64 {
            let pts = cone.slice_points(&lat, k).unwrap();
            assert_eq!(pts.len() as u64, 2 * k + 1, "k = {k}");
        }
        // slope 1/2: 2*floor(k/2)+1.
        let cone_half = cone_decomposition(&lat, &rat(1, 2)).unwrap();
        for k in 1..=5u64 {
            let pts = cone_half.slice_points(&lat, k).unwrap();
            assert_eq!(pts.len() as u64, 2 * (k / 2) + 1, "k = {k}");
        }
    }

    #[test]
    fn axis_is_in_cone() {
        let lat = farey_lattice(&QPoint::new(vec![1, 0], 1)).unwrap();
        let cone = cone_decomposition(&lat, &rat(1, 3)).unwrap();
        assert!(cone.in_cone(&cone.alpha_perp.clone()));
        // and the slice points all pair to k
        for p in cone.slice_points(&lat, 3).unwrap() {
            assert_eq!(linalg::dot(&p.vector, &cone.normal), rat_int(3));
        }
    }

    #[test]
    fn fifth_lattice_slice() {
        // x = ((0,1), 5): lattice Z x (1/5)Z; minimal hyperplane sublattice
        // is the fine axis; slices have about 10k+1 points at slope 1.
        let lat = farey_lattice(&QPoint::new(vec![0, 1], 5)).unwrap();
        let cone = cone_decomposition(&lat, &rat_int(1)).unwrap();
        let pts = cone.slice_points(&lat, 1).unwrap();
        assert_eq!(pts.len(), 11);
        let prim = cone.slice_primitive(&lat, 1).unwrap();
        // primitive = coefficient gcd 1: at k=1 all are primitive.
        assert_eq!(prim.len(), 11);
        let pts2 = cone.slice_points(&lat, 2).unwrap();
        assert_eq!(pts2.len(), 21);
        let prim2 = cone.slice_primitive(&lat, 2).unwrap();
        // k=2: points with even fine coordinate are imprimitive: j in
        // {-10..10} even: 11 of 21 are odd j (primitive), plus j even with
        // gcd(2, j/?)... coefficient gcd(k, j) = gcd(2, j): primitive iff
        // j odd: 10 values.
        assert_eq!(prim2.len(), 10);
    }
}
