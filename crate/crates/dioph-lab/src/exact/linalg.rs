//! Small exact linear algebra over the rationals and the integers.
//!
//! Dimensions in this crate are tiny (at most five), so plain Gaussian
//! elimination over `Rat` and gcd-based column echelon forms over `BigInt`
//! are the right tools.

use super::rational::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type RatVec = Vec<Rat>;

#[derive(Clone, Debug, PartialEq)]
pub struct RatMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zero(rows: usize, cols: usize) -> Self {
        RatMat { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c));
        RatMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn at(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> RatMat {
        let mut t = RatMat::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *t.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rat]) -> RatVec {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.cols {
                    acc += self.at(i, j) * &v[j];
                }
                acc
            })
            .collect()
    }

    pub fn mul_mat(&self, other: &RatMat) -> RatMat {
        assert_eq!(self.cols, other.rows);
        let mut out = RatMat::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    acc += self.at(i, k) * other.at(k, j);
                }
                *out.at_mut(i, j) = acc;
            }
        }
        out
    }

    pub fn det(&self) -> Rat {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !m.at(r, col).is_zero());
            let Some(p) = pivot else {
                return Rat::zero();
            };
            if p != col {
                for j in 0..n {
                    let a = m.at(p, j).clone();
                    let b = m.at(col, j).clone();
                    *m.at_mut(p, j) = b;
                    *m.at_mut(col, j) = a;
                }
                det = -det;
            }
            let pv = m.at(col, col).clone();
            det *= &pv;
            for r in col + 1..n {
                let f = m.at(r, col) / &pv;
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let sub = &f * m.at(col, j);
                    *m.at_mut(r, j) -= sub;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let mut inv = RatMat::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !m.at(r, col).is_zero())?;
            if p != col {
                for j in 0..n {
                    m.data.swap(p * n + j, col * n + j);
                    inv.data.swap(p * n + j, col * n + j);
                }
            }
            let pv = m.at(col, col).clone();
            for j in 0..n {
                *m.at_mut(col, j) /= &pv;
                *inv.at_mut(col, j) /= &pv;
            }
            for r in 0..n {
                if r == col || m.at(r, col).is_zero() {
                    continue;
                }
                let f = m.at(r, col).clone();
                for j in 0..n {
                    let a = &f * m.at(col, j);
                    *m.at_mut(r, j) -= a;
                    let b = &f * inv.at(col, j);
                    *inv.at_mut(r, j) -= b;
                }
            }
        }
        Some(inv)
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(p) = (rank..self.rows).find(|&r| !m.at(r, col).is_zero()) else {
                continue;
            };
            if p != rank {
                for j in 0..self.cols {
                    m.data.swap(p * self.cols + j, rank * self.cols + j);
                }
            }
            let pv = m.at(rank, col).clone();
            for r in rank + 1..self.rows {
                let f = m.at(r, col) / &pv;
                if f.is_zero() {
                    continue;
                }
                for j in col..self.cols {
                    let sub = &f * m.at(rank, j);
                    *m.at_mut(r, j) -= sub;
                }
            }
            rank += 1;
            if rank == self.rows {
                break;
            }
        }
        rank
    }

    pub fn solve(&self, rhs: &[Rat]) -> Option<RatVec> {
        Some(self.inverse()?.mul_vec(rhs))
    }
}

pub fn dot(u: &[Rat], v: &[Rat]) -> Rat {
    assert_eq!(u.len(), v.len());
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm_sq(v: &[Rat]) -> Rat {
    dot(v, v)
}

pub fn sup_norm(v: &[Rat]) -> Rat {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rat::zero)
}

pub fn vec_add(u: &[Rat], v: &[Rat]) -> RatVec {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

pub fn vec_sub(u: &[Rat], v: &[Rat]) -> RatVec {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

pub fn vec_scale(v: &[Rat], c: &Rat) -> RatVec {
    v.iter().map(|x| x * c).collect()
}

/// Componentwise distance to the nearest integer vector, sup norm.
pub fn dist_to_int_sup(v: &[Rat]) -> Rat {
    v.iter().map(super::rational::dist_to_int).max().unwrap_or_else(Rat::zero)
}

/// Squared Euclidean distance to the nearest integer vector.
pub fn dist_to_int_euclid_sq(v: &[Rat]) -> Rat {
    v.iter()
        .map(|x| {
            let d = super::rational::dist_to_int(x);
            &d * &d
        })
        .sum()
}

/// Column echelon form over the integers via unimodular column operations.
/// Returns `(echelon, transform, rank)` with `input * transform = echelon`;
/// the kernel of the input over `Z^cols` is spanned by the transform
/// columns beyond `rank`.
pub fn col_echelon_with_transform(
    mat: &[Vec<BigInt>],
) -> (Vec<Vec<BigInt>>, Vec<Vec<BigInt>>, usize) {
    let rows = mat.len();
    let cols = if rows > 0 { mat[0].len() } else { 0 };
    let mut a: Vec<Vec<BigInt>> = mat.to_vec();
    // u is cols x cols, tracked as columns: u[j] is the j-th column.
    let mut u: Vec<Vec<BigInt>> = (0..cols)
        .map(|j| (0..cols).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let col_swap = |a: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        u.swap(i, j);
    };
    // column j -= f * column k
    let col_sub = |a: &mut Vec<Vec<BigInt>>, u: &mut Vec<Vec<BigInt>>, j: usize, k: usize, f: &BigInt| {
        for row in a.iter_mut() {
            let sub = f * &row[k];
            row[j] -= sub;
        }
        for i in 0..u[j].len() {
            let sub = f * &u[k][i];
            u[j][i] -= sub;
        }
    };
    let mut pivot = 0usize;
    for r in 0..rows {
        if pivot == cols {
            break;
        }
        loop {
            // Find the column with the smallest nonzero entry in row r.
            let mut best: Option<usize> = None;
            for j in pivot..cols {
                if !a[r][j].is_zero()
                    && best.map_or(true, |b| a[r][j].magnitude() < a[r][b].magnitude())
                {
                    best = Some(j);
                }
            }
            let Some(b) = best else {
                break;
            };
            col_swap(&mut a, &mut u, pivot, b);
            let mut done = true;
            for j in pivot + 1..cols {
                if a[r][j].is_zero() {
                    continue;
                }
                let f = a[r][j].div_floor(&a[r][pivot]);
                col_sub(&mut a, &mut u, j, pivot, &f);
                if !a[r][j].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if pivot < cols && !a[r][pivot].is_zero() {
            if a[r][pivot].is_negative() {
                for row in a.iter_mut() {
                    row[pivot] = -row[pivot].clone();
                }
                for x in u[pivot].iter_mut() {
                    *x = -x.clone();
                }
            }
            pivot += 1;
        }
    }
    (a, u, pivot)
}

/// Basis of the integer kernel `{c in Z^cols : M c = 0}` of a rational
/// matrix. The result is saturated (a basis of the full kernel lattice).
pub fn int_kernel(mat: &RatMat) -> Vec<Vec<BigInt>> {
    // Clear denominators row by row; the kernel is unchanged.
    let mut int_rows: Vec<Vec<BigInt>> = Vec::with_capacity(mat.rows);
    for i in 0..mat.rows {
        let mut l = BigInt::one();
        for j in 0..mat.cols {
            l = l.lcm(mat.at(i, j).denom());
        }
        int_rows.push(
            (0..mat.cols)
                .map(|j| {
                    let x = mat.at(i, j) * Rat::from_integer(l.clone());
                    x.to_integer()
                })
                .collect(),
        );
    }
    let (_, u, rank) = col_echelon_with_transform(&int_rows);
    (rank..mat.cols).map(|j| u[j].clone()).collect()
}

/// Extended gcd over a vector: returns `(g, u)` with `sum u_i c_i = g`,
/// `g = gcd(c) >= 0`.
pub fn egcd_vector(c: &[BigInt]) -> (BigInt, Vec<BigInt>) {
    assert!(!c.is_empty());
    let mut g = c[0].clone();
    let mut u = vec![BigInt::zero(); c.len()];
    u[0] = BigInt::one();
    for i in 1..c.len() {
        let ext = g.extended_gcd(&c[i]);
        for x in u.iter_mut().take(i) {
            *x *= &ext.x;
        }
        u[i] = ext.y;
        g = ext.gcd;
    }
    if g.is_negative() {
        g = -g;
        for x in u.iter_mut() {
            *x = -x.clone();
        }
    }
    (g, u)
}

/// Complete a primitive integer vector `c` (gcd one) to a basis of `Z^n`
/// whose first element is `c`: returns the remaining `n - 1` vectors.
/// They span the kernel lattice of a dual form `u` with `u . c = 1`, so
/// `Z^n = Z c (+) span`.
pub fn complete_primitive(c: &[BigInt]) -> Vec<Vec<BigInt>> {
    let (g, u) = egcd_vector(c);
    assert!(g == BigInt::one(), "vector must be primitive");
    let urow = RatMat::from_rows(vec![u.iter().map(|x| Rat::from_integer(x.clone())).collect()]);
    int_kernel(&urow)
}

/// Basis (as columns) of the image lattice `M Z^cols` of a rational matrix
/// whose image is discrete, i.e. `M` has a global common denominator.
pub fn image_basis(mat: &RatMat) -> Vec<RatVec> {
    let mut l = BigInt::one();
    for x in 0..mat.rows {
        for y in 0..mat.cols {
            l = l.lcm(mat.at(x, y).denom());
        }
    }
    let int_rows: Vec<Vec<BigInt>> = (0..mat.rows)
        .map(|i| {
            (0..mat.cols)
                .map(|j| (mat.at(i, j) * Rat::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect();
    let (ech, _, rank) = col_echelon_with_transform(&int_rows);
    (0..rank)
        .map(|j| {
            (0..mat.rows)
                .map(|i| Rat::new(ech[i][j].clone(), l.clone()))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{rat, rat_int};

    fn m(rows: &[&[i64]]) -> RatMat {
        RatMat::from_rows(rows.iter().map(|r| r.iter().map(|&x| rat_int(x)).collect()).collect())
    }

    #[test]
    fn det_and_inverse() {
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.det(), rat_int(1));
        let inv = a.inverse().unwrap();
        assert_eq!(a.mul_mat(&inv), RatMat::identity(2));
        let s = m(&[&[1, 2], &[2, 4]]);
        assert_eq!(s.det(), rat_int(0));
        assert!(s.inverse().is_none());
        assert_eq!(s.rank(), 1);
    }

    #[test]
    fn kernel_of_rational_row() {
        // kernel of (1/3, 1/3) over Z^2: spanned by (1,-1) and (3,0)-ish;
        // must have rank 1? No: one rational equation c1/3 + c2/3 = 0 has
        // rank-1 kernel {c1 = -c2}.
        let a = RatMat::from_rows(vec![vec![rat(1, 3), rat(1, 3)]]);
        let k = int_kernel(&a);
        assert_eq!(k.len(), 1);
        assert_eq!(&k[0][0] + &k[0][1], BigInt::zero());
        assert_eq!(k[0][0].abs(), BigInt::one());
    }

    #[test]
    fn kernel_of_congruence() {
        // kernel of c1/3 (i.e. multiples of 3) together with free c2.
        let a = RatMat::from_rows(vec![vec![rat(1, 3), rat_int(0)]]);
        let mut k = int_kernel(&a);
        assert_eq!(k.len(), 1);
        k[0].iter_mut().for_each(|x| *x = x.abs());
        assert_eq!(k[0], vec![BigInt::zero(), BigInt::one()]);
    }

    #[test]
    fn image_basis_of_scaled_rows() {
        // image of the single row (1/2, 1/3) on Z^2 is (1/6)Z.
        let a = RatMat::from_rows(vec![vec![rat(1, 2), rat(1, 3)]]);
        let b = image_basis(&a);
        assert_eq!(b.len(), 1);
        assert_eq!(b[0][0].abs(), rat(1, 6));
    }

    #[test]
    fn dist_helpers() {
        assert_eq!(dist_to_int_sup(&[rat(7, 10), rat(2, 10)]), rat(3, 10));
        assert_eq!(dist_to_int_euclid_sq(&[rat(1, 2), rat(1, 2)]), rat(1, 2));
    }
}
