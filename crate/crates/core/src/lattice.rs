//! Integer arithmetic on the rank-2 translation lattice.
//!
//! Lattice elements are written in the fixed basis of the two generating
//! translations, so everything here is exact `i64` arithmetic. Sublattices
//! are described by 2x2 integer matrices acting on columns.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Neg, Sub};

/// Element of the translation lattice, as integer coefficients of the two
/// generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LatticeVector {
    pub m: i64,
    pub k: i64,
}

impl LatticeVector {
    pub const ZERO: LatticeVector = LatticeVector { m: 0, k: 0 };

    pub fn new(m: i64, k: i64) -> Self {
        LatticeVector { m, k }
    }

    pub fn is_zero(&self) -> bool {
        self.m == 0 && self.k == 0
    }

    /// A lattice element is primitive when it is not a proper integer multiple
    /// of another element; the zero vector is not primitive.
    pub fn is_primitive(&self) -> bool {
        gcd(self.m.unsigned_abs(), self.k.unsigned_abs()) == 1
    }

    /// True if the vector is strictly positive in lexicographic order on
    /// `(m, k)`.
    pub fn is_lex_positive(&self) -> bool {
        self.m > 0 || (self.m == 0 && self.k > 0)
    }

    /// The lexicographically positive representative of `{v, -v}`. Zero maps
    /// to zero.
    pub fn lex_canonical(&self) -> LatticeVector {
        if self.is_lex_positive() || self.is_zero() {
            *self
        } else {
            -*self
        }
    }

    /// Determinant of the 2x2 matrix with columns `self` and `other`.
    pub fn det_with(&self, other: &LatticeVector) -> i64 {
        self.m * other.k - self.k * other.m
    }
}

impl Add for LatticeVector {
    type Output = LatticeVector;
    fn add(self, rhs: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.m + rhs.m, self.k + rhs.k)
    }
}

impl Sub for LatticeVector {
    type Output = LatticeVector;
    fn sub(self, rhs: LatticeVector) -> LatticeVector {
        LatticeVector::new(self.m - rhs.m, self.k - rhs.k)
    }
}

impl Neg for LatticeVector {
    type Output = LatticeVector;
    fn neg(self) -> LatticeVector {
        LatticeVector::new(-self.m, -self.k)
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m, self.k)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// 2x2 integer matrix, stored row-major. Acting on column vectors, its
/// columns are the images of the two lattice generators, so the image
/// `M * Z^2` is the sublattice spanned by the columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeMatrix {
    pub rows: [[i64; 2]; 2],
}

impl LatticeMatrix {
    pub fn new(m00: i64, m01: i64, m10: i64, m11: i64) -> Self {
        LatticeMatrix {
            rows: [[m00, m01], [m10, m11]],
        }
    }

    pub fn identity() -> Self {
        LatticeMatrix::new(1, 0, 0, 1)
    }

    pub fn diagonal(d0: i64, d1: i64) -> Self {
        LatticeMatrix::new(d0, 0, 0, d1)
    }

    pub fn from_columns(c0: LatticeVector, c1: LatticeVector) -> Self {
        LatticeMatrix::new(c0.m, c1.m, c0.k, c1.k)
    }

    pub fn det(&self) -> i64 {
        self.rows[0][0] * self.rows[1][1] - self.rows[0][1] * self.rows[1][0]
    }

    pub fn column(&self, j: usize) -> LatticeVector {
        LatticeVector::new(self.rows[0][j], self.rows[1][j])
    }

    /// Matrix-vector product on a column vector.
    pub fn apply(&self, v: LatticeVector) -> LatticeVector {
        LatticeVector::new(
            self.rows[0][0] * v.m + self.rows[0][1] * v.k,
            self.rows[1][0] * v.m + self.rows[1][1] * v.k,
        )
    }

    pub fn mul(&self, other: &LatticeMatrix) -> LatticeMatrix {
        let a = &self.rows;
        let b = &other.rows;
        LatticeMatrix::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    /// Exact solution of `self * x = v` over the integers, if one exists.
    pub fn solve(&self, v: LatticeVector) -> Option<LatticeVector> {
        let d = self.det();
        if d == 0 {
            return None;
        }
        // adjugate * v
        let num_m = self.rows[1][1] * v.m - self.rows[0][1] * v.k;
        let num_k = -self.rows[1][0] * v.m + self.rows[0][0] * v.k;
        if num_m % d != 0 || num_k % d != 0 {
            return None;
        }
        Some(LatticeVector::new(num_m / d, num_k / d))
    }

    /// True if `v` lies in the sublattice spanned by the columns.
    pub fn contains(&self, v: LatticeVector) -> bool {
        self.solve(v).is_some()
    }
}

/// Lower-triangular column Hermite form of a nonsingular integer matrix.
///
/// `h00 > 0`, `h11 > 0`, `0 <= h10 < h11`, and the column span equals the
/// span of the input. Used to enumerate and reduce cosets of the sublattice.
#[derive(Clone, Copy, Debug)]
pub struct HermiteForm {
    pub h00: i64,
    pub h10: i64,
    pub h11: i64,
}

impl HermiteForm {
    pub fn of(m: &LatticeMatrix) -> Option<HermiteForm> {
        if m.det() == 0 {
            return None;
        }
        let mut c0 = m.column(0);
        let mut c1 = m.column(1);
        // Clear the top entry of the second column by the extended Euclidean
        // algorithm on the first row.
        while c1.m != 0 {
            if c0.m == 0 {
                std::mem::swap(&mut c0, &mut c1);
                continue;
            }
            let q = c1.m.div_euclid(c0.m);
            c1 = c1 - LatticeVector::new(q * c0.m, q * c0.k);
            if c1.m != 0 {
                std::mem::swap(&mut c0, &mut c1);
            }
        }
        if c0.m < 0 {
            c0 = -c0;
        }
        if c1.k < 0 {
            c1 = -c1;
        }
        debug_assert!(c0.m > 0 && c1.k > 0);
        let q = c0.k.div_euclid(c1.k);
        c0.k -= q * c1.k;
        Some(HermiteForm {
            h00: c0.m,
            h10: c0.k,
            h11: c1.k,
        })
    }

    pub fn index(&self) -> i64 {
        self.h00 * self.h11
    }

    /// Canonical representative of the coset `v + L` inside
    /// `[0, h00) x [0, h11)`.
    pub fn reduce(&self, v: LatticeVector) -> LatticeVector {
        let q = v.m.div_euclid(self.h00);
        let m = v.m - q * self.h00;
        let k = (v.k - q * self.h10).rem_euclid(self.h11);
        LatticeVector::new(m, k)
    }

    /// All coset representatives in a fixed (lexicographic) order.
    pub fn representatives(&self) -> Vec<LatticeVector> {
        let mut out = Vec::with_capacity((self.h00 * self.h11) as usize);
        for m in 0..self.h00 {
            for k in 0..self.h11 {
                out.push(LatticeVector::new(m, k));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitivity() {
        assert!(LatticeVector::new(2, 3).is_primitive());
        assert!(!LatticeVector::new(2, 4).is_primitive());
        assert!(!LatticeVector::new(0, 0).is_primitive());
        assert!(LatticeVector::new(0, -1).is_primitive());
        assert!(!LatticeVector::new(0, 2).is_primitive());
        assert!(LatticeVector::new(-3, 5).is_primitive());
    }

    #[test]
    fn lex_canonicalization() {
        assert_eq!(
            LatticeVector::new(-1, 1).lex_canonical(),
            LatticeVector::new(1, -1)
        );
        assert_eq!(
            LatticeVector::new(0, -2).lex_canonical(),
            LatticeVector::new(0, 2)
        );
        assert_eq!(LatticeVector::ZERO.lex_canonical(), LatticeVector::ZERO);
    }

    #[test]
    fn hermite_reduction_is_a_coset_map() {
        let mats = [
            LatticeMatrix::diagonal(1, 2),
            LatticeMatrix::diagonal(2, 2),
            LatticeMatrix::new(2, 1, 1, 3),
            LatticeMatrix::new(0, -1, 3, 2),
        ];
        for m in mats {
            let h = HermiteForm::of(&m).unwrap();
            assert_eq!(h.index(), m.det().abs());
            for v in [
                LatticeVector::new(5, -7),
                LatticeVector::new(-3, 11),
                LatticeVector::ZERO,
            ] {
                let r = h.reduce(v);
                assert!(r.m >= 0 && r.m < h.h00);
                assert!(r.k >= 0 && r.k < h.h11);
                // v - r must be in the sublattice
                assert!(m.contains(v - r), "{m:?} {v:?} {r:?}");
            }
            // representatives are pairwise distinct cosets
            let reps = h.representatives();
            assert_eq!(reps.len() as i64, h.index());
            for (i, &r1) in reps.iter().enumerate() {
                for &r2 in reps.iter().skip(i + 1) {
                    assert!(!m.contains(r1 - r2));
                }
            }
        }
    }

    #[test]
    fn solve_exact() {
        let m = LatticeMatrix::new(2, 1, 0, 2);
        assert_eq!(
            m.solve(LatticeVector::new(2, 0)),
            Some(LatticeVector::new(1, 0))
        );
        assert_eq!(m.solve(LatticeVector::new(1, 0)), None);
        assert_eq!(
            m.solve(LatticeVector::new(3, 2)),
            Some(LatticeVector::new(1, 1))
        );
    }
}
