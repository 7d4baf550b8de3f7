//! Sparse trivariate polynomials with `f64` coefficients, used for fitting
//! and checking algebraic relations among Gram coordinates.
//!
//! Coefficient vectors use the graded lexicographic listing of monomials
//! `X^i Y^j Z^k`: ascending total degree, and within a degree descending
//! exponent tuples with `X > Y > Z`. The convention string is
//! `"gradedlex-XYZ"`.

use std::collections::BTreeMap;

pub const MONOMIAL_ORDER: &str = "gradedlex-XYZ";

/// Exponent triples of all monomials of total degree at most `d`, in the
/// graded-lex listing.
pub fn monomials(d: usize) -> Vec<(u32, u32, u32)> {
    let mut out = Vec::new();
    for total in 0..=d as u32 {
        let mut level = Vec::new();
        for i in 0..=total {
            for j in 0..=(total - i) {
                level.push((i, j, total - i - j));
            }
        }
        level.sort_by(|a, b| b.cmp(a));
        out.extend(level);
    }
    out
}

pub fn monomial_count(d: usize) -> usize {
    (d + 1) * (d + 2) * (d + 3) / 6
}

/// Sparse polynomial in three variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly3 {
    terms: BTreeMap<(u32, u32, u32), f64>,
}

impl Poly3 {
    pub fn zero() -> Poly3 {
        Poly3::default()
    }

    pub fn constant(c: f64) -> Poly3 {
        let mut p = Poly3::zero();
        p.add_term((0, 0, 0), c);
        p
    }

    pub fn variable(axis: usize) -> Poly3 {
        let mut p = Poly3::zero();
        let e = match axis {
            0 => (1, 0, 0),
            1 => (0, 1, 0),
            2 => (0, 0, 1),
            _ => panic!("axis out of range"),
        };
        p.add_term(e, 1.0);
        p
    }

    pub fn add_term(&mut self, exp: (u32, u32, u32), c: f64) {
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(exp).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            self.terms.remove(&exp);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &f64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|&(i, j, k)| (i + j + k) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &Poly3) -> Poly3 {
        let mut out = self.clone();
        for (&e, &c) in other.terms.iter() {
            out.add_term(e, c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly3 {
        let mut out = Poly3::zero();
        for (&e, &c) in self.terms.iter() {
            out.add_term(e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (&(i1, j1, k1), &c1) in self.terms.iter() {
            for (&(i2, j2, k2), &c2) in other.terms.iter() {
                out.add_term((i1 + i2, j1 + j2, k1 + k2), c1 * c2);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly3 {
        let mut out = Poly3::constant(1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64, z: f64) -> f64 {
        let mut acc = 0.0;
        for (&(i, j, k), &c) in self.terms.iter() {
            acc += c * x.powi(i as i32) * y.powi(j as i32) * z.powi(k as i32);
        }
        acc
    }

    /// Substitutes each variable by an affine expression of the variables.
    pub fn substitute(&self, x_sub: &Poly3, y_sub: &Poly3, z_sub: &Poly3) -> Poly3 {
        let mut out = Poly3::zero();
        for (&(i, j, k), &c) in self.terms.iter() {
            let term = x_sub.pow(i).mul(&y_sub.pow(j)).mul(&z_sub.pow(k));
            out = out.add(&term.scale(c));
        }
        out
    }

    /// Coefficient 2-norm.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Drops terms with coefficients below `eps` times the norm.
    pub fn trimmed(&self, eps: f64) -> Poly3 {
        let cut = eps * self.norm();
        let mut out = Poly3::zero();
        for (&e, &c) in self.terms.iter() {
            if c.abs() > cut {
                out.add_term(e, c);
            }
        }
        out
    }

    /// Homogeneous component of the highest degree carrying non-negligible
    /// coefficients (relative cutoff `eps`).
    pub fn leading_form(&self, eps: f64) -> Poly3 {
        let trimmed = self.trimmed(eps);
        let deg = trimmed.total_degree() as u32;
        let mut out = Poly3::zero();
        for (&(i, j, k), &c) in trimmed.terms.iter() {
            if i + j + k == deg {
                out.add_term((i, j, k), c);
            }
        }
        out
    }

    /// Dense coefficient vector over the graded-lex listing up to degree `d`.
    pub fn to_coeffs(&self, d: usize) -> Vec<f64> {
        let mons = monomials(d);
        mons.iter()
            .map(|e| self.terms.get(e).copied().unwrap_or(0.0))
            .collect()
    }

    pub fn from_coeffs(d: usize, coeffs: &[f64]) -> Poly3 {
        let mons = monomials(d);
        assert_eq!(coeffs.len(), mons.len());
        let mut p = Poly3::zero();
        for (e, &c) in mons.iter().zip(coeffs.iter()) {
            p.add_term(*e, c);
        }
        p
    }

    /// Writes the polynomial as a polynomial in Z with `Poly3` coefficients
    /// (only exponents with `k == 0` appear in the coefficients).
    fn coeffs_in_z(&self) -> Vec<Poly3> {
        let deg_z = self.terms.keys().map(|&(_, _, k)| k).max().unwrap_or(0) as usize;
        let mut out = vec![Poly3::zero(); deg_z + 1];
        for (&(i, j, k), &c) in self.terms.iter() {
            out[k as usize].add_term((i, j, 0), c);
        }
        out
    }
}

/// Determinant of a small matrix with polynomial entries, by cofactor
/// expansion.
fn poly_det(m: &[Vec<Poly3>]) -> Poly3 {
    let n = m.len();
    if n == 0 {
        return Poly3::constant(1.0);
    }
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc = Poly3::zero();
    for col in 0..n {
        if m[0][col].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly3>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|&(c, _)| c != col)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc.add(&m[0][col].mul(&poly_det(&minor)).scale(sign));
    }
    acc
}

/// Resultant of two polynomials with respect to Z: the determinant of the
/// Sylvester matrix over polynomials in X and Y. Returns the zero polynomial
/// when both are constant in Z.
pub fn resultant_z(f: &Poly3, g: &Poly3) -> Poly3 {
    let fc = f.coeffs_in_z();
    let gc = g.coeffs_in_z();
    let df = fc.len() - 1;
    let dg = gc.len() - 1;
    if df == 0 && dg == 0 {
        return Poly3::zero();
    }
    // Degenerate Sylvester cases: one argument constant in Z.
    if df == 0 {
        return fc[0].pow(dg as u32);
    }
    if dg == 0 {
        return gc[0].pow(df as u32);
    }
    let n = df + dg;
    let mut m = vec![vec![Poly3::zero(); n]; n];
    for row in 0..dg {
        for (idx, c) in fc.iter().enumerate() {
            m[row][row + df - idx] = c.clone();
        }
    }
    for row in 0..df {
        for (idx, c) in gc.iter().enumerate() {
            m[dg + row][row + dg - idx] = c.clone();
        }
    }
    poly_det(&m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_listing_is_graded_lex() {
        let m = monomials(2);
        assert_eq!(m.len(), monomial_count(2));
        assert_eq!(
            m,
            vec![
                (0, 0, 0),
                (1, 0, 0),
                (0, 1, 0),
                (0, 0, 1),
                (2, 0, 0),
                (1, 1, 0),
                (1, 0, 1),
                (0, 2, 0),
                (0, 1, 1),
                (0, 0, 2),
            ]
        );
    }

    #[test]
    fn substitute_affine() {
        // p = X*Z, substitute X -> (X - 1)/2, Z -> Z
        let p = Poly3::variable(0).mul(&Poly3::variable(2));
        let xs = Poly3::variable(0).add(&Poly3::constant(-1.0)).scale(0.5);
        let q = p.substitute(&xs, &Poly3::variable(1), &Poly3::variable(2));
        assert!((q.eval(3.0, 0.0, 5.0) - 5.0).abs() < 1e-12);
        assert!((q.eval(1.0, 0.0, 7.0) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn resultant_detects_common_factor() {
        // f = Y*Z, g = (X+1)*Z: share the factor Z, resultant vanishes.
        let f = Poly3::variable(1).mul(&Poly3::variable(2));
        let g = Poly3::variable(0)
            .add(&Poly3::constant(1.0))
            .mul(&Poly3::variable(2));
        let r = resultant_z(&f, &g);
        assert!(r.norm() < 1e-12, "{r:?}");

        // f = Y (constant in Z), g = X*Z: resultant is Y^1 = Y.
        let f = Poly3::variable(1);
        let g = Poly3::variable(0).mul(&Poly3::variable(2));
        let r = resultant_z(&f, &g);
        assert!((r.norm() - 1.0).abs() < 1e-12);
    }
}
