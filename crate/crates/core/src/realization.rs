//! Positions and period vectors in 3-space: edge lengths, Gram matrices,
//! gauge fixing.
//!
//! Lengths are squared everywhere; nothing in the crate takes a square root
//! of a constraint quantity.

use crate::complex::{Edge, PeriodicComplex, Refinement};
use crate::lattice::LatticeMatrix;
use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RealizationError {
    #[error("period vectors are colinear")]
    ColinearPeriods,
    #[error("no stored length for constraint {0}")]
    MissingLength(Edge),
}

/// Positions of the orbit representatives plus the two period vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub positions: Vec<Vector3<f64>>,
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
}

/// Inner products of the period vectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl GramMatrix {
    pub fn new(g11: f64, g12: f64, g22: f64) -> Self {
        GramMatrix { g11, g12, g22 }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g11 > 0.0 && self.det() > 0.0
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.g11, self.g12, self.g22)
    }

    /// Gram matrix of the basis obtained by the integer change of basis
    /// `(a', b') = (a, b) * C`, i.e. `C^T G C`.
    pub fn change_of_basis(&self, c: &LatticeMatrix) -> GramMatrix {
        let g = nalgebra::Matrix2::new(self.g11, self.g12, self.g12, self.g22);
        let cf = nalgebra::Matrix2::new(
            c.rows[0][0] as f64,
            c.rows[0][1] as f64,
            c.rows[1][0] as f64,
            c.rows[1][1] as f64,
        );
        let gt = cf.transpose() * g * cf;
        GramMatrix::new(gt[(0, 0)], gt[(0, 1)], gt[(1, 1)])
    }
}

/// Squared target lengths for surface edges and auxiliary constraints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeLengths(pub BTreeMap<Edge, f64>);

impl EdgeLengths {
    pub fn get(&self, e: &Edge) -> Option<f64> {
        self.0.get(e).copied()
    }

    pub fn insert(&mut self, e: Edge, sq: f64) {
        self.0.insert(e, sq);
    }

    /// Measures every surface edge and auxiliary constraint of `c` on `r`.
    pub fn from_realization(c: &PeriodicComplex, r: &Realization) -> EdgeLengths {
        let mut map = BTreeMap::new();
        for e in c.constraint_edges() {
            map.insert(e, r.edge_length_sq(&e));
        }
        EdgeLengths(map)
    }
}

/// Gauge convention: the pinned vertex sits at the origin, the first period
/// points along +x, and the second period lies in the upper xy half-plane.
/// A gauged realization has exactly `3n` free scalars.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct GaugeFrame {
    pub pinned: usize,
}

impl Realization {
    pub fn new(positions: Vec<Vector3<f64>>, a: Vector3<f64>, b: Vector3<f64>) -> Self {
        Realization { positions, a, b }
    }

    pub fn n_orbits(&self) -> usize {
        self.positions.len()
    }

    fn gram_det(&self) -> f64 {
        self.a.norm_squared() * self.b.norm_squared() - self.a.dot(&self.b).powi(2)
    }

    pub fn periods_non_colinear(&self) -> bool {
        self.gram_det() > 0.0
    }

    pub fn gram(&self) -> Result<GramMatrix, RealizationError> {
        if !self.periods_non_colinear() {
            return Err(RealizationError::ColinearPeriods);
        }
        Ok(GramMatrix::new(
            self.a.norm_squared(),
            self.a.dot(&self.b),
            self.b.norm_squared(),
        ))
    }

    /// Squared length of the base lift of an edge:
    /// `|p_v + m a + k b - p_u|^2`.
    pub fn edge_length_sq(&self, e: &Edge) -> f64 {
        let s = e.shift();
        let d = self.positions[e.v()] + (s.m as f64) * self.a + (s.k as f64) * self.b
            - self.positions[e.u()];
        d.norm_squared()
    }

    /// Rigid motion into the gauge frame: translate the pinned vertex to the
    /// origin, rotate the first period onto +x and the second into the upper
    /// xy half-plane. The Gram matrix and all edge lengths are preserved.
    pub fn apply_gauge(&self, frame: &GaugeFrame) -> Result<Realization, RealizationError> {
        if !self.periods_non_colinear() {
            return Err(RealizationError::ColinearPeriods);
        }
        let e1 = self.a / self.a.norm();
        let n = self.a.cross(&self.b);
        let e3 = n / n.norm();
        let e2 = e3.cross(&e1);
        let origin = self.positions[frame.pinned];
        let rot = |p: &Vector3<f64>| Vector3::new(p.dot(&e1), p.dot(&e2), p.dot(&e3));
        let positions = self
            .positions
            .iter()
            .map(|p| {
                let q = p - origin;
                rot(&q)
            })
            .collect();
        Ok(Realization {
            positions,
            a: rot(&self.a),
            b: rot(&self.b),
        })
    }

    /// True if already in the gauge frame (up to `tol` on the constrained
    /// components).
    pub fn is_gauged(&self, frame: &GaugeFrame, tol: f64) -> bool {
        let p0 = self.positions[frame.pinned];
        p0.norm() <= tol
            && self.a.x > 0.0
            && self.a.y.abs() <= tol
            && self.a.z.abs() <= tol
            && self.b.y > 0.0
            && self.b.z.abs() <= tol
    }

    /// One residual per constraint, `measured - target`, in the canonical
    /// constraint order of the complex.
    pub fn residuals(
        &self,
        c: &PeriodicComplex,
        target: &EdgeLengths,
    ) -> Result<DVector<f64>, RealizationError> {
        let edges = c.constraint_edges();
        let mut out = DVector::zeros(edges.len());
        for (i, e) in edges.iter().enumerate() {
            let t = target
                .get(e)
                .ok_or(RealizationError::MissingLength(*e))?;
            out[i] = self.edge_length_sq(e) - t;
        }
        Ok(out)
    }

    /// Positions and periods mapped through a sublattice refinement: each
    /// refined orbit takes the position of its base lift, the periods become
    /// the sublattice basis vectors.
    pub fn refine(&self, refinement: &Refinement) -> Realization {
        let n_new = refinement.complex.n_orbits();
        let mut positions = Vec::with_capacity(n_new);
        for o in 0..n_new {
            let (base, rep) = refinement.base_of(o);
            positions.push(self.positions[base] + (rep.m as f64) * self.a + (rep.k as f64) * self.b);
        }
        let c0 = refinement.matrix.column(0);
        let c1 = refinement.matrix.column(1);
        Realization {
            positions,
            a: (c0.m as f64) * self.a + (c0.k as f64) * self.b,
            b: (c1.m as f64) * self.a + (c1.k as f64) * self.b,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::triangulated_plane;
    use crate::lattice::LatticeVector;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn edge_length_examples() {
        let r = Realization::new(
            vec![Vector3::zeros(), Vector3::new(0.5, 0.0, 0.0)],
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        );
        let e = Edge::new(0, 1, LatticeVector::new(1, 0));
        assert_relative_eq!(r.edge_length_sq(&e), 6.25);

        let self_edge = Edge::new(0, 0, LatticeVector::new(1, 0));
        assert_relative_eq!(r.edge_length_sq(&self_edge), 4.0);

        let r2 = Realization::new(
            vec![Vector3::zeros()],
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        );
        let diag = Edge::new(0, 0, LatticeVector::new(1, 1));
        assert_relative_eq!(r2.edge_length_sq(&diag), 2.0);
    }

    #[test]
    fn edge_length_invariant_under_recanonicalization() {
        let r = Realization::new(
            vec![Vector3::new(0.1, 0.2, 0.3), Vector3::new(-0.4, 0.5, 0.9)],
            Vector3::new(1.1, 0.0, 0.2),
            Vector3::new(0.3, 0.9, -0.1),
        );
        let e = Edge::new(1, 0, LatticeVector::new(2, -1));
        let flipped = Edge::new(0, 1, LatticeVector::new(-2, 1));
        assert_eq!(e, flipped);
        assert_relative_eq!(r.edge_length_sq(&e), r.edge_length_sq(&flipped));
    }

    #[test]
    fn gram_examples() {
        let r = Realization::new(
            vec![Vector3::zeros()],
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
        );
        let g = r.gram().unwrap();
        assert_eq!((g.g11, g.g12, g.g22), (1.0, 0.0, 1.0));

        let r = Realization::new(
            vec![Vector3::zeros()],
            Vector3::new(2.0, 0.0, 0.0),
            Vector3::new(1.0, 2.0, 0.0),
        );
        let g = r.gram().unwrap();
        assert_eq!((g.g11, g.g12, g.g22), (4.0, 2.0, 5.0));

        let colinear = Realization::new(
            vec![Vector3::zeros()],
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(2.0, 0.0, 0.0),
        );
        assert!(colinear.gram().is_err());
    }

    #[test]
    fn gauge_examples() {
        // Hand-derived frame: a=(0,2,0), b=(0,1,2) -> a=(2,0,0), b=(1,2,0).
        let r = Realization::new(
            vec![Vector3::zeros()],
            Vector3::new(0.0, 2.0, 0.0),
            Vector3::new(0.0, 1.0, 2.0),
        );
        let g = r.apply_gauge(&GaugeFrame::default()).unwrap();
        assert_relative_eq!(g.a, Vector3::new(2.0, 0.0, 0.0), epsilon = 1e-14);
        assert_relative_eq!(g.b, Vector3::new(1.0, 2.0, 0.0), epsilon = 1e-14);

        // Already gauged: unchanged bit for bit.
        let again = g.apply_gauge(&GaugeFrame::default()).unwrap();
        assert_eq!(g, again);
        assert!(g.is_gauged(&GaugeFrame::default(), 1e-12));
    }

    #[test]
    fn gauge_kills_rotations() {
        let base = Realization::new(
            vec![Vector3::zeros(), Vector3::new(0.3, 0.4, 0.5)],
            Vector3::new(1.2, 0.0, 0.0),
            Vector3::new(0.4, 1.1, 0.0),
        );
        // Proper rotation about an arbitrary axis plus a translation.
        let axis = Vector3::new(1.0, 2.0, -1.0).normalize();
        let rot = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), 0.83);
        let shift = Vector3::new(0.7, -0.2, 0.4);
        let moved = Realization::new(
            base.positions.iter().map(|p| rot * p + shift).collect(),
            rot * base.a,
            rot * base.b,
        );
        let g1 = base.apply_gauge(&GaugeFrame::default()).unwrap();
        let g2 = moved.apply_gauge(&GaugeFrame::default()).unwrap();
        assert_relative_eq!(g1.a, g2.a, epsilon = 1e-12);
        assert_relative_eq!(g1.b, g2.b, epsilon = 1e-12);
        for (p, q) in g1.positions.iter().zip(g2.positions.iter()) {
            assert_relative_eq!(p, q, epsilon = 1e-12);
        }
        let gm1 = base.gram().unwrap();
        let gm2 = g1.gram().unwrap();
        assert_relative_eq!(gm1.g11, gm2.g11, epsilon = 1e-12);
        assert_relative_eq!(gm1.g12, gm2.g12, epsilon = 1e-12);
        assert_relative_eq!(gm1.g22, gm2.g22, epsilon = 1e-12);
    }

    #[test]
    fn residual_examples() {
        let sheet = triangulated_plane(
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            &crate::lattice::LatticeMatrix::diagonal(1, 2),
        )
        .unwrap();
        let (c, r) = (&sheet.complex, &sheet.realization);
        let target = EdgeLengths::from_realization(c, r);
        let res = r.residuals(c, &target).unwrap();
        assert_eq!(res.len(), c.constraint_edges().len());
        assert!(res.amax() == 0.0);

        // Perturb the head vertex by delta along a unit edge direction: that
        // residual becomes exactly 2*delta + delta^2.
        let delta = 1e-3;
        let mut perturbed = r.clone();
        perturbed.positions[1] += Vector3::new(0.0, delta, 0.0);
        let res = perturbed.residuals(c, &target).unwrap();
        let edges = c.constraint_edges();
        let vertical = Edge::new(0, 1, LatticeVector::ZERO);
        let mut checked = false;
        for (i, e) in edges.iter().enumerate() {
            if *e == vertical {
                assert_relative_eq!(res[i], 2.0 * delta + delta * delta, epsilon = 1e-15);
                checked = true;
            }
        }
        assert!(checked);

        // Scaling all coordinates by s turns residuals into (s^2-1)*target.
        let s = 1.3;
        let scaled = Realization::new(
            r.positions.iter().map(|p| s * p).collect(),
            s * r.a,
            s * r.b,
        );
        let res = scaled.residuals(c, &target).unwrap();
        for (i, e) in edges.iter().enumerate() {
            assert_relative_eq!(
                res[i],
                (s * s - 1.0) * target.get(e).unwrap(),
                epsilon = 1e-12
            );
        }

        // Missing target entry is an error.
        let mut partial = target.clone();
        partial.0.remove(&edges[0]);
        assert!(r.residuals(c, &partial).is_err());
    }

    #[test]
    fn gram_transforms_by_congruence_under_refinement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = Vector3::new(
                rng.random_range(0.5..2.0),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
            );
            let b = Vector3::new(
                rng.random_range(-0.5..0.5),
                rng.random_range(0.5..2.0),
                rng.random_range(-0.5..0.5),
            );
            let c = crate::lattice::LatticeMatrix::new(
                rng.random_range(-2..3),
                rng.random_range(-2..3),
                rng.random_range(-2..3),
                rng.random_range(-2..3),
            );
            if c.det() == 0 {
                continue;
            }
            let sheet = triangulated_plane(a, b, &c).unwrap();
            let refined_gram = sheet.realization.gram().unwrap();
            let base = Realization::new(vec![Vector3::zeros()], a, b);
            let expected = base.gram().unwrap().change_of_basis(&c);
            assert_relative_eq!(refined_gram.g11, expected.g11, epsilon = 1e-10);
            assert_relative_eq!(refined_gram.g12, expected.g12, epsilon = 1e-10);
            assert_relative_eq!(refined_gram.g22, expected.g22, epsilon = 1e-10);
        }
    }
}
