//! Deterministic constructors for the standard examples: the triangulated
//! plane and its sublattice refinements, the square grid with rigidified
//! quads, the folded parallelogram surface, accordion fold seeds, and the
//! star-subdivision test fixture.

use crate::complex::{Corner, Edge, PeriodicComplex, Triangle};
use crate::flex::Configuration;
use crate::lattice::{LatticeMatrix, LatticeVector};
use crate::realization::{EdgeLengths, GaugeFrame, Realization};
use nalgebra::Vector3;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BuildError {
    #[error("period vectors are colinear")]
    ColinearPeriods,
    #[error("basis-change matrix is singular")]
    SingularMatrix,
    #[error("parameter out of range: {0}")]
    InvalidParameter(String),
    #[error("fold lines are not compatible with the sublattice: {0}")]
    IncompatibleSublattice(String),
    #[error("triangle not in complex")]
    TriangleAbsent,
}

/// A refined periodic sheet: the quotient complex, its flat realization, and
/// the base-lattice coordinates of each refined orbit (needed to build fold
/// seeds).
#[derive(Clone, Debug)]
pub struct RefinedPlane {
    pub complex: PeriodicComplex,
    pub realization: Realization,
    /// Base-lattice cell of each refined orbit representative.
    pub base_coords: Vec<LatticeVector>,
    pub matrix: LatticeMatrix,
    pub base_a: Vector3<f64>,
    pub base_b: Vector3<f64>,
}

/// One of the three families of parallel lines an accordion fold can run
/// along.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FoldFamily {
    /// Lines parallel to the first period; folding shrinks the second.
    AlongA,
    /// Lines parallel to the second period; folding shrinks the first.
    AlongB,
    /// Lines parallel to the difference of the periods.
    AlongDiagonal,
}

impl FoldFamily {
    /// Strip index of a lattice cell: cells with equal index lie between the
    /// same pair of fold lines.
    fn strip_index(&self, v: LatticeVector) -> i64 {
        match self {
            FoldFamily::AlongA => v.k,
            FoldFamily::AlongB => v.m,
            FoldFamily::AlongDiagonal => v.m + v.k,
        }
    }

    /// Lattice direction of the fold lines.
    fn line_direction(&self) -> LatticeVector {
        match self {
            FoldFamily::AlongA => LatticeVector::new(1, 0),
            FoldFamily::AlongB => LatticeVector::new(0, 1),
            FoldFamily::AlongDiagonal => LatticeVector::new(1, -1),
        }
    }

    /// Lattice step that advances the strip index by one.
    fn transversal_step(&self) -> LatticeVector {
        match self {
            FoldFamily::AlongA => LatticeVector::new(0, 1),
            FoldFamily::AlongB | FoldFamily::AlongDiagonal => LatticeVector::new(1, 0),
        }
    }
}

fn one_orbit_sheet(
    a: Vector3<f64>,
    b: Vector3<f64>,
    sublattice: &LatticeMatrix,
    edges: Vec<Edge>,
    aux: Vec<Edge>,
    triangles: Vec<Triangle>,
) -> Result<RefinedPlane, BuildError> {
    let base = PeriodicComplex::new(1, edges, triangles, aux);
    let base_real = Realization::new(vec![Vector3::zeros()], a, b);
    if !base_real.periods_non_colinear() {
        return Err(BuildError::ColinearPeriods);
    }
    let refinement = base
        .change_of_basis(sublattice)
        .map_err(|_| BuildError::SingularMatrix)?;
    let realization = base_real.refine(&refinement);
    let base_coords = (0..refinement.complex.n_orbits())
        .map(|o| refinement.base_of(o).1)
        .collect();
    Ok(RefinedPlane {
        complex: refinement.complex,
        realization,
        base_coords,
        matrix: *sublattice,
        base_a: a,
        base_b: b,
    })
}

/// The plane triangulated by three families of parallel lines (along `a`,
/// along `b`, and along `a - b`), refined by a sublattice.
pub fn triangulated_plane(
    a: Vector3<f64>,
    b: Vector3<f64>,
    sublattice: &LatticeMatrix,
) -> Result<RefinedPlane, BuildError> {
    let z = LatticeVector::ZERO;
    let ea = LatticeVector::new(1, 0);
    let eb = LatticeVector::new(0, 1);
    let edges = vec![
        Edge::new(0, 0, ea),
        Edge::new(0, 0, eb),
        Edge::new(0, 0, LatticeVector::new(1, -1)),
    ];
    let triangles = vec![
        Triangle::new([
            Corner::new(0, z),
            Corner::new(0, ea),
            Corner::new(0, eb),
        ]),
        Triangle::new([
            Corner::new(0, ea),
            Corner::new(0, ea + eb),
            Corner::new(0, eb),
        ]),
    ];
    one_orbit_sheet(a, b, sublattice, edges, vec![], triangles)
}

/// Unit-square grid scaled by `side`, each square split by one diagonal with
/// the opposite diagonal kept as an auxiliary distance constraint, so every
/// quad moves rigidly.
pub fn grid_squares(side: f64, sublattice: &LatticeMatrix) -> Result<RefinedPlane, BuildError> {
    if !(side > 0.0) {
        return Err(BuildError::InvalidParameter(format!(
            "side must be positive, got {side}"
        )));
    }
    let z = LatticeVector::ZERO;
    let ea = LatticeVector::new(1, 0);
    let eb = LatticeVector::new(0, 1);
    let diag = ea + eb;
    let edges = vec![
        Edge::new(0, 0, ea),
        Edge::new(0, 0, eb),
        Edge::new(0, 0, diag),
    ];
    let aux = vec![Edge::new(0, 0, LatticeVector::new(1, -1))];
    let triangles = vec![
        Triangle::new([Corner::new(0, z), Corner::new(0, ea), Corner::new(0, diag)]),
        Triangle::new([Corner::new(0, z), Corner::new(0, diag), Corner::new(0, eb)]),
    ];
    one_orbit_sheet(
        Vector3::new(side, 0.0, 0.0),
        Vector3::new(0.0, side, 0.0),
        sublattice,
        edges,
        aux,
        triangles,
    )
}

/// Accordion configuration of a refined sheet: strips between consecutive
/// fold lines alternate rotations by the fold angle about the lines. The
/// construction is exact, so the seed sits on the constraint manifold of the
/// flat sheet's edge lengths to machine precision.
///
/// Returns the gauge-fixed configuration and the target lengths it
/// satisfies.
pub fn folded_plane_seed(
    sheet: &RefinedPlane,
    fold_angle: f64,
    family: FoldFamily,
) -> Result<(Configuration, EdgeLengths), BuildError> {
    // The sublattice must advance an even number of strips so that the
    // zigzag is periodic.
    for j in 0..2 {
        let col = sheet.matrix.column(j);
        if family.strip_index(col) % 2 != 0 {
            return Err(BuildError::IncompatibleSublattice(format!(
                "sublattice column {col} crosses an odd number of fold lines"
            )));
        }
    }
    // Every constraint must stay within one strip, and the base complex is
    // where strips are defined.
    let mut base_shifts: BTreeSet<LatticeVector> = BTreeSet::new();
    for e in sheet.complex.constraint_edges() {
        // Recover the base-lattice displacement of the edge.
        let from = sheet.base_coords[e.u()];
        let to = sheet.base_coords[e.v()] + sheet.matrix.apply(e.shift());
        base_shifts.insert(to - from);
    }
    for s in base_shifts {
        if family.strip_index(s).abs() > 1 {
            return Err(BuildError::IncompatibleSublattice(format!(
                "edge displacement {s} crosses more than one fold line"
            )));
        }
    }

    let (a, b) = (sheet.base_a, sheet.base_b);
    let to_r3 = |v: LatticeVector| (v.m as f64) * a + (v.k as f64) * b;
    let line_dir = to_r3(family.line_direction());
    let step = to_r3(family.transversal_step());
    let u_hat = line_dir / line_dir.norm();
    let step_par = step.dot(&u_hat) * u_hat;
    let step_perp = step - step_par;
    let h = step_perp.norm();
    if !(h > 0.0) {
        return Err(BuildError::ColinearPeriods);
    }
    let e_hat = step_perp / h;
    let n_hat = u_hat.cross(&e_hat);
    let (sin_phi, cos_phi) = fold_angle.sin_cos();
    let folded_step = step_par + h * cos_phi * e_hat;

    let place = |cell: LatticeVector| -> Vector3<f64> {
        let sigma = family.strip_index(cell);
        let inline = cell - LatticeVector::new(
            sigma * family.transversal_step().m,
            sigma * family.transversal_step().k,
        );
        let parity = sigma.rem_euclid(2) as f64;
        to_r3(inline) + (sigma as f64) * folded_step + parity * h * sin_phi * n_hat
    };

    let positions = sheet.base_coords.iter().map(|&c| place(c)).collect();
    let origin = place(LatticeVector::ZERO);
    let folded_a = place(sheet.matrix.column(0)) - origin;
    let folded_b = place(sheet.matrix.column(1)) - origin;
    let folded = Realization::new(positions, folded_a, folded_b);
    let target = EdgeLengths::from_realization(&sheet.complex, &sheet.realization);
    let gauged = folded
        .apply_gauge(&GaugeFrame::default())
        .map_err(|_| BuildError::ColinearPeriods)?;
    let config = Configuration::from_gauged(&gauged);
    Ok((config, target))
}

/// Parameters of the folded parallelogram surface.
#[derive(Clone, Copy, Debug)]
pub struct MiuraParams {
    /// Acute angle of the parallelogram faces, in radians.
    pub alpha: f64,
    /// Length of the first period in the flat state.
    pub a0_len: f64,
    /// Length of the second period in the flat state.
    pub b0_len: f64,
    /// Vertical offset of the folded zigzag; `0 < 2|z| < a0_len`.
    pub z: f64,
}

/// Derived quantities of an admissible parameter set.
#[derive(Clone, Copy, Debug)]
pub struct MiuraGeometry {
    pub a_len: f64,
    pub b_len: f64,
    pub x: f64,
}

impl MiuraParams {
    pub fn geometry(&self) -> Result<MiuraGeometry, BuildError> {
        if !(self.alpha > 0.0 && self.alpha < std::f64::consts::FRAC_PI_2) {
            return Err(BuildError::InvalidParameter(format!(
                "alpha must be in (0, pi/2), got {}",
                self.alpha
            )));
        }
        if !(self.a0_len > 0.0 && self.b0_len > 0.0) {
            return Err(BuildError::InvalidParameter(
                "period lengths must be positive".into(),
            ));
        }
        if !(self.z != 0.0 && 2.0 * self.z.abs() < self.a0_len) {
            return Err(BuildError::InvalidParameter(format!(
                "fold offset must satisfy 0 < 2|z| < a0, got z={}",
                self.z
            )));
        }
        let a_len = (self.a0_len.powi(2) - 4.0 * self.z.powi(2)).sqrt();
        let x = self.a0_len * self.b0_len / self.alpha.tan() / (2.0 * a_len);
        let b_sq = (self.b0_len / self.alpha.sin()).powi(2) - 4.0 * x.powi(2);
        if !(b_sq > 0.0) {
            return Err(BuildError::InvalidParameter(format!(
                "fold too deep: transversal offset x={x} leaves no room for the second period"
            )));
        }
        Ok(MiuraGeometry {
            a_len,
            b_len: b_sq.sqrt(),
            x,
        })
    }
}

/// The folded parallelogram surface: four vertex orbits per fundamental
/// domain (a 2x2 block of parallelograms), each face split by a diagonal
/// with the opposite diagonal as an auxiliary constraint.
pub fn miura_ori(params: &MiuraParams) -> Result<(PeriodicComplex, Realization), BuildError> {
    let geom = params.geometry()?;
    // Orbit of grid vertex (i, j), i horizontal, j vertical, both mod 2.
    let orbit = |i: i64, j: i64| -> Corner {
        let oi = i.rem_euclid(2);
        let oj = j.rem_euclid(2);
        Corner::new(
            (oi + 2 * oj) as usize,
            LatticeVector::new(i.div_euclid(2), j.div_euclid(2)),
        )
    };
    let mut edges = BTreeSet::new();
    let mut aux = BTreeSet::new();
    let mut triangles = BTreeSet::new();
    for i in 0..2i64 {
        for j in 0..2i64 {
            let c00 = orbit(i, j);
            let c10 = orbit(i + 1, j);
            let c01 = orbit(i, j + 1);
            let c11 = orbit(i + 1, j + 1);
            edges.insert(Edge::between(c00, c10));
            edges.insert(Edge::between(c00, c01));
            edges.insert(Edge::between(c00, c11));
            aux.insert(Edge::between(c10, c01));
            triangles.insert(Triangle::new([c00, c10, c11]));
            triangles.insert(Triangle::new([c00, c11, c01]));
        }
    }
    let complex = PeriodicComplex::new(4, edges, triangles, aux).with_labels(vec![
        Some("00".into()),
        Some("10".into()),
        Some("01".into()),
        Some("11".into()),
    ]);
    let place = |i: i64, j: i64| -> Vector3<f64> {
        Vector3::new(
            (i as f64) * geom.a_len / 2.0 + (j.rem_euclid(2) as f64) * geom.x,
            (j as f64) * geom.b_len / 2.0,
            (i.rem_euclid(2) as f64) * params.z,
        )
    };
    let positions = vec![place(0, 0), place(1, 0), place(0, 1), place(1, 1)];
    let realization = Realization::new(
        positions,
        Vector3::new(geom.a_len, 0.0, 0.0),
        Vector3::new(0.0, geom.b_len, 0.0),
    );
    Ok((complex, realization))
}

/// Replaces one triangle orbit by three triangles around a new vertex orbit.
/// The boundary of the removed triangle becomes a three-cycle bounding no
/// face.
pub fn star_subdivide(c: &PeriodicComplex, t: &Triangle) -> Result<PeriodicComplex, BuildError> {
    if !c.triangles().contains(t) {
        return Err(BuildError::TriangleAbsent);
    }
    let center = Corner::new(c.n_orbits(), LatticeVector::ZERO);
    let mut edges = c.edges().clone();
    let mut triangles = c.triangles().clone();
    triangles.remove(t);
    let cs = t.corners();
    for j in 0..3 {
        edges.insert(Edge::between(cs[j], center));
        triangles.insert(Triangle::new([cs[j], cs[(j + 1) % 3], center]));
    }
    let mut labels = c.labels().to_vec();
    labels.push(None);
    Ok(
        PeriodicComplex::new(c.n_orbits() + 1, edges, triangles, c.aux_constraints().clone())
            .with_labels(labels),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flex::residual_vector;
    use crate::lattice::LatticeMatrix;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_axes() -> (Vector3<f64>, Vector3<f64>) {
        (Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0))
    }

    #[test]
    fn plane_builder_rejects_degenerate_input() {
        let (a, _) = unit_axes();
        assert!(triangulated_plane(a, 2.0 * a, &LatticeMatrix::identity()).is_err());
        assert!(triangulated_plane(a, Vector3::new(0.0, 1.0, 0.0), &LatticeMatrix::new(1, 1, 1, 1))
            .is_err());
    }

    #[test]
    fn accordion_seed_matches_closed_form() {
        let (a, b) = unit_axes();
        let sheet = triangulated_plane(a, b, &LatticeMatrix::diagonal(1, 2)).unwrap();
        let (config, target) = folded_plane_seed(&sheet, std::f64::consts::FRAC_PI_6, FoldFamily::AlongA)
            .unwrap();
        let g = config.gram();
        assert_relative_eq!(g.g11, 1.0, epsilon = 1e-12);
        assert_relative_eq!(g.g12, 0.0, epsilon = 1e-12);
        assert_relative_eq!(g.g22, 3.0, epsilon = 1e-12);
        let res = residual_vector(&sheet.complex, &config, &target).unwrap();
        assert!(res.amax() <= 1e-12, "seed residual {}", res.amax());
    }

    #[test]
    fn accordion_gram_closed_form_randomized() {
        // Sheared periods: the fold keeps g11 and g12, and
        // g22 = 4(|b_par|^2 + h^2 cos^2 phi) for folds along the first
        // period's lines.
        let a = Vector3::new(1.3, 0.0, 0.0);
        let b = Vector3::new(0.4, 1.1, 0.0);
        let sheet = triangulated_plane(a, b, &LatticeMatrix::diagonal(1, 2)).unwrap();
        let b_par = (b.dot(&a) / a.norm_squared()) * a;
        let h2 = (b - b_par).norm_squared();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let phi: f64 = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
            let (config, target) = folded_plane_seed(&sheet, phi, FoldFamily::AlongA).unwrap();
            let g = config.gram();
            assert_relative_eq!(g.g11, a.norm_squared(), epsilon = 1e-10);
            assert_relative_eq!(g.g12, 2.0 * a.dot(&b), epsilon = 1e-10);
            assert_relative_eq!(
                g.g22,
                4.0 * (b_par.norm_squared() + h2 * phi.cos().powi(2)),
                epsilon = 1e-10
            );
            let res = residual_vector(&sheet.complex, &config, &target).unwrap();
            assert!(res.amax() <= 1e-12);
        }
        // Fully folded limit: g22 -> 4 (a.b)^2 / |a|^2.
        let (config, _) = folded_plane_seed(&sheet, std::f64::consts::FRAC_PI_2, FoldFamily::AlongA)
            .unwrap();
        assert_relative_eq!(
            config.gram().g22,
            4.0 * a.dot(&b).powi(2) / a.norm_squared(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn flat_seed_is_allowed_and_flat() {
        let (a, b) = unit_axes();
        let sheet = triangulated_plane(a, b, &LatticeMatrix::diagonal(1, 2)).unwrap();
        let (config, target) = folded_plane_seed(&sheet, 0.0, FoldFamily::AlongA).unwrap();
        assert_relative_eq!(config.gram().g22, 4.0, epsilon = 1e-12);
        let res = residual_vector(&sheet.complex, &config, &target).unwrap();
        assert!(res.amax() <= 1e-12);
    }

    #[test]
    fn fold_family_sublattice_compatibility() {
        let (a, b) = unit_axes();
        let sheet = triangulated_plane(a, b, &LatticeMatrix::diagonal(1, 2)).unwrap();
        // Columns (1,0),(0,2): folding along the second period's lines would
        // need an even first coordinate.
        assert!(matches!(
            folded_plane_seed(&sheet, 0.3, FoldFamily::AlongB),
            Err(BuildError::IncompatibleSublattice(_))
        ));
        let sheet22 = triangulated_plane(a, b, &LatticeMatrix::diagonal(2, 2)).unwrap();
        for family in [FoldFamily::AlongA, FoldFamily::AlongB, FoldFamily::AlongDiagonal] {
            folded_plane_seed(&sheet22, 0.3, family).unwrap();
        }
        // The grid has no edges parallel to a - b, so diagonal folds must be
        // rejected even over an even sublattice.
        let grid = grid_squares(1.0, &LatticeMatrix::diagonal(2, 2)).unwrap();
        assert!(folded_plane_seed(&grid, 0.3, FoldFamily::AlongDiagonal).is_err());
        folded_plane_seed(&grid, 0.3, FoldFamily::AlongA).unwrap();
        folded_plane_seed(&grid, 0.3, FoldFamily::AlongB).unwrap();
    }

    #[test]
    fn grid_fold_shrinks_one_period_only() {
        let grid = grid_squares(1.0, &LatticeMatrix::diagonal(2, 2)).unwrap();
        let (config, target) = folded_plane_seed(&grid, 0.4, FoldFamily::AlongB).unwrap();
        let g = config.gram();
        assert_relative_eq!(g.g11, 4.0 * 0.4f64.cos().powi(2), epsilon = 1e-12);
        assert_relative_eq!(g.g12, 0.0, epsilon = 1e-12);
        assert_relative_eq!(g.g22, 4.0, epsilon = 1e-12);
        let res = residual_vector(&grid.complex, &config, &target).unwrap();
        assert!(res.amax() <= 1e-12);
    }

    fn miura_flat_lengths(p: &MiuraParams) -> EdgeLengths {
        // Flat crease pattern: same combinatorics, zigzag offsets in-plane.
        let (complex, _) = miura_ori(p).unwrap();
        let x0 = p.b0_len / p.alpha.tan() / 2.0;
        let place = |i: i64, j: i64| {
            Vector3::new(
                (i as f64) * p.a0_len / 2.0 + (j.rem_euclid(2) as f64) * x0,
                (j as f64) * p.b0_len / 2.0,
                0.0,
            )
        };
        let flat = Realization::new(
            vec![place(0, 0), place(1, 0), place(0, 1), place(1, 1)],
            Vector3::new(p.a0_len, 0.0, 0.0),
            Vector3::new(0.0, p.b0_len, 0.0),
        );
        EdgeLengths::from_realization(&complex, &flat)
    }

    #[test]
    fn miura_construction_is_exact() {
        let p = MiuraParams {
            alpha: std::f64::consts::FRAC_PI_3,
            a0_len: 2.0,
            b0_len: 2.0,
            z: 0.3,
        };
        let (complex, realization) = miura_ori(&p).unwrap();
        assert!(complex.validate().is_valid(), "{}", complex.validate());
        assert_eq!(complex.n_orbits(), 4);
        assert_eq!(complex.edges().len(), 12);
        assert_eq!(complex.aux_constraints().len(), 4);
        assert_eq!(complex.triangles().len(), 8);

        // Folded faces congruent to the flat ones: every squared length
        // agrees with the flat crease pattern.
        let flat = miura_flat_lengths(&p);
        let folded = EdgeLengths::from_realization(&complex, &realization);
        for (e, l) in folded.0.iter() {
            assert_relative_eq!(*l, flat.get(e).unwrap(), max_relative = 1e-12);
        }

        let g = realization.gram().unwrap();
        assert_relative_eq!(g.g12, 0.0, epsilon = 1e-12);
        let s2 = p.alpha.sin().powi(2);
        let c2 = p.alpha.cos().powi(2);
        let hyper = g.g11 * g.g22 * s2 - g.g11 * p.b0_len.powi(2)
            + p.a0_len.powi(2) * p.b0_len.powi(2) * c2;
        assert!(hyper.abs() <= 1e-10, "system residual {hyper}");
    }

    #[test]
    fn miura_randomized_parameter_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut accepted = 0;
        while accepted < 100 {
            let p = MiuraParams {
                alpha: rng.random_range(0.3..1.4),
                a0_len: rng.random_range(0.8..3.0),
                b0_len: rng.random_range(0.8..3.0),
                z: rng.random_range(-1.0..1.0),
            };
            let Ok((complex, realization)) = miura_ori(&p) else {
                continue;
            };
            accepted += 1;
            let flat = miura_flat_lengths(&p);
            let folded = EdgeLengths::from_realization(&complex, &realization);
            for (e, l) in folded.0.iter() {
                assert_relative_eq!(*l, flat.get(e).unwrap(), max_relative = 1e-12);
            }
            let g = realization.gram().unwrap();
            let s2 = p.alpha.sin().powi(2);
            let c2 = p.alpha.cos().powi(2);
            let hyper = g.g11 * g.g22 * s2 - g.g11 * p.b0_len.powi(2)
                + p.a0_len.powi(2) * p.b0_len.powi(2) * c2;
            let scale = (p.a0_len.powi(4)).max(p.b0_len.powi(4));
            assert!(hyper.abs() <= 1e-10 * scale.max(1.0), "system residual {hyper}");
            assert!(g.g12.abs() <= 1e-12);
        }
    }

    #[test]
    fn miura_rejects_bad_parameters() {
        let base = MiuraParams {
            alpha: 1.0,
            a0_len: 2.0,
            b0_len: 2.0,
            z: 0.3,
        };
        assert!(miura_ori(&MiuraParams { z: 0.0, ..base }).is_err());
        assert!(miura_ori(&MiuraParams { z: 1.0, ..base }).is_err());
        assert!(miura_ori(&MiuraParams { alpha: 2.0, ..base }).is_err());
        assert!(miura_ori(&MiuraParams { a0_len: -1.0, ..base }).is_err());
        // Fold offset so deep that the second period degenerates.
        assert!(miura_ori(&MiuraParams {
            alpha: 0.3,
            a0_len: 2.0,
            b0_len: 2.0,
            z: 0.999
        })
        .is_err());
    }

    #[test]
    fn star_subdivision_center_is_non_special() {
        let (a, b) = unit_axes();
        let sheet = triangulated_plane(a, b, &LatticeMatrix::identity()).unwrap();
        let t = *sheet.complex.triangles().iter().next().unwrap();
        let sub = star_subdivide(&sheet.complex, &t).unwrap();
        assert!(sub.validate().is_valid());
        let center = sub.n_orbits() - 1;
        assert!(!sub.special_orbits().contains(&center));
        // Absent triangle is rejected.
        assert!(matches!(
            star_subdivide(&sub, &t),
            Err(BuildError::TriangleAbsent)
        ));
    }
}
