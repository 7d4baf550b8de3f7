//! Numerical flex engine: constraint Jacobians, first-order flex spaces,
//! Gauss-Newton projection onto the constraint manifold, and
//! predictor-corrector path tracing with a deforming period lattice.
//!
//! Everything runs in a gauge-fixed chart: vertex 0 is pinned at the origin,
//! the first period is `(a1, 0, 0)` and the second `(b1, b2, 0)`, so the
//! coordinate vector has length `3n` and the rigid motions are gone.

use crate::complex::PeriodicComplex;
use crate::realization::{EdgeLengths, GramMatrix, Realization};
use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlexError {
    #[error("configuration is off the constraint manifold (residual {0:.3e})")]
    OffManifold(f64),
    #[error("corrector did not converge (residual {residual:.3e})")]
    CorrectorDiverged { residual: f64 },
    #[error("direction is not tangent to the constraint manifold")]
    DirectionNotTangent,
    #[error("direction vector is zero")]
    ZeroDirection,
    #[error("direction has wrong dimension: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Realization(#[from] crate::realization::RealizationError),
    #[error("least-squares solve failed")]
    SolveFault,
}

/// Gauge-fixed coordinate vector: `[a1, b1, b2, p1, ..., p_{n-1}]` with the
/// pinned vertex omitted.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    coords: DVector<f64>,
    n_orbits: usize,
}

impl Configuration {
    /// Reads the chart coordinates off a gauged realization. The tiny
    /// off-chart components left by floating-point gauge rotation are
    /// dropped.
    pub fn from_gauged(r: &Realization) -> Configuration {
        let n = r.n_orbits();
        let mut coords = DVector::zeros(3 * n);
        coords[0] = r.a.x;
        coords[1] = r.b.x;
        coords[2] = r.b.y;
        for i in 1..n {
            coords[3 * i] = r.positions[i].x;
            coords[3 * i + 1] = r.positions[i].y;
            coords[3 * i + 2] = r.positions[i].z;
        }
        Configuration {
            coords,
            n_orbits: n,
        }
    }

    pub fn from_vector(n_orbits: usize, coords: DVector<f64>) -> Configuration {
        assert_eq!(coords.len(), 3 * n_orbits);
        Configuration { coords, n_orbits }
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn n_orbits(&self) -> usize {
        self.n_orbits
    }

    pub fn a1(&self) -> f64 {
        self.coords[0]
    }

    pub fn b1(&self) -> f64 {
        self.coords[1]
    }

    pub fn b2(&self) -> f64 {
        self.coords[2]
    }

    pub fn position(&self, orbit: usize) -> Vector3<f64> {
        if orbit == 0 {
            Vector3::zeros()
        } else {
            Vector3::new(
                self.coords[3 * orbit],
                self.coords[3 * orbit + 1],
                self.coords[3 * orbit + 2],
            )
        }
    }

    pub fn to_realization(&self) -> Realization {
        let positions = (0..self.n_orbits).map(|i| self.position(i)).collect();
        Realization::new(
            positions,
            Vector3::new(self.a1(), 0.0, 0.0),
            Vector3::new(self.b1(), self.b2(), 0.0),
        )
    }

    pub fn gram(&self) -> GramMatrix {
        GramMatrix::new(
            self.a1() * self.a1(),
            self.a1() * self.b1(),
            self.b1() * self.b1() + self.b2() * self.b2(),
        )
    }

    /// The chart is valid while the first period points along +x and the
    /// second has a positive y component.
    pub fn chart_valid(&self) -> bool {
        self.a1() > 0.0 && self.b2() > 0.0
    }
}

/// Numerical tolerances and step controls.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SolverSettings {
    /// Singular values below `rank_tolerance x largest` count as null.
    pub rank_tolerance: f64,
    /// Corrector stops when the residual max-norm drops below this.
    pub corrector_tolerance: f64,
    /// Predictor step in chart coordinates.
    pub step_size: f64,
    pub max_corrector_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            rank_tolerance: 1e-8,
            corrector_tolerance: 1e-10,
            step_size: 1e-2,
            max_corrector_iterations: 25,
        }
    }
}

/// Residuals `measured - target` in the canonical constraint order.
pub fn residual_vector(
    c: &PeriodicComplex,
    q: &Configuration,
    target: &EdgeLengths,
) -> Result<DVector<f64>, FlexError> {
    let edges = c.constraint_edges();
    let mut out = DVector::zeros(edges.len());
    for (i, e) in edges.iter().enumerate() {
        let t = target
            .get(e)
            .ok_or(crate::realization::RealizationError::MissingLength(*e))?;
        let s = e.shift();
        let d = q.position(e.v()) + (s.m as f64) * Vector3::new(q.a1(), 0.0, 0.0)
            + (s.k as f64) * Vector3::new(q.b1(), q.b2(), 0.0)
            - q.position(e.u());
        out[i] = d.norm_squared() - t;
    }
    Ok(out)
}

/// Jacobian of the squared-length constraints with respect to the chart
/// coordinates; one row per constraint.
pub fn constraint_jacobian(c: &PeriodicComplex, q: &Configuration) -> DMatrix<f64> {
    let edges = c.constraint_edges();
    let n = q.n_orbits();
    let mut jac = DMatrix::zeros(edges.len(), 3 * n);
    let a = Vector3::new(q.a1(), 0.0, 0.0);
    let b = Vector3::new(q.b1(), q.b2(), 0.0);
    for (row, e) in edges.iter().enumerate() {
        let s = e.shift();
        let d = q.position(e.v()) + (s.m as f64) * a + (s.k as f64) * b - q.position(e.u());
        jac[(row, 0)] += 2.0 * (s.m as f64) * d.x;
        jac[(row, 1)] += 2.0 * (s.k as f64) * d.x;
        jac[(row, 2)] += 2.0 * (s.k as f64) * d.y;
        if e.v() != 0 {
            for ax in 0..3 {
                jac[(row, 3 * e.v() + ax)] += 2.0 * d[ax];
            }
        }
        if e.u() != 0 {
            for ax in 0..3 {
                jac[(row, 3 * e.u() + ax)] -= 2.0 * d[ax];
            }
        }
    }
    jac
}

/// Orthonormal basis of the first-order flex space.
#[derive(Clone, Debug)]
pub struct FlexSpace {
    pub dim: usize,
    /// `3n x dim`, orthonormal columns.
    pub basis: DMatrix<f64>,
}

fn padded_svd(j: &DMatrix<f64>) -> nalgebra::SVD<f64, nalgebra::Dyn, nalgebra::Dyn> {
    let (m, n) = j.shape();
    if m < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m, n)).copy_from(j);
        p.svd(false, true)
    } else {
        j.clone().svd(false, true)
    }
}

/// Nullspace of the constraint Jacobian by singular value decomposition with
/// the relative rank tolerance.
pub fn infinitesimal_flex_space(j: &DMatrix<f64>, s: &SolverSettings) -> FlexSpace {
    let n = j.ncols();
    let svd = padded_svd(j);
    let vt = svd.v_t.expect("v requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let mut cols = Vec::new();
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv <= s.rank_tolerance * smax {
            cols.push(i);
        }
    }
    let mut basis = DMatrix::zeros(n, cols.len());
    for (out, &i) in cols.iter().enumerate() {
        for col in 0..n {
            basis[(col, out)] = vt[(i, col)];
        }
    }
    FlexSpace {
        dim: cols.len(),
        basis,
    }
}

/// Numerical rank of a matrix at the relative tolerance.
pub fn matrix_rank(j: &DMatrix<f64>, rank_tolerance: f64) -> usize {
    if j.nrows() == 0 || j.ncols() == 0 {
        return 0;
    }
    let svd = j.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&sv| sv > rank_tolerance * smax)
        .count()
}

/// Gauss-Newton projection onto the constraint manifold: least-squares
/// Newton steps with up to four halvings when the residual fails to drop.
pub fn project_newton(
    c: &PeriodicComplex,
    q: &Configuration,
    target: &EdgeLengths,
    s: &SolverSettings,
) -> Result<Configuration, FlexError> {
    let mut cur = q.clone();
    let mut res = residual_vector(c, &cur, target)?;
    if res.amax() <= s.corrector_tolerance {
        return Ok(cur);
    }
    for _ in 0..s.max_corrector_iterations {
        let jac = constraint_jacobian(c, &cur);
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        if smax == 0.0 {
            return Err(FlexError::CorrectorDiverged {
                residual: res.amax(),
            });
        }
        let delta = svd
            .solve(&res, s.rank_tolerance * smax)
            .map_err(|_| FlexError::SolveFault)?;
        let before = res.amax();
        let mut accepted = None;
        let mut scale = 1.0;
        for _ in 0..=4 {
            let cand = Configuration::from_vector(cur.n_orbits, &cur.coords - scale * &delta);
            let rc = residual_vector(c, &cand, target)?;
            if rc.amax() < before {
                accepted = Some((cand, rc));
                break;
            }
            scale *= 0.5;
        }
        let Some((cand, rc)) = accepted else {
            return Err(FlexError::CorrectorDiverged { residual: before });
        };
        cur = cand;
        res = rc;
        if res.amax() <= s.corrector_tolerance {
            return Ok(cur);
        }
    }
    Err(FlexError::CorrectorDiverged {
        residual: res.amax(),
    })
}

/// One accepted point on a traced path.
#[derive(Clone, Debug)]
pub struct FlexSample {
    /// Accumulated predictor arclength.
    pub t: f64,
    pub config: Configuration,
    pub gram: GramMatrix,
    pub residual_norm: f64,
}

/// Why a trace stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// All requested steps completed.
    Completed,
    /// Corrector failed even after step halving; boundary of the flex.
    CorrectorFailed,
    /// The gauge chart became invalid (a period degenerated).
    GaugeBoundary,
    /// The flex-space dimension changed; a singular configuration is near.
    RankChanged,
    /// The transported tangent left the flex space.
    TangentLost,
}

/// A traced flex path: samples plus the tangent used at the start.
#[derive(Clone, Debug)]
pub struct FlexPath {
    pub samples: Vec<FlexSample>,
    pub initial_tangent: DVector<f64>,
    pub stop: StopReason,
}

/// Predictor-corrector tracing from an on-manifold configuration along a
/// tangent direction. Stops early (with the reason recorded) at corrector
/// failure, chart boundary, or a flex-space rank change.
pub fn trace_flex(
    c: &PeriodicComplex,
    q0: &Configuration,
    target: &EdgeLengths,
    direction: &DVector<f64>,
    steps: usize,
    s: &SolverSettings,
) -> Result<FlexPath, FlexError> {
    if direction.len() != q0.coords().len() {
        return Err(FlexError::DimensionMismatch {
            expected: q0.coords().len(),
            got: direction.len(),
        });
    }
    let r0 = residual_vector(c, q0, target)?;
    if r0.amax() > s.corrector_tolerance {
        return Err(FlexError::OffManifold(r0.amax()));
    }
    let dir_norm = direction.norm();
    if dir_norm == 0.0 {
        return Err(FlexError::ZeroDirection);
    }
    let tangent0 = direction / dir_norm;
    let jac0 = constraint_jacobian(c, q0);
    let smax0 = {
        let svd = jac0.clone().svd(false, false);
        svd.singular_values.iter().cloned().fold(0.0f64, f64::max)
    };
    if (&jac0 * &tangent0).amax() > 1e-6 * smax0.max(1.0) {
        return Err(FlexError::DirectionNotTangent);
    }
    let dim0 = infinitesimal_flex_space(&jac0, s).dim;

    let mut samples = vec![FlexSample {
        t: 0.0,
        config: q0.clone(),
        gram: q0.gram(),
        residual_norm: r0.amax(),
    }];
    let mut cur = q0.clone();
    let mut prev_tangent = tangent0.clone();
    let mut t_acc = 0.0;
    let mut stop = StopReason::Completed;

    'outer: for _ in 0..steps {
        let jac = constraint_jacobian(c, &cur);
        let space = infinitesimal_flex_space(&jac, s);
        if space.dim != dim0 {
            stop = StopReason::RankChanged;
            break;
        }
        let mut tangent = &space.basis * (space.basis.transpose() * &prev_tangent);
        let tnorm = tangent.norm();
        if tnorm < 0.1 {
            stop = StopReason::TangentLost;
            break;
        }
        tangent /= tnorm;
        if tangent.dot(&prev_tangent) < 0.0 {
            tangent = -tangent;
        }

        let mut h = s.step_size;
        let mut failure = StopReason::CorrectorFailed;
        for _ in 0..=4 {
            let predicted =
                Configuration::from_vector(cur.n_orbits(), cur.coords() + h * &tangent);
            match project_newton(c, &predicted, target, s) {
                Ok(corrected) => {
                    if !corrected.chart_valid() {
                        failure = StopReason::GaugeBoundary;
                        h *= 0.5;
                        continue;
                    }
                    if (corrected.coords() - cur.coords()).norm() > 2.0 * s.step_size {
                        // Corrector jumped; treat like a failed step.
                        h *= 0.5;
                        continue;
                    }
                    t_acc += h;
                    let res = residual_vector(c, &corrected, target)?;
                    samples.push(FlexSample {
                        t: t_acc,
                        config: corrected.clone(),
                        gram: corrected.gram(),
                        residual_norm: res.amax(),
                    });
                    cur = corrected;
                    prev_tangent = tangent.clone();
                    continue 'outer;
                }
                Err(FlexError::CorrectorDiverged { .. }) => {
                    h *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
        stop = failure;
        break;
    }

    Ok(FlexPath {
        samples,
        initial_tangent: tangent0,
        stop,
    })
}

/// Rank of the projection of the flex space onto the Gram-coordinate
/// differentials: in the gauge chart `dg11 = 2 a1 da1`,
/// `dg12 = b1 da1 + a1 db1`, `dg22 = 2 b1 db1 + 2 b2 db2`.
pub fn gram_tangent_rank(c: &PeriodicComplex, q: &Configuration, s: &SolverSettings) -> usize {
    let jac = constraint_jacobian(c, q);
    let space = infinitesimal_flex_space(&jac, s);
    if space.dim == 0 {
        return 0;
    }
    let mut proj = DMatrix::zeros(3, space.dim);
    for j in 0..space.dim {
        let da1 = space.basis[(0, j)];
        let db1 = space.basis[(1, j)];
        let db2 = space.basis[(2, j)];
        proj[(0, j)] = 2.0 * q.a1() * da1;
        proj[(1, j)] = q.b1() * da1 + q.a1() * db1;
        proj[(2, j)] = 2.0 * q.b1() * db1 + 2.0 * q.b2() * db2;
    }
    matrix_rank(&proj, s.rank_tolerance)
}

/// Regularity probe: the constraint Jacobian rank must be locally constant
/// under coordinate perturbations of size `1e-6`.
pub fn is_regular(c: &PeriodicComplex, q: &Configuration, s: &SolverSettings) -> bool {
    let base_rank = matrix_rank(&constraint_jacobian(c, q), s.rank_tolerance);
    let mut rng = ChaCha8Rng::seed_from_u64(0x666c_6578);
    for _ in 0..3 {
        let mut coords = q.coords().clone();
        for x in coords.iter_mut() {
            *x += 1e-6 * rng.random_range(-1.0..1.0);
        }
        let qp = Configuration::from_vector(q.n_orbits(), coords);
        if matrix_rank(&constraint_jacobian(c, &qp), s.rank_tolerance) != base_rank {
            return false;
        }
    }
    true
}
