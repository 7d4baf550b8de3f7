//! Sampling and analysis of the set of Gram matrices reachable by flexes:
//! point clouds, branch clustering, local dimension estimates, and numerical
//! recovery of low-degree algebraic relations.

use crate::flex::FlexPath;
use crate::poly::{monomial_count, monomials, Poly3};
use crate::realization::GramMatrix;
use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GramSetError {
    #[error("cloud too small: need at least {need} points, got {got}")]
    CloudTooSmall { need: usize, got: usize },
    #[error("not enough points near the cluster center: need {need}, got {got}")]
    InsufficientLocalPoints { need: usize, got: usize },
    #[error("cloud is empty")]
    EmptyCloud,
}

/// One Gram sample with its provenance.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GramSample {
    pub gram: GramMatrix,
    /// Index of the source path.
    pub path: usize,
    /// Path parameter of the sample.
    pub t: f64,
}

/// Tagged point cloud in `(g11, g12, g22)` space.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GramCloud {
    pub points: Vec<GramSample>,
}

const DEDUP_EPS: f64 = 1e-12;

/// Relative singular-value cutoff for the local dimension estimate. This is
/// deliberately much looser than the solver rank tolerance: within a ball of
/// radius `r` a smooth curve has second singular value of order
/// `curvature x r^2`, so the cutoff must dominate `curvature x r` while
/// staying far below 1.
pub const DIMENSION_THRESHOLD: f64 = 0.1;

impl GramCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Vector3<f64> {
        self.points[i].gram.as_vector()
    }

    pub fn push(&mut self, sample: GramSample) {
        let p = sample.gram.as_vector();
        let dup = self
            .points
            .iter()
            .any(|q| (q.gram.as_vector() - p).norm() <= DEDUP_EPS);
        if !dup {
            self.points.push(sample);
        }
    }

    /// Largest coordinate magnitude, floored at one; the scale used by
    /// relation residuals.
    pub fn coordinate_scale(&self) -> f64 {
        self.points
            .iter()
            .map(|s| s.gram.as_vector().amax())
            .fold(1.0f64, f64::max)
    }

    /// Connected components of the sample graph in which points closer than
    /// `link_radius` are joined.
    pub fn clusters(&self, link_radius: f64) -> Vec<Vec<usize>> {
        let n = self.points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (self.point(i) - self.point(j)).norm() <= link_radius {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

/// Concatenates and deduplicates the Gram samples of traced paths.
pub fn sample_gram(paths: &[FlexPath]) -> GramCloud {
    let mut cloud = GramCloud::default();
    for (pid, path) in paths.iter().enumerate() {
        for s in &path.samples {
            cloud.push(GramSample {
                gram: s.gram,
                path: pid,
                t: s.t,
            });
        }
    }
    cloud
}

/// A fitted polynomial relation: coefficients over the graded-lex monomial
/// listing up to `degree`, unit Euclidean norm, first nonzero coefficient
/// positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyRelation {
    pub degree: usize,
    pub coeffs: Vec<f64>,
}

impl PolyRelation {
    pub fn from_poly(p: &Poly3, degree: usize) -> PolyRelation {
        let mut coeffs = p.to_coeffs(degree);
        let norm = coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 0.0 {
            for c in coeffs.iter_mut() {
                *c /= norm;
            }
        }
        if let Some(first) = coeffs.iter().find(|c| c.abs() > 1e-14) {
            if *first < 0.0 {
                for c in coeffs.iter_mut() {
                    *c = -*c;
                }
            }
        }
        PolyRelation { degree, coeffs }
    }

    pub fn to_poly(&self) -> Poly3 {
        Poly3::from_coeffs(self.degree, &self.coeffs)
    }

    pub fn eval(&self, g: &GramMatrix) -> f64 {
        self.to_poly().eval(g.g11, g.g12, g.g22)
    }
}

/// Least-squares recovery of a minimal generating set of polynomial
/// relations of total degree at most `max_degree`.
///
/// Degree by degree, the evaluation matrix of all monomials on the centered
/// and isotropically scaled cloud is assembled; its numerical nullspace
/// (singular values below `svd_threshold x largest`) is computed, the span
/// of monomial multiples of lower-degree relations is projected out, and the
/// genuinely new directions are kept. Relations are reported in the original
/// coordinates.
pub fn fit_relations(
    cloud: &GramCloud,
    max_degree: usize,
    svd_threshold: f64,
) -> Result<Vec<PolyRelation>, GramSetError> {
    let need = 2 * monomial_count(max_degree);
    if cloud.len() < need {
        return Err(GramSetError::CloudTooSmall {
            need,
            got: cloud.len(),
        });
    }
    let n = cloud.len();
    let mut mean = Vector3::zeros();
    for i in 0..n {
        mean += cloud.point(i);
    }
    mean /= n as f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        scale = scale.max((cloud.point(i) - mean).amax());
    }
    if scale == 0.0 {
        scale = 1.0;
    }
    let scaled: Vec<Vector3<f64>> = (0..n).map(|i| (cloud.point(i) - mean) / scale).collect();

    // Relations already found, in scaled coordinates, with their degrees.
    let mut found: Vec<(Poly3, usize)> = Vec::new();
    for d in 0..=max_degree {
        let mons = monomials(d);
        let m = mons.len();
        let mut vand = DMatrix::zeros(n, m);
        for (row, p) in scaled.iter().enumerate() {
            for (col, &(i, j, k)) in mons.iter().enumerate() {
                vand[(row, col)] =
                    p.x.powi(i as i32) * p.y.powi(j as i32) * p.z.powi(k as i32);
            }
        }
        let svd = vand.svd(false, true);
        let vt = svd.v_t.expect("v requested");
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let mut null_cols: Vec<usize> = Vec::new();
        for (i, &sv) in svd.singular_values.iter().enumerate() {
            if sv <= svd_threshold * smax {
                null_cols.push(i);
            }
        }
        if null_cols.is_empty() {
            continue;
        }
        let mut null_basis = DMatrix::zeros(m, null_cols.len());
        for (out, &i) in null_cols.iter().enumerate() {
            for col in 0..m {
                null_basis[(col, out)] = vt[(i, col)];
            }
        }

        // Span of monomial multiples of relations found at lower degrees.
        let mut known: Vec<Vec<f64>> = Vec::new();
        for (rel, rel_deg) in &found {
            for &(i, j, k) in &monomials(d - rel_deg) {
                let mut mono = Poly3::constant(1.0);
                mono = mono.mul(&Poly3::variable(0).pow(i));
                mono = mono.mul(&Poly3::variable(1).pow(j));
                mono = mono.mul(&Poly3::variable(2).pow(k));
                known.push(rel.mul(&mono).to_coeffs(d));
            }
        }
        let fresh = if known.is_empty() {
            null_basis
        } else {
            let km = DMatrix::from_fn(m, known.len(), |r, c| known[c][r]);
            let ksvd = km.clone().svd(true, false);
            let ku = ksvd.u.expect("u requested");
            let kmax = ksvd.singular_values.iter().cloned().fold(0.0f64, f64::max);
            let kcols: Vec<usize> = (0..ksvd.singular_values.len())
                .filter(|&i| ksvd.singular_values[i] > 1e-10 * kmax)
                .collect();
            let mut q = DMatrix::zeros(m, kcols.len());
            for (out, &i) in kcols.iter().enumerate() {
                q.set_column(out, &ku.column(i));
            }
            &null_basis - &q * (q.transpose() * &null_basis)
        };
        // Independent directions that survive the projection.
        let fsvd = fresh.clone().svd(true, false);
        let fu = fsvd.u.expect("u requested");
        for (i, &sv) in fsvd.singular_values.iter().enumerate() {
            if sv > 0.5 {
                let coeffs: Vec<f64> = (0..m).map(|r| fu[(r, i)]).collect();
                found.push((Poly3::from_coeffs(d, &coeffs), d));
            }
        }
    }

    // Map back to original coordinates via X -> (X - mean)/scale.
    let subs: Vec<Poly3> = (0..3)
        .map(|axis| {
            Poly3::variable(axis)
                .add(&Poly3::constant(-mean[axis]))
                .scale(1.0 / scale)
        })
        .collect();
    Ok(found
        .into_iter()
        .map(|(rel, deg)| {
            let orig = rel.substitute(&subs[0], &subs[1], &subs[2]);
            PolyRelation::from_poly(&orig, deg)
        })
        .collect())
}

/// Scale-normalized worst-case residual of a relation over a cloud:
/// `max |rel(p)| / (|coeffs| x scale^degree)`.
pub fn relation_residual(rel: &PolyRelation, cloud: &GramCloud) -> f64 {
    let coeff_norm = rel.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt();
    if coeff_norm == 0.0 {
        return 0.0;
    }
    let scale = cloud.coordinate_scale().powi(rel.degree as i32);
    cloud
        .points
        .iter()
        .map(|s| rel.eval(&s.gram).abs())
        .fold(0.0f64, f64::max)
        / (coeff_norm * scale)
}

const LOCAL_MIN_POINTS: usize = 10;

/// Local dimension of one cluster: the number of dominant singular values of
/// the centered matrix of points within `radius` of the cluster's medoid.
pub fn local_dimension(
    cloud: &GramCloud,
    cluster: &[usize],
    radius: f64,
) -> Result<usize, GramSetError> {
    if cluster.is_empty() {
        return Err(GramSetError::EmptyCloud);
    }
    let mut centroid = Vector3::zeros();
    for &i in cluster {
        centroid += cloud.point(i);
    }
    centroid /= cluster.len() as f64;
    let center = cluster
        .iter()
        .copied()
        .min_by(|&a, &b| {
            (cloud.point(a) - centroid)
                .norm()
                .partial_cmp(&(cloud.point(b) - centroid).norm())
                .unwrap()
                .then(a.cmp(&b))
        })
        .unwrap();
    let center_p = cloud.point(center);
    let local: Vec<Vector3<f64>> = cluster
        .iter()
        .filter(|&&i| (cloud.point(i) - center_p).norm() <= radius)
        .map(|&i| cloud.point(i))
        .collect();
    if local.len() < LOCAL_MIN_POINTS {
        return Err(GramSetError::InsufficientLocalPoints {
            need: LOCAL_MIN_POINTS,
            got: local.len(),
        });
    }
    let mut mean = Vector3::zeros();
    for p in &local {
        mean += p;
    }
    mean /= local.len() as f64;
    let mat = DMatrix::from_fn(local.len(), 3, |r, c| local[r][c] - mean[c]);
    let svd = mat.svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    if smax <= 1e-9 * (1.0 + center_p.norm()) {
        return Ok(0);
    }
    Ok(svd
        .singular_values
        .iter()
        .filter(|&&sv| sv > DIMENSION_THRESHOLD * smax)
        .count())
}

/// Local dimension per cluster, using the given clustering link radius.
pub fn local_dimensions(
    cloud: &GramCloud,
    link_radius: f64,
    radius: f64,
) -> Result<Vec<usize>, GramSetError> {
    cloud
        .clusters(link_radius)
        .iter()
        .map(|cl| local_dimension(cloud, cl, radius))
        .collect()
}
