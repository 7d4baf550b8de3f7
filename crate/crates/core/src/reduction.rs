//! Combinatorial reduction of a valid quotient complex to the base case in
//! which every orbit carries a self-edge: empty-triangle collapses and
//! degree-reducing flips, driven by a lexicographically decreasing measure,
//! plus recognition of the terminal cylinder structure and the polarization
//! identity for the basis inner products.

use crate::complex::{Corner, Edge, PeriodicComplex, Triangle};
use crate::lattice::LatticeVector;
use crate::realization::EdgeLengths;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("input complex is invalid: {0}")]
    InvalidInput(String),
    #[error("complex is not a base case: a non-special orbit remains")]
    NotBaseCase,
    #[error("special orbits carry no common self-edge shift")]
    InconsistentSpecialShifts,
    #[error("base-case structure mismatch: {0}")]
    StructureMismatch(String),
    #[error("witness is stale: its edges or face changed")]
    WitnessStale,
    #[error("bounded disk not found within the lift radius cap")]
    DiskNotFound,
    #[error("orbit v{0} is special; flips require a non-special vertex")]
    SpecialVertex(usize),
    #[error("orbit v{orbit} has degree {degree}, flips require at least 4")]
    DegreeTooSmall { orbit: usize, degree: usize },
    #[error("requested diagonal is already an edge")]
    DiagonalExists,
    #[error("orbit index {0} out of range")]
    OrbitOutOfRange(usize),
    #[error("no flippable diagonal at orbit v{orbit}")]
    NoFlippableDiagonal { orbit: usize },
    #[error("move budget {limit} exhausted")]
    FuseExceeded { limit: usize },
    #[error("no stored length for constraint {0}")]
    MissingLength(Edge),
    #[error("internal invariant broken: {0}")]
    InternalInvariant(String),
}

/// Common self-edge shift of the special orbits, canonicalized to the
/// lexicographically least positive choice. `None` when no orbit is special.
pub fn common_special_shift(
    c: &PeriodicComplex,
) -> Result<Option<LatticeVector>, ReductionError> {
    let specials = c.special_orbits();
    let Some(&first) = specials.iter().next() else {
        return Ok(None);
    };
    let mut candidates: BTreeSet<LatticeVector> =
        c.self_edge_shifts(first).into_iter().collect();
    for &orbit in specials.iter().skip(1) {
        let shifts: BTreeSet<LatticeVector> = c.self_edge_shifts(orbit).into_iter().collect();
        candidates = candidates.intersection(&shifts).copied().collect();
    }
    match candidates.into_iter().next() {
        Some(shift) => Ok(Some(shift)),
        None => Err(ReductionError::InconsistentSpecialShifts),
    }
}

/// One cylinder of the base-case decomposition: the self-edge line and the
/// two cross edges to the next line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub line: Edge,
    pub cross_low: Edge,
    pub cross_high: Edge,
}

/// Cylinder decomposition of an all-special quotient: the common self-edge
/// shift, the cyclic order of orbits, and the second basis vector closing
/// the cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaseCaseStructure {
    pub shift: LatticeVector,
    pub transversal: LatticeVector,
    pub orbit_cycle: Vec<usize>,
    pub cylinders: Vec<Cylinder>,
}

/// Triangle incidences per canonical edge, with the data needed to position
/// lifts in the cover.
struct EdgeUses {
    uses: BTreeMap<Edge, Vec<EdgeUse>>,
}

#[derive(Clone, Copy, Debug)]
struct EdgeUse {
    triangle: Triangle,
    slot: usize,
    /// Translate such that the triangle lifted by `t - base` contains the
    /// lift of the canonical edge at translate `t`.
    base: LatticeVector,
    /// True when the slot traverses the edge in its canonical direction.
    forward: bool,
}

impl EdgeUses {
    fn build(c: &PeriodicComplex) -> EdgeUses {
        let mut uses: BTreeMap<Edge, Vec<EdgeUse>> = BTreeMap::new();
        for t in c.triangles() {
            for (slot, (a, b)) in t.directed_edges().into_iter().enumerate() {
                let e = Edge::between(a, b);
                let forward = a.orbit == e.u() && b.shift - a.shift == e.shift();
                let base = if forward { a.shift } else { b.shift };
                uses.entry(e).or_default().push(EdgeUse {
                    triangle: *t,
                    slot,
                    base,
                    forward,
                });
            }
        }
        EdgeUses { uses }
    }

    fn of(&self, e: &Edge) -> &[EdgeUse] {
        self.uses.get(e).map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Lift of a canonical edge at a translate: joins `(e.u, t)` to
/// `(e.v, t + e.shift)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct CoverEdge {
    edge: Edge,
    translate: LatticeVector,
}

impl CoverEdge {
    /// The lift through two explicit corners joined by an edge.
    fn through(a: Corner, b: Corner) -> CoverEdge {
        let edge = Edge::between(a, b);
        let translate = if a.orbit == edge.u() && b.shift - a.shift == edge.shift() {
            a.shift
        } else {
            b.shift
        };
        CoverEdge { edge, translate }
    }
}

/// Recognizes the cylinder decomposition of an all-special complex and
/// returns its combinatorial data. The complex must be valid.
pub fn base_case_structure(c: &PeriodicComplex) -> Result<BaseCaseStructure, ReductionError> {
    let n = c.n_orbits();
    if n == 0 || c.special_orbits().len() != n {
        return Err(ReductionError::NotBaseCase);
    }
    let shift = common_special_shift(c)?.ok_or(ReductionError::NotBaseCase)?;
    let uses = EdgeUses::build(c);

    let mut cur = Corner::new(0, LatticeVector::ZERO);
    let mut orbit_cycle = Vec::with_capacity(n);
    let mut cylinders = Vec::with_capacity(n);
    let mut expected_triangles: BTreeSet<Triangle> = BTreeSet::new();
    let mut seen = BTreeSet::new();
    for _ in 0..n {
        orbit_cycle.push(cur.orbit);
        if !seen.insert(cur.orbit) {
            return Err(ReductionError::StructureMismatch(format!(
                "orbit v{} revisited before the cycle closed",
                cur.orbit
            )));
        }
        let line = Edge::new(cur.orbit, cur.orbit, shift);
        if !c.edges().contains(&line) {
            return Err(ReductionError::StructureMismatch(format!(
                "orbit v{} has no self-edge with the common shift {shift}",
                cur.orbit
            )));
        }
        // Unique triangle traversing the directed lift cur -> cur + shift.
        let use_fwd = uses
            .of(&line)
            .iter()
            .find(|u| u.forward)
            .copied()
            .ok_or_else(|| {
                ReductionError::StructureMismatch(format!("line edge {line} has no forward use"))
            })?;
        let g = cur.shift - use_fwd.base;
        let third = use_fwd.triangle.corners()[(use_fwd.slot + 2) % 3].translated(g);
        let cur_up = cur.translated(shift);
        let third_up = third.translated(shift);
        expected_triangles.insert(Triangle::new([cur, cur_up, third]));
        expected_triangles.insert(Triangle::new([cur_up, third_up, third]));
        cylinders.push(Cylinder {
            line,
            cross_low: Edge::between(cur, third),
            cross_high: Edge::between(cur_up, third),
        });
        cur = third;
    }
    if cur.orbit != 0 {
        return Err(ReductionError::StructureMismatch(
            "line cycle did not return to the starting orbit".into(),
        ));
    }
    let transversal = cur.shift;
    if shift.det_with(&transversal).abs() != 1 {
        return Err(ReductionError::StructureMismatch(format!(
            "shift {shift} and transversal {transversal} do not span the lattice"
        )));
    }
    if &expected_triangles != c.triangles() {
        return Err(ReductionError::StructureMismatch(
            "triangles do not match the cylinder pattern".into(),
        ));
    }
    let mut expected_edges: BTreeSet<Edge> = BTreeSet::new();
    for cyl in &cylinders {
        expected_edges.insert(cyl.line);
        expected_edges.insert(cyl.cross_low);
        expected_edges.insert(cyl.cross_high);
    }
    if &expected_edges != c.edges() {
        return Err(ReductionError::StructureMismatch(
            "edges do not match the cylinder pattern".into(),
        ));
    }
    Ok(BaseCaseStructure {
        shift,
        transversal,
        orbit_cycle,
        cylinders,
    })
}

/// Inner products `(shift, shift)` and `(shift, transversal)` recovered from
/// squared edge lengths alone, via the polarization identity over the
/// cylinders.
pub fn basis_inner_products(
    s: &BaseCaseStructure,
    lengths: &EdgeLengths,
) -> Result<(f64, f64), ReductionError> {
    let get = |e: &Edge| lengths.get(e).ok_or(ReductionError::MissingLength(*e));
    let ll = get(&s.cylinders[0].line)?;
    let mut lm = 0.0;
    for cyl in &s.cylinders {
        lm += get(&cyl.line)? + get(&cyl.cross_low)? - get(&cyl.cross_high)?;
    }
    Ok((ll, 0.5 * lm))
}

/// A null-homotopic three-cycle of edges bounding no face, in a canonical
/// translate- and order-independent form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EmptyTriangleWitness {
    pub corners: [Corner; 3],
}

impl EmptyTriangleWitness {
    fn canonical(corners: [Corner; 3]) -> EmptyTriangleWitness {
        let mut best: Option<[Corner; 3]> = None;
        for anchor in 0..3 {
            let base = corners[anchor].shift;
            let mut cand = corners.map(|c| c.translated(-base));
            cand.sort();
            if best.is_none() || cand < best.unwrap() {
                best = Some(cand);
            }
        }
        EmptyTriangleWitness {
            corners: best.unwrap(),
        }
    }
}

/// Finds the lexicographically least empty triangle: three pairwise joined
/// lifts whose triangle is absent. Three-cycles that do not close up in the
/// cover never arise here, because candidates are assembled from explicit
/// lifts.
pub fn find_empty_triangle(c: &PeriodicComplex) -> Option<EmptyTriangleWitness> {
    let mut best: Option<EmptyTriangleWitness> = None;
    for orbit in 0..c.n_orbits() {
        let origin = Corner::new(orbit, LatticeVector::ZERO);
        let nbrs = c.neighbor_corners(orbit);
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in nbrs.iter().skip(i + 1) {
                if !c.edges().contains(&Edge::between(a, b)) {
                    continue;
                }
                let oriented = Triangle::new([origin, a, b]);
                let reversed = Triangle::new([origin, b, a]);
                if c.triangles().contains(&oriented) || c.triangles().contains(&reversed) {
                    continue;
                }
                let w = EmptyTriangleWitness::canonical([origin, a, b]);
                if best.map_or(true, |cur| w < cur) {
                    best = Some(w);
                }
            }
        }
    }
    best
}

/// Result of a collapse: the new complex and the orbits that were deleted
/// (indices refer to the input complex).
#[derive(Clone, Debug)]
pub struct CollapseOutcome {
    pub complex: PeriodicComplex,
    pub removed_orbits: Vec<usize>,
}

const DISK_RADIUS_CAP: i64 = 64;

/// Replaces the bounded disk enclosed by an empty triangle (and all its
/// lattice translates) with a single face. The disk is located by flood
/// filling cover triangles away from the witness edges inside lift patches
/// of doubling radius.
pub fn collapse_empty_triangle(
    c: &PeriodicComplex,
    w: &EmptyTriangleWitness,
) -> Result<CollapseOutcome, ReductionError> {
    let corners = w.corners;
    let pairs = [
        (corners[0], corners[1]),
        (corners[1], corners[2]),
        (corners[2], corners[0]),
    ];
    for (a, b) in pairs {
        if !c.edges().contains(&Edge::between(a, b)) {
            return Err(ReductionError::WitnessStale);
        }
    }
    let oriented = Triangle::new(corners);
    let reversed = Triangle::new([corners[0], corners[2], corners[1]]);
    if c.triangles().contains(&oriented) || c.triangles().contains(&reversed) {
        return Err(ReductionError::WitnessStale);
    }

    let uses = EdgeUses::build(c);
    let barrier: BTreeSet<CoverEdge> = pairs
        .iter()
        .map(|&(a, b)| CoverEdge::through(a, b))
        .collect();

    let seed = CoverEdge::through(corners[0], corners[1]);
    let seed_uses = uses.of(&seed.edge);
    if seed_uses.len() != 2 {
        return Err(ReductionError::InvalidInput(format!(
            "edge {} not in exactly two triangles",
            seed.edge
        )));
    }

    let mut radius = corners
        .iter()
        .map(|c| c.shift.m.abs().max(c.shift.k.abs()))
        .max()
        .unwrap()
        + 3;
    let interior = loop {
        let sides: Vec<Option<BTreeSet<(Triangle, LatticeVector)>>> = seed_uses
            .iter()
            .map(|u| flood_fill(&uses, &barrier, (u.triangle, seed.translate - u.base), radius))
            .collect();
        match (&sides[0], &sides[1]) {
            (Some(inside), None) => break inside.clone(),
            (None, Some(inside)) => break inside.clone(),
            (Some(_), Some(_)) => {
                return Err(ReductionError::StructureMismatch(
                    "both sides of the witness cycle are bounded".into(),
                ))
            }
            (None, None) => {
                radius *= 2;
                if radius > DISK_RADIUS_CAP {
                    return Err(ReductionError::DiskNotFound);
                }
            }
        }
    };

    // Orbits strictly inside the disk.
    let witness_lifts: BTreeSet<Corner> = corners.iter().copied().collect();
    let mut removed: BTreeSet<usize> = BTreeSet::new();
    for (tri, g) in &interior {
        for corner in tri.corners() {
            let lift = corner.translated(*g);
            if !witness_lifts.contains(&lift) {
                removed.insert(lift.orbit);
            }
        }
    }
    if removed.is_empty() {
        return Err(ReductionError::InternalInvariant(
            "disk interior contains no vertex".into(),
        ));
    }
    for corner in &corners {
        if removed.contains(&corner.orbit) {
            return Err(ReductionError::InternalInvariant(
                "witness orbit marked for removal".into(),
            ));
        }
    }

    // Orientation of the replacement face: follow the directions in which the
    // interior traverses the witness edges.
    let mut succ: BTreeMap<Corner, Corner> = BTreeMap::new();
    for &(a, b) in &pairs {
        let ce = CoverEdge::through(a, b);
        let interior_use = uses
            .of(&ce.edge)
            .iter()
            .find(|u| interior.contains(&(u.triangle, ce.translate - u.base)))
            .ok_or_else(|| {
                ReductionError::InternalInvariant("witness edge has no interior side".into())
            })?;
        let (from, to) = if interior_use.forward {
            (
                Corner::new(ce.edge.u(), ce.translate),
                Corner::new(ce.edge.v(), ce.translate + ce.edge.shift()),
            )
        } else {
            (
                Corner::new(ce.edge.v(), ce.translate + ce.edge.shift()),
                Corner::new(ce.edge.u(), ce.translate),
            )
        };
        succ.insert(from, to);
    }
    let c0 = corners[0];
    let c1 = *succ
        .get(&c0)
        .ok_or_else(|| ReductionError::InternalInvariant("witness cycle broken".into()))?;
    let c2 = *succ
        .get(&c1)
        .ok_or_else(|| ReductionError::InternalInvariant("witness cycle broken".into()))?;
    if succ.get(&c2) != Some(&c0) {
        return Err(ReductionError::InternalInvariant(
            "witness cycle does not close".into(),
        ));
    }

    // Rebuild on the surviving orbits.
    let mut remap = vec![usize::MAX; c.n_orbits()];
    let mut labels = Vec::new();
    let mut next = 0usize;
    for o in 0..c.n_orbits() {
        if !removed.contains(&o) {
            remap[o] = next;
            labels.push(c.labels()[o].clone());
            next += 1;
        }
    }
    let keep_edge = |e: &Edge| !removed.contains(&e.u()) && !removed.contains(&e.v());
    let edges: BTreeSet<Edge> = c
        .edges()
        .iter()
        .filter(|e| keep_edge(e))
        .map(|e| Edge::new(remap[e.u()], remap[e.v()], e.shift()))
        .collect();
    let aux: BTreeSet<Edge> = c
        .aux_constraints()
        .iter()
        .filter(|e| keep_edge(e))
        .map(|e| Edge::new(remap[e.u()], remap[e.v()], e.shift()))
        .collect();
    let mut triangles: BTreeSet<Triangle> = c
        .triangles()
        .iter()
        .filter(|t| t.corners().iter().all(|cr| !removed.contains(&cr.orbit)))
        .map(|t| Triangle::new(t.corners().map(|cr| Corner::new(remap[cr.orbit], cr.shift))))
        .collect();
    triangles.insert(Triangle::new(
        [c0, c1, c2].map(|cr| Corner::new(remap[cr.orbit], cr.shift)),
    ));

    let complex = PeriodicComplex::new(next, edges, triangles, aux).with_labels(labels);
    let report = complex.validate();
    if !report.is_valid() {
        return Err(ReductionError::InternalInvariant(format!(
            "collapse produced an invalid complex: {}",
            report.first().unwrap()
        )));
    }
    Ok(CollapseOutcome {
        complex,
        removed_orbits: removed.into_iter().collect(),
    })
}

/// Flood fill over cover triangles, blocked by the witness edges, bounded by
/// the patch radius. `None` means the fill escaped the patch (unbounded
/// side, or radius too small).
fn flood_fill(
    uses: &EdgeUses,
    barrier: &BTreeSet<CoverEdge>,
    start: (Triangle, LatticeVector),
    radius: i64,
) -> Option<BTreeSet<(Triangle, LatticeVector)>> {
    let in_patch = |tri: &Triangle, g: &LatticeVector| {
        tri.corners().iter().all(|c| {
            let s = c.shift + *g;
            s.m.abs() <= radius && s.k.abs() <= radius
        })
    };
    if !in_patch(&start.0, &start.1) {
        return None;
    }
    let mut visited: BTreeSet<(Triangle, LatticeVector)> = BTreeSet::new();
    let mut stack = vec![start];
    while let Some((tri, g)) = stack.pop() {
        if !visited.insert((tri, g)) {
            continue;
        }
        for (slot, (a, b)) in tri.directed_edges().into_iter().enumerate() {
            let ce = CoverEdge::through(a.translated(g), b.translated(g));
            if barrier.contains(&ce) {
                continue;
            }
            // The other incidence of this edge.
            let here_forward = a.orbit == ce.edge.u()
                && (b.shift + g) - (a.shift + g) == ce.edge.shift();
            let other = uses
                .of(&ce.edge)
                .iter()
                .find(|u| u.forward != here_forward)
                .copied();
            let Some(other) = other else { continue };
            let neighbor = (other.triangle, ce.translate - other.base);
            if visited.contains(&neighbor) {
                continue;
            }
            if !in_patch(&neighbor.0, &neighbor.1) {
                return None; // escaped the patch
            }
            stack.push(neighbor);
            let _ = slot;
        }
    }
    Some(visited)
}

/// Diagonal flip at a non-special vertex of degree at least four: the two
/// faces on either side of the chosen link edge are re-split along the other
/// diagonal, dropping the vertex degree by one.
pub fn flip(
    c: &PeriodicComplex,
    orbit: usize,
    diagonal_index: usize,
) -> Result<PeriodicComplex, ReductionError> {
    if orbit >= c.n_orbits() {
        return Err(ReductionError::OrbitOutOfRange(orbit));
    }
    if c.special_orbits().contains(&orbit) {
        return Err(ReductionError::SpecialVertex(orbit));
    }
    let link = c
        .link_cycle(orbit)
        .ok_or_else(|| ReductionError::InvalidInput("vertex link is not a cycle".into()))?;
    let d = link.len();
    if d < 4 {
        return Err(ReductionError::DegreeTooSmall { orbit, degree: d });
    }
    let v1 = link[diagonal_index % d];
    let v2 = link[(diagonal_index + 1) % d];
    let v3 = link[(diagonal_index + 2) % d];
    let diagonal = Edge::between(v1, v3);
    if c.edges().contains(&diagonal) {
        return Err(ReductionError::DiagonalExists);
    }
    let center = Corner::new(orbit, LatticeVector::ZERO);
    let old_a = Triangle::new([center, v1, v2]);
    let old_b = Triangle::new([center, v2, v3]);
    if !c.triangles().contains(&old_a) || !c.triangles().contains(&old_b) {
        return Err(ReductionError::InternalInvariant(
            "link fan triangles missing".into(),
        ));
    }
    let mut edges = c.edges().clone();
    edges.remove(&Edge::between(center, v2));
    edges.insert(diagonal);
    let mut triangles = c.triangles().clone();
    triangles.remove(&old_a);
    triangles.remove(&old_b);
    triangles.insert(Triangle::new([center, v1, v3]));
    triangles.insert(Triangle::new([v1, v2, v3]));
    let out = PeriodicComplex::new(c.n_orbits(), edges, triangles, c.aux_constraints().clone())
        .with_labels(c.labels().to_vec());
    let report = out.validate();
    if !report.is_valid() {
        return Err(ReductionError::InternalInvariant(format!(
            "flip produced an invalid complex: {}",
            report.first().unwrap()
        )));
    }
    Ok(out)
}

/// Which diagonal a flip picks when several are admissible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagonalStrategy {
    /// First cyclic index whose diagonal is not yet an edge.
    #[default]
    FirstValid,
    /// Last such index; useful to probe order sensitivity of traces.
    LastValid,
}

/// One reduction move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ReductionMove {
    Collapse {
        removed_orbits: Vec<usize>,
        witness: [Corner; 3],
    },
    Flip {
        orbit: usize,
        diagonal_index: usize,
    },
}

/// Record of a full reduction run: the moves applied, the measure
/// `(non-special orbit count, min non-special degree)` before each move,
/// and the final base-case complex.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub moves: Vec<ReductionMove>,
    pub measures: Vec<(usize, usize)>,
    pub final_complex: PeriodicComplex,
}

fn measure(c: &PeriodicComplex) -> Option<(usize, usize)> {
    let specials = c.special_orbits();
    let non_special: Vec<usize> = (0..c.n_orbits())
        .filter(|o| !specials.contains(o))
        .collect();
    if non_special.is_empty() {
        return None;
    }
    let d = non_special.iter().map(|&o| c.degree(o)).min().unwrap();
    Some((non_special.len(), d))
}

/// Runs collapses and flips until every orbit is special, verifying after
/// each move that the complex stays valid and the measure strictly drops.
pub fn reduce(
    c: &PeriodicComplex,
    strategy: DiagonalStrategy,
) -> Result<ReductionTrace, ReductionError> {
    let report = c.validate();
    if !report.is_valid() {
        return Err(ReductionError::InvalidInput(
            report.first().unwrap().to_string(),
        ));
    }
    let fuse = 10 * (c.n_orbits() + c.edges().len());
    let mut cur = c.clone();
    let mut moves = Vec::new();
    let mut measures = Vec::new();
    while let Some(m) = measure(&cur) {
        if moves.len() >= fuse {
            return Err(ReductionError::FuseExceeded { limit: fuse });
        }
        measures.push(m);
        if let Some(w) = find_empty_triangle(&cur) {
            let outcome = collapse_empty_triangle(&cur, &w)?;
            moves.push(ReductionMove::Collapse {
                removed_orbits: outcome.removed_orbits,
                witness: w.corners,
            });
            cur = outcome.complex;
        } else {
            let specials = cur.special_orbits();
            let u = (0..cur.n_orbits())
                .filter(|o| !specials.contains(o))
                .min_by_key(|&o| (cur.degree(o), o))
                .expect("non-special orbit exists");
            let d = cur.degree(u);
            let indices: Vec<usize> = match strategy {
                DiagonalStrategy::FirstValid => (0..d).collect(),
                DiagonalStrategy::LastValid => (0..d).rev().collect(),
            };
            let link = cur
                .link_cycle(u)
                .ok_or_else(|| ReductionError::InvalidInput("link is not a cycle".into()))?;
            let mut flipped = None;
            for i in indices {
                let diagonal = Edge::between(link[i], link[(i + 2) % d]);
                if cur.edges().contains(&diagonal) {
                    continue;
                }
                flipped = Some((flip(&cur, u, i)?, i));
                break;
            }
            let Some((next, i)) = flipped else {
                return Err(ReductionError::NoFlippableDiagonal { orbit: u });
            };
            moves.push(ReductionMove::Flip {
                orbit: u,
                diagonal_index: i,
            });
            cur = next;
        }
        let after = measure(&cur);
        let decreased = match after {
            None => true,
            Some(m2) => m2 < m,
        };
        if !decreased {
            return Err(ReductionError::InternalInvariant(format!(
                "measure did not decrease: {m:?} -> {after:?}"
            )));
        }
    }
    // The terminal complex must carry the cylinder structure.
    base_case_structure(&cur)?;
    Ok(ReductionTrace {
        moves,
        measures,
        final_complex: cur,
    })
}
