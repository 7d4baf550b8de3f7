//! Quotient representation of a doubly periodic simplicial plane.
//!
//! The infinite complex is never stored. All data lives on the finite torus
//! quotient: a set of vertex orbits, edges labelled by lattice shifts, and
//! triangles whose corners carry shifts. A lift of orbit `u` is written
//! `(u, t)` for a lattice translate `t`; the edge `(u, v, s)` joins `(u, t)`
//! to `(v, t + s)` for every `t`.

use crate::lattice::{HermiteForm, LatticeMatrix, LatticeVector};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use thiserror::Error;

/// A lift of a vertex orbit in the infinite cover: orbit index plus lattice
/// translate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Corner {
    pub orbit: usize,
    pub shift: LatticeVector,
}

impl Corner {
    pub fn new(orbit: usize, shift: LatticeVector) -> Self {
        Corner { orbit, shift }
    }

    pub fn translated(&self, by: LatticeVector) -> Corner {
        Corner::new(self.orbit, self.shift + by)
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}{}", self.orbit, self.shift)
    }
}

/// An edge orbit in canonical form: `u < v`, or `u == v` with the shift
/// lexicographically positive. `(u, v, s)` and `(v, u, -s)` name the same
/// orbit and canonicalize identically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    u: usize,
    v: usize,
    shift: LatticeVector,
}

impl Edge {
    pub fn new(u: usize, v: usize, shift: LatticeVector) -> Edge {
        if u > v || (u == v && !shift.is_lex_positive() && !shift.is_zero()) {
            Edge {
                u: v,
                v: u,
                shift: -shift,
            }
        } else {
            Edge { u, v, shift }
        }
    }

    /// Canonical edge through two explicit lifts.
    pub fn between(a: Corner, b: Corner) -> Edge {
        Edge::new(a.orbit, b.orbit, b.shift - a.shift)
    }

    pub fn u(&self) -> usize {
        self.u
    }

    pub fn v(&self) -> usize {
        self.v
    }

    pub fn shift(&self) -> LatticeVector {
        self.shift
    }

    pub fn is_self_edge(&self) -> bool {
        self.u == self.v
    }

    /// The two endpoints of the base lift, as corners.
    pub fn corners(&self) -> (Corner, Corner) {
        (
            Corner::new(self.u, LatticeVector::ZERO),
            Corner::new(self.v, self.shift),
        )
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[v{} v{}{}]", self.u, self.v, self.shift)
    }
}

/// A triangle orbit. Canonical form: the first corner has shift zero and,
/// among the three cyclic rotations (which preserve orientation), the
/// lexicographically least is stored. Two triangles are equal exactly when
/// they differ by a common lattice translation of all three corners.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triangle {
    corners: [Corner; 3],
}

impl Triangle {
    pub fn new(corners: [Corner; 3]) -> Triangle {
        let mut best: Option<[Corner; 3]> = None;
        for r in 0..3 {
            let rot = [corners[r], corners[(r + 1) % 3], corners[(r + 2) % 3]];
            let base = rot[0].shift;
            let cand = [
                Corner::new(rot[0].orbit, LatticeVector::ZERO),
                rot[1].translated(-base),
                rot[2].translated(-base),
            ];
            if best.is_none() || cand < best.unwrap() {
                best = Some(cand);
            }
        }
        Triangle {
            corners: best.unwrap(),
        }
    }

    pub fn corners(&self) -> &[Corner; 3] {
        &self.corners
    }

    /// The three directed boundary edges, in orientation order.
    pub fn directed_edges(&self) -> [(Corner, Corner); 3] {
        let c = &self.corners;
        [(c[0], c[1]), (c[1], c[2]), (c[2], c[0])]
    }

    pub fn is_degenerate(&self) -> bool {
        let c = &self.corners;
        c[0] == c[1] || c[1] == c[2] || c[0] == c[2]
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{} {} {}]",
            self.corners[0], self.corners[1], self.corners[2]
        )
    }
}

/// Torus quotient of a doubly periodic simplicial plane, plus auxiliary
/// distance constraints that are not part of the surface.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicComplex {
    n_orbits: usize,
    labels: Vec<Option<String>>,
    edges: BTreeSet<Edge>,
    triangles: BTreeSet<Triangle>,
    aux: BTreeSet<Edge>,
}

#[derive(Debug, Error)]
pub enum ComplexError {
    #[error("basis-change matrix is singular")]
    SingularMatrix,
    #[error("orbit index {0} out of range")]
    OrbitOutOfRange(usize),
}

impl PeriodicComplex {
    pub fn new(
        n_orbits: usize,
        edges: impl IntoIterator<Item = Edge>,
        triangles: impl IntoIterator<Item = Triangle>,
        aux: impl IntoIterator<Item = Edge>,
    ) -> PeriodicComplex {
        PeriodicComplex {
            n_orbits,
            labels: vec![None; n_orbits],
            edges: edges.into_iter().collect(),
            triangles: triangles.into_iter().collect(),
            aux: aux.into_iter().collect(),
        }
    }

    pub fn with_labels(mut self, labels: Vec<Option<String>>) -> PeriodicComplex {
        assert_eq!(labels.len(), self.n_orbits);
        self.labels = labels;
        self
    }

    pub fn n_orbits(&self) -> usize {
        self.n_orbits
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn triangles(&self) -> &BTreeSet<Triangle> {
        &self.triangles
    }

    pub fn aux_constraints(&self) -> &BTreeSet<Edge> {
        &self.aux
    }

    /// Surface edges followed by auxiliary constraints, in canonical order.
    /// This is the fixed constraint ordering used by residual vectors and
    /// Jacobians.
    pub fn constraint_edges(&self) -> Vec<Edge> {
        self.edges.iter().chain(self.aux.iter()).copied().collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_orbits as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Lexicographically positive shifts of the self-edges at an orbit.
    pub fn self_edge_shifts(&self, orbit: usize) -> Vec<LatticeVector> {
        self.edges
            .iter()
            .filter(|e| e.u == orbit && e.v == orbit)
            .map(|e| e.shift)
            .collect()
    }

    /// Orbits joined by an edge to another lift of themselves.
    pub fn special_orbits(&self) -> BTreeSet<usize> {
        self.edges
            .iter()
            .filter(|e| e.is_self_edge())
            .map(|e| e.u)
            .collect()
    }

    /// Neighbors of the lift `(orbit, 0)` in the cover, as corners, sorted.
    pub fn neighbor_corners(&self, orbit: usize) -> Vec<Corner> {
        let mut out = Vec::new();
        for e in &self.edges {
            if e.u == orbit {
                out.push(Corner::new(e.v, e.shift));
            }
            if e.v == orbit {
                out.push(Corner::new(e.u, -e.shift));
            }
        }
        out.sort();
        out
    }

    /// Number of cover edges incident to a lift of the orbit.
    pub fn degree(&self, orbit: usize) -> usize {
        self.neighbor_corners(orbit).len()
    }

    /// The link of a lift of `orbit`, as the cyclic sequence of neighboring
    /// corners in orientation order. `None` if the link does not close into a
    /// single cycle.
    pub fn link_cycle(&self, orbit: usize) -> Option<Vec<Corner>> {
        // Each triangle corner at (orbit, 0) contributes one directed link
        // edge from the next corner to the one after, in orientation order.
        let mut succ: BTreeMap<Corner, Corner> = BTreeMap::new();
        for t in &self.triangles {
            let c = t.corners();
            for j in 0..3 {
                if c[j].orbit == orbit {
                    let base = c[j].shift;
                    let from = c[(j + 1) % 3].translated(-base);
                    let to = c[(j + 2) % 3].translated(-base);
                    if succ.insert(from, to).is_some() {
                        return None; // fan repeated: non-manifold
                    }
                }
            }
        }
        if succ.is_empty() {
            return None;
        }
        let start = *succ.keys().next().unwrap();
        let mut cycle = vec![start];
        let mut cur = start;
        loop {
            let Some(&next) = succ.get(&cur) else {
                return None;
            };
            if next == start {
                break;
            }
            cycle.push(next);
            cur = next;
            if cycle.len() > succ.len() {
                return None;
            }
        }
        if cycle.len() != succ.len() {
            return None; // more than one cycle
        }
        Some(cycle)
    }

    /// Quotient of the same periodic plane by the sublattice spanned by the
    /// columns of `matrix`. Orbits multiply by `|det|`; shifts are rewritten
    /// in the sublattice basis.
    pub fn change_of_basis(&self, matrix: &LatticeMatrix) -> Result<Refinement, ComplexError> {
        let hermite = HermiteForm::of(matrix).ok_or(ComplexError::SingularMatrix)?;
        let reps = hermite.representatives();
        let rep_index: BTreeMap<LatticeVector, usize> = reps
            .iter()
            .enumerate()
            .map(|(i, &r)| (r, i))
            .collect();
        let n_reps = reps.len();

        let locate = |orbit: usize, translate: LatticeVector| -> Corner {
            let r = hermite.reduce(translate);
            let in_sub = matrix
                .solve(translate - r)
                .expect("reduced difference lies in the sublattice");
            Corner::new(orbit * n_reps + rep_index[&r], in_sub)
        };

        let mut edges = BTreeSet::new();
        for e in &self.edges {
            for &r in &reps {
                let from = locate(e.u, r);
                let to = locate(e.v, r + e.shift);
                edges.insert(Edge::new(from.orbit, to.orbit, to.shift - from.shift));
            }
        }
        let mut aux = BTreeSet::new();
        for e in &self.aux {
            for &r in &reps {
                let from = locate(e.u, r);
                let to = locate(e.v, r + e.shift);
                aux.insert(Edge::new(from.orbit, to.orbit, to.shift - from.shift));
            }
        }
        let mut triangles = BTreeSet::new();
        for t in &self.triangles {
            for &r in &reps {
                let cs = t.corners().map(|c| {
                    let loc = locate(c.orbit, r + c.shift);
                    Corner::new(loc.orbit, loc.shift)
                });
                triangles.insert(Triangle::new(cs));
            }
        }
        let mut labels = Vec::with_capacity(self.n_orbits * n_reps);
        for orbit in 0..self.n_orbits {
            for r in &reps {
                labels.push(
                    self.labels[orbit]
                        .as_ref()
                        .map(|l| format!("{l}+{r}")),
                );
            }
        }
        let complex = PeriodicComplex {
            n_orbits: self.n_orbits * n_reps,
            labels,
            edges,
            triangles,
            aux,
        };
        Ok(Refinement {
            complex,
            matrix: *matrix,
            reps,
        })
    }

    /// Finite piece of the infinite cover over a rectangle of lattice cells.
    /// Simplices are included only when all their lifts stay in the range.
    pub fn lift_patch(&self, range: &CellRange) -> Patch {
        let mut vertices = Vec::new();
        let mut index = BTreeMap::new();
        for t in range.cells() {
            for orbit in 0..self.n_orbits {
                index.insert((orbit, t), vertices.len());
                vertices.push((orbit, t));
            }
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            for t in range.cells() {
                let head = t + e.shift;
                if range.contains(head) {
                    edges.push((index[&(e.u, t)], index[&(e.v, head)], *e, t));
                }
            }
        }
        let mut triangles = Vec::new();
        for tri in &self.triangles {
            for t in range.cells() {
                let cs = tri.corners().map(|c| c.shift + t);
                if cs.iter().all(|&s| range.contains(s)) {
                    let idx = [
                        index[&(tri.corners()[0].orbit, cs[0])],
                        index[&(tri.corners()[1].orbit, cs[1])],
                        index[&(tri.corners()[2].orbit, cs[2])],
                    ];
                    triangles.push((idx, *tri, t));
                }
            }
        }
        Patch {
            vertices,
            edges,
            triangles,
        }
    }

    /// Checks every structural invariant and reports all violations.
    pub fn validate(&self) -> ValidationReport {
        self.validate_with(CellRange::centered(5, 5))
    }

    /// Like [`validate`](Self::validate) with an explicit patch range for the
    /// heuristic cover checks.
    pub fn validate_with(&self, patch_range: CellRange) -> ValidationReport {
        let mut violations = Vec::new();

        for e in &self.edges {
            if e.u >= self.n_orbits || e.v >= self.n_orbits {
                violations.push(Violation::EdgeEndpointOutOfRange { edge: *e });
            }
            if e.is_self_edge() {
                if e.shift.is_zero() {
                    violations.push(Violation::SelfEdgeZeroShift { edge: *e });
                } else if !e.shift.is_primitive() {
                    violations.push(Violation::SelfEdgeNotPrimitive { edge: *e });
                }
            }
        }
        for e in &self.aux {
            if e.u >= self.n_orbits || e.v >= self.n_orbits {
                violations.push(Violation::AuxEndpointOutOfRange { edge: *e });
            }
            if e.is_self_edge() && e.shift.is_zero() {
                violations.push(Violation::AuxZeroLength { edge: *e });
            }
            if self.edges.contains(e) {
                violations.push(Violation::AuxDuplicatesSurface { edge: *e });
            }
        }
        for t in &self.triangles {
            if t.corners().iter().any(|c| c.orbit >= self.n_orbits) {
                violations.push(Violation::TriangleCornerOutOfRange { triangle: *t });
                continue;
            }
            if t.is_degenerate() {
                violations.push(Violation::DegenerateTriangle { triangle: *t });
                continue;
            }
            for (a, b) in t.directed_edges() {
                let e = Edge::between(a, b);
                if !self.edges.contains(&e) {
                    violations.push(Violation::MissingBoundaryEdge {
                        triangle: *t,
                        edge: e,
                    });
                }
            }
        }
        if !violations.is_empty() {
            // Structural references are broken; the global checks below
            // assume well-formed simplices.
            return ValidationReport { violations };
        }

        // Closed oriented surface: every edge is used exactly twice, once in
        // each direction.
        let mut use_count: BTreeMap<Edge, (usize, usize)> = BTreeMap::new();
        for t in &self.triangles {
            for (a, b) in t.directed_edges() {
                let e = Edge::between(a, b);
                let entry = use_count.entry(e).or_insert((0, 0));
                let forward = a.orbit == e.u && b.shift - a.shift == e.shift;
                if forward {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        for e in &self.edges {
            let (fwd, bwd) = use_count.get(e).copied().unwrap_or((0, 0));
            if fwd + bwd != 2 {
                violations.push(Violation::EdgeFaceCount {
                    edge: *e,
                    count: fwd + bwd,
                });
            } else if fwd != 1 || bwd != 1 {
                violations.push(Violation::EdgeOrientation { edge: *e });
            }
        }

        // Manifold condition: each vertex link is a single cycle of the full
        // degree.
        for orbit in 0..self.n_orbits {
            match self.link_cycle(orbit) {
                Some(cycle) if cycle.len() == self.degree(orbit) => {}
                _ => violations.push(Violation::LinkNotSingleCycle { orbit }),
            }
        }

        let chi = self.euler_characteristic();
        if chi != 0 {
            violations.push(Violation::EulerCharacteristic { chi });
        }

        // The unfolded cover is connected exactly when the quotient graph is
        // connected and the shift holonomy of its cycles spans the whole
        // lattice. This is a finite, exact check.
        if let Some(defect) = self.cover_connectivity_defect() {
            violations.push(defect);
        }

        // Heuristic planarity probe on a finite patch: in a plane every patch
        // component is simply connected, so each component must have Euler
        // characteristic one.
        if violations.is_empty() && !patch_range.is_empty() {
            let patch = self.lift_patch(&patch_range);
            for (component, chi) in patch.component_characteristics() {
                if chi != 1 {
                    violations.push(Violation::PatchComponentNotDisklike { component, chi });
                }
            }
        }

        ValidationReport { violations }
    }

    fn cover_connectivity_defect(&self) -> Option<Violation> {
        if self.n_orbits == 0 {
            return Some(Violation::CoverDisconnected);
        }
        // Spanning tree potentials on the quotient graph.
        let mut potential: Vec<Option<LatticeVector>> = vec![None; self.n_orbits];
        potential[0] = Some(LatticeVector::ZERO);
        let mut queue = VecDeque::from([0usize]);
        let mut holonomy: Vec<LatticeVector> = Vec::new();
        let mut adj: BTreeMap<usize, Vec<(usize, LatticeVector)>> = BTreeMap::new();
        for e in &self.edges {
            adj.entry(e.u).or_default().push((e.v, e.shift));
            adj.entry(e.v).or_default().push((e.u, -e.shift));
        }
        let mut visited = 1usize;
        while let Some(u) = queue.pop_front() {
            let pu = potential[u].unwrap();
            for &(v, s) in adj.get(&u).into_iter().flatten() {
                match potential[v] {
                    None => {
                        potential[v] = Some(pu + s);
                        visited += 1;
                        queue.push_back(v);
                    }
                    Some(pv) => {
                        let h = pu + s - pv;
                        if !h.is_zero() {
                            holonomy.push(h);
                        }
                    }
                }
            }
        }
        if visited != self.n_orbits {
            return Some(Violation::CoverDisconnected);
        }
        // The holonomy vectors must generate the full lattice.
        let mut g = LatticeVector::ZERO; // running Hermite pair (g, (0, kk))
        let mut kk: i64 = 0;
        for h in holonomy {
            // Fold h into a two-generator normal form via gcd steps.
            let (mut a, mut b) = (g, h);
            while b.m != 0 {
                if a.m == 0 {
                    std::mem::swap(&mut a, &mut b);
                    continue;
                }
                let q = b.m.div_euclid(a.m);
                b = b - LatticeVector::new(q * a.m, q * a.k);
                if b.m != 0 {
                    std::mem::swap(&mut a, &mut b);
                }
            }
            g = a;
            kk = crate::lattice::gcd(kk.unsigned_abs(), b.k.unsigned_abs()) as i64;
        }
        let full = g.m.abs() == 1 && kk != 0 && {
            // index = |m| * kk after triangularization
            (g.m.abs() * kk).abs() == 1
        };
        if full {
            None
        } else {
            Some(Violation::CoverDisconnected)
        }
    }

    /// Backtracking isomorphism test under orbit relabeling and per-orbit
    /// retranslation, with the lattice basis fixed.
    pub fn is_isomorphic(&self, other: &PeriodicComplex) -> bool {
        if self.n_orbits != other.n_orbits
            || self.edges.len() != other.edges.len()
            || self.triangles.len() != other.triangles.len()
            || self.aux.len() != other.aux.len()
        {
            return false;
        }
        if self.n_orbits == 0 {
            return true;
        }
        let mut mapping: Vec<Option<Corner>> = vec![None; self.n_orbits];
        for target in 0..other.n_orbits {
            mapping[0] = Some(Corner::new(target, LatticeVector::ZERO));
            if self.extend_isomorphism(other, &mut mapping, 1) {
                return true;
            }
            mapping[0] = None;
        }
        false
    }

    fn extend_isomorphism(
        &self,
        other: &PeriodicComplex,
        mapping: &mut Vec<Option<Corner>>,
        assigned: usize,
    ) -> bool {
        if assigned == self.n_orbits {
            return self.mapping_consistent(other, mapping);
        }
        // Pick an unassigned orbit adjacent to an assigned one, if possible.
        let next = (0..self.n_orbits)
            .filter(|&o| mapping[o].is_none())
            .min_by_key(|&o| {
                let attached = self.neighbor_corners(o).iter().any(|c| mapping[c.orbit].is_some());
                (!attached, o)
            })
            .unwrap();
        // Candidate images: constrain via one edge to an assigned neighbor,
        // else try everything.
        let anchor = self
            .neighbor_corners(next)
            .into_iter()
            .find(|c| mapping[c.orbit].is_some());
        let mut candidates = Vec::new();
        match anchor {
            Some(nb) => {
                // cover edge (next,0) -- (nb.orbit, nb.shift); image must be an
                // edge at image(nb).
                let img_nb = mapping[nb.orbit].unwrap().translated(nb.shift);
                for c in other.neighbor_corners(img_nb.orbit) {
                    // image of (next,0) = (c.orbit, img_nb.shift + c.shift)?
                    // neighbor_corners is relative to lift at 0, retranslate:
                    candidates.push(Corner::new(c.orbit, img_nb.shift + c.shift));
                }
            }
            None => {
                for o in 0..other.n_orbits {
                    candidates.push(Corner::new(o, LatticeVector::ZERO));
                }
            }
        }
        candidates.sort();
        candidates.dedup();
        let used: BTreeSet<usize> = mapping.iter().flatten().map(|c| c.orbit).collect();
        for cand in candidates {
            if used.contains(&cand.orbit) {
                continue;
            }
            mapping[next] = Some(cand);
            if self.partial_edges_match(other, mapping)
                && self.extend_isomorphism(other, mapping, assigned + 1)
            {
                return true;
            }
            mapping[next] = None;
        }
        false
    }

    fn partial_edges_match(&self, other: &PeriodicComplex, mapping: &[Option<Corner>]) -> bool {
        for e in &self.edges {
            if let (Some(mu), Some(mv)) = (mapping[e.u], mapping[e.v]) {
                let img = Edge::between(mu, mv.translated(e.shift));
                if !other.edges.contains(&img) {
                    return false;
                }
            }
        }
        true
    }

    fn mapping_consistent(&self, other: &PeriodicComplex, mapping: &[Option<Corner>]) -> bool {
        let map_corner = |c: &Corner| mapping[c.orbit].unwrap().translated(c.shift);
        let edges: BTreeSet<Edge> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = e.corners();
                Edge::between(map_corner(&a), map_corner(&b))
            })
            .collect();
        if edges != other.edges {
            return false;
        }
        let aux: BTreeSet<Edge> = self
            .aux
            .iter()
            .map(|e| {
                let (a, b) = e.corners();
                Edge::between(map_corner(&a), map_corner(&b))
            })
            .collect();
        if aux != other.aux {
            return false;
        }
        let tris: BTreeSet<Triangle> = self
            .triangles
            .iter()
            .map(|t| Triangle::new(t.corners().map(|c| map_corner(&c))))
            .collect();
        tris == other.triangles
    }
}

/// Result of a sublattice change of basis: the refined complex plus the
/// bookkeeping needed to map data through the covering.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub complex: PeriodicComplex,
    pub matrix: LatticeMatrix,
    pub reps: Vec<LatticeVector>,
}

impl Refinement {
    /// `(original orbit, coset representative)` for a refined orbit index.
    pub fn base_of(&self, refined_orbit: usize) -> (usize, LatticeVector) {
        let n = self.reps.len();
        (refined_orbit / n, self.reps[refined_orbit % n])
    }

    /// Refined orbit and sublattice-basis shift of a lift of an original
    /// orbit.
    pub fn locate(&self, orbit: usize, translate: LatticeVector) -> Corner {
        let hermite = HermiteForm::of(&self.matrix).expect("refinement matrix is nonsingular");
        let r = hermite.reduce(translate);
        let idx = self
            .reps
            .iter()
            .position(|&x| x == r)
            .expect("representative enumerated");
        let in_sub = self.matrix.solve(translate - r).expect("coset difference");
        Corner::new(orbit * self.reps.len() + idx, in_sub)
    }
}

/// Half-open rectangle of lattice cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRange {
    pub m0: i64,
    pub m1: i64,
    pub k0: i64,
    pub k1: i64,
}

impl CellRange {
    pub fn new(m0: i64, m1: i64, k0: i64, k1: i64) -> CellRange {
        CellRange { m0, m1, k0, k1 }
    }

    /// `w x h` cells with the origin cell as close to the center as possible.
    pub fn centered(w: i64, h: i64) -> CellRange {
        CellRange::new(-w / 2, w - w / 2, -h / 2, h - h / 2)
    }

    pub fn is_empty(&self) -> bool {
        self.m0 >= self.m1 || self.k0 >= self.k1
    }

    pub fn contains(&self, v: LatticeVector) -> bool {
        v.m >= self.m0 && v.m < self.m1 && v.k >= self.k0 && v.k < self.k1
    }

    pub fn cells(&self) -> Vec<LatticeVector> {
        let mut out = Vec::new();
        for m in self.m0..self.m1 {
            for k in self.k0..self.k1 {
                out.push(LatticeVector::new(m, k));
            }
        }
        out
    }
}

/// Finite subcomplex of the cover with a map back to orbits.
#[derive(Clone, Debug)]
pub struct Patch {
    /// `(orbit, translate)` per patch vertex.
    pub vertices: Vec<(usize, LatticeVector)>,
    /// `(vertex, vertex, source edge, lift translate)`.
    pub edges: Vec<(usize, usize, Edge, LatticeVector)>,
    /// `(vertex triple, source triangle, lift translate)`.
    pub triangles: Vec<([usize; 3], Triangle, LatticeVector)>,
}

impl Patch {
    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    /// Connected components (by edges) and the Euler characteristic of each.
    pub fn component_characteristics(&self) -> Vec<(usize, i64)> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let r = find(parent, parent[x]);
                parent[x] = r;
            }
            parent[x]
        }
        for &(a, b, _, _) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra] = rb;
            }
        }
        let mut stats: BTreeMap<usize, (i64, i64, i64)> = BTreeMap::new();
        for v in 0..n {
            let r = find(&mut parent, v);
            stats.entry(r).or_default().0 += 1;
        }
        for &(a, _, _, _) in &self.edges {
            let r = find(&mut parent, a);
            stats.entry(r).or_default().1 += 1;
        }
        for &(idx, _, _) in &self.triangles {
            let r = find(&mut parent, idx[0]);
            stats.entry(r).or_default().2 += 1;
        }
        stats
            .into_iter()
            .enumerate()
            .map(|(i, (_, (v, e, f)))| (i, v - e + f))
            .collect()
    }
}

/// One violated invariant, with the offending simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Violation {
    EdgeEndpointOutOfRange { edge: Edge },
    SelfEdgeZeroShift { edge: Edge },
    SelfEdgeNotPrimitive { edge: Edge },
    AuxEndpointOutOfRange { edge: Edge },
    AuxZeroLength { edge: Edge },
    AuxDuplicatesSurface { edge: Edge },
    TriangleCornerOutOfRange { triangle: Triangle },
    DegenerateTriangle { triangle: Triangle },
    MissingBoundaryEdge { triangle: Triangle, edge: Edge },
    EdgeFaceCount { edge: Edge, count: usize },
    EdgeOrientation { edge: Edge },
    LinkNotSingleCycle { orbit: usize },
    EulerCharacteristic { chi: i64 },
    CoverDisconnected,
    PatchComponentNotDisklike { component: usize, chi: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EdgeEndpointOutOfRange { edge } => {
                write!(f, "edge {edge} references an orbit out of range")
            }
            Violation::SelfEdgeZeroShift { edge } => {
                write!(f, "self-edge {edge} has zero shift")
            }
            Violation::SelfEdgeNotPrimitive { edge } => {
                write!(f, "non-primitive self-edge {edge}")
            }
            Violation::AuxEndpointOutOfRange { edge } => {
                write!(f, "auxiliary constraint {edge} references an orbit out of range")
            }
            Violation::AuxZeroLength { edge } => {
                write!(f, "auxiliary constraint {edge} joins a lift to itself")
            }
            Violation::AuxDuplicatesSurface { edge } => {
                write!(f, "auxiliary constraint {edge} duplicates a surface edge")
            }
            Violation::TriangleCornerOutOfRange { triangle } => {
                write!(f, "triangle {triangle} references an orbit out of range")
            }
            Violation::DegenerateTriangle { triangle } => {
                write!(f, "degenerate triangle {triangle}")
            }
            Violation::MissingBoundaryEdge { triangle, edge } => {
                write!(f, "triangle {triangle} has missing boundary edge {edge}")
            }
            Violation::EdgeFaceCount { edge, count } => {
                write!(f, "edge {edge} in {count} triangles")
            }
            Violation::EdgeOrientation { edge } => {
                write!(f, "edge {edge} not traversed once in each direction")
            }
            Violation::LinkNotSingleCycle { orbit } => {
                write!(f, "link of orbit v{orbit} is not a single cycle")
            }
            Violation::EulerCharacteristic { chi } => {
                write!(f, "Euler characteristic {chi}, expected 0")
            }
            Violation::CoverDisconnected => {
                write!(f, "unfolded cover is disconnected")
            }
            Violation::PatchComponentNotDisklike { component, chi } => {
                write!(
                    f,
                    "lift patch component {component} has Euler characteristic {chi}, expected 1"
                )
            }
        }
    }
}

/// List of violated invariants; empty for a valid complex.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.violations.first()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            for v in &self.violations {
                writeln!(f, "{v}")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::{grid_squares, star_subdivide, triangulated_plane};
    use nalgebra::Vector3;

    fn plane(c: &LatticeMatrix) -> PeriodicComplex {
        triangulated_plane(Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0), c)
            .unwrap()
            .complex
    }

    fn identity_plane() -> PeriodicComplex {
        plane(&LatticeMatrix::identity())
    }

    #[test]
    fn edge_canonical_form() {
        let e1 = Edge::new(2, 1, LatticeVector::new(1, -3));
        assert_eq!((e1.u(), e1.v()), (1, 2));
        assert_eq!(e1.shift(), LatticeVector::new(-1, 3));
        assert_eq!(e1, Edge::new(1, 2, LatticeVector::new(-1, 3)));
        let e2 = Edge::new(0, 0, LatticeVector::new(-1, 2));
        assert_eq!(e2.shift(), LatticeVector::new(1, -2));
    }

    #[test]
    fn triangle_equality_up_to_translation_and_rotation() {
        let t1 = Triangle::new([
            Corner::new(0, LatticeVector::new(1, 1)),
            Corner::new(0, LatticeVector::new(2, 1)),
            Corner::new(0, LatticeVector::new(1, 2)),
        ]);
        let t2 = Triangle::new([
            Corner::new(0, LatticeVector::new(2, 1)),
            Corner::new(0, LatticeVector::new(1, 2)),
            Corner::new(0, LatticeVector::new(1, 1)),
        ]);
        assert_eq!(t1, t2);
        // Reversed orientation is a different triangle.
        let t3 = Triangle::new([
            Corner::new(0, LatticeVector::new(1, 1)),
            Corner::new(0, LatticeVector::new(1, 2)),
            Corner::new(0, LatticeVector::new(2, 1)),
        ]);
        assert_ne!(t1, t3);
    }

    #[test]
    fn plane_is_valid() {
        let c = identity_plane();
        assert_eq!(c.n_orbits(), 1);
        assert_eq!(c.edges().len(), 3);
        assert_eq!(c.triangles().len(), 2);
        let report = c.validate();
        assert!(report.is_valid(), "{report}");
    }

    #[test]
    fn deleted_triangle_breaks_closedness() {
        let c = identity_plane();
        let keep: Vec<Triangle> = c.triangles().iter().skip(1).copied().collect();
        let broken = PeriodicComplex::new(1, c.edges().clone(), keep, []);
        let report = broken.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::EdgeFaceCount { count: 1, .. })));
    }

    #[test]
    fn non_primitive_self_edge_is_reported() {
        let c = identity_plane();
        let mut edges = c.edges().clone();
        edges.insert(Edge::new(0, 0, LatticeVector::new(2, 0)));
        let broken = PeriodicComplex::new(1, edges, c.triangles().clone(), []);
        let report = broken.validate();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::SelfEdgeNotPrimitive { .. })));
    }

    #[test]
    fn euler_characteristic_examples() {
        assert_eq!(identity_plane().euler_characteristic(), 0);
        let refined = plane(&LatticeMatrix::diagonal(2, 2));
        assert_eq!(refined.n_orbits(), 4);
        assert_eq!(refined.edges().len(), 12);
        assert_eq!(refined.triangles().len(), 8);
        assert_eq!(refined.euler_characteristic(), 0);
        let c = identity_plane();
        let t = *c.triangles().iter().next().unwrap();
        let sub = star_subdivide(&c, &t).unwrap();
        assert_eq!(sub.n_orbits(), 2);
        assert_eq!(sub.edges().len(), 6);
        assert_eq!(sub.triangles().len(), 4);
        assert_eq!(sub.euler_characteristic(), 0);
        assert!(sub.validate().is_valid(), "{}", sub.validate());
    }

    #[test]
    fn change_of_basis_counts() {
        // identity: isomorphic, 1 orbit
        let r = identity_plane()
            .change_of_basis(&LatticeMatrix::identity())
            .unwrap();
        assert_eq!(r.complex.n_orbits(), 1);
        assert!(r.complex.is_isomorphic(&identity_plane()));
        // index-2 sublattice: 2 orbits, 6 edges, 4 triangles
        let r = identity_plane()
            .change_of_basis(&LatticeMatrix::diagonal(1, 2))
            .unwrap();
        assert_eq!(r.complex.n_orbits(), 2);
        assert_eq!(r.complex.edges().len(), 6);
        assert_eq!(r.complex.triangles().len(), 4);
        assert!(r.complex.validate().is_valid(), "{}", r.complex.validate());
        // index-4 sublattice: 4 orbits, 12 edges, 8 triangles
        let r = identity_plane()
            .change_of_basis(&LatticeMatrix::diagonal(2, 2))
            .unwrap();
        assert_eq!(r.complex.n_orbits(), 4);
        assert_eq!(r.complex.edges().len(), 12);
        assert_eq!(r.complex.triangles().len(), 8);
        assert!(r.complex.validate().is_valid());
        // singular matrix rejected
        assert!(identity_plane()
            .change_of_basis(&LatticeMatrix::new(1, 2, 2, 4))
            .is_err());
    }

    #[test]
    fn special_orbit_examples() {
        let base = identity_plane();
        assert_eq!(base.special_orbits(), BTreeSet::from([0]));
        assert_eq!(
            base.self_edge_shifts(0),
            vec![
                LatticeVector::new(0, 1),
                LatticeVector::new(1, -1),
                LatticeVector::new(1, 0),
            ]
        );
        let r12 = plane(&LatticeMatrix::diagonal(1, 2));
        assert_eq!(r12.special_orbits(), BTreeSet::from([0, 1]));
        let r22 = plane(&LatticeMatrix::diagonal(2, 2));
        assert!(r22.special_orbits().is_empty());
    }

    #[test]
    fn special_orbits_project_through_coverings() {
        // A self-edge upstairs projects to a self-edge downstairs.
        for mat in [
            LatticeMatrix::diagonal(1, 2),
            LatticeMatrix::diagonal(2, 2),
            LatticeMatrix::new(2, 1, 1, 3),
        ] {
            let base = identity_plane();
            let refined = base.change_of_basis(&mat).unwrap();
            let downstairs = base.special_orbits();
            for orbit in refined.complex.special_orbits() {
                let (b, _) = refined.base_of(orbit);
                assert!(downstairs.contains(&b));
            }
        }
    }

    #[test]
    fn lift_patch_examples() {
        let c = identity_plane();
        let patch = c.lift_patch(&CellRange::new(0, 3, 0, 3));
        assert_eq!(patch.vertices.len(), 9);
        assert_eq!(patch.edges.len(), 16);
        assert_eq!(patch.triangles.len(), 8);
        assert_eq!(patch.euler_characteristic(), 1);

        let empty = c.lift_patch(&CellRange::new(0, 0, 0, 0));
        assert!(empty.vertices.is_empty());
        assert!(empty.edges.is_empty());
        assert!(empty.triangles.is_empty());

        let single = c.lift_patch(&CellRange::new(0, 1, 0, 1));
        assert_eq!(single.vertices.len(), 1);
        assert!(single.edges.is_empty());
        assert!(single.triangles.is_empty());
    }

    #[test]
    fn disconnected_cover_is_detected() {
        // Doubling every shift of the one-orbit plane produces a torus
        // quotient whose unfolding splits into four planes.
        let stretch = |v: LatticeVector| LatticeVector::new(2 * v.m, 2 * v.k);
        let c = identity_plane();
        let edges: Vec<Edge> = c
            .edges()
            .iter()
            .map(|e| Edge::new(e.u(), e.v(), stretch(e.shift())))
            .collect();
        let triangles: Vec<Triangle> = c
            .triangles()
            .iter()
            .map(|t| {
                Triangle::new(t.corners().map(|cr| Corner::new(cr.orbit, stretch(cr.shift))))
            })
            .collect();
        let broken = PeriodicComplex::new(1, edges, triangles, []);
        let report = broken.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::CoverDisconnected | Violation::SelfEdgeNotPrimitive { .. })));
    }

    #[test]
    fn grid_squares_shape() {
        let g = grid_squares(1.0, &LatticeMatrix::identity()).unwrap();
        assert_eq!(g.complex.n_orbits(), 1);
        assert_eq!(g.complex.edges().len(), 3);
        assert_eq!(g.complex.aux_constraints().len(), 1);
        assert_eq!(g.complex.triangles().len(), 2);
        assert!(g.complex.validate().is_valid(), "{}", g.complex.validate());
        // aux count = triangles / 2 after refinement
        let g = grid_squares(1.0, &LatticeMatrix::diagonal(2, 2)).unwrap();
        assert_eq!(
            g.complex.aux_constraints().len(),
            g.complex.triangles().len() / 2
        );
        assert!(g.complex.validate().is_valid());
    }

    #[test]
    fn isomorphism_detects_relabeling() {
        let a = plane(&LatticeMatrix::diagonal(1, 2));
        let b = plane(&LatticeMatrix::diagonal(1, 2));
        assert!(a.is_isomorphic(&b));
        assert!(!a.is_isomorphic(&identity_plane()));
        let c = plane(&LatticeMatrix::diagonal(2, 2));
        let d = plane(&LatticeMatrix::diagonal(2, 2));
        assert!(c.is_isomorphic(&d));
    }

    #[test]
    fn change_of_basis_composes() {
        let c1 = LatticeMatrix::new(1, 1, 0, 2);
        let c2 = LatticeMatrix::new(2, 0, 1, 1);
        let two_step = identity_plane()
            .change_of_basis(&c1)
            .unwrap()
            .complex
            .change_of_basis(&c2)
            .unwrap()
            .complex;
        let one_step = identity_plane()
            .change_of_basis(&c1.mul(&c2))
            .unwrap()
            .complex;
        assert_eq!(two_step.n_orbits(), one_step.n_orbits());
        assert!(two_step.is_isomorphic(&one_step));
    }
}
