//! Metric simplicial 4-complexes.
//!
//! Every 4-simplex lists five vertex ids and its ten edge lengths; edge
//! lengths are the source of truth. A flat chart (coordinates of the five
//! vertices in ℝ⁴) is derived from them by a Cholesky factorization of the
//! Gram matrix. Two simplices are glued along a tetrahedron exactly when
//! they share its four vertex ids, with the identity correspondence.

mod fixtures;
mod io;
mod product;

pub use fixtures::{
    banded_box, flat_torus4, misaligned_cover, negative_join, MISALIGNED_BRANCH_ANGLE,
};
pub use io::{parse_complex, write_complex};
pub use product::{product_complex, PRODUCT_LABEL_SEPARATOR};

use crate::surface2::SurfaceError;
use crate::tensor4::{Mat4, Vec4};
use nalgebra::Cholesky;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::TAU;
use std::fmt;
use thiserror::Error;

/// Local vertex pairs of a 4-simplex, in the order edge lengths are stored.
pub const PAIRS5: [(usize, usize); 10] = [
    (0, 1),
    (0, 2),
    (0, 3),
    (0, 4),
    (1, 2),
    (1, 3),
    (1, 4),
    (2, 3),
    (2, 4),
    (3, 4),
];

/// Default absolute tolerance for "cone angle = 2π".
pub const DEFAULT_TOL_ANGLE: f64 = 1e-7;
/// Default relative tolerance for glued edge lengths.
pub const DEFAULT_TOL_LENGTH: f64 = 1e-9;

pub fn pair_index(i: usize, j: usize) -> usize {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    PAIRS5.iter().position(|&p| p == (a, b)).expect("distinct local indices")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComplexError {
    #[error("simplex {simplex} refers to vertex {vertex}, which does not exist")]
    VertexOutOfRange { simplex: usize, vertex: usize },
    #[error("simplex {0} repeats a vertex")]
    RepeatedVertex(usize),
    #[error("simplex {0} repeats the vertex set of an earlier simplex")]
    DuplicateSimplex(usize),
    #[error("invalid or duplicate vertex label {0:?}")]
    BadLabel(String),
    #[error("triangle {0:?} is not a face of the complex")]
    UnknownTriangle([usize; 3]),
    #[error("triangle {0:?} has zero area")]
    DegenerateFace([usize; 3]),
    #[error("invalid factor surface: {0}")]
    InvalidSurface(#[from] SurfaceError),
    #[error("complex failed validation: {0}")]
    Invalid(ValidationReport),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simplex {
    pub vertices: [usize; 5],
    pub lengths: [f64; 10],
}

impl Simplex {
    /// Edge length between local vertices `i` and `j`.
    pub fn length(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.lengths[pair_index(i, j)]
        }
    }

    pub fn local_index(&self, v: usize) -> Option<usize> {
        self.vertices.iter().position(|&x| x == v)
    }

    /// Sorted vertex ids of the facet opposite local vertex `k`.
    pub fn facet(&self, k: usize) -> [usize; 4] {
        let mut f = [0; 4];
        let mut n = 0;
        for (i, &v) in self.vertices.iter().enumerate() {
            if i != k {
                f[n] = v;
                n += 1;
            }
        }
        f.sort_unstable();
        f
    }
}

/// Partner across a facet: the neighbouring simplex and the local index of
/// its vertex opposite the shared tetrahedron.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Gluing {
    pub simplex: usize,
    pub facet: usize,
}

/// Chart of a simplex: vertex 0 at the origin, vertex `k` in the span of
/// the first `k` axes.
pub type Chart = [Vec4; 5];

/// Places a simplex with the given edge lengths in ℝ⁴, returning the chart
/// and 4-volume, or `None` when the Gram matrix is not positive definite.
pub fn chart_from_lengths(lengths: &[f64; 10]) -> Option<(Chart, f64)> {
    let d = |i: usize, j: usize| if i == j { 0.0 } else { lengths[pair_index(i, j)] };
    let gram = Mat4::from_fn(|i, j| {
        let (a, b) = (i + 1, j + 1);
        0.5 * (d(0, a).powi(2) + d(0, b).powi(2) - d(a, b).powi(2))
    });
    let scale = lengths.iter().fold(0.0f64, |m, &x| m.max(x));
    let l = Cholesky::new(gram)?.l();
    if (0..4).any(|k| !(l[(k, k)] > 1e-12 * scale)) {
        return None;
    }
    let mut chart = [Vec4::zeros(); 5];
    for k in 0..4 {
        chart[k + 1] = l.row(k).transpose();
    }
    let vol = (0..4).map(|k| l[(k, k)]).product::<f64>() / 24.0;
    Some((chart, vol))
}

/// Angle at the face spanned by local vertices `t` between the two facets
/// of the simplex containing it.
pub fn dihedral_angle(chart: &Chart, t: [usize; 3]) -> Option<f64> {
    let others: Vec<usize> = (0..5).filter(|k| !t.contains(k)).collect();
    let o = chart[t[0]];
    let e1 = chart[t[1]] - o;
    let mut e2 = chart[t[2]] - o;
    let n1 = e1.norm();
    if n1 == 0.0 {
        return None;
    }
    let u1 = e1 / n1;
    e2 -= u1 * u1.dot(&e2);
    let n2 = e2.norm();
    if n2 <= 1e-12 * n1 {
        return None;
    }
    let u2 = e2 / n2;
    let perp = |x: Vec4| {
        let w = x - o;
        w - u1 * u1.dot(&w) - u2 * u2.dot(&w)
    };
    let p = perp(chart[others[0]]);
    let q = perp(chart[others[1]]);
    Some((p.dot(&q) / (p.norm() * q.norm())).clamp(-1.0, 1.0).acos())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexTolerances {
    /// Absolute tolerance on cone angles versus 2π.
    pub angle: f64,
    /// Relative tolerance on edge lengths of glued faces.
    pub length: f64,
}

impl Default for ComplexTolerances {
    fn default() -> Self {
        ComplexTolerances {
            angle: DEFAULT_TOL_ANGLE,
            length: DEFAULT_TOL_LENGTH,
        }
    }
}

/// A finite simplicial 4-complex with flat simplices.
#[derive(Debug, Clone)]
pub struct MetricComplex4 {
    labels: Vec<String>,
    simplices: Vec<Simplex>,
    charts: Vec<Option<Chart>>,
    volumes: Vec<f64>,
    neighbors: Vec<[Option<Gluing>; 5]>,
    face_use: BTreeMap<[usize; 4], usize>,
    triangle_star: BTreeMap<[usize; 3], Vec<usize>>,
    pub tolerances: ComplexTolerances,
}

impl PartialEq for MetricComplex4 {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.simplices == other.simplices
            && self.tolerances == other.tolerances
    }
}

impl MetricComplex4 {
    /// Builds the complex and its charts. Combinatorial sanity (indices,
    /// repeated vertices, duplicate simplices, labels) is enforced here;
    /// closedness and metric consistency are reported by [`Self::validate`].
    pub fn new(labels: Vec<String>, simplices: Vec<Simplex>) -> Result<Self, ComplexError> {
        let mut seen_labels = BTreeSet::new();
        for l in &labels {
            if l.is_empty() || l.chars().any(char::is_whitespace) || !seen_labels.insert(l) {
                return Err(ComplexError::BadLabel(l.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        for (si, s) in simplices.iter().enumerate() {
            if let Some(&v) = s.vertices.iter().find(|&&v| v >= labels.len()) {
                return Err(ComplexError::VertexOutOfRange { simplex: si, vertex: v });
            }
            let mut sorted = s.vertices;
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(ComplexError::RepeatedVertex(si));
            }
            if !seen.insert(sorted) {
                return Err(ComplexError::DuplicateSimplex(si));
            }
        }
        let mut faces: BTreeMap<[usize; 4], Vec<(usize, usize)>> = BTreeMap::new();
        let mut triangle_star: BTreeMap<[usize; 3], Vec<usize>> = BTreeMap::new();
        for (si, s) in simplices.iter().enumerate() {
            for k in 0..5 {
                faces.entry(s.facet(k)).or_default().push((si, k));
            }
            for t in local_triangles() {
                let mut g = t.map(|i| s.vertices[i]);
                g.sort_unstable();
                triangle_star.entry(g).or_default().push(si);
            }
        }
        let mut neighbors = vec![[None; 5]; simplices.len()];
        for users in faces.values() {
            if let [(a, ka), (b, kb)] = users[..] {
                neighbors[a][ka] = Some(Gluing { simplex: b, facet: kb });
                neighbors[b][kb] = Some(Gluing { simplex: a, facet: ka });
            }
        }
        let face_use = faces.iter().map(|(f, u)| (*f, u.len())).collect();
        let (charts, volumes) = simplices
            .iter()
            .map(|s| match chart_from_lengths(&s.lengths) {
                Some((c, v)) => (Some(c), v),
                None => (None, 0.0),
            })
            .unzip();
        Ok(MetricComplex4 {
            labels,
            simplices,
            charts,
            volumes,
            neighbors,
            face_use,
            triangle_star,
            tolerances: ComplexTolerances::default(),
        })
    }

    pub fn with_tolerances(mut self, tolerances: ComplexTolerances) -> Self {
        self.tolerances = tolerances;
        self
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn n_simplices(&self) -> usize {
        self.simplices.len()
    }

    /// Chart of simplex `s`; panics on a degenerate simplex (see `validate`).
    pub fn chart(&self, s: usize) -> &Chart {
        self.charts[s]
            .as_ref()
            .expect("chart of a degenerate simplex")
    }

    pub fn volume(&self, s: usize) -> f64 {
        self.volumes[s]
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    pub fn neighbor(&self, s: usize, facet: usize) -> Option<Gluing> {
        self.neighbors[s][facet]
    }

    pub fn neighbors(&self, s: usize) -> &[Option<Gluing>; 5] {
        &self.neighbors[s]
    }

    /// Sorted vertex triples of all triangles, with the simplices containing each.
    pub fn triangles(&self) -> &BTreeMap<[usize; 3], Vec<usize>> {
        &self.triangle_star
    }

    /// Alternating-sum Euler characteristic of the complex.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = BTreeSet::new();
        for s in &self.simplices {
            for &(i, j) in &PAIRS5 {
                let (a, b) = (s.vertices[i], s.vertices[j]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.labels.len() as i64 - edges.len() as i64 + self.triangle_star.len() as i64
            - self.face_use.len() as i64
            + self.simplices.len() as i64
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        for (f, &n) in &self.face_use {
            if n != 2 {
                let face = f.map(|v| self.labels[v].clone());
                issues.push(if n == 1 {
                    ValidationIssue::BoundaryFace { face }
                } else {
                    ValidationIssue::OverusedFace { face, count: n }
                });
            }
        }
        for (si, s) in self.simplices.iter().enumerate() {
            if self.charts[si].is_none() {
                issues.push(ValidationIssue::Degenerate { simplex: si });
            }
            for k in 0..5 {
                let Some(g) = self.neighbors[si][k] else { continue };
                if g.simplex < si {
                    continue;
                }
                let t = &self.simplices[g.simplex];
                for (a, b) in facet_pairs(k) {
                    let (va, vb) = (s.vertices[a], s.vertices[b]);
                    let (ta, tb) = (t.local_index(va).unwrap(), t.local_index(vb).unwrap());
                    let (x, y) = (s.length(a, b), t.length(ta, tb));
                    if (x - y).abs() > self.tolerances.length * x.max(y) {
                        issues.push(ValidationIssue::MetricMismatch {
                            simplices: (si, g.simplex),
                            edge: [self.labels[va].clone(), self.labels[vb].clone()],
                            lengths: (x, y),
                        });
                    }
                }
            }
        }
        let dual = self.dual_graph();
        if !dual.connected {
            issues.push(ValidationIssue::Disconnected {
                reached: dual.order.len(),
                total: self.simplices.len(),
            });
        }
        ValidationReport { issues }
    }

    /// Total dihedral angle around triangle `t` (vertex ids in any order).
    pub fn cone_angle_at_triangle(&self, t: [usize; 3]) -> Result<f64, ComplexError> {
        let mut key = t;
        key.sort_unstable();
        let star = self
            .triangle_star
            .get(&key)
            .ok_or(ComplexError::UnknownTriangle(t))?;
        let mut total = 0.0;
        for &si in star {
            let s = &self.simplices[si];
            let local = key.map(|v| s.local_index(v).unwrap());
            let chart = self.charts[si]
                .as_ref()
                .ok_or(ComplexError::DegenerateFace(t))?;
            total += dihedral_angle(chart, local).ok_or(ComplexError::DegenerateFace(t))?;
        }
        Ok(total)
    }

    /// Cone angle of every triangle, in triangle order.
    pub fn cone_angles(&self) -> BTreeMap<[usize; 3], f64> {
        self.triangle_star
            .keys()
            .map(|&t| (t, self.cone_angle_at_triangle(t).unwrap_or(f64::NAN)))
            .collect()
    }

    pub fn check_nonneg_curvature(&self) -> CurvatureReport {
        let tol = self.tolerances.angle;
        let mut worst: Option<f64> = None;
        let mut worst_triangle = None;
        for (t, a) in self.cone_angles() {
            if (a - TAU).abs() > tol && worst.is_none_or(|w| a > w) {
                worst = Some(a);
                worst_triangle = Some(t.map(|v| self.labels[v].clone()));
            }
        }
        let worst_angle = worst.unwrap_or(TAU);
        CurvatureReport {
            nonneg: worst_angle <= TAU + tol,
            worst_angle,
            worst_triangle,
        }
    }

    pub fn singular_census(&self) -> SingularCensus {
        let tol = self.tolerances.angle;
        let angles = self.cone_angles();
        let singular: BTreeMap<[usize; 3], f64> = angles
            .into_iter()
            .filter(|(_, a)| (a - TAU).abs() > tol)
            .collect();
        let mut by_edge: BTreeMap<(usize, usize), Vec<[usize; 3]>> = BTreeMap::new();
        for t in singular.keys() {
            for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                by_edge.entry((a, b)).or_default().push(*t);
            }
        }
        // connected components through shared edges
        let mut stratum_of: BTreeMap<[usize; 3], usize> = BTreeMap::new();
        let mut codim2 = Vec::new();
        for &start in singular.keys() {
            if stratum_of.contains_key(&start) {
                continue;
            }
            let id = codim2.len();
            let mut tris = Vec::new();
            let mut queue = VecDeque::from([start]);
            stratum_of.insert(start, id);
            while let Some(t) = queue.pop_front() {
                tris.push(t);
                for e in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                    for &u in &by_edge[&e] {
                        if let std::collections::btree_map::Entry::Vacant(slot) = stratum_of.entry(u) {
                            slot.insert(id);
                            queue.push_back(u);
                        }
                    }
                }
            }
            tris.sort_unstable();
            let vals: Vec<f64> = tris.iter().map(|t| singular[t]).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let spread = vals.iter().map(|a| (a - mean).abs()).fold(0.0, f64::max);
            let vertices: BTreeSet<usize> = tris.iter().flatten().copied().collect();
            codim2.push(Stratum {
                id,
                triangles: tris,
                vertices: vertices.into_iter().collect(),
                cone_angle: mean,
                angle_spread: spread,
            });
        }
        // codim-4 candidates: the singular link at the vertex is not one circle
        let mut link: BTreeMap<usize, Vec<(usize, usize, usize)>> = BTreeMap::new();
        for (t, &id) in &stratum_of {
            for k in 0..3 {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                link.entry(t[k]).or_default().push((a, b, id));
            }
        }
        let mut codim4 = Vec::new();
        for (&v, edges) in &link {
            if !is_single_cycle(edges) {
                let strata: BTreeSet<usize> = edges.iter().map(|e| e.2).collect();
                codim4.push(Codim4Candidate {
                    vertex: v,
                    strata: strata.into_iter().collect(),
                });
            }
        }
        // codim-3: singular triangles around an edge must pair up with equal angles
        let mut codim3_violations = Vec::new();
        for (&(a, b), tris) in &by_edge {
            let ok = tris.len() == 2 && (singular[&tris[0]] - singular[&tris[1]]).abs() <= tol;
            if !ok {
                codim3_violations.push(Codim3Flag {
                    edge: [a, b],
                    singular_triangles: tris.len(),
                });
            }
        }
        SingularCensus {
            codim2,
            codim4,
            codim3_violations,
        }
    }

    /// Dual graph with a breadth-first spanning tree rooted at simplex 0;
    /// neighbours are visited in increasing simplex order.
    pub fn dual_graph(&self) -> DualGraph {
        let n = self.simplices.len();
        let adjacency: Vec<Vec<(usize, usize)>> = self
            .neighbors
            .iter()
            .map(|nb| {
                let mut v: Vec<(usize, usize)> = nb
                    .iter()
                    .enumerate()
                    .filter_map(|(k, g)| g.map(|g| (g.simplex, k)))
                    .collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        if n > 0 {
            depth[0] = 0;
            let mut queue = VecDeque::from([0]);
            while let Some(s) = queue.pop_front() {
                order.push(s);
                for &(t, k) in &adjacency[s] {
                    if depth[t] == usize::MAX {
                        depth[t] = depth[s] + 1;
                        let back = self.neighbors[s][k].unwrap().facet;
                        parent[t] = Some(TreeEdge {
                            parent: s,
                            facet_in_parent: k,
                            facet_in_child: back,
                        });
                        queue.push_back(t);
                    }
                }
            }
        }
        DualGraph {
            connected: order.len() == n,
            adjacency: adjacency
                .into_iter()
                .map(|v| v.into_iter().map(|x| x.0).collect())
                .collect(),
            parent,
            depth,
            order,
        }
    }

    /// Simplices around triangle `t` in cyclic order, each adjacent to the next
    /// through a tetrahedron containing `t`.
    pub fn triangle_fan(&self, t: [usize; 3]) -> Result<Vec<usize>, ComplexError> {
        let mut key = t;
        key.sort_unstable();
        let star = self
            .triangle_star
            .get(&key)
            .ok_or(ComplexError::UnknownTriangle(t))?;
        let start = star[0];
        let mut fan = vec![start];
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let s = &self.simplices[cur];
            let next = (0..5)
                .filter(|&k| !key.contains(&s.vertices[k]))
                .filter_map(|k| self.neighbors[cur][k])
                .map(|g| g.simplex)
                .find(|&x| x != prev);
            let Some(next) = next else {
                return Err(ComplexError::UnknownTriangle(t));
            };
            if next == start {
                break;
            }
            if fan.len() > star.len() {
                return Err(ComplexError::UnknownTriangle(t));
            }
            fan.push(next);
            prev = cur;
            cur = next;
        }
        Ok(fan)
    }
}

/// The ten triangles of a 4-simplex as local index triples.
pub fn local_triangles() -> impl Iterator<Item = [usize; 3]> {
    (0..5).flat_map(|a| (a + 1..5).flat_map(move |b| (b + 1..5).map(move |c| [a, b, c])))
}

fn facet_pairs(k: usize) -> impl Iterator<Item = (usize, usize)> {
    PAIRS5.into_iter().filter(move |&(a, b)| a != k && b != k)
}

fn is_single_cycle(edges: &[(usize, usize, usize)]) -> bool {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b, _) in edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    if adj.values().any(|n| n.len() != 2) {
        return false;
    }
    let start = *adj.keys().next().unwrap();
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for &w in &adj[&v] {
            if seen.insert(w) {
                stack.push(w);
            }
        }
    }
    seen.len() == adj.len()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ValidationIssue {
    BoundaryFace { face: [String; 4] },
    OverusedFace { face: [String; 4], count: usize },
    MetricMismatch {
        simplices: (usize, usize),
        edge: [String; 2],
        lengths: (f64, f64),
    },
    Degenerate { simplex: usize },
    Disconnected { reached: usize, total: usize },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::BoundaryFace { face } => {
                write!(f, "boundary face: tetrahedron {} lies in one simplex", face.join(" "))
            }
            ValidationIssue::OverusedFace { face, count } => write!(
                f,
                "non-manifold face: tetrahedron {} lies in {count} simplices",
                face.join(" ")
            ),
            ValidationIssue::MetricMismatch {
                simplices,
                edge,
                lengths,
            } => write!(
                f,
                "metric mismatch: edge {}-{} has length {} in simplex {} and {} in simplex {}",
                edge[0], edge[1], lengths.0, simplices.0, lengths.1, simplices.1
            ),
            ValidationIssue::Degenerate { simplex } => {
                write!(f, "degenerate simplex {simplex}: Gram matrix not positive definite")
            }
            ValidationIssue::Disconnected { reached, total } => {
                write!(f, "disconnected: {reached} of {total} simplices reachable")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return write!(f, "valid");
        }
        write!(f, "{} issue(s); first: {}", self.issues.len(), self.issues[0])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureReport {
    pub nonneg: bool,
    /// Largest cone angle among singular triangles, or 2π if there are none.
    pub worst_angle: f64,
    pub worst_triangle: Option<[String; 3]>,
}

/// A connected component of singular triangles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stratum {
    pub id: usize,
    pub triangles: Vec<[usize; 3]>,
    pub vertices: Vec<usize>,
    pub cone_angle: f64,
    /// Largest deviation of a member triangle's angle from `cone_angle`.
    pub angle_spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codim4Candidate {
    pub vertex: usize,
    pub strata: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codim3Flag {
    pub edge: [usize; 2],
    pub singular_triangles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularCensus {
    pub codim2: Vec<Stratum>,
    pub codim4: Vec<Codim4Candidate>,
    pub codim3_violations: Vec<Codim3Flag>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TreeEdge {
    pub parent: usize,
    pub facet_in_parent: usize,
    pub facet_in_child: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualGraph {
    /// Neighbouring simplices, sorted.
    pub adjacency: Vec<Vec<usize>>,
    pub parent: Vec<Option<TreeEdge>>,
    pub depth: Vec<usize>,
    /// Breadth-first visiting order.
    pub order: Vec<usize>,
    pub connected: bool,
}

impl DualGraph {
    /// Tree path from the root to `s`, both included.
    pub fn path_from_root(&self, s: usize) -> Vec<usize> {
        let mut path = vec![s];
        let mut cur = s;
        while let Some(e) = self.parent[cur] {
            cur = e.parent;
            path.push(cur);
        }
        path.reverse();
        path
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}
