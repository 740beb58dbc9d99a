//! Intrinsic polyhedral surfaces.
//!
//! A [`TriSurface`] is a closed simplicial surface carrying one length per
//! edge. Nothing is embedded: angles come from the law of cosines, and all
//! distances are intrinsic.

mod builtin;
mod geodesic;
mod io;
mod isometry;
mod simplify;

pub use builtin::builtin_surface;
pub use geodesic::{SteinerGraph, SurfacePoint};
pub use io::{parse_surface, write_surface};
pub use isometry::{
    singular_distance_matrix, surfaces_isometric, IsometryMatch, DEFECT_TOL, ISOMETRY_REFINEMENT,
    ISOMETRY_TOL,
};
pub use simplify::{flip_edge, simplify_flat_vertices};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::{PI, TAU};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("triangle {0} repeats a vertex or reuses another triangle's vertex set")]
    BadTriangle(usize),
    #[error("vertex index {0} out of range")]
    VertexOutOfRange(usize),
    #[error("edge ({0}, {1}) has no positive length")]
    MissingLength(usize, usize),
    #[error("edge ({0}, {1}) has a length but belongs to no triangle")]
    StrayLength(usize, usize),
    #[error("edge ({0}, {1}) is shared by {2} triangles, expected 2")]
    NotClosed(usize, usize, usize),
    #[error("triangle {0} violates the strict triangle inequality")]
    TriangleInequality(usize),
    #[error("link of vertex {0} is not a single cycle")]
    NonManifoldVertex(usize),
    #[error("vertex {0} is not used by any triangle")]
    IsolatedVertex(usize),
    #[error("surface is not connected")]
    Disconnected,
    #[error("invalid vertex label {0:?}")]
    BadLabel(String),
    #[error("unknown surface name {0:?}")]
    UnknownName(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Edge = (usize, usize);

pub fn edge_key(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A closed, connected triangulated surface with intrinsic edge lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct TriSurface {
    labels: Vec<String>,
    triangles: Vec<[usize; 3]>,
    lengths: BTreeMap<Edge, f64>,
}

impl TriSurface {
    pub fn new(
        labels: Vec<String>,
        triangles: Vec<[usize; 3]>,
        lengths: BTreeMap<Edge, f64>,
    ) -> Result<Self, SurfaceError> {
        let s = TriSurface {
            labels,
            triangles,
            lengths,
        };
        s.validate()?;
        Ok(s)
    }

    /// Builds a surface from vertex coordinates in any Euclidean dimension;
    /// each edge length is the chord length.
    pub fn from_embedded(
        labels: Vec<String>,
        points: &[Vec<f64>],
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self, SurfaceError> {
        let mut lengths = BTreeMap::new();
        for t in &triangles {
            for k in 0..3 {
                let (a, b) = edge_key(t[k], t[(k + 1) % 3]);
                let pa = points.get(a).ok_or(SurfaceError::VertexOutOfRange(a))?;
                let pb = points.get(b).ok_or(SurfaceError::VertexOutOfRange(b))?;
                let d = pa
                    .iter()
                    .zip(pb)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                lengths.insert((a, b), d);
            }
        }
        Self::new(labels, triangles, lengths)
    }

    fn validate(&self) -> Result<(), SurfaceError> {
        let n = self.labels.len();
        for l in &self.labels {
            if l.is_empty() || l.chars().any(|c| c.is_whitespace()) {
                return Err(SurfaceError::BadLabel(l.clone()));
            }
        }
        let mut seen = BTreeSet::new();
        let mut edge_count: BTreeMap<Edge, usize> = BTreeMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for &v in t {
                if v >= n {
                    return Err(SurfaceError::VertexOutOfRange(v));
                }
            }
            let mut s = *t;
            s.sort_unstable();
            if s[0] == s[1] || s[1] == s[2] || !seen.insert(s) {
                return Err(SurfaceError::BadTriangle(ti));
            }
            for k in 0..3 {
                *edge_count.entry(edge_key(t[k], t[(k + 1) % 3])).or_default() += 1;
            }
        }
        for (&(a, b), &c) in &edge_count {
            match self.lengths.get(&(a, b)) {
                Some(&l) if l > 0.0 && l.is_finite() => {}
                _ => return Err(SurfaceError::MissingLength(a, b)),
            }
            if c != 2 {
                return Err(SurfaceError::NotClosed(a, b, c));
            }
        }
        if let Some(&(a, b)) = self.lengths.keys().find(|e| !edge_count.contains_key(e)) {
            return Err(SurfaceError::StrayLength(a, b));
        }
        for ti in 0..self.triangles.len() {
            let [x, y, z] = self.side_lengths(ti);
            let m = x.max(y).max(z);
            if x + y + z - 2.0 * m <= 1e-12 * m {
                return Err(SurfaceError::TriangleInequality(ti));
            }
        }
        let stars = self.vertex_triangles();
        for (v, star) in stars.iter().enumerate() {
            if star.is_empty() {
                return Err(SurfaceError::IsolatedVertex(v));
            }
            if self.link_cycle(v).is_none() {
                return Err(SurfaceError::NonManifoldVertex(v));
            }
        }
        // connectivity over the edge graph
        let adj = self.adjacency();
        let mut mark = vec![false; n];
        let mut stack = vec![0];
        mark[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !mark[w] {
                    mark[w] = true;
                    stack.push(w);
                }
            }
        }
        if n == 0 || mark.iter().any(|m| !m) {
            return Err(SurfaceError::Disconnected);
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn lengths(&self) -> &BTreeMap<Edge, f64> {
        &self.lengths
    }

    pub fn length(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 0.0;
        }
        self.lengths[&edge_key(a, b)]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.lengths.contains_key(&edge_key(a, b))
    }

    /// Side lengths of triangle `ti`, opposite to its three corners in order.
    pub fn side_lengths(&self, ti: usize) -> [f64; 3] {
        let [a, b, c] = self.triangles[ti];
        [self.length(b, c), self.length(c, a), self.length(a, b)]
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.labels.len() as i64 - self.lengths.len() as i64 + self.triangles.len() as i64
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.labels.len()];
        for &(a, b) in self.lengths.keys() {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut star = vec![Vec::new(); self.labels.len()];
        for (ti, t) in self.triangles.iter().enumerate() {
            for &v in t {
                star[v].push(ti);
            }
        }
        star
    }

    pub fn edge_triangles(&self) -> HashMap<Edge, Vec<usize>> {
        let mut map: HashMap<Edge, Vec<usize>> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                map.entry(edge_key(t[k], t[(k + 1) % 3])).or_default().push(ti);
            }
        }
        map
    }

    /// Triangles around `v` in cyclic order, each paired with its two other
    /// vertices `(u_k, u_{k+1})` so that consecutive entries share `u_{k+1}`.
    pub fn link_cycle(&self, v: usize) -> Option<Vec<(usize, usize, usize)>> {
        let star: Vec<usize> = self
            .triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(&v))
            .map(|(i, _)| i)
            .collect();
        if star.len() < 3 {
            return None;
        }
        let others = |ti: usize| {
            let t = self.triangles[ti];
            let o: Vec<usize> = t.iter().copied().filter(|&x| x != v).collect();
            (o[0], o[1])
        };
        let mut used = vec![false; star.len()];
        let (x0, y0) = others(star[0]);
        let mut cycle = vec![(star[0], x0, y0)];
        used[0] = true;
        let mut cur = y0;
        while cycle.len() < star.len() {
            let next = (0..star.len()).find(|&k| {
                if used[k] {
                    return false;
                }
                let (x, y) = others(star[k]);
                x == cur || y == cur
            })?;
            used[next] = true;
            let (x, y) = others(star[next]);
            let (a, b) = if x == cur { (x, y) } else { (y, x) };
            cycle.push((star[next], a, b));
            cur = b;
        }
        if cur != x0 {
            return None;
        }
        Some(cycle)
    }

    /// Interior angle of triangle `ti` at its corner `v`.
    pub fn corner_angle(&self, ti: usize, v: usize) -> f64 {
        let t = self.triangles[ti];
        let k = t.iter().position(|&x| x == v).expect("vertex not in triangle");
        let sides = self.side_lengths(ti);
        let opp = sides[k];
        let b = sides[(k + 1) % 3];
        let c = sides[(k + 2) % 3];
        law_of_cosines(opp, b, c)
    }

    pub fn vertex_total_angle(&self, v: usize) -> f64 {
        self.triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(&v))
            .map(|(ti, _)| self.corner_angle(ti, v))
            .sum()
    }

    pub fn angle_defect(&self, v: usize) -> f64 {
        TAU - self.vertex_total_angle(v)
    }

    pub fn defect_census(&self) -> DefectCensus {
        let mut totals = vec![0.0; self.labels.len()];
        for (ti, t) in self.triangles.iter().enumerate() {
            for &v in t {
                totals[v] += self.corner_angle(ti, v);
            }
        }
        let defects: Vec<f64> = totals.iter().map(|a| TAU - a).collect();
        DefectCensus {
            total: defects.iter().sum(),
            defects,
        }
    }

    pub fn is_nonneg_curved(&self, tol: f64) -> bool {
        self.defect_census().defects.iter().all(|&d| d >= -tol)
    }

    /// Vertices whose defect exceeds `tol` in magnitude.
    pub fn singular_vertices(&self, tol: f64) -> Vec<usize> {
        let c = self.defect_census();
        (0..self.labels.len())
            .filter(|&v| c.defects[v].abs() > tol)
            .collect()
    }

    pub fn triangle_area(&self, ti: usize) -> f64 {
        let [a, b, c] = self.side_lengths(ti);
        heron(a, b, c)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// 2D layout of triangle `ti`: first corner at the origin, second on the x-axis.
    pub fn layout(&self, ti: usize) -> [[f64; 2]; 3] {
        let t = self.triangles[ti];
        let ab = self.length(t[0], t[1]);
        let ac = self.length(t[0], t[2]);
        let bc = self.length(t[1], t[2]);
        let x = (ac * ac - bc * bc + ab * ab) / (2.0 * ab);
        let y = (ac * ac - x * x).max(0.0).sqrt();
        [[0.0, 0.0], [ab, 0.0], [x, y]]
    }

    /// Same surface with vertices renumbered by `perm` (old index → new index).
    pub fn relabeled(&self, perm: &[usize]) -> TriSurface {
        let mut labels = vec![String::new(); self.labels.len()];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        let triangles = self
            .triangles
            .iter()
            .map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]])
            .collect();
        let lengths = self
            .lengths
            .iter()
            .map(|(&(a, b), &l)| (edge_key(perm[a], perm[b]), l))
            .collect();
        TriSurface {
            labels,
            triangles,
            lengths,
        }
    }

    /// Vertex orders compatible with the staircase product: each triangle's
    /// corners sorted by vertex index.
    pub fn sorted_triangles(&self) -> Vec<[usize; 3]> {
        self.triangles
            .iter()
            .map(|t| {
                let mut s = *t;
                s.sort_unstable();
                s
            })
            .collect()
    }
}

/// Angle opposite to side `opp` in a triangle with other sides `b`, `c`.
pub fn law_of_cosines(opp: f64, b: f64, c: f64) -> f64 {
    ((b * b + c * c - opp * opp) / (2.0 * b * c)).clamp(-1.0, 1.0).acos()
}

pub fn heron(a: f64, b: f64, c: f64) -> f64 {
    // Kahan's stable form
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let [a, b, c] = s;
    let p = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    0.25 * p.max(0.0).sqrt()
}

/// Per-vertex angle defects with their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectCensus {
    pub defects: Vec<f64>,
    pub total: f64,
}

impl DefectCensus {
    pub fn negative(&self, tol: f64) -> Vec<usize> {
        (0..self.defects.len())
            .filter(|&v| self.defects[v] < -tol)
            .collect()
    }

    /// Gauss-Bonnet: `total = 2πχ`.
    pub fn gauss_bonnet_residual(&self, chi: i64) -> f64 {
        self.total - 2.0 * PI * chi as f64
    }
}
