//! Intrinsic distances on a [`TriSurface`].
//!
//! Distances start from Dijkstra on a Steiner graph: every edge is cut into
//! `factor` pieces and all lattice points of a triangle are joined by
//! straight segments. The resulting polyline is then relaxed locally:
//! crossing points slide along their edges to the unfolded straight line,
//! and a path through a vertex whose total angle on one side is below π is
//! pushed off that vertex. Every step shortens the path, so the result is an
//! upper bound on the true distance that is typically exact to rounding.

use super::{edge_key, Edge, TriSurface};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::f64::consts::PI;

const MAX_RELAX_PASSES: usize = 2000;
/// Relative excess over the graph distance allowed for alternative last
/// hops when relaxing a distance.
const LAST_HOP_SLACK: f64 = 0.25;

/// A point of the surface in combinatorial coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfacePoint {
    Vertex(usize),
    /// `(1 - t)·a + t·b` with `a < b`.
    Edge { a: usize, b: usize, t: f64 },
    Face { tri: usize, bary: [f64; 3] },
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64, usize);

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Geometric context shared by graph construction and path relaxation.
struct Geometry<'a> {
    s: &'a TriSurface,
    layouts: Vec<[[f64; 2]; 3]>,
    edge_tris: HashMap<Edge, Vec<usize>>,
    star: Vec<Vec<usize>>,
    links: Vec<Vec<(usize, usize, usize)>>,
}

impl<'a> Geometry<'a> {
    fn new(s: &'a TriSurface) -> Self {
        Geometry {
            s,
            layouts: (0..s.triangles().len()).map(|t| s.layout(t)).collect(),
            edge_tris: s.edge_triangles(),
            star: s.vertex_triangles(),
            links: (0..s.n_vertices())
                .map(|v| s.link_cycle(v).expect("validated surface"))
                .collect(),
        }
    }

    fn triangles_of(&self, p: &SurfacePoint) -> Vec<usize> {
        match *p {
            SurfacePoint::Vertex(v) => self.star[v].clone(),
            SurfacePoint::Edge { a, b, .. } => self.edge_tris[&(a, b)].clone(),
            SurfacePoint::Face { tri, .. } => vec![tri],
        }
    }

    fn common_triangle(&self, p: &SurfacePoint, q: &SurfacePoint) -> Option<usize> {
        let tq = self.triangles_of(q);
        self.triangles_of(p).into_iter().find(|t| tq.contains(t))
    }

    fn bary(&self, p: &SurfacePoint, ti: usize) -> [f64; 3] {
        let t = self.s.triangles()[ti];
        let mut w = [0.0; 3];
        let slot = |v: usize| t.iter().position(|&x| x == v).expect("point not in triangle");
        match *p {
            SurfacePoint::Vertex(v) => w[slot(v)] = 1.0,
            SurfacePoint::Edge { a, b, t } => {
                w[slot(a)] = 1.0 - t;
                w[slot(b)] = t;
            }
            SurfacePoint::Face { tri, bary } => {
                assert_eq!(tri, ti, "face point outside triangle");
                w = bary;
            }
        }
        w
    }

    fn place(w: [f64; 3], corners: &[[f64; 2]; 3]) -> [f64; 2] {
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += w[k] * corners[k][0];
            out[1] += w[k] * corners[k][1];
        }
        out
    }

    fn segment_length(&self, p: &SurfacePoint, q: &SurfacePoint) -> f64 {
        let ti = self
            .common_triangle(p, q)
            .expect("consecutive path points share a triangle");
        let x = Self::place(self.bary(p, ti), &self.layouts[ti]);
        let y = Self::place(self.bary(q, ti), &self.layouts[ti]);
        (x[0] - y[0]).hypot(x[1] - y[1])
    }

    fn path_length(&self, path: &[SurfacePoint]) -> f64 {
        path.windows(2).map(|w| self.segment_length(&w[0], &w[1])).sum()
    }

    /// Corners of triangle `ti` placed with edge `a→b` on the positive
    /// x-axis and the third corner above (`up`) or below it.
    fn hinge_layout(&self, ti: usize, a: usize, b: usize, up: bool) -> [[f64; 2]; 3] {
        let t = self.s.triangles()[ti];
        let c = *t.iter().find(|&&x| x != a && x != b).unwrap();
        let l = self.s.length(a, b);
        let (ac, bc) = (self.s.length(a, c), self.s.length(b, c));
        let x = (ac * ac - bc * bc + l * l) / (2.0 * l);
        let y = (ac * ac - x * x).max(0.0).sqrt();
        let pc = [x, if up { y } else { -y }];
        let mut out = [[0.0; 2]; 3];
        for k in 0..3 {
            out[k] = if t[k] == a {
                [0.0, 0.0]
            } else if t[k] == b {
                [l, 0.0]
            } else {
                pc
            };
        }
        out
    }

    /// Slides an edge crossing to where the straight line between its
    /// neighbours meets the edge in the unfolded hinge.
    fn relax_edge_point(
        &self,
        prev: &SurfacePoint,
        cur: &SurfacePoint,
        next: &SurfacePoint,
    ) -> Option<SurfacePoint> {
        let SurfacePoint::Edge { a, b, t } = *cur else {
            return None;
        };
        let tris = &self.edge_tris[&(a, b)];
        let tp = self.triangles_of(prev);
        let tn = self.triangles_of(next);
        let in_p: Vec<bool> = tris.iter().map(|x| tp.contains(x)).collect();
        let in_n: Vec<bool> = tris.iter().map(|x| tn.contains(x)).collect();
        let (below, above) = match (in_p.as_slice(), in_n.as_slice()) {
            ([true, false], [false, true]) => (tris[0], tris[1]),
            ([false, true], [true, false]) => (tris[1], tris[0]),
            _ => return None,
        };
        let p = Self::place(self.bary(prev, below), &self.hinge_layout(below, a, b, false));
        let r = Self::place(self.bary(next, above), &self.hinge_layout(above, a, b, true));
        if p[1] >= 0.0 || r[1] <= 0.0 {
            return None;
        }
        let x = p[0] + (r[0] - p[0]) * (-p[1]) / (r[1] - p[1]);
        let tn = (x / self.s.length(a, b)).clamp(0.0, 1.0);
        let out = if tn <= 1e-12 {
            SurfacePoint::Vertex(a)
        } else if tn >= 1.0 - 1e-12 {
            SurfacePoint::Vertex(b)
        } else {
            SurfacePoint::Edge { a, b, t: tn }
        };
        let moved = match out {
            SurfacePoint::Edge { t: t2, .. } => (t2 - t).abs() > 1e-15,
            _ => true,
        };
        moved.then_some(out)
    }

    /// Angular position of `p` in the unfolded star of `v`, or `None` if
    /// `p` is not in the star.
    fn star_angle(&self, v: usize, p: &SurfacePoint) -> Option<f64> {
        let tp = self.triangles_of(p);
        let mut theta = 0.0;
        for &(ti, u0, u1) in &self.links[v] {
            let alpha = self.s.corner_angle(ti, v);
            if tp.contains(&ti) {
                let t = self.s.triangles()[ti];
                let (l0, l1) = (self.s.length(v, u0), self.s.length(v, u1));
                let mut corners = [[0.0; 2]; 3];
                for k in 0..3 {
                    corners[k] = if t[k] == v {
                        [0.0, 0.0]
                    } else if t[k] == u0 {
                        [l0, 0.0]
                    } else {
                        [l1 * alpha.cos(), l1 * alpha.sin()]
                    };
                }
                let q = Self::place(self.bary(p, ti), &corners);
                let phi = q[1].atan2(q[0]).clamp(0.0, alpha);
                return Some(theta + phi);
            }
            theta += alpha;
        }
        None
    }

    /// Replaces a pass through vertex `v` by crossings of the star edges on
    /// the side whose angle is below π, if there is such a side.
    fn bypass_vertex(
        &self,
        prev: &SurfacePoint,
        v: usize,
        next: &SurfacePoint,
    ) -> Option<Vec<SurfacePoint>> {
        let fp = self.star_angle(v, prev)?;
        let fr = self.star_angle(v, next)?;
        let link = &self.links[v];
        let mut rays = Vec::with_capacity(link.len());
        let mut theta = 0.0;
        for &(ti, u0, _) in link {
            rays.push((theta, u0));
            theta += self.s.corner_angle(ti, v);
        }
        let total = theta;
        let fwd = (fr - fp).rem_euclid(total);
        let bwd = total - fwd;
        let margin = 1e-12;
        let mut crossed: Vec<(f64, usize)> = if fwd < PI - 1e-9 {
            rays.iter()
                .map(|&(th, u)| ((th - fp).rem_euclid(total), u))
                .filter(|&(d, _)| d > margin && d < fwd - margin)
                .collect()
        } else if bwd < PI - 1e-9 {
            rays.iter()
                .map(|&(th, u)| ((fp - th).rem_euclid(total), u))
                .filter(|&(d, _)| d > margin && d < bwd - margin)
                .collect()
        } else {
            return None;
        };
        if crossed.is_empty() {
            return None;
        }
        crossed.sort_by(|x, y| x.0.total_cmp(&y.0));
        Some(
            crossed
                .into_iter()
                .map(|(_, u)| {
                    let (a, b) = edge_key(v, u);
                    SurfacePoint::Edge { a, b, t: 0.5 }
                })
                .collect(),
        )
    }

    fn straighten(&self, mut path: Vec<SurfacePoint>) -> Vec<SurfacePoint> {
        for _ in 0..MAX_RELAX_PASSES {
            let mut changed = false;
            let mut i = 1;
            while i + 1 < path.len() {
                if self.common_triangle(&path[i - 1], &path[i + 1]).is_some() {
                    path.remove(i);
                    changed = true;
                } else {
                    i += 1;
                }
            }
            for i in 1..path.len().saturating_sub(1) {
                if let Some(q) = self.relax_edge_point(&path[i - 1], &path[i], &path[i + 1]) {
                    path[i] = q;
                    changed = true;
                }
            }
            if !changed {
                let mut bypass = None;
                for i in 1..path.len().saturating_sub(1) {
                    if let SurfacePoint::Vertex(v) = path[i] {
                        if let Some(rep) = self.bypass_vertex(&path[i - 1], v, &path[i + 1]) {
                            bypass = Some((i, rep));
                            break;
                        }
                    }
                }
                match bypass {
                    Some((i, rep)) => {
                        path.splice(i..=i, rep);
                    }
                    None => break,
                }
            }
        }
        path
    }
}

/// Refined edge graph of a surface with the points its nodes stand for.
pub struct SteinerGraph<'a> {
    geo: Geometry<'a>,
    nodes: Vec<SurfacePoint>,
    adj: Vec<Vec<(usize, f64)>>,
}

impl<'a> SteinerGraph<'a> {
    pub fn new(s: &'a TriSurface, factor: usize) -> Self {
        let f = factor.max(1);
        let geo = Geometry::new(s);
        let mut nodes: Vec<SurfacePoint> = (0..s.n_vertices()).map(SurfacePoint::Vertex).collect();
        let mut edge_nodes: HashMap<(usize, usize, usize), usize> = HashMap::new();
        let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nodes.len()];
        for (ti, t) in s.triangles().iter().enumerate() {
            let mut local: Vec<(usize, [f64; 2])> = Vec::new();
            for i in 0..=f {
                for j in 0..=f - i {
                    let w = [i, j, f - i - j];
                    let bary = w.map(|x| x as f64 / f as f64);
                    let nz: Vec<usize> = (0..3).filter(|&k| w[k] > 0).collect();
                    let id = match nz[..] {
                        [k] => t[k],
                        [k, l] => {
                            let (a, b) = edge_key(t[k], t[l]);
                            let steps = if t[l] == b { w[l] } else { w[k] };
                            *edge_nodes.entry((a, b, steps)).or_insert_with(|| {
                                nodes.push(SurfacePoint::Edge {
                                    a,
                                    b,
                                    t: steps as f64 / f as f64,
                                });
                                adj.push(Vec::new());
                                nodes.len() - 1
                            })
                        }
                        _ => {
                            nodes.push(SurfacePoint::Face { tri: ti, bary });
                            adj.push(Vec::new());
                            nodes.len() - 1
                        }
                    };
                    local.push((id, Geometry::place(bary, &geo.layouts[ti])));
                }
            }
            for x in 0..local.len() {
                for y in x + 1..local.len() {
                    let (p, q) = (local[x], local[y]);
                    let d = (p.1[0] - q.1[0]).hypot(p.1[1] - q.1[1]);
                    adj[p.0].push((q.0, d));
                    adj[q.0].push((p.0, d));
                }
            }
        }
        SteinerGraph { geo, nodes, adj }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Graph distances and predecessor links from node `src`.
    pub fn dijkstra(&self, src: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.nodes.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Key(0.0, src));
        while let Some(Key(d, u)) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(w, l) in &self.adj[u] {
                let nd = d + l;
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = u;
                    heap.push(Key(nd, w));
                }
            }
        }
        (dist, pred)
    }

    fn trace(&self, pred: &[usize], target: usize) -> Vec<SurfacePoint> {
        let mut path = vec![self.nodes[target]];
        let mut cur = target;
        while pred[cur] != usize::MAX {
            cur = pred[cur];
            path.push(self.nodes[cur]);
        }
        path.reverse();
        path
    }

    /// Straightened shortest path between two surface vertices, with its length.
    pub fn shortest_path(&self, from: usize, to: usize) -> (f64, Vec<SurfacePoint>) {
        if from == to {
            return (0.0, vec![SurfacePoint::Vertex(from)]);
        }
        let (dist, pred) = self.dijkstra(from);
        let path = self.geo.straighten(self.trace(&pred, to));
        let len = self.geo.path_length(&path);
        (len.min(dist[to]), path)
    }

    /// Symmetric matrix of straightened distances between the given vertices.
    pub fn distance_matrix(&self, vertices: &[usize]) -> Vec<Vec<f64>> {
        let k = vertices.len();
        let mut m = vec![vec![0.0; k]; k];
        for i in 0..k {
            let (dist, pred) = self.dijkstra(vertices[i]);
            for j in i + 1..k {
                let d = self.relaxed_distance(&dist, &pred, vertices[j]);
                m[i][j] = d;
                m[j][i] = d;
            }
        }
        m
    }

    /// Shortest straightened path to `target` over the tree paths that
    /// enter it through each nearly optimal neighbour. Geodesics of
    /// different homotopy classes reach a vertex from different sides, so
    /// trying several last hops recovers classes the graph optimum misses.
    fn relaxed_distance(&self, dist: &[f64], pred: &[usize], target: usize) -> f64 {
        let budget = dist[target] * (1.0 + LAST_HOP_SLACK);
        let mut best = dist[target];
        let mut seen = Vec::new();
        for &(w, l) in &self.adj[target] {
            if dist[w] + l > budget || pred[w] == target || seen.contains(&w) {
                continue;
            }
            seen.push(w);
            let mut chain = self.trace(pred, w);
            chain.push(self.nodes[target]);
            let path = self.geo.straighten(chain);
            best = best.min(self.geo.path_length(&path));
        }
        best
    }
}
