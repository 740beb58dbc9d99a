//! Approximate ambient distances.
//!
//! A graph on the lattice points of every simplex (barycentric coordinates
//! in `1/factor` steps, together with the `1/(factor - 1)` lattice so that
//! face midpoints are present for the default factor) joins each pair of points of a common simplex by a
//! straight segment in its chart. Shortest graph paths are then shortened:
//! every interior point is moved to its optimal position on the face shared
//! by its two simplices (exact via unfolding), and points whose neighbours
//! share a simplex are cut out. Shortened paths remain genuine paths in the
//! complex, so the result is an upper bound on the intrinsic distance.

use super::leaf::ComplexPoint;
use super::leaf::BaryMap;
use crate::holonomy::{facet_transition, transition, Placement};
use crate::plcomplex::MetricComplex4;
use crate::tensor4::Vec4;
use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

/// Sweeps of the shortening loop.
const MAX_SWEEPS: usize = 200;
/// Relative length change below which exact descent stops.
const EXACT_TOL: f64 = 1e-10;
/// Relative gain below which a re-routing round ends the loop.
const ROUND_TOL: f64 = 1e-8;
/// Re-routing rounds of the shortening loop.
const MAX_ROUNDS: usize = 8;
/// Facet crossings allowed along one ray.
const MAX_RAY_STEPS: usize = 100_000;
/// Aim corrections when straightening a path into a ray.
const SHOOT_ITERS: usize = 30;
/// Rays are traced this much past the current length when locating the target.
const SHOOT_OVERSHOOT: f64 = 1.25;
/// Foot-point updates when shooting at a surface.
const FOOT_ITERS: usize = 20;
/// Sweeps per smoothing level.
const SMOOTH_SWEEPS: usize = 60;
/// Smoothing schedule, relative to the initial path length.
const ETA_START: f64 = 0.05;
const ETA_END: f64 = 1e-6;
const ETA_RATIO: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
struct Dist(f64);

impl Eq for Dist {}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Shortest-path tree: distance, predecessor and the simplex of the last segment.
pub struct PathTree {
    pub dist: Vec<f64>,
    pred: Vec<Option<(usize, usize)>>,
}

/// A polyline through the complex; segment `k` runs inside `simplices[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPath {
    pub points: Vec<ComplexPoint>,
    pub simplices: Vec<usize>,
}

pub struct AmbientGraph<'a> {
    m: &'a MetricComplex4,
    adj: Vec<Vec<(usize, f64, usize)>>,
    points: Vec<ComplexPoint>,
    /// Per simplex: (node, position in its chart).
    members: Vec<Vec<(usize, Vec4)>>,
    vertex_node: Vec<usize>,
    vertex_simplices: Vec<Vec<usize>>,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl<'a> AmbientGraph<'a> {
    pub fn new(m: &'a MetricComplex4, factor: usize) -> Self {
        let factor = factor.max(1);
        let coarse = (factor - 1).max(1);
        let denom = factor * coarse;
        let mut lattice: Vec<Vec<usize>> = compositions(factor, 5)
            .into_iter()
            .map(|c| c.into_iter().map(|x| x * coarse).collect())
            .collect();
        if coarse > 1 {
            lattice.extend(
                compositions(coarse, 5)
                    .into_iter()
                    .filter(|c| c.iter().any(|x| x % coarse != 0))
                    .map(|c| c.into_iter().map(|x| x * factor).collect()),
            );
        }
        let factor = denom;
        let mut keys: HashMap<Vec<(usize, usize)>, usize> = HashMap::new();
        let mut points = Vec::new();
        let mut members = vec![Vec::new(); m.n_simplices()];
        let mut vertex_simplices = vec![Vec::new(); m.n_vertices()];
        for (si, s) in m.simplices().iter().enumerate() {
            for &v in &s.vertices {
                vertex_simplices[v].push(si);
            }
            let chart = m.chart(si);
            for c in &lattice {
                let mut key: Vec<(usize, usize)> = (0..5)
                    .filter(|&k| c[k] > 0)
                    .map(|k| (s.vertices[k], c[k]))
                    .collect();
                key.sort_unstable();
                let n = keys.len();
                let node = *keys.entry(key.clone()).or_insert(n);
                if node == n {
                    points.push(ComplexPoint {
                        support: key.iter().map(|p| p.0).collect(),
                        weights: key.iter().map(|p| p.1 as f64 / factor as f64).collect(),
                    });
                }
                let mut x = Vec4::zeros();
                for k in 0..5 {
                    x += chart[k] * (c[k] as f64 / factor as f64);
                }
                members[si].push((node, x));
            }
        }
        let mut adj = vec![Vec::new(); keys.len()];
        for (si, list) in members.iter().enumerate() {
            for (i, (a, xa)) in list.iter().enumerate() {
                for (b, xb) in &list[i + 1..] {
                    let d = (xa - xb).norm();
                    adj[*a].push((*b, d, si));
                    adj[*b].push((*a, d, si));
                }
            }
        }
        let vertex_node = (0..m.n_vertices())
            .map(|v| keys.get(&vec![(v, factor)]).copied().unwrap_or(usize::MAX))
            .collect();
        AmbientGraph {
            m,
            adj,
            points,
            members,
            vertex_node,
            vertex_simplices,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.adj.len()
    }

    pub fn vertex_node(&self, v: usize) -> usize {
        self.vertex_node[v]
    }

    pub fn point(&self, node: usize) -> &ComplexPoint {
        &self.points[node]
    }

    /// Simplices whose vertex set contains `support`.
    pub fn simplices_containing(&self, support: &[usize]) -> Vec<usize> {
        let Some(&first) = support.first() else {
            return Vec::new();
        };
        self.vertex_simplices[first]
            .iter()
            .copied()
            .filter(|&s| {
                let vs = &self.m.simplices()[s].vertices;
                support.iter().all(|v| vs.contains(v))
            })
            .collect()
    }

    /// Adds a point of the complex as a node joined to everything in the
    /// simplices containing it.
    pub fn add_point(&mut self, p: &ComplexPoint) -> usize {
        let node = self.adj.len();
        self.adj.push(Vec::new());
        self.points.push(p.clone());
        for si in self.simplices_containing(&p.support) {
            let x = p.position(self.m, si).expect("support is a face");
            for k in 0..self.members[si].len() {
                let (other, y) = self.members[si][k];
                let d = (x - y).norm();
                self.adj[node].push((other, d, si));
                self.adj[other].push((node, d, si));
            }
            self.members[si].push((node, x));
        }
        node
    }

    /// Smallest value of `d` over the nodes lying in simplex `s`.
    pub fn simplex_min(&self, s: usize, d: &[f64]) -> f64 {
        self.members[s]
            .iter()
            .map(|(k, _)| d[*k])
            .fold(f64::INFINITY, f64::min)
    }

    /// Shortest graph distances from the nearest of `sources`.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<f64> {
        self.shortest_paths(sources).dist
    }

    pub fn shortest_paths(&self, sources: &[usize]) -> PathTree {
        let mut dist = vec![f64::INFINITY; self.adj.len()];
        let mut pred = vec![None; self.adj.len()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Reverse((Dist(0.0), s)));
        }
        while let Some(Reverse((Dist(d), u))) = heap.pop() {
            if d > dist[u] {
                continue;
            }
            for &(v, w, s) in &self.adj[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred[v] = Some((u, s));
                    heap.push(Reverse((Dist(nd), v)));
                }
            }
        }
        PathTree { dist, pred }
    }

    /// Graph path from `target` back to its source in `tree`.
    pub fn path_to(&self, tree: &PathTree, target: usize) -> ComplexPath {
        let mut points = vec![self.points[target].clone()];
        let mut simplices = Vec::new();
        let mut cur = target;
        while let Some((p, s)) = tree.pred[cur] {
            points.push(self.points[p].clone());
            simplices.push(s);
            cur = p;
        }
        ComplexPath { points, simplices }
    }

    /// Shortened length of the tree path from `target` to its source.
    pub fn shortened_distance(
        &self,
        tree: &PathTree,
        target: usize,
        source_polygons: Option<&HashMap<usize, Vec<Vec<ComplexPoint>>>>,
    ) -> f64 {
        if !tree.dist[target].is_finite() {
            return f64::INFINITY;
        }
        let mut path = self.path_to(tree, target);
        let shortened = self.shorten(&mut path, source_polygons).min(tree.dist[target]);
        if path.simplices.is_empty() {
            return shortened;
        }
        // straighten into a ray, aiming first along the shortened path
        let s0 = path.simplices[0];
        let a = path.points[0].position(self.m, s0).expect("point in simplex");
        let end = path.points.last().expect("nonempty path");
        let shot = self.developed_end(&path).and_then(|t| match source_polygons {
            None => self.shoot(s0, a, end, t - a).map(|r| r.0),
            Some(polys) => self.shoot_to_surface(s0, a, end, t - a, polys),
        });
        shot.map_or(shortened, |l| l.min(shortened))
    }

    pub fn path_length(&self, path: &ComplexPath) -> f64 {
        path.simplices
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let a = path.points[k].position(self.m, s).expect("point in simplex");
                let b = path.points[k + 1].position(self.m, s).expect("point in simplex");
                (a - b).norm()
            })
            .sum()
    }

    /// Length with every segment `d` replaced by `√(d² + η²)`.
    fn smoothed_length(&self, path: &ComplexPath, eta: f64) -> f64 {
        path.simplices
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let a = path.points[k].position(self.m, s).expect("point in simplex");
                let b = path.points[k + 1].position(self.m, s).expect("point in simplex");
                (a - b).norm().hypot(eta)
            })
            .sum()
    }

    /// Shortens `path` keeping its first point fixed. If `target` is given,
    /// the last point may move within the target's polygons (listed per
    /// simplex); otherwise it stays fixed. Returns the final length.
    ///
    /// Within a fixed chain of simplices the length is convex in the crossing
    /// points but not smooth where points coincide; relaxing a smoothed
    /// length with a shrinking `η` first keeps point-by-point descent from
    /// stalling on such kinks.
    pub fn shorten(&self, path: &mut ComplexPath, target: Option<&HashMap<usize, Vec<Vec<ComplexPoint>>>>) -> f64 {
        if path.simplices.is_empty() {
            return 0.0;
        }
        let scale = self.path_length(path).max(f64::MIN_POSITIVE);
        self.expand_corridor(path);
        self.unfold(path);
        let mut len = self.path_length(path);
        for _ in 0..MAX_ROUNDS {
            let mut eta = ETA_START * scale;
            while eta > ETA_END * scale {
                self.descend(path, eta, None);
                eta *= ETA_RATIO;
            }
            self.descend(path, 0.0, target);
            // local moves are exhausted; try re-routing through other simplices
            let mut moved = false;
            for i in 1..path.points.len().saturating_sub(1) {
                moved |= self.relax_point_globally(path, i);
            }
            if !(moved | self.expand_corridor(path)) {
                break;
            }
            self.unfold(path);
            let next = self.path_length(path);
            let stalled = len - next <= ROUND_TOL * len;
            len = next;
            if stalled {
                break;
            }
        }
        self.path_length(path)
    }

    fn descend(&self, path: &mut ComplexPath, eta: f64, target: Option<&HashMap<usize, Vec<Vec<ComplexPoint>>>>) {
        let mut len = self.smoothed_length(path, eta);
        // smoothed levels only need to bring the points near the optimum
        let (sweeps, tol) = if eta > 0.0 { (SMOOTH_SWEEPS, 1e-6) } else { (MAX_SWEEPS, EXACT_TOL) };
        for _ in 0..sweeps {
            if eta == 0.0 {
                self.cut_corners(path);
            }
            for i in 1..path.points.len().saturating_sub(1) {
                self.relax_point(path, i, eta);
            }
            if let Some(polys) = target {
                self.relax_end(path, polys);
            }
            let next = self.smoothed_length(path, eta);
            let stalled = len - next <= tol * len.max(1.0);
            len = next;
            if stalled {
                break;
            }
        }
    }

    /// Follows a straight ray from `a` (chart of `s0`) in unit direction `d`
    /// for `length`, crossing facets through their gluings.
    fn trace_ray(&self, s0: usize, a: Vec4, d: Vec4, length: f64) -> Option<Ray> {
        let (mut s, mut x, mut dir) = (s0, a, d);
        let mut place = Placement::identity();
        let mut corridor = vec![(s0, place.clone())];
        let mut remaining = length;
        for _ in 0..MAX_RAY_STEPS {
            let map = BaryMap::new(self.m.chart(s));
            let (l, mu) = (map.bary(&x), map.bary_dir(&dir));
            let exit = (0..5)
                .filter(|&k| mu[k] < 0.0)
                .map(|k| (l[k].max(0.0) / -mu[k], k))
                .min_by(|p, q| p.0.total_cmp(&q.0));
            let Some((t, k)) = exit.filter(|e| e.0 < remaining) else {
                return Some(Ray {
                    end_simplex: s,
                    end: x + dir * remaining,
                    corridor,
                });
            };
            x += dir * t;
            remaining -= t;
            let (next, tr) = facet_transition(self.m, s, k)?;
            let back = tr.inverse();
            x = back.apply(&x);
            dir = back.rotation * dir;
            place = place.compose(&tr);
            s = next;
            corridor.push((s, place.clone()));
        }
        None
    }

    /// Last point of `path` in the chart of its first simplex, developed
    /// along a facet-adjacent chain through the path's simplices.
    fn developed_end(&self, path: &ComplexPath) -> Option<Vec4> {
        let mut chain = path.clone();
        self.expand_corridor(&mut chain);
        let mut place = Placement::identity();
        for w in chain.simplices.windows(2) {
            if w[0] != w[1] {
                place = place.compose(&transition(self.m, w[0], w[1]).ok()?);
            }
        }
        let last = *chain.simplices.last()?;
        Some(place.apply(&chain.points.last()?.position(self.m, last)?))
    }

    /// Straight ray from `a` (chart of `s0`) to `target`: starting from the
    /// aim `dir`, re-aims at the target developed along the simplices the
    /// current ray visits until the ray lands on it. Returns the shortest
    /// landed ray and its length.
    fn shoot(&self, s0: usize, a: Vec4, target: &ComplexPoint, mut dir: Vec4) -> Option<(f64, Ray)> {
        let mut len = dir.norm();
        let tol = 1e-9 * len.max(1.0);
        let mut best: Option<(f64, Ray)> = None;
        for _ in 0..SHOOT_ITERS {
            let norm = dir.norm();
            if norm <= tol {
                break;
            }
            let d = dir / norm;
            let reach = len * SHOOT_OVERSHOOT;
            let ray = self.trace_ray(s0, a, d, reach)?;
            // developed copy of the target closest to the ray
            let t_dev = ray
                .corridor
                .iter()
                .filter_map(|(s, p)| target.position(self.m, *s).map(|x| p.apply(&x)))
                .min_by(|x, y| segment_distance(&a, &d, reach, x).total_cmp(&segment_distance(&a, &d, reach, y)))?;
            let new_dir = t_dev - a;
            let new_len = new_dir.norm();
            if new_len <= tol {
                return Some((0.0, ray));
            }
            if let Some(r) = self.trace_ray(s0, a, new_dir / new_len, new_len) {
                let landed = target
                    .position(self.m, r.end_simplex)
                    .is_some_and(|x| (x - r.end).norm() <= tol);
                if landed && best.as_ref().is_none_or(|b| new_len < b.0) {
                    best = Some((new_len, r));
                }
            }
            let converged = (new_dir / new_len - d).norm() <= 1e-12 && (new_len - len).abs() <= tol;
            dir = new_dir;
            len = new_len;
            if converged {
                break;
            }
        }
        best
    }

    /// Distance from `a` (chart of `s0`) to a totally geodesic surface given
    /// by its polygons: alternates shooting at the current foot point with
    /// moving the foot to the closest polygon point seen from the developed
    /// source.
    fn shoot_to_surface(
        &self,
        s0: usize,
        a: Vec4,
        foot: &ComplexPoint,
        dir: Vec4,
        polys: &HashMap<usize, Vec<Vec<ComplexPoint>>>,
    ) -> Option<f64> {
        let mut foot = foot.clone();
        let mut dir = dir;
        let mut best: Option<f64> = None;
        for _ in 0..FOOT_ITERS {
            let Some((len, ray)) = self.shoot(s0, a, &foot, dir) else {
                break;
            };
            best = Some(best.map_or(len, |b: f64| b.min(len)));
            let (e, to_start) = ray.corridor.last().cloned()?;
            let a_e = to_start.inverse().apply(&a);
            // closest polygon point: (distance, point, its simplex, chart map to the start)
            let mut next: Option<(f64, ComplexPoint, usize, Placement)> = None;
            for s in self.simplices_containing(&foot.support) {
                let Some(list) = polys.get(&s) else {
                    continue;
                };
                let Some(place) = self.star_placement(&foot.support, e, s) else {
                    continue;
                };
                let a_s = place.inverse().apply(&a_e);
                for poly in list {
                    let corners: Vec<Vec4> = poly.iter().map(|p| p.position(self.m, s).unwrap()).collect();
                    if let Some((d, w)) = closest_in_polygon(&corners, &a_s) {
                        if next.as_ref().is_none_or(|n| d < n.0) {
                            let mut acc = Vec::new();
                            for (corner, wk) in poly.iter().zip(&w) {
                                for (v, x) in corner.support.iter().zip(&corner.weights) {
                                    acc.push((*v, x * wk));
                                }
                            }
                            next = Some((d, normalized(acc), s, to_start.compose(&place)));
                        }
                    }
                }
            }
            let (_, p, s, place) = next?;
            let p_dev = place.apply(&p.position(self.m, s)?);
            let moved = (p_dev - (a + dir.normalize() * len)).norm();
            dir = p_dev - a;
            foot = p;
            if moved <= 1e-10 * len.max(1.0) {
                break;
            }
        }
        best
    }

    /// Replaces every junction where consecutive segments meet in less
    /// than a facet by a chain of facet-adjacent simplices around the
    /// junction point, giving each crossing its own movable point.
    fn expand_corridor(&self, path: &mut ComplexPath) -> bool {
        let mut changed = false;
        let mut i = 1;
        while i + 1 < path.points.len() {
            let (s0, s1) = (path.simplices[i - 1], path.simplices[i]);
            let shared = self.m.simplices()[s0]
                .vertices
                .iter()
                .filter(|v| self.m.simplices()[s1].vertices.contains(v))
                .count();
            if s0 == s1 || shared == 4 {
                i += 1;
                continue;
            }
            let Some(chain) = self.star_chain(&path.points[i].support, s0, s1) else {
                i += 1;
                continue;
            };
            let r = chain.len() - 1;
            let copies = vec![path.points[i].clone(); r - 1];
            path.points.splice(i..i, copies);
            path.simplices.splice(i..i, chain[1..r].iter().copied());
            changed = true;
            i += r;
        }
        changed
    }

    /// Places the crossing points of a facet-adjacent path where the straight
    /// line between its developed endpoints meets each facet (clamped to the
    /// facet). Exact when that line stays inside the corridor.
    fn unfold(&self, path: &mut ComplexPath) {
        let n = path.simplices.len();
        if n < 2 {
            return;
        }
        let mut placements = vec![Placement::identity(); n];
        for k in 1..n {
            let (s, t) = (path.simplices[k - 1], path.simplices[k]);
            placements[k] = if s == t {
                placements[k - 1].clone()
            } else {
                match transition(self.m, s, t) {
                    Ok(p) => placements[k - 1].compose(&p),
                    Err(_) => return,
                }
            };
        }
        let a = path.points[0].position(self.m, path.simplices[0]).unwrap();
        let b = placements[n - 1].apply(&path.points[n].position(self.m, path.simplices[n - 1]).unwrap());
        let before = self.path_length(path);
        let mut trial = path.clone();
        for j in 1..n {
            let (s0, s1) = (path.simplices[j - 1], path.simplices[j]);
            if s0 == s1 {
                continue;
            }
            let facet: Vec<usize> = self.m.simplices()[s1]
                .vertices
                .iter()
                .copied()
                .filter(|v| self.m.simplices()[s0].vertices.contains(v))
                .collect();
            let ys: Vec<Vec4> = facet.iter().map(|&v| placements[j].apply(&self.vertex_position(s1, v))).collect();
            // a + t (b - a) = Σ λ_v y_v with Σ λ_v = 1
            let mut lhs = DMatrix::zeros(5, 1 + facet.len());
            let mut rhs = DVector::zeros(5);
            for r in 0..4 {
                lhs[(r, 0)] = a[r] - b[r];
                for (c, y) in ys.iter().enumerate() {
                    lhs[(r, c + 1)] = y[r];
                }
                rhs[r] = a[r];
            }
            for c in 0..facet.len() {
                lhs[(4, c + 1)] = 1.0;
            }
            rhs[4] = 1.0;
            let Some(sol) = lhs.lu().solve(&rhs) else {
                continue;
            };
            let weights = facet.iter().enumerate().map(|(c, &v)| (v, sol[c + 1].max(0.0))).collect();
            trial.points[j] = normalized(weights);
        }
        if self.path_length(&trial) < before {
            *path = trial;
        }
    }

    /// Map from the chart of `s` into the chart of `e`, composed along a
    /// facet-adjacent chain of simplices containing `support`.
    fn star_placement(&self, support: &[usize], e: usize, s: usize) -> Option<Placement> {
        let chain = self.star_chain(support, e, s)?;
        let mut place = Placement::identity();
        for w in chain.windows(2) {
            place = place.compose(&transition(self.m, w[0], w[1]).ok()?);
        }
        Some(place)
    }

    /// Shortest facet-adjacent chain from `s0` to `s1` among the simplices
    /// containing `support`.
    fn star_chain(&self, support: &[usize], s0: usize, s1: usize) -> Option<Vec<usize>> {
        let star = self.simplices_containing(support);
        let mut prev: HashMap<usize, usize> = HashMap::from([(s0, s0)]);
        let mut queue = std::collections::VecDeque::from([s0]);
        while let Some(s) = queue.pop_front() {
            if s == s1 {
                let mut chain = vec![s1];
                let mut cur = s1;
                while cur != s0 {
                    cur = prev[&cur];
                    chain.push(cur);
                }
                chain.reverse();
                return Some(chain);
            }
            for g in self.m.neighbors(s).iter().flatten() {
                if star.contains(&g.simplex) && !prev.contains_key(&g.simplex) {
                    prev.insert(g.simplex, s);
                    queue.push_back(g.simplex);
                }
            }
        }
        None
    }

    /// Drops points whose neighbours see each other inside one simplex,
    /// when that is strictly shorter.
    fn cut_corners(&self, path: &mut ComplexPath) {
        let mut i = 1;
        while i + 1 < path.points.len() {
            let mut both: Vec<usize> = path.points[i - 1].support.clone();
            both.extend(&path.points[i + 1].support);
            both.sort_unstable();
            both.dedup();
            let shortcut = self.simplices_containing(&both).first().copied().filter(|&s| {
                let a = path.points[i - 1].position(self.m, s).unwrap();
                let b = path.points[i + 1].position(self.m, s).unwrap();
                (a - b).norm() < self.detour(path, i, 0.0) - 1e-12
            });
            if let Some(s) = shortcut {
                path.points.remove(i);
                path.simplices.remove(i);
                path.simplices[i - 1] = s;
            } else {
                i += 1;
            }
        }
    }

    fn vertex_position(&self, s: usize, v: usize) -> Vec4 {
        self.m.chart(s)[self.m.simplices()[s].local_index(v).expect("vertex of simplex")]
    }

    /// Shortest route `a → X → b` with `X` in the relative interior (or
    /// closure) of the face spanned by `face`, where `a` is read in chart
    /// `s0` and `b` in chart `s1`. The optimum lies on the straight segment
    /// of the unfolding, so it is exact whenever it is feasible.
    fn route_through(&self, a: &Vec4, s0: usize, b: &Vec4, s1: usize, face: &[usize], eta: f64) -> Option<(f64, ComplexPoint)> {
        let ys: Vec<Vec4> = face.iter().map(|&v| self.vertex_position(s0, v)).collect();
        let zs: Vec<Vec4> = face.iter().map(|&v| self.vertex_position(s1, v)).collect();
        let (alpha, ha) = affine_projection(&ys, a)?;
        let (beta, hb) = affine_projection(&zs, b)?;
        // smoothing adds η to both heights
        let (ha, hb) = (ha.hypot(eta), hb.hypot(eta));
        let t = if ha + hb > 0.0 { ha / (ha + hb) } else { 0.5 };
        let gamma: Vec<f64> = alpha.iter().zip(&beta).map(|(p, q)| p + t * (q - p)).collect();
        if gamma.iter().any(|&g| g < -1e-12) {
            return None;
        }
        let ap: Vec4 = alpha.iter().zip(&ys).map(|(w, p)| p * *w).sum();
        let bp: Vec4 = beta.iter().zip(&ys).map(|(w, p)| p * *w).sum();
        let value = (bp - ap).norm().hypot(ha + hb);
        let weights = face.iter().zip(&gamma).map(|(&v, &g)| (v, g.max(0.0))).collect();
        Some((value, normalized(weights)))
    }

    fn detour(&self, path: &ComplexPath, i: usize, eta: f64) -> f64 {
        let (s0, s1) = (path.simplices[i - 1], path.simplices[i]);
        let x = &path.points[i];
        (path.points[i - 1].position(self.m, s0).unwrap() - x.position(self.m, s0).unwrap())
            .norm()
            .hypot(eta)
            + (path.points[i + 1].position(self.m, s1).unwrap() - x.position(self.m, s1).unwrap())
                .norm()
                .hypot(eta)
    }

    /// Optimal position of point `i` on the face shared by its two segments.
    fn relax_point(&self, path: &mut ComplexPath, i: usize, eta: f64) -> bool {
        let (s0, s1) = (path.simplices[i - 1], path.simplices[i]);
        let v1 = &self.m.simplices()[s1].vertices;
        let face: Vec<usize> = self.m.simplices()[s0]
            .vertices
            .iter()
            .copied()
            .filter(|v| v1.contains(v))
            .collect();
        let a = path.points[i - 1].position(self.m, s0).expect("point in simplex");
        let b = path.points[i + 1].position(self.m, s1).expect("point in simplex");
        let current = self.detour(path, i, eta);
        let mut best: Option<(f64, ComplexPoint)> = None;
        for sub in subsets(&face) {
            if let Some((value, p)) = self.route_through(&a, s0, &b, s1, &sub, eta) {
                if best.as_ref().is_none_or(|(v, _)| value < *v) {
                    best = Some((value, p));
                }
            }
        }
        match best {
            Some((value, p)) if value < current - 1e-15 => {
                path.points[i] = p;
                true
            }
            _ => false,
        }
    }

    /// Like [`Self::relax_point`], but the point may move to any face
    /// reachable in one segment from both neighbours, re-routing the path
    /// through other simplices.
    fn relax_point_globally(&self, path: &mut ComplexPath, i: usize) -> bool {
        let (pa, pb) = (&path.points[i - 1], &path.points[i + 1]);
        let current = self.detour(path, i, 0.0);
        let mut seen = std::collections::HashSet::new();
        let mut best: Option<(f64, ComplexPoint, usize, usize)> = None;
        for s0 in self.simplices_containing(&pa.support) {
            let a = pa.position(self.m, s0).unwrap();
            for face in subsets(&self.m.simplices()[s0].vertices) {
                if !seen.insert(face.clone()) {
                    continue;
                }
                let mut need = face.clone();
                need.extend(&pb.support);
                need.sort_unstable();
                need.dedup();
                let Some(&s1) = self.simplices_containing(&need).first() else {
                    continue;
                };
                let b = pb.position(self.m, s1).unwrap();
                if let Some((value, p)) = self.route_through(&a, s0, &b, s1, &face, 0.0) {
                    if best.as_ref().is_none_or(|bst| value < bst.0) {
                        best = Some((value, p, s0, s1));
                    }
                }
            }
        }
        match best {
            Some((value, p, s0, s1)) if value < current - 1e-12 * current.max(1.0) => {
                path.points[i] = p;
                path.simplices[i - 1] = s0;
                path.simplices[i] = s1;
                true
            }
            _ => false,
        }
    }

    /// Moves the last point to the closest point of the target polygons
    /// reachable in one straight segment from the previous point.
    fn relax_end(&self, path: &mut ComplexPath, polys: &HashMap<usize, Vec<Vec<ComplexPoint>>>) {
        let n = path.points.len();
        if n < 2 {
            return;
        }
        let prev = &path.points[n - 2];
        let mut best: Option<(f64, usize, ComplexPoint)> = None;
        let last_s = path.simplices[n - 2];
        let cur = (prev.position(self.m, last_s).unwrap() - path.points[n - 1].position(self.m, last_s).unwrap()).norm();
        for s in self.simplices_containing(&prev.support) {
            let Some(list) = polys.get(&s) else {
                continue;
            };
            let a = prev.position(self.m, s).unwrap();
            for poly in list {
                let corners: Vec<Vec4> = poly.iter().map(|p| p.position(self.m, s).unwrap()).collect();
                if let Some((d, w)) = closest_in_polygon(&corners, &a) {
                    if best.as_ref().is_none_or(|b| d < b.0) {
                        let mut acc: Vec<(usize, f64)> = Vec::new();
                        for (corner, wk) in poly.iter().zip(&w) {
                            for (v, x) in corner.support.iter().zip(&corner.weights) {
                                acc.push((*v, x * wk));
                            }
                        }
                        best = Some((d, s, normalized(acc)));
                    }
                }
            }
        }
        if let Some((d, s, p)) = best {
            if d < cur {
                path.points[n - 1] = p;
                path.simplices[n - 2] = s;
            }
        }
    }
}

/// Nonempty subsets of `items`, preserving order.
fn subsets(items: &[usize]) -> Vec<Vec<usize>> {
    (1..(1u32 << items.len()))
        .map(|mask| {
            (0..items.len())
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| items[k])
                .collect()
        })
        .collect()
}

/// A traced ray: where it ends and the simplices it crossed, each with the
/// map from its chart into the starting chart.
struct Ray {
    end_simplex: usize,
    end: Vec4,
    corridor: Vec<(usize, Placement)>,
}

/// Distance from `x` to the segment `a + t·d`, `0 ≤ t ≤ len` (unit `d`).
fn segment_distance(a: &Vec4, d: &Vec4, len: f64, x: &Vec4) -> f64 {
    let t = d.dot(&(x - a)).clamp(0.0, len);
    (a + d * t - x).norm()
}

/// Merges duplicate vertices, drops zero weights and sorts by vertex id.
fn normalized(mut pairs: Vec<(usize, f64)>) -> ComplexPoint {
    pairs.sort_by_key(|p| p.0);
    let mut merged: Vec<(usize, f64)> = Vec::new();
    for (v, w) in pairs {
        match merged.last_mut() {
            Some(last) if last.0 == v => last.1 += w,
            _ => merged.push((v, w)),
        }
    }
    merged.retain(|p| p.1 > 0.0);
    let total: f64 = merged.iter().map(|p| p.1).sum();
    ComplexPoint {
        support: merged.iter().map(|p| p.0).collect(),
        weights: merged.iter().map(|p| p.1 / total).collect(),
    }
}

/// Orthogonal projection of `x` onto the affine hull of `pts`: affine
/// coordinates and distance. `None` for degenerate hulls.
fn affine_projection(pts: &[Vec4], x: &Vec4) -> Option<(Vec<f64>, f64)> {
    let n = pts.len() - 1;
    if n == 0 {
        return Some((vec![1.0], (x - pts[0]).norm()));
    }
    // Gram system padded with the identity to a fixed 4×4 size
    let mut g = Matrix4::identity();
    let mut r = Vector4::zeros();
    for i in 0..n {
        let ei = pts[i + 1] - pts[0];
        r[i] = ei.dot(&(x - pts[0]));
        for j in 0..n {
            g[(i, j)] = ei.dot(&(pts[j + 1] - pts[0]));
        }
    }
    let c = g.cholesky()?.solve(&r);
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(1.0 - c.rows(0, n).sum());
    coeffs.extend(c.rows(0, n).iter());
    let p: Vec4 = coeffs.iter().zip(pts).map(|(w, q)| q * *w).sum();
    Some((coeffs, (x - p).norm()))
}

/// Closest point to `x` in the convex hull of a planar convex polygon,
/// as distance and weights on the corners.
fn closest_in_polygon(corners: &[Vec4], x: &Vec4) -> Option<(f64, Vec<f64>)> {
    let n = corners.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |idx: &[usize]| {
        let pts: Vec<Vec4> = idx.iter().map(|&k| corners[k]).collect();
        if let Some((c, d)) = affine_projection(&pts, x) {
            if c.iter().all(|&w| w >= -1e-12) && best.as_ref().is_none_or(|b| d < b.0) {
                let mut w = vec![0.0; n];
                for (k, &ci) in idx.iter().zip(&c) {
                    w[*k] = ci.max(0.0);
                }
                best = Some((d, w));
            }
        }
    };
    for i in 0..n {
        consider(&[i]);
        consider(&[i, (i + 1) % n]);
        // fan triangles cover the polygon
        if i >= 1 && i + 1 < n {
            consider(&[0, i, i + 1]);
        }
    }
    best
}
