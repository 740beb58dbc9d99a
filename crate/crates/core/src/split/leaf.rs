//! Leaf tracing: slices of simplices by affine 2-planes parallel to one of
//! the two plane fields, glued into a closed polyhedral surface.

use super::{AlignmentEntry, AlignmentTag, SplitConfig};
use crate::forms::{DistributionPair, Which};
use crate::plcomplex::{MetricComplex4, Stratum};
use crate::surface2::{edge_key, simplify_flat_vertices, SurfaceError, TriSurface, DEFECT_TOL};
use crate::tensor4::{Mat4, OrientedPlane, Vec4};
use nalgebra::Vector5;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap, VecDeque};
use thiserror::Error;

/// Two barycentric descriptions of the same point are merged when their
/// weights differ by less than this.
const MERGE_TOL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeafError {
    #[error("leaf did not close within {budget} polygon visits")]
    NonClosingLeaf { budget: usize },
    #[error("seed lies on the singular stratum through triangle {0:?}")]
    SeedSingular([usize; 3]),
    #[error("seed is not a point of simplex {0}")]
    InvalidSeed(usize),
    #[error("leaf polygons do not form a closed surface: {0}")]
    Assembly(SurfaceError),
}

/// A point of a simplex in barycentric coordinates (local vertex order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedPoint {
    pub simplex: usize,
    pub bary: [f64; 5],
}

impl SeedPoint {
    pub fn barycenter(simplex: usize) -> Self {
        SeedPoint {
            simplex,
            bary: [0.2; 5],
        }
    }
}

/// A point of the complex: convex weights on the vertices of its support
/// face, listed by increasing vertex id. Chart-independent.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexPoint {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

impl ComplexPoint {
    /// From barycentric coordinates in simplex `s`; weights at most `snap` are dropped.
    pub fn from_bary(m: &MetricComplex4, s: usize, bary: &[f64; 5], snap: f64) -> Self {
        let verts = m.simplices()[s].vertices;
        let mut pairs: Vec<(usize, f64)> = (0..5)
            .filter(|&k| bary[k] > snap)
            .map(|k| (verts[k], bary[k]))
            .collect();
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        for p in &mut pairs {
            p.1 /= total;
        }
        pairs.sort_by_key(|p| p.0);
        ComplexPoint {
            support: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    }

    /// Position in the chart of `s`, or `None` if the support is not a face of `s`.
    pub fn position(&self, m: &MetricComplex4, s: usize) -> Option<Vec4> {
        let simplex = &m.simplices()[s];
        let chart = m.chart(s);
        let mut x = Vec4::zeros();
        for (v, w) in self.support.iter().zip(&self.weights) {
            x += chart[simplex.local_index(*v)?] * *w;
        }
        Some(x)
    }

    /// Barycentric coordinates in simplex `s`.
    pub fn bary_in(&self, m: &MetricComplex4, s: usize) -> Option<[f64; 5]> {
        let simplex = &m.simplices()[s];
        let mut out = [0.0; 5];
        for (v, w) in self.support.iter().zip(&self.weights) {
            out[simplex.local_index(*v)?] = *w;
        }
        Some(out)
    }

    fn close_to(&self, other: &Self) -> bool {
        self.support == other.support
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| (a - b).abs() <= MERGE_TOL)
    }
}

/// Affine barycentric coordinate map of one simplex chart.
pub(crate) struct BaryMap {
    origin: Vec4,
    inv: Mat4,
}

impl BaryMap {
    pub(crate) fn new(chart: &[Vec4; 5]) -> Self {
        let e = Mat4::from_columns(&[
            chart[1] - chart[0],
            chart[2] - chart[0],
            chart[3] - chart[0],
            chart[4] - chart[0],
        ]);
        BaryMap {
            origin: chart[0],
            inv: e.try_inverse().expect("non-degenerate simplex"),
        }
    }

    pub(crate) fn bary(&self, x: &Vec4) -> Vector5<f64> {
        let l = self.inv * (x - self.origin);
        Vector5::new(1.0 - l.sum(), l[0], l[1], l[2], l[3])
    }

    /// Change of barycentric coordinates along a direction.
    pub(crate) fn bary_dir(&self, d: &Vec4) -> Vector5<f64> {
        let l = self.inv * d;
        Vector5::new(-l.sum(), l[0], l[1], l[2], l[3])
    }
}

/// Keeps the part of a convex polygon where `c + g·p ≥ 0`.
fn clip(poly: &[[f64; 2]], c: f64, g: [f64; 2]) -> Vec<[f64; 2]> {
    let f = |p: &[f64; 2]| c + g[0] * p[0] + g[1] * p[1];
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
        let (fp, fq) = (f(&p), f(&q));
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Slice of simplex `s` by the affine plane through `x` spanned by `plane`,
/// as barycentric coordinates of the polygon corners in counter-clockwise
/// order with respect to the plane's orientation.
pub fn slice_polygon(
    m: &MetricComplex4,
    s: usize,
    x: &Vec4,
    plane: &OrientedPlane,
    snap: f64,
) -> Vec<[f64; 5]> {
    let chart = m.chart(s);
    let map = BaryMap::new(chart);
    let l0 = map.bary(x);
    let lu = map.bary_dir(&plane.u);
    let lv = map.bary_dir(&plane.v);
    let r: f64 = 2.0 * m.simplices()[s].lengths.iter().sum::<f64>();
    let mut poly = vec![[-r, -r], [r, -r], [r, r], [-r, r]];
    for k in 0..5 {
        poly = clip(&poly, l0[k], [lu[k], lv[k]]);
        if poly.is_empty() {
            return Vec::new();
        }
    }
    poly.iter()
        .map(|p| {
            let l = l0 + lu * p[0] + lv * p[1];
            let mut b = [0.0; 5];
            for k in 0..5 {
                b[k] = if l[k] <= snap { 0.0 } else { l[k] };
            }
            let total: f64 = b.iter().sum();
            b.map(|w| w / total)
        })
        .collect()
}

/// Polygon of one visited simplex, with corners as indices into
/// [`Leaf::points`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceStep {
    pub simplex: usize,
    pub polygon: Vec<usize>,
}

/// Leaf vertex with nonzero defect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafConeVertex {
    pub point: usize,
    pub defect: f64,
    /// Stratum of M containing the point, if any.
    pub stratum: Option<usize>,
    /// `|leaf angle − stratum cone angle|`.
    pub angle_mismatch: Option<f64>,
    /// Whether the stratum is tagged parallel to the other distribution.
    pub transverse: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub which: Which,
    pub seed: SeedPoint,
    /// Intrinsic surface after removing flat vertices.
    pub surface: TriSurface,
    /// Vertex `k` of `surface` is `points[surface_points[k]]`.
    pub surface_points: Vec<usize>,
    /// All polygon corners met while tracing.
    pub points: Vec<ComplexPoint>,
    pub trace_log: Vec<TraceStep>,
    pub cone_vertices: Vec<LeafConeVertex>,
    pub raw_vertices: usize,
    pub raw_triangles: usize,
}

impl Leaf {
    /// Traced polygons grouped by the simplex containing them.
    pub fn polygons_by_simplex(&self) -> HashMap<usize, Vec<Vec<ComplexPoint>>> {
        let mut out: HashMap<usize, Vec<Vec<ComplexPoint>>> = HashMap::new();
        for step in &self.trace_log {
            let poly = step.polygon.iter().map(|&k| self.points[k].clone()).collect();
            out.entry(step.simplex).or_default().push(poly);
        }
        out
    }

    /// Cone vertices not lying on any stratum of M, or lying on a stratum
    /// with the wrong alignment or angle.
    pub fn unexplained_cone_vertices(&self, angle_tol: f64) -> usize {
        self.cone_vertices
            .iter()
            .filter(|c| {
                c.stratum.is_none()
                    || c.transverse == Some(false)
                    || c.angle_mismatch.is_some_and(|d| d > angle_tol)
            })
            .count()
    }
}

/// Point registry merging coincident points met from different simplices.
#[derive(Default)]
struct Registry {
    points: Vec<ComplexPoint>,
    by_support: HashMap<Vec<usize>, Vec<usize>>,
}

impl Registry {
    fn intern(&mut self, p: ComplexPoint) -> usize {
        let bucket = self.by_support.entry(p.support.clone()).or_default();
        if let Some(&id) = bucket.iter().find(|&&id| self.points[id].close_to(&p)) {
            return id;
        }
        let id = self.points.len();
        bucket.push(id);
        self.points.push(p);
        id
    }
}

/// Singular triangles indexed for incidence queries.
pub(crate) struct StratumIndex<'a> {
    strata: &'a [Stratum],
    by_vertex: BTreeMap<usize, Vec<(usize, [usize; 3])>>,
}

impl<'a> StratumIndex<'a> {
    pub(crate) fn new(strata: &'a [Stratum]) -> Self {
        let mut by_vertex: BTreeMap<usize, Vec<(usize, [usize; 3])>> = BTreeMap::new();
        for s in strata {
            for t in &s.triangles {
                for &v in t {
                    by_vertex.entry(v).or_default().push((s.id, *t));
                }
            }
        }
        StratumIndex { strata, by_vertex }
    }

    /// A stratum containing the face spanned by `support` (at most three vertices).
    pub(crate) fn containing(&self, support: &[usize]) -> Option<(usize, [usize; 3])> {
        if support.is_empty() || support.len() > 3 {
            return None;
        }
        self.by_vertex
            .get(&support[0])?
            .iter()
            .find(|(_, t)| support.iter().all(|v| t.contains(v)))
            .copied()
    }

    pub(crate) fn cone_angle(&self, id: usize) -> f64 {
        self.strata[id].cone_angle
    }
}

/// Traces the leaf through `seed` tangent to the chosen plane field.
pub fn trace_leaf(
    m: &MetricComplex4,
    dist: &DistributionPair,
    which: Which,
    seed: SeedPoint,
    strata: &[Stratum],
    alignment: Option<&[AlignmentEntry]>,
    cfg: &SplitConfig,
) -> Result<Leaf, LeafError> {
    if seed.simplex >= m.n_simplices()
        || seed.bary.iter().any(|&w| !(-1e-12..=1.0 + 1e-12).contains(&w))
        || (seed.bary.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return Err(LeafError::InvalidSeed(seed.simplex));
    }
    let index = StratumIndex::new(strata);
    let seed_point = ComplexPoint::from_bary(m, seed.simplex, &seed.bary, cfg.tol_snap);
    if let Some((_, t)) = index.containing(&seed_point.support) {
        return Err(LeafError::SeedSingular(t));
    }
    let scale = m
        .simplices()
        .iter()
        .flat_map(|s| s.lengths)
        .fold(0.0, f64::max);
    let budget = cfg.budget_multiplier * m.n_simplices();

    let mut registry = Registry::default();
    let mut visited: Vec<Vec<Vec4>> = vec![Vec::new(); m.n_simplices()];
    let mut trace_log = Vec::new();
    let mut lengths: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    let mut queue = VecDeque::from([(seed.simplex, seed_point.position(m, seed.simplex).unwrap())]);
    let mut visits = 0;

    while let Some((s, x)) = queue.pop_front() {
        let plane = dist.plane(which, s);
        let chart = m.chart(s);
        let normal_part = (Mat4::identity() - plane.projector()) * (x - chart[0]);
        if visited[s]
            .iter()
            .any(|o| (o - normal_part).norm() <= 1e-7 * scale)
        {
            continue;
        }
        visited[s].push(normal_part);
        visits += 1;
        if visits > budget {
            return Err(LeafError::NonClosingLeaf { budget });
        }

        let corners = slice_polygon(m, s, &x, plane, cfg.tol_snap);
        let mut ids: Vec<usize> = Vec::new();
        let mut barys: Vec<[f64; 5]> = Vec::new();
        for b in corners {
            let id = registry.intern(ComplexPoint::from_bary(m, s, &b, 0.0));
            if ids.last() != Some(&id) {
                ids.push(id);
                barys.push(b);
            }
        }
        while ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
            barys.pop();
        }
        if ids.len() < 3 {
            continue;
        }
        let pos: Vec<Vec4> = ids
            .iter()
            .map(|&i| registry.points[i].position(m, s).unwrap())
            .collect();
        // fan from the first corner unless that produces a sliver
        let n = ids.len();
        let twice_area = |a: &Vec4, b: &Vec4, c: &Vec4| {
            let (e, f) = (b - a, c - a);
            (e.norm_squared() * f.norm_squared() - e.dot(&f).powi(2)).max(0.0).sqrt()
        };
        let sliver = 1e-10 * scale * scale;
        let fan_ok = (1..n - 1).all(|i| twice_area(&pos[0], &pos[i], &pos[i + 1]) > sliver);
        let mut add = |tri: [usize; 3], p: [&Vec4; 3], lengths: &mut BTreeMap<(usize, usize), f64>| {
            for k in 0..3 {
                lengths
                    .entry(edge_key(tri[k], tri[(k + 1) % 3]))
                    .or_insert_with(|| (p[k] - p[(k + 1) % 3]).norm());
            }
            triangles.push(tri);
        };
        if fan_ok {
            for i in 1..n - 1 {
                add([ids[0], ids[i], ids[i + 1]], [&pos[0], &pos[i], &pos[i + 1]], &mut lengths);
            }
        } else {
            let mut cb = [0.0; 5];
            for b in &barys {
                for k in 0..5 {
                    cb[k] += b[k] / n as f64;
                }
            }
            let c = registry.intern(ComplexPoint::from_bary(m, s, &cb, 0.0));
            let cp = registry.points[c].position(m, s).unwrap();
            for i in 0..n {
                let j = (i + 1) % n;
                add([c, ids[i], ids[j]], [&cp, &pos[i], &pos[j]], &mut lengths);
            }
        }
        trace_log.push(TraceStep {
            simplex: s,
            polygon: ids.clone(),
        });

        // cross every polygon side lying in a facet
        for i in 0..n {
            let j = (i + 1) % n;
            for k in 0..5 {
                if barys[i][k] == 0.0 && barys[j][k] == 0.0 {
                    if let Some(g) = m.neighbor(s, k) {
                        let mid: [f64; 5] =
                            std::array::from_fn(|q| 0.5 * (barys[i][q] + barys[j][q]));
                        let p = ComplexPoint::from_bary(m, s, &mid, 0.0);
                        if let Some(y) = p.position(m, g.simplex) {
                            queue.push_back((g.simplex, y));
                        }
                    }
                }
            }
        }
    }

    // compact vertex numbering in order of first use
    let mut compact: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    for t in &triangles {
        for &v in t {
            compact.entry(v).or_insert_with(|| {
                order.push(v);
                order.len() - 1
            });
        }
    }
    let tris: Vec<[usize; 3]> = triangles.iter().map(|t| t.map(|v| compact[&v])).collect();
    let lens: BTreeMap<(usize, usize), f64> = lengths
        .iter()
        .map(|(&(a, b), &l)| (edge_key(compact[&a], compact[&b]), l))
        .collect();
    let labels: Vec<String> = order.iter().map(|p| format!("x{p}")).collect();
    let raw = TriSurface::new(labels, tris, lens).map_err(LeafError::Assembly)?;

    let tags: Option<BTreeMap<usize, AlignmentTag>> =
        alignment.map(|a| a.iter().map(|e| (e.stratum, e.tag)).collect());
    let transverse_tag = match which {
        Which::Alpha => AlignmentTag::ParallelBeta,
        Which::Beta => AlignmentTag::ParallelAlpha,
    };
    let defects = raw.defect_census().defects;
    let mut cone_vertices = Vec::new();
    for (v, &d) in defects.iter().enumerate() {
        if d.abs() <= DEFECT_TOL {
            continue;
        }
        let point = order[v];
        let hit = index.containing(&registry.points[point].support);
        cone_vertices.push(LeafConeVertex {
            point,
            defect: d,
            stratum: hit.map(|h| h.0),
            angle_mismatch: hit.map(|h| (raw.vertex_total_angle(v) - index.cone_angle(h.0)).abs()),
            transverse: match (&tags, hit) {
                (Some(tags), Some(h)) => Some(tags.get(&h.0) == Some(&transverse_tag)),
                _ => None,
            },
        });
    }

    let surface = simplify_flat_vertices(&raw, DEFECT_TOL);
    let surface_points = surface
        .labels()
        .iter()
        .map(|l| l[1..].parse().expect("leaf labels are x<point>"))
        .collect();
    Ok(Leaf {
        which,
        seed,
        surface,
        surface_points,
        points: registry.points,
        trace_log,
        cone_vertices,
        raw_vertices: raw.n_vertices(),
        raw_triangles: raw.triangles().len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping_a_square_by_a_diagonal() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let half = clip(&sq, 0.0, [1.0, -1.0]);
        assert_eq!(half.len(), 3);
        let area: f64 = (0..half.len())
            .map(|i| {
                let (p, q) = (half[i], half[(i + 1) % half.len()]);
                p[0] * q[1] - p[1] * q[0]
            })
            .sum::<f64>()
            / 2.0;
        assert!((area - 0.5).abs() < 1e-15);
    }
}
