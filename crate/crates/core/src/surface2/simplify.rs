//! Metric-preserving retriangulation: removal of flat vertices and
//! intrinsic edge flips.

use super::{edge_key, Edge, TriSurface};
use std::collections::{BTreeMap, BTreeSet};

/// Removes every vertex whose defect is within `tol` of zero, as long as its
/// unfolded star can be re-triangulated without creating duplicate edges.
/// The metric is unchanged; vertices are renumbered compactly.
pub fn simplify_flat_vertices(s: &TriSurface, tol: f64) -> TriSurface {
    let mut cur = s.clone();
    // retriangulating a flat star preserves every other vertex's total angle
    let mut defects = cur.defect_census().defects;
    loop {
        let mut progressed = false;
        let mut v = 0;
        while v < cur.n_vertices() {
            if defects[v].abs() <= tol {
                if let Some(next) = remove_flat_vertex(&cur, v) {
                    cur = next;
                    defects.remove(v);
                    progressed = true;
                    continue;
                }
            }
            v += 1;
        }
        if !progressed {
            return cur;
        }
    }
}

fn cross(o: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])
}

fn inside_closed(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2], eps: f64) -> bool {
    cross(a, b, p) >= -eps && cross(b, c, p) >= -eps && cross(c, a, p) >= -eps
}

fn remove_flat_vertex(cur: &TriSurface, v: usize) -> Option<TriSurface> {
    let cycle = cur.link_cycle(v)?;
    let mut theta: f64 = 0.0;
    let mut pts = Vec::with_capacity(cycle.len());
    let mut ids = Vec::with_capacity(cycle.len());
    let mut scale: f64 = 0.0;
    for &(ti, u0, _) in &cycle {
        let r = cur.length(v, u0);
        scale = scale.max(r);
        pts.push([r * theta.cos(), r * theta.sin()]);
        ids.push(u0);
        theta += cur.corner_angle(ti, v);
    }
    let eps = 1e-9 * scale * scale;
    let existing: BTreeSet<[usize; 3]> = cur.sorted_triangles().into_iter().collect();
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    let mut new_tris = Vec::new();
    let mut new_edges: BTreeMap<Edge, f64> = BTreeMap::new();
    while idx.len() > 3 {
        let n = idx.len();
        let ear = (0..n).find(|&m| {
            let (i0, i1, i2) = (idx[(m + n - 1) % n], idx[m], idx[(m + 1) % n]);
            let (a, b, c) = (pts[i0], pts[i1], pts[i2]);
            if cross(a, b, c) <= eps {
                return false;
            }
            let diag = edge_key(ids[i0], ids[i2]);
            if cur.has_edge(diag.0, diag.1) || new_edges.contains_key(&diag) {
                return false;
            }
            !idx.iter()
                .filter(|&&k| k != i0 && k != i1 && k != i2)
                .any(|&k| inside_closed(pts[k], a, b, c, eps))
        })?;
        let (i0, i1, i2) = (idx[(ear + n - 1) % n], idx[ear], idx[(ear + 1) % n]);
        new_tris.push([ids[i0], ids[i1], ids[i2]]);
        let (p, q) = (pts[i0], pts[i2]);
        new_edges.insert(edge_key(ids[i0], ids[i2]), (p[0] - q[0]).hypot(p[1] - q[1]));
        idx.remove(ear);
    }
    let (i0, i1, i2) = (idx[0], idx[1], idx[2]);
    if cross(pts[i0], pts[i1], pts[i2]) <= eps {
        return None;
    }
    let mut last = [ids[i0], ids[i1], ids[i2]];
    new_tris.push(last);
    last.sort_unstable();
    if existing.contains(&last) {
        return None;
    }

    let shift = |x: usize| if x > v { x - 1 } else { x };
    let mut labels = cur.labels().to_vec();
    labels.remove(v);
    let triangles = cur
        .triangles()
        .iter()
        .filter(|t| !t.contains(&v))
        .chain(new_tris.iter())
        .map(|t| t.map(shift))
        .collect();
    let lengths = cur
        .lengths()
        .iter()
        .filter(|(&(a, b), _)| a != v && b != v)
        .chain(new_edges.iter())
        .map(|(&(a, b), &l)| (edge_key(shift(a), shift(b)), l))
        .collect();
    TriSurface::new(labels, triangles, lengths).ok()
}

/// Replaces edge `(a, b)` by the other diagonal of its two triangles when
/// their unfolded quadrilateral is strictly convex. The metric is unchanged.
pub fn flip_edge(s: &TriSurface, a: usize, b: usize) -> Option<TriSurface> {
    let key = edge_key(a, b);
    let tris = s.edge_triangles().remove(&key)?;
    let apex = |ti: usize| {
        *s.triangles()[ti]
            .iter()
            .find(|&&x| x != a && x != b)
            .unwrap()
    };
    let (c, d) = (apex(tris[0]), apex(tris[1]));
    if s.has_edge(c, d) {
        return None;
    }
    let l = s.length(a, b);
    let place = |w: usize, sign: f64| {
        let (aw, bw) = (s.length(a, w), s.length(b, w));
        let x = (aw * aw - bw * bw + l * l) / (2.0 * l);
        [x, sign * (aw * aw - x * x).max(0.0).sqrt()]
    };
    let (pc, pd) = (place(c, 1.0), place(d, -1.0));
    let x = pc[0] + (pd[0] - pc[0]) * pc[1] / (pc[1] - pd[1]);
    let margin = 1e-9 * l;
    if x <= margin || x >= l - margin {
        return None;
    }
    let mut triangles: Vec<[usize; 3]> = s
        .triangles()
        .iter()
        .enumerate()
        .filter(|(i, _)| !tris.contains(i))
        .map(|(_, t)| *t)
        .collect();
    triangles.push([c, d, a]);
    triangles.push([c, d, b]);
    let mut lengths = s.lengths().clone();
    lengths.remove(&key);
    lengths.insert(edge_key(c, d), (pc[0] - pd[0]).hypot(pc[1] - pd[1]));
    TriSurface::new(s.labels().to_vec(), triangles, lengths).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface2::{builtin_surface, surfaces_isometric};

    /// Cube whose faces are subdivided into a `k × k` grid: many flat vertices.
    fn refined_cube(k: usize) -> TriSurface {
        let mut index = BTreeMap::new();
        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut id = |p: [i64; 3], points: &mut Vec<Vec<f64>>| {
            *index.entry(p).or_insert_with(|| {
                points.push(p.iter().map(|&x| x as f64 / k as f64).collect());
                points.len() - 1
            })
        };
        let mut tris = Vec::new();
        let k = k as i64;
        for axis in 0..3 {
            for side in [0, k] {
                for i in 0..k {
                    for j in 0..k {
                        let pt = |di: i64, dj: i64| {
                            let mut p = [0; 3];
                            p[axis] = side;
                            p[(axis + 1) % 3] = i + di;
                            p[(axis + 2) % 3] = j + dj;
                            p
                        };
                        let q = [pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)];
                        let q = q.map(|p| id(p, &mut points));
                        tris.push([q[0], q[1], q[2]]);
                        tris.push([q[0], q[2], q[3]]);
                    }
                }
            }
        }
        let labels = (0..points.len()).map(|i| format!("v{i}")).collect();
        TriSurface::from_embedded(labels, &points, tris).unwrap()
    }

    #[test]
    fn refined_cube_simplifies_to_eight_vertices() {
        let r = refined_cube(3);
        assert_eq!(r.n_vertices(), 56);
        let s = simplify_flat_vertices(&r, 1e-9);
        assert_eq!(s.n_vertices(), 8);
        assert_eq!(s.triangles().len(), 12);
        assert!((s.area() - 6.0).abs() < 1e-9);
        let c = builtin_surface("cube").unwrap();
        assert!(surfaces_isometric(&s, &c).is_some());
    }

    #[test]
    fn singular_vertices_survive() {
        let c = builtin_surface("cube").unwrap();
        assert_eq!(simplify_flat_vertices(&c, 1e-9), c);
    }

    #[test]
    fn flip_preserves_isometry_class() {
        let c = builtin_surface("box(1,2,3)").unwrap();
        // (0, 3) is the diagonal of the bottom face
        let f = flip_edge(&c, 0, 3).expect("bottom face diagonal flips");
        assert!(f.has_edge(1, 2) && !f.has_edge(0, 3));
        assert!((f.area() - c.area()).abs() < 1e-12);
        assert!(surfaces_isometric(&c, &f).is_some());
        assert!(flip_edge(&c, 0, 7).is_none(), "no such edge");
        // the hinge over a box edge unfolds to a quad with a right angle at
        // the edge's end, so it is not strictly convex
        assert!(flip_edge(&c, 0, 1).is_none());
        // two equilateral triangles form a rhombus; flipping across an
        // octahedron edge is allowed since flips are intrinsic
        let o = builtin_surface("octahedron").unwrap();
        let g = flip_edge(&o, 0, 2).expect("rhombus hinge");
        assert!((g.length(4, 5) - 3f64.sqrt()).abs() < 1e-12);
        assert!(surfaces_isometric(&o, &g).is_some());
    }
}
