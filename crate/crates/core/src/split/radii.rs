//! Separation between singular strata, measured inside simplex charts.

use crate::plcomplex::{MetricComplex4, Stratum};
use crate::tensor4::Vec4;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Uniform radii: `delta` is half the smallest chart distance between two
/// strata without common vertices, `epsilon = delta / 3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Radii {
    pub delta: f64,
    pub epsilon: f64,
}

/// Closest distance between the convex hulls of two small point sets,
/// by enumerating face pairs.
pub fn hull_distance(p: &[Vec4], q: &[Vec4]) -> f64 {
    let mut best = f64::INFINITY;
    for sp in 1..(1u32 << p.len()) {
        for sq in 1..(1u32 << q.len()) {
            let a: Vec<Vec4> = (0..p.len()).filter(|i| sp >> i & 1 == 1).map(|i| p[i]).collect();
            let b: Vec<Vec4> = (0..q.len()).filter(|i| sq >> i & 1 == 1).map(|i| q[i]).collect();
            if let Some(d) = affine_closest(&a, &b) {
                best = best.min(d);
            }
        }
    }
    best
}

/// Distance between the relative interiors' affine hulls when the closest
/// points have nonnegative weights; `None` otherwise.
fn affine_closest(a: &[Vec4], b: &[Vec4]) -> Option<f64> {
    // x = a0 + Σ s_i (a_i − a0) − b0 − Σ t_j (b_j − b0)
    let na = a.len() - 1;
    let nb = b.len() - 1;
    let n = na + nb;
    let base = a[0] - b[0];
    if n == 0 {
        return Some(base.norm());
    }
    let mut m = DMatrix::zeros(4, n);
    for i in 0..na {
        m.set_column(i, &DVector::from_column_slice((a[i + 1] - a[0]).as_slice()));
    }
    for j in 0..nb {
        m.set_column(na + j, &DVector::from_column_slice((b[0] - b[j + 1]).as_slice()));
    }
    let rhs = -DVector::from_column_slice(base.as_slice());
    let sol = m.clone().svd(true, true).solve(&rhs, 1e-12).ok()?;
    let feasible = |w: &[f64]| w.iter().all(|&x| x >= -1e-12) && w.iter().sum::<f64>() <= 1.0 + 1e-12;
    if !feasible(&sol.as_slice()[..na]) || !feasible(&sol.as_slice()[na..]) {
        return None;
    }
    let r = &m * &sol - rhs;
    Some(r.norm())
}

pub fn stratum_radii(m: &MetricComplex4, strata: &[Stratum]) -> Option<Radii> {
    let mut by_vertex: BTreeMap<usize, Vec<(usize, [usize; 3])>> = BTreeMap::new();
    let vertex_sets: Vec<BTreeSet<usize>> = strata
        .iter()
        .map(|s| s.vertices.iter().copied().collect())
        .collect();
    for s in strata {
        for t in &s.triangles {
            for &v in t {
                by_vertex.entry(v).or_default().push((s.id, *t));
            }
        }
    }
    let mut best = f64::INFINITY;
    for (si, simplex) in m.simplices().iter().enumerate() {
        // faces of each stratum inside this simplex, as local index sets
        let mut faces: BTreeMap<usize, BTreeSet<Vec<usize>>> = BTreeMap::new();
        for &v in &simplex.vertices {
            for (id, t) in by_vertex.get(&v).into_iter().flatten() {
                let local: Vec<usize> = t.iter().filter_map(|&w| simplex.local_index(w)).collect();
                faces.entry(*id).or_default().insert(local);
            }
        }
        let chart = m.chart(si);
        let ids: Vec<usize> = faces.keys().copied().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if !vertex_sets[a].is_disjoint(&vertex_sets[b]) {
                    continue;
                }
                for fa in &faces[&a] {
                    for fb in &faces[&b] {
                        let pa: Vec<Vec4> = fa.iter().map(|&k| chart[k]).collect();
                        let pb: Vec<Vec4> = fb.iter().map(|&k| chart[k]).collect();
                        best = best.min(hull_distance(&pa, &pb));
                    }
                }
            }
        }
    }
    best.is_finite().then(|| Radii {
        delta: best / 2.0,
        epsilon: best / 6.0,
    })
}
