//! Congruence test for nonnegatively curved polyhedral surfaces.
//!
//! Two surfaces are declared isometric when their total areas agree, their
//! defect multisets agree, and some bijection between singular vertices
//! preserves defects and all pairwise intrinsic distances. The test is
//! conservative: it only looks at the singular configuration.

use super::{SteinerGraph, TriSurface};
use serde::Serialize;

/// Subdivision factor of the Steiner graph used for distances.
pub const ISOMETRY_REFINEMENT: usize = 4;
/// Relative tolerance on distances and areas.
pub const ISOMETRY_TOL: f64 = 1e-3;
/// Absolute tolerance on defects, and the threshold for a vertex to count
/// as singular.
pub const DEFECT_TOL: f64 = 1e-6;

/// Certificate of a successful congruence test: `pairs[k] = (v1, v2)` maps
/// singular vertex `v1` of the first surface to `v2` of the second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsometryMatch {
    pub pairs: Vec<(usize, usize)>,
    pub max_distance_error: f64,
}

/// Distances between the singular vertices of `s`, listed in increasing
/// vertex order.
pub fn singular_distance_matrix(s: &TriSurface) -> (Vec<usize>, Vec<Vec<f64>>) {
    let sing = s.singular_vertices(DEFECT_TOL);
    let g = SteinerGraph::new(s, ISOMETRY_REFINEMENT);
    let m = g.distance_matrix(&sing);
    (sing, m)
}

pub fn surfaces_isometric(s1: &TriSurface, s2: &TriSurface) -> Option<IsometryMatch> {
    let (a1, a2) = (s1.area(), s2.area());
    if (a1 - a2).abs() > ISOMETRY_TOL * a1.max(a2) {
        return None;
    }
    let c1 = s1.defect_census();
    let c2 = s2.defect_census();
    let (v1, v2) = (s1.singular_vertices(DEFECT_TOL), s2.singular_vertices(DEFECT_TOL));
    if v1.len() != v2.len() {
        return None;
    }
    let d1: Vec<f64> = v1.iter().map(|&v| c1.defects[v]).collect();
    let d2: Vec<f64> = v2.iter().map(|&v| c2.defects[v]).collect();
    let (mut s_1, mut s_2) = (d1.clone(), d2.clone());
    s_1.sort_by(f64::total_cmp);
    s_2.sort_by(f64::total_cmp);
    if s_1.iter().zip(&s_2).any(|(x, y)| (x - y).abs() > DEFECT_TOL) {
        return None;
    }
    let (_, m1) = singular_distance_matrix(s1);
    let (_, m2) = singular_distance_matrix(s2);
    let scale = a1.sqrt().max(f64::MIN_POSITIVE);
    let mut search = Search {
        d1: &d1,
        d2: &d2,
        m1: &m1,
        m2: &m2,
        scale,
        assign: Vec::new(),
        used: vec![false; v2.len()],
        worst: 0.0,
    };
    if !search.extend() {
        return None;
    }
    let pairs = search
        .assign
        .iter()
        .enumerate()
        .map(|(i, &j)| (v1[i], v2[j]))
        .collect();
    Some(IsometryMatch {
        pairs,
        max_distance_error: search.worst,
    })
}

struct Search<'a> {
    d1: &'a [f64],
    d2: &'a [f64],
    m1: &'a [Vec<f64>],
    m2: &'a [Vec<f64>],
    scale: f64,
    assign: Vec<usize>,
    used: Vec<bool>,
    worst: f64,
}

impl Search<'_> {
    fn extend(&mut self) -> bool {
        let i = self.assign.len();
        if i == self.d1.len() {
            self.worst = (0..i)
                .flat_map(|x| (0..i).map(move |y| (x, y)))
                .map(|(x, y)| (self.m1[x][y] - self.m2[self.assign[x]][self.assign[y]]).abs())
                .fold(0.0, f64::max);
            return true;
        }
        for j in 0..self.d2.len() {
            if self.used[j] || (self.d1[i] - self.d2[j]).abs() > DEFECT_TOL {
                continue;
            }
            let ok = self.assign.iter().enumerate().all(|(k, &jk)| {
                let (x, y) = (self.m1[i][k], self.m2[j][jk]);
                (x - y).abs() <= ISOMETRY_TOL * x.max(y).max(self.scale * 1e-3)
            });
            if ok {
                self.used[j] = true;
                self.assign.push(j);
                if self.extend() {
                    return true;
                }
                self.assign.pop();
                self.used[j] = false;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface2::builtin_surface;

    #[test]
    fn cube_vs_relabeled_cube() {
        let c = builtin_surface("cube").unwrap();
        let r = c.relabeled(&[5, 2, 7, 0, 3, 6, 1, 4]);
        let m = surfaces_isometric(&c, &r).expect("relabeled cube");
        assert_eq!(m.pairs.len(), 8);
        assert!(m.max_distance_error < 1e-9);
    }

    #[test]
    fn cube_vs_tetrahedron() {
        let c = builtin_surface("cube").unwrap();
        let t = builtin_surface("tetrahedron").unwrap();
        assert!(surfaces_isometric(&c, &t).is_none());
    }

    #[test]
    fn box_vs_cube_differ() {
        let c = builtin_surface("cube").unwrap();
        let b = builtin_surface("box(1,1,2)").unwrap();
        assert!(surfaces_isometric(&b, &c).is_none());
        assert!(surfaces_isometric(&c, &b).is_none());
    }

    #[test]
    fn equal_area_boxes_are_distinguished_by_distances() {
        // 2(ab + bc + ca) = 22 for both
        let p = builtin_surface("box(1,2,3)").unwrap();
        let c = 1.75;
        let q = builtin_surface(&format!("box(2,2,{c})")).unwrap();
        assert!((p.area() - q.area()).abs() < 1e-9);
        assert!(surfaces_isometric(&p, &q).is_none());
    }

    #[test]
    fn box_orientation_does_not_matter() {
        let p = builtin_surface("box(1,2,3)").unwrap();
        let q = builtin_surface("box(3,1,2)").unwrap();
        assert!(surfaces_isometric(&p, &q).is_some());
        assert!(surfaces_isometric(&q, &p).is_some());
    }
}
