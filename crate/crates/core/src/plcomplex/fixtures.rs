//! Reference complexes beyond plain products.

use super::product::product_cells;
use super::{product_complex, MetricComplex4, Simplex};
use crate::surface2::{builtin_surface, TriSurface};
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Cone angle of the branch locus of [`misaligned_cover`].
pub const MISALIGNED_BRANCH_ANGLE: f64 = 2.0 * TAU;

/// Unit cube whose four side faces are cut by horizontal lines at the given
/// heights (strictly between 0 and 1). Vertex `4·level + corner` sits at
/// height `levels[level]` above corner `(0,0), (1,0), (1,1), (0,1)`; every
/// quad is split along the diagonal through its lowest-numbered vertex.
pub fn banded_box(heights: &[f64]) -> TriSurface {
    let mut levels = vec![0.0];
    levels.extend_from_slice(heights);
    levels.push(1.0);
    assert!(
        levels.windows(2).all(|w| w[0] < w[1]),
        "heights must increase strictly inside (0, 1)"
    );
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut points = Vec::new();
    for &z in &levels {
        for c in &corners {
            points.push(vec![c[0], c[1], z]);
        }
    }
    let top = 4 * (levels.len() - 1);
    let mut quads = vec![[0, 1, 2, 3], [top, top + 1, top + 2, top + 3]];
    for l in 0..levels.len() - 1 {
        for k in 0..4 {
            let k1 = (k + 1) % 4;
            quads.push([4 * l + k, 4 * l + k1, 4 * (l + 1) + k1, 4 * (l + 1) + k]);
        }
    }
    let mut tris = Vec::new();
    for q in quads {
        let m = (0..4).min_by_key(|&i| q[i]).unwrap();
        let r = [q[m], q[(m + 1) % 4], q[(m + 2) % 4], q[(m + 3) % 4]];
        tris.push([r[0], r[1], r[2]]);
        tris.push([r[0], r[2], r[3]]);
    }
    let labels = (0..points.len()).map(|i| format!("v{i}")).collect();
    TriSurface::from_embedded(labels, &points, tris).expect("banded box fixture")
}

/// Flat 4-torus: the product of two flat 3×3 grid tori.
pub fn flat_torus4() -> MetricComplex4 {
    let t = builtin_surface("torus").expect("torus fixture");
    product_complex(&t, &t).expect("flat torus product")
}

/// Join of the boundary of a tetrahedron with a 5-cycle, all edges of length
/// 1: a 4-sphere made of 20 regular simplices. Each triangle of the
/// tetrahedron boundary has cone angle `5·arccos(1/4) > 2π`.
pub fn negative_join() -> MetricComplex4 {
    let mut labels: Vec<String> = (0..4).map(|i| format!("a{i}")).collect();
    labels.extend((0..5).map(|i| format!("c{i}")));
    let mut simplices = Vec::new();
    for skip in (0..4).rev() {
        let tri: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
        for k in 0..5 {
            let (c0, c1) = (4 + k, 4 + (k + 1) % 5);
            simplices.push(Simplex {
                vertices: [tri[0], tri[1], tri[2], c0.min(c1), c0.max(c1)],
                lengths: [1.0; 10],
            });
        }
    }
    MetricComplex4::new(labels, simplices).expect("join fixture")
}

/// Double cover of P×Q branched along two flat tori that are neither
/// tangent to P nor to Q.
///
/// P is the cube with a belt γ at height 1/2, Q the cube banded at heights
/// 1/4, 1/2, 3/4; R ⊂ Q is the annulus between heights 1/4 and 3/4. The
/// branch locus is γ×∂R and the sheets are exchanged across γ×R. Its
/// triangles span one direction of each factor, so their planes match
/// neither factor's tangent plane; the cone angle there is 4π and the
/// holonomy around it is trivial, so the product holonomy is unchanged.
pub fn misaligned_cover() -> MetricComplex4 {
    let p = banded_box(&[0.5]);
    let q = banded_box(&[0.25, 0.5, 0.75]);
    let p_level = |v: usize| v / 4;
    let q_level = |v: usize| v / 4;
    let p_tris = p.sorted_triangles();
    // side of γ for triangles of P touching it: +1 above, -1 below
    let side = |sigma: usize| -> i8 {
        let t = p_tris[sigma];
        if t.iter().any(|&v| p_level(v) == 2) {
            1
        } else {
            -1
        }
    };
    // vertex key: (p, q, sheet) with sheet 2 for the branch locus
    let mut keyed: Vec<([(usize, usize, u8); 5], [f64; 10])> = Vec::new();
    for cell in product_cells(&p, &q) {
        for sheet in 0..2u8 {
            let verts = cell.vertices.map(|(a, b)| {
                let on_gamma = p_level(a) == 1;
                match (on_gamma, q_level(b)) {
                    (true, 1) | (true, 3) => (a, b, 2),
                    (true, 2) => {
                        let s = if side(cell.sigma) > 0 { sheet } else { 1 - sheet };
                        (a, b, s)
                    }
                    _ => (a, b, sheet),
                }
            });
            keyed.push((verts, cell.lengths));
        }
    }
    let mut ids: BTreeMap<(usize, usize, u8), usize> = BTreeMap::new();
    for (verts, _) in &keyed {
        for v in verts {
            let n = ids.len();
            ids.entry(*v).or_insert(n);
        }
    }
    let mut labels = vec![String::new(); ids.len()];
    for (&(a, b, s), &i) in &ids {
        let base = format!("{}*{}", p.labels()[a], q.labels()[b]);
        labels[i] = if s == 2 { base } else { format!("{base}#{s}") };
    }
    let simplices = keyed
        .into_iter()
        .map(|(verts, lengths)| Simplex {
            vertices: verts.map(|v| ids[&v]),
            lengths,
        })
        .collect();
    MetricComplex4::new(labels, simplices).expect("branched cover fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn banded_boxes_are_cubes() {
        for h in [&[0.5][..], &[0.25, 0.5, 0.75][..]] {
            let b = banded_box(h);
            assert_eq!(b.euler_characteristic(), 2);
            assert!((b.area() - 6.0).abs() < 1e-12);
            assert_eq!(b.singular_vertices(1e-9).len(), 8);
            assert!(crate::surface2::surfaces_isometric(&b, &builtin_surface("cube").unwrap())
                .is_some());
        }
    }

    #[test]
    fn join_is_a_closed_sphere() {
        let m = negative_join();
        assert_eq!(m.n_simplices(), 20);
        assert!(m.validate().is_valid());
        assert_eq!(m.euler_characteristic(), 2);
    }

    #[test]
    fn cover_is_closed_with_branch_tori() {
        let m = misaligned_cover();
        let report = m.validate();
        assert!(report.is_valid(), "{report}");
        let p = banded_box(&[0.5]);
        let q = banded_box(&[0.25, 0.5, 0.75]);
        let base = product_complex(&p, &q).unwrap();
        assert_eq!(m.n_simplices(), 2 * base.n_simplices());
        assert!((m.total_volume() - 2.0 * 36.0).abs() < 1e-9);
        let c = m.singular_census();
        let branch: Vec<_> = c
            .codim2
            .iter()
            .filter(|s| (s.cone_angle - MISALIGNED_BRANCH_ANGLE).abs() < 1e-9)
            .collect();
        assert_eq!(branch.len(), 2);
        let corner: Vec<_> = c
            .codim2
            .iter()
            .filter(|s| (s.cone_angle - 1.5 * PI).abs() < 1e-9)
            .collect();
        assert_eq!(corner.len(), 32);
        assert_eq!(c.codim2.len(), 34);
    }
}
