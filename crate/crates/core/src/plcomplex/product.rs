//! Staircase triangulation of the product of two triangulated surfaces.
//!
//! For triangles `σ = (p0 < p1 < p2)` of P and `τ = (q0 < q1 < q2)` of Q,
//! the prism σ×τ is cut into the six 4-simplices spanned by monotone lattice
//! paths from `(p0, q0)` to `(p2, q2)`. Because every cell uses the global
//! vertex orders, the cuts agree on shared faces.

use super::{ComplexError, MetricComplex4, Simplex, PAIRS5};
use crate::surface2::TriSurface;

/// Separator between the two factor labels of a product vertex.
pub const PRODUCT_LABEL_SEPARATOR: char = '*';

/// The six monotone paths through a 3×3 lattice, as (P step, Q step) indices.
pub(crate) const STAIRCASES: [[(usize, usize); 5]; 6] = [
    [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)],
    [(0, 0), (1, 0), (1, 1), (2, 1), (2, 2)],
    [(0, 0), (1, 0), (1, 1), (1, 2), (2, 2)],
    [(0, 0), (0, 1), (1, 1), (2, 1), (2, 2)],
    [(0, 0), (0, 1), (1, 1), (1, 2), (2, 2)],
    [(0, 0), (0, 1), (0, 2), (1, 2), (2, 2)],
];

/// One product simplex: factor vertex pairs and its edge lengths.
pub(crate) struct ProductCell {
    pub sigma: usize,
    pub vertices: [(usize, usize); 5],
    pub lengths: [f64; 10],
}

pub(crate) fn product_cells(p: &TriSurface, q: &TriSurface) -> Vec<ProductCell> {
    let sp = p.sorted_triangles();
    let sq = q.sorted_triangles();
    let mut cells = Vec::with_capacity(sp.len() * sq.len() * 6);
    for (si, sigma) in sp.iter().enumerate() {
        for tau in &sq {
            for path in &STAIRCASES {
                let vertices = path.map(|(i, j)| (sigma[i], tau[j]));
                let mut lengths = [0.0; 10];
                for (k, &(a, b)) in PAIRS5.iter().enumerate() {
                    let (pa, qa) = vertices[a];
                    let (pb, qb) = vertices[b];
                    lengths[k] = p.length(pa, pb).hypot(q.length(qa, qb));
                }
                cells.push(ProductCell {
                    sigma: si,
                    vertices,
                    lengths,
                });
            }
        }
    }
    cells
}

/// Metric product P×Q. Vertex `(p, q)` gets id `p·|Q| + q` and label
/// `"<label_p>*<label_q>"`.
pub fn product_complex(p: &TriSurface, q: &TriSurface) -> Result<MetricComplex4, ComplexError> {
    let nq = q.n_vertices();
    let mut labels = Vec::with_capacity(p.n_vertices() * nq);
    for lp in p.labels() {
        for lq in q.labels() {
            labels.push(format!("{lp}{PRODUCT_LABEL_SEPARATOR}{lq}"));
        }
    }
    let simplices = product_cells(p, q)
        .into_iter()
        .map(|c| Simplex {
            vertices: c.vertices.map(|(a, b)| a * nq + b),
            lengths: c.lengths,
        })
        .collect();
    MetricComplex4::new(labels, simplices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface2::builtin_surface;
    use std::collections::BTreeMap;

    #[test]
    fn simplex_counts() {
        let t = builtin_surface("tetra").unwrap();
        let c = builtin_surface("cube").unwrap();
        assert_eq!(product_complex(&t, &t).unwrap().n_simplices(), 96);
        assert_eq!(product_complex(&c, &c).unwrap().n_simplices(), 864);
    }

    #[test]
    fn volume_is_product_of_areas() {
        let p = builtin_surface("box(1,1,2)").unwrap();
        let q = builtin_surface("octa").unwrap();
        let m = product_complex(&p, &q).unwrap();
        let want = p.area() * q.area();
        assert!((m.total_volume() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn swapped_product_has_swapped_census() {
        let p = builtin_surface("box(1,1,2)").unwrap();
        let q = builtin_surface("tetra").unwrap();
        let pq = product_complex(&p, &q).unwrap();
        let qp = product_complex(&q, &p).unwrap();
        let angles = |m: &MetricComplex4| {
            let mut hist: BTreeMap<i64, usize> = BTreeMap::new();
            for s in m.singular_census().codim2 {
                *hist.entry((s.cone_angle * 1e6).round() as i64).or_default() += 1;
            }
            hist
        };
        assert_eq!(angles(&pq), angles(&qp));
        assert_eq!(pq.singular_census().codim4.len(), qp.singular_census().codim4.len());
        // swap map on labels carries simplices of P×Q to simplices of Q×P
        let swapped: Vec<String> = pq
            .labels()
            .iter()
            .map(|l| {
                let (a, b) = l.split_once(PRODUCT_LABEL_SEPARATOR).unwrap();
                format!("{b}{PRODUCT_LABEL_SEPARATOR}{a}")
            })
            .collect();
        let index: BTreeMap<&str, usize> = qp
            .labels()
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut qp_sets: Vec<[usize; 5]> = qp
            .simplices()
            .iter()
            .map(|s| {
                let mut v = s.vertices;
                v.sort_unstable();
                v
            })
            .collect();
        qp_sets.sort_unstable();
        let mut mapped: Vec<[usize; 5]> = pq
            .simplices()
            .iter()
            .map(|s| {
                let mut v = s.vertices.map(|x| index[swapped[x].as_str()]);
                v.sort_unstable();
                v
            })
            .collect();
        mapped.sort_unstable();
        assert_eq!(mapped, qp_sets);
    }
}
