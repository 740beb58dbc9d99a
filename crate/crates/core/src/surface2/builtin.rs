//! Fixture surfaces.
//!
//! Diagonal convention for boxes: vertex `x + 2y + 4z` sits at corner
//! `(x·a, y·b, z·c)`, and every rectangular face is split along the diagonal
//! through its lowest-numbered corner.

use super::{edge_key, SurfaceError, TriSurface};
use std::collections::BTreeMap;

/// Returns one of the named fixture surfaces:
/// `tetrahedron`, `cube`, `octahedron`, `box(a,b,c)` and the flat `torus`
/// (a 3×3 grid of unit squares with opposite sides glued).
pub fn builtin_surface(name: &str) -> Result<TriSurface, SurfaceError> {
    let compact: String = name.chars().filter(|c| !c.is_whitespace()).collect();
    let unknown = || SurfaceError::UnknownName(name.to_string());
    match compact.as_str() {
        "tetrahedron" | "tetra" => Ok(tetrahedron()),
        "cube" => boxed(1.0, 1.0, 1.0),
        "octahedron" | "octa" => Ok(octahedron()),
        "torus" => Ok(grid_torus(3)),
        s if s.starts_with("box(") && s.ends_with(')') => {
            let dims: Vec<f64> = s[4..s.len() - 1]
                .split(',')
                .map(|x| x.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| unknown())?;
            match dims[..] {
                [a, b, c] if a > 0.0 && b > 0.0 && c > 0.0 && (a * b * c).is_finite() => {
                    boxed(a, b, c)
                }
                _ => Err(unknown()),
            }
        }
        _ => Err(unknown()),
    }
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("v{i}")).collect()
}

fn tetrahedron() -> TriSurface {
    let tris = vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let mut lengths = BTreeMap::new();
    for a in 0..4 {
        for b in a + 1..4 {
            lengths.insert((a, b), 1.0);
        }
    }
    TriSurface::new(labels(4), tris, lengths).expect("tetrahedron fixture")
}

fn boxed(a: f64, b: f64, c: f64) -> Result<TriSurface, SurfaceError> {
    let points: Vec<Vec<f64>> = (0..8)
        .map(|i| {
            vec![
                a * (i & 1) as f64,
                b * ((i >> 1) & 1) as f64,
                c * ((i >> 2) & 1) as f64,
            ]
        })
        .collect();
    // faces in cyclic order, each starting at its lowest corner
    let faces = [
        [0, 1, 3, 2],
        [4, 5, 7, 6],
        [0, 1, 5, 4],
        [2, 3, 7, 6],
        [0, 2, 6, 4],
        [1, 3, 7, 5],
    ];
    let tris = faces
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    TriSurface::from_embedded(labels(8), &points, tris)
}

fn octahedron() -> TriSurface {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut points = Vec::new();
    for axis in 0..3 {
        for sign in [h, -h] {
            let mut p = vec![0.0; 3];
            p[axis] = sign;
            points.push(p);
        }
    }
    let mut tris = Vec::new();
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                tris.push([x, y, z]);
            }
        }
    }
    TriSurface::from_embedded(labels(6), &points, tris).expect("octahedron fixture")
}

/// Flat `n × n` torus of unit squares, each split along its rising diagonal.
pub(crate) fn grid_torus(n: usize) -> TriSurface {
    assert!(n >= 3, "grid torus needs n >= 3 to be simplicial");
    let id = |i: usize, j: usize| (i % n) + n * (j % n);
    let mut tris = Vec::new();
    let mut lengths = BTreeMap::new();
    for j in 0..n {
        for i in 0..n {
            let (p, q, r, s) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            tris.push([p, q, r]);
            tris.push([p, r, s]);
            lengths.insert(edge_key(p, q), 1.0);
            lengths.insert(edge_key(p, s), 1.0);
            lengths.insert(edge_key(p, r), 2f64.sqrt());
        }
    }
    TriSurface::new(labels(n * n), tris, lengths).expect("grid torus fixture")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fixture_sizes() {
        let t = builtin_surface("tetrahedron").unwrap();
        assert_eq!((t.n_vertices(), t.triangles().len()), (4, 4));
        assert!(t.lengths().values().all(|&l| l == 1.0));
        let c = builtin_surface("cube").unwrap();
        assert_eq!((c.n_vertices(), c.triangles().len()), (8, 12));
        let o = builtin_surface("octahedron").unwrap();
        assert_eq!((o.n_vertices(), o.triangles().len()), (6, 8));
        assert!(o.lengths().values().all(|&l| (l - 1.0).abs() < 1e-15));
        let tor = builtin_surface("torus").unwrap();
        assert_eq!((tor.n_vertices(), tor.triangles().len()), (9, 18));
    }

    #[test]
    fn box_defects_sum_to_four_pi() {
        let b = builtin_surface("box(1,1,2)").unwrap();
        assert_eq!(b.n_vertices(), 8);
        let c = b.defect_census();
        assert!((c.total - 4.0 * PI).abs() < 1e-12);
        assert!(c.defects.iter().all(|d| (d - PI / 2.0).abs() < 1e-12));
    }

    #[test]
    fn builtins_are_nonneg_spheres() {
        for name in ["tetrahedron", "cube", "octahedron", "box(1,1,2)", "box( 2, 0.5 ,3 )"] {
            let s = builtin_surface(name).unwrap();
            assert_eq!(s.euler_characteristic(), 2, "{name}");
            assert!(s.is_nonneg_curved(1e-12), "{name}");
            assert!((s.defect_census().total - 4.0 * PI).abs() < 1e-9, "{name}");
        }
    }

    #[test]
    fn octahedron_defects() {
        let o = builtin_surface("octa").unwrap();
        for v in 0..6 {
            assert!((o.angle_defect(v) - 2.0 * PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_names_are_rejected() {
        for bad in ["dodecahedron", "box(1,2)", "box(1,0,2)", "box(1,-1,2)", "box(a,b,c)", ""] {
            assert_eq!(
                builtin_surface(bad),
                Err(SurfaceError::UnknownName(bad.to_string()))
            );
        }
    }
}
