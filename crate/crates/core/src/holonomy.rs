//! Developing maps on the flat part of a metric 4-complex and the rotation
//! holonomy around codimension-2 strata.
//!
//! Every simplex carries its own chart (see [`MetricComplex4::chart`]). A
//! [`Placement`] is an affine isometry `x ↦ Rx + d` of ℝ⁴; the placement of a
//! simplex maps its chart into the developing space of a base simplex.

use crate::forms::invariant_forms;
use crate::plcomplex::{DualGraph, MetricComplex4};
use crate::tensor4::{single_plane_angle, AntisymForm, Mat4, OrientedPlane, Vec4};
use serde::Serialize;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HolonomyError {
    #[error("simplices {0} and {1} do not share a tetrahedron")]
    NotAdjacent(usize, usize),
    #[error("empty path")]
    EmptyPath,
    #[error("triangle {0:?} is not a face of the complex")]
    UnknownTriangle([usize; 3]),
    #[error("triangle {triangle:?} is not singular (cone angle {cone_angle})")]
    NonSingularTriangle { triangle: [usize; 3], cone_angle: f64 },
}

/// Affine isometry `x ↦ rotation·x + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Placement {
    pub rotation: Mat4,
    pub translation: Vec4,
}

impl Placement {
    pub fn identity() -> Self {
        Placement {
            rotation: Mat4::identity(),
            translation: Vec4::zeros(),
        }
    }

    pub fn apply(&self, x: &Vec4) -> Vec4 {
        self.rotation * x + self.translation
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Placement) -> Placement {
        Placement {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Placement {
        let rt = self.rotation.transpose();
        Placement {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    /// Largest entry-wise deviation from the identity map.
    pub fn deviation_from_identity(&self) -> f64 {
        (self.rotation - Mat4::identity())
            .amax()
            .max(self.translation.amax())
    }
}

/// Orthonormal frame of the facet opposite local vertex `apex`, completed by
/// the unit normal pointing towards the apex. Columns follow the order of the
/// remaining vertex ids, so two simplices sharing the facet build matching
/// frames.
fn facet_frame(m: &MetricComplex4, s: usize, apex: usize) -> (Mat4, Vec4) {
    let simplex = &m.simplices()[s];
    let chart = m.chart(s);
    let mut others: Vec<usize> = (0..5).filter(|&k| k != apex).collect();
    others.sort_by_key(|&k| simplex.vertices[k]);
    let origin = chart[others[0]];
    let mut cols: Vec<Vec4> = Vec::with_capacity(4);
    for &k in &others[1..] {
        let mut w = chart[k] - origin;
        for q in &cols {
            w -= q * q.dot(&w);
        }
        cols.push(w.normalize());
    }
    let mut n = chart[apex] - origin;
    for q in &cols {
        n -= q * q.dot(&n);
    }
    cols.push(n.normalize());
    (Mat4::from_columns(&cols), origin)
}

/// Affine map from the chart of `t` into the chart of `s`, matching their
/// shared tetrahedron and putting the two apexes on opposite sides.
pub fn transition(m: &MetricComplex4, s: usize, t: usize) -> Result<Placement, HolonomyError> {
    let k = m
        .neighbors(s)
        .iter()
        .position(|g| g.is_some_and(|g| g.simplex == t))
        .ok_or(HolonomyError::NotAdjacent(s, t))?;
    Ok(facet_transition(m, s, k).expect("glued facet").1)
}

/// Neighbour of `s` across its facet `k`, with the affine map from the
/// neighbour's chart into the chart of `s`.
pub fn facet_transition(m: &MetricComplex4, s: usize, k: usize) -> Option<(usize, Placement)> {
    let g = m.neighbor(s, k)?;
    let t = g.simplex;
    let (mut fs, os) = facet_frame(m, s, k);
    let (ft, ot) = facet_frame(m, t, g.facet);
    let flipped = -fs.column(3);
    fs.set_column(3, &flipped);
    let rotation = fs * ft.transpose();
    Some((
        t,
        Placement {
            rotation,
            translation: os - rotation * ot,
        },
    ))
}

/// Placements of the simplices along a path, the first being the identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DevelopingChart {
    pub path: Vec<usize>,
    pub placements: Vec<Placement>,
}

impl DevelopingChart {
    /// Placement of the last simplex; for a closed path this is the affine
    /// holonomy of the loop.
    pub fn end(&self) -> Placement {
        *self.placements.last().expect("non-empty chart")
    }
}

/// Develops the simplices of `path` one after another into the chart of
/// `path[0]`.
pub fn develop(m: &MetricComplex4, path: &[usize]) -> Result<DevelopingChart, HolonomyError> {
    if path.is_empty() {
        return Err(HolonomyError::EmptyPath);
    }
    let mut placements = vec![Placement::identity()];
    for w in path.windows(2) {
        let step = transition(m, w[0], w[1])?;
        let prev = placements.last().unwrap();
        placements.push(prev.compose(&step));
    }
    Ok(DevelopingChart {
        path: path.to_vec(),
        placements,
    })
}

/// Placement of every simplex along the breadth-first spanning tree of the
/// dual graph, rooted at simplex 0. Unreached simplices keep the identity.
pub fn develop_tree(m: &MetricComplex4, dual: &DualGraph) -> Vec<Placement> {
    let mut out = vec![Placement::identity(); m.n_simplices()];
    for &s in &dual.order {
        if let Some(e) = dual.parent[s] {
            let step = transition(m, e.parent, s).expect("tree edges are gluings");
            out[s] = out[e.parent].compose(&step);
        }
    }
    out
}

/// Holonomy of a loop around one codimension-2 stratum, conjugated to the base.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generator {
    pub stratum: Option<usize>,
    pub triangle: [usize; 3],
    /// Closed simplex path: tree path to the fan, the fan, and back.
    pub loop_path: Vec<usize>,
    pub rotation: Mat4,
    pub translation: Vec4,
    pub cone_angle: f64,
    /// Rotation angle in `[0, π]` of the transverse rotation.
    pub angle: f64,
    /// Plane of the triangle developed into the base chart.
    pub fixed_plane: OrientedPlane,
    /// Developed corners of the triangle in the base chart.
    pub fixed_points: [Vec4; 3],
}

/// Holonomy representation at simplex 0; only rotation parts enter the
/// form analysis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomyRep {
    pub base: usize,
    pub generators: Vec<Generator>,
}

impl HolonomyRep {
    pub fn rotations(&self) -> Vec<Mat4> {
        self.generators.iter().map(|g| g.rotation).collect()
    }

    /// Largest deviation of a generator from `SO(4)`: `‖RRᵀ − I‖` and `|det R − 1|`.
    pub fn max_orthogonality_error(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| {
                let r = g.rotation;
                (r * r.transpose() - Mat4::identity())
                    .amax()
                    .max((r.determinant() - 1.0).abs())
            })
            .fold(0.0, f64::max)
    }
}

/// Loop around triangle `t` based at the root of `dual`: any triangle,
/// singular or not (a flat triangle yields the identity).
pub fn holonomy_around_triangle(
    m: &MetricComplex4,
    t: [usize; 3],
    dual: &DualGraph,
) -> Result<Generator, HolonomyError> {
    let mut key = t;
    key.sort_unstable();
    let fan = m
        .triangle_fan(key)
        .map_err(|_| HolonomyError::UnknownTriangle(t))?;
    let cone_angle = m
        .cone_angle_at_triangle(key)
        .map_err(|_| HolonomyError::UnknownTriangle(t))?;
    let to_fan = dual.path_from_root(fan[0]);
    let mut loop_path = to_fan.clone();
    loop_path.extend_from_slice(&fan[1..]);
    loop_path.push(fan[0]);
    loop_path.extend(to_fan.iter().rev().skip(1));
    let chart = develop(m, &loop_path)?;
    let hol = chart.end();
    // corners of the triangle, developed through the tree path
    let at_fan = chart.placements[to_fan.len() - 1];
    let simplex = &m.simplices()[fan[0]];
    let local = key.map(|v| simplex.local_index(v).expect("fan contains the triangle"));
    let fixed_points = local.map(|k| at_fan.apply(&m.chart(fan[0])[k]));
    let u = (fixed_points[1] - fixed_points[0]).normalize();
    let mut v = fixed_points[2] - fixed_points[0];
    v -= u * u.dot(&v);
    let fixed_plane = OrientedPlane::new(u, v.normalize());
    Ok(Generator {
        stratum: None,
        triangle: key,
        loop_path,
        rotation: hol.rotation,
        translation: hol.translation,
        cone_angle,
        angle: single_plane_angle(&hol.rotation),
        fixed_plane,
        fixed_points,
    })
}

/// Holonomy around a singular triangle, conjugated to the base simplex of `dual`.
pub fn holonomy_around_stratum(
    m: &MetricComplex4,
    t: [usize; 3],
    dual: &DualGraph,
) -> Result<Generator, HolonomyError> {
    let g = holonomy_around_triangle(m, t, dual)?;
    if (g.cone_angle - TAU).abs() <= m.tolerances.angle {
        return Err(HolonomyError::NonSingularTriangle {
            triangle: g.triangle,
            cone_angle: g.cone_angle,
        });
    }
    Ok(g)
}

/// One generator per codimension-2 stratum, taken around its first triangle.
pub fn holonomy_generators(m: &MetricComplex4) -> HolonomyRep {
    let dual = m.dual_graph();
    let census = m.singular_census();
    let generators = census
        .codim2
        .iter()
        .map(|s| {
            let mut g = holonomy_around_stratum(m, s.triangles[0], &dual)
                .expect("stratum triangles are singular faces");
            g.stratum = Some(s.id);
            g
        })
        .collect();
    HolonomyRep {
        base: 0,
        generators,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryCheck {
    pub unitary: bool,
    /// Orthogonal first-kind form commuting with every generator.
    pub witness: Option<AntisymForm>,
    /// Largest `‖gJ′ − J′g‖` over generators for the witness.
    pub max_commutator: f64,
}

/// Largest entry of `gW − Wg` over `gens`.
pub fn max_commutator(gens: &[Mat4], w: &AntisymForm) -> f64 {
    let wm = w.to_matrix();
    gens.iter()
        .map(|g| (g * wm - wm * g).amax())
        .fold(0.0, f64::max)
}

/// Looks for an orthogonal first-kind form commuting with all generators,
/// i.e. a complex structure for which the holonomy lies in U(2).
pub fn is_unitary_holonomy(rep: &HolonomyRep, tol: f64) -> UnitaryCheck {
    let gens = rep.rotations();
    let j = AntisymForm::j();
    if max_commutator(&gens, &j) <= tol {
        return UnitaryCheck {
            unitary: true,
            witness: Some(j),
            max_commutator: max_commutator(&gens, &j),
        };
    }
    let basis = invariant_forms(rep, tol);
    let mut candidates: Vec<AntisymForm> =
        basis.basis.iter().map(AntisymForm::first_kind_part).collect();
    // combinations help when no single basis element has a clean first-kind part
    if candidates.len() >= 2 {
        let (a, b) = (candidates[0], candidates[1]);
        candidates.push(a + b);
        candidates.push(a - b);
    }
    let best = candidates
        .into_iter()
        .filter(|c| c.frobenius_norm() > tol.sqrt())
        .map(|c| (1.0 / (c.frobenius_norm() / 2.0)) * c)
        .map(|c| (max_commutator(&gens, &c), c))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    match best {
        Some((err, w)) if err <= tol.max(1e-9) * 10.0 => UnitaryCheck {
            unitary: true,
            witness: Some(w),
            max_commutator: err,
        },
        Some((err, _)) => UnitaryCheck {
            unitary: false,
            witness: None,
            max_commutator: err,
        },
        None => UnitaryCheck {
            unitary: false,
            witness: None,
            max_commutator: f64::INFINITY,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plcomplex::{flat_torus4, product_complex};
    use crate::surface2::builtin_surface;
    use crate::tensor4::is_orthogonal;
    use std::f64::consts::PI;

    fn product(a: &str, b: &str) -> MetricComplex4 {
        product_complex(&builtin_surface(a).unwrap(), &builtin_surface(b).unwrap()).unwrap()
    }

    fn gen_of(rot: Mat4) -> Generator {
        Generator {
            stratum: None,
            triangle: [0, 1, 2],
            loop_path: vec![],
            rotation: rot,
            translation: Vec4::zeros(),
            cone_angle: 0.0,
            angle: single_plane_angle(&rot),
            fixed_plane: OrientedPlane::new(Vec4::x(), Vec4::y()),
            fixed_points: [Vec4::zeros(); 3],
        }
    }

    #[test]
    fn transition_matches_shared_vertices() {
        let m = product("tetra", "cube");
        for s in [0, 7, 100] {
            for g in m.neighbors(s).iter().flatten() {
                let p = transition(&m, s, g.simplex).unwrap();
                assert!(is_orthogonal(&p.rotation, 1e-12));
                // charts need not share an orientation
                assert!((p.rotation.determinant().abs() - 1.0).abs() < 1e-12);
                let (a, b) = (&m.simplices()[s], &m.simplices()[g.simplex]);
                for &v in &b.vertices {
                    if let Some(ka) = a.local_index(v) {
                        let kb = b.local_index(v).unwrap();
                        let x = p.apply(&m.chart(g.simplex)[kb]);
                        assert!((x - m.chart(s)[ka]).norm() < 1e-12);
                    }
                }
                // apexes land on opposite sides of the shared facet
                let k = m.neighbors(s).iter().position(|x| x == &Some(*g)).unwrap();
                let (frame, origin) = facet_frame(&m, s, k);
                let n = frame.column(3).into_owned();
                let apex_t = p.apply(&m.chart(g.simplex)[g.facet]);
                assert!(n.dot(&(m.chart(s)[k] - origin)) > 0.0);
                assert!(n.dot(&(apex_t - origin)) < 0.0);
            }
        }
    }

    #[test]
    fn single_simplex_and_backtracking_are_identity() {
        let m = product("cube", "cube");
        let c = develop(&m, &[5]).unwrap();
        assert_eq!(c.end(), Placement::identity());
        let t = m.neighbors(5)[0].unwrap().simplex;
        let back = develop(&m, &[5, t, 5]).unwrap();
        assert!(back.end().deviation_from_identity() < 1e-12);
        let far = develop(&m, &m.dual_graph().path_from_root(300)).unwrap();
        let mut rev = far.path.clone();
        rev.reverse();
        let mut there_and_back = far.path.clone();
        there_and_back.extend(rev.into_iter().skip(1));
        assert!(develop(&m, &there_and_back).unwrap().end().deviation_from_identity() < 1e-9);
    }

    #[test]
    fn not_adjacent_is_rejected() {
        let m = product("tetra", "tetra");
        let far = (0..m.n_simplices())
            .find(|&t| t != 0 && m.neighbors(0).iter().all(|g| g.map(|g| g.simplex) != Some(t)))
            .unwrap();
        assert_eq!(
            develop(&m, &[0, far]).unwrap_err(),
            HolonomyError::NotAdjacent(0, far)
        );
    }

    #[test]
    fn flat_triangle_gives_identity() {
        let m = product("cube", "cube");
        let dual = m.dual_graph();
        let angles = m.cone_angles();
        let flat = angles
            .iter()
            .find(|(_, a)| (**a - TAU).abs() < 1e-9)
            .map(|(t, _)| *t)
            .unwrap();
        let g = holonomy_around_triangle(&m, flat, &dual).unwrap();
        assert!((g.rotation - Mat4::identity()).amax() < 1e-9);
        assert!(matches!(
            holonomy_around_stratum(&m, flat, &dual),
            Err(HolonomyError::NonSingularTriangle { .. })
        ));
    }

    fn check_generators(m: &MetricComplex4, angle: f64, count: usize) -> HolonomyRep {
        let rep = holonomy_generators(m);
        assert_eq!(rep.generators.len(), count);
        assert!(rep.max_orthogonality_error() < 1e-9);
        for g in &rep.generators {
            assert!((g.angle - angle).abs() < 1e-9, "angle {}", g.angle);
            assert!((g.angle - (TAU - g.cone_angle)).abs() < 1e-9);
            // generator fixes its triangle pointwise
            for x in &g.fixed_points {
                let y = g.rotation * x + g.translation;
                assert!((y - x).norm() < 1e-9);
            }
            assert!((g.rotation * g.fixed_plane.u - g.fixed_plane.u).norm() < 1e-9);
            assert!((g.rotation * g.fixed_plane.v - g.fixed_plane.v).norm() < 1e-9);
        }
        for a in &rep.generators {
            for b in &rep.generators {
                let c = a.rotation * b.rotation - b.rotation * a.rotation;
                assert!(c.amax() < 1e-9);
            }
        }
        rep
    }

    #[test]
    fn cube_cube_generators_are_quarter_turns() {
        let rep = check_generators(&product("cube", "cube"), PI / 2.0, 16);
        assert!(is_unitary_holonomy(&rep, 1e-9).unitary);
    }

    #[test]
    fn tetra_tetra_generators_are_half_turns() {
        let rep = check_generators(&product("tetra", "tetra"), PI, 8);
        assert!(is_unitary_holonomy(&rep, 1e-9).unitary);
    }

    #[test]
    fn holonomy_is_multiplicative_on_concatenated_loops() {
        let m = product("tetra", "cube");
        let rep = holonomy_generators(&m);
        let (a, b) = (&rep.generators[0], &rep.generators[5]);
        let mut path = a.loop_path.clone();
        path.extend(b.loop_path.iter().skip(1));
        let h = develop(&m, &path).unwrap().end();
        let want = Placement {
            rotation: a.rotation,
            translation: a.translation,
        }
        .compose(&Placement {
            rotation: b.rotation,
            translation: b.translation,
        });
        assert!((h.rotation - want.rotation).amax() < 1e-9);
        assert!((h.translation - want.translation).amax() < 1e-9);
    }

    #[test]
    fn flat_torus_has_no_generators() {
        let rep = holonomy_generators(&flat_torus4());
        assert!(rep.generators.is_empty());
        let u = is_unitary_holonomy(&rep, 1e-9);
        assert!(u.unitary);
        assert_eq!(u.witness, Some(AntisymForm::j()));
    }

    #[test]
    fn plane_swapping_reflections_are_not_unitary() {
        let rep = HolonomyRep {
            base: 0,
            generators: vec![
                gen_of(Mat4::from_diagonal(&Vec4::new(1.0, -1.0, 1.0, -1.0))),
                gen_of(Mat4::from_diagonal(&Vec4::new(1.0, 1.0, -1.0, -1.0))),
            ],
        };
        assert!(!is_unitary_holonomy(&rep, 1e-9).unitary);
    }

    #[test]
    fn conjugated_product_rep_is_unitary_with_other_witness() {
        let m = product("tetra", "box(1,1,2)");
        let rep = holonomy_generators(&m);
        let w = is_unitary_holonomy(&rep, 1e-9);
        assert!(w.unitary);
        let wit = w.witness.unwrap();
        assert!(max_commutator(&rep.rotations(), &wit) < 1e-8);
        assert!(wit.pfaffian() > 0.0);
    }
}
