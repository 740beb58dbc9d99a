//! Product decomposition: alignment of the singular strata with the two
//! plane fields, structure at codimension-4 vertices, leaf tracing and
//! verification against the rebuilt product.

mod ambient;
mod leaf;
mod radii;
mod verify;

pub use ambient::AmbientGraph;
pub use leaf::{
    slice_polygon, trace_leaf, ComplexPoint, Leaf, LeafConeVertex, LeafError, SeedPoint, TraceStep,
};
pub use radii::{hull_distance, stratum_radii, Radii};
pub use verify::{
    census_check, leaf_distance_consistency, spectra_check, verify_product, verify_product_with,
    CensusCheck, DistanceConsistency, ProductVerdict, SpectraCheck, VolumeCheck,
};

use crate::forms::{
    betti_check, extract_distributions, invariant_forms, simply_connected_heuristic,
    DistributionPair, FormsError, Which,
};
use crate::holonomy::{holonomy_generators, is_unitary_holonomy, UnitaryCheck};
use crate::plcomplex::{CurvatureReport, MetricComplex4, SingularCensus};
use crate::surface2::TriSurface;
use crate::tensor4::{AntisymForm, EigenPair, Mat4, OrientedPlane};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use thiserror::Error;

/// Numerical settings of the decomposition pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    /// Invariance, commutation, transport and orthogonality checks.
    pub tol_orth: f64,
    /// Cone angles (census of the input complex).
    pub tol_angle: f64,
    /// Projector distance below which a stratum counts as parallel to a field.
    pub tol_align: f64,
    /// Barycentric weight below which a leaf corner is placed on a face.
    pub tol_snap: f64,
    /// Relative tolerance of graph-distance comparisons.
    pub tol_distance: f64,
    /// Relative tolerance of the volume comparison.
    pub tol_volume: f64,
    /// Cone angles compared between the input and the rebuilt product.
    pub tol_census: f64,
    /// Polygon visits allowed per simplex before a leaf counts as non-closing.
    pub budget_multiplier: usize,
    /// Subdivision factor of the ambient distance graph.
    pub ambient_refinement: usize,
    /// Number of sampled rows / points in the distance checks.
    pub distance_samples: usize,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            tol_orth: 1e-9,
            tol_angle: 1e-7,
            tol_align: 1e-6,
            tol_snap: 1e-7,
            tol_distance: 3e-2,
            tol_volume: 1e-6,
            tol_census: 1e-6,
            budget_multiplier: 64,
            ambient_refinement: 3,
            distance_samples: 6,
            seed: 1,
        }
    }
}

impl SplitConfig {
    /// Names of fields that must be positive but are not.
    pub fn invalid_fields(&self) -> Vec<&'static str> {
        let mut bad = Vec::new();
        let tols = [
            ("tol_orth", self.tol_orth),
            ("tol_angle", self.tol_angle),
            ("tol_align", self.tol_align),
            ("tol_snap", self.tol_snap),
            ("tol_distance", self.tol_distance),
            ("tol_volume", self.tol_volume),
            ("tol_census", self.tol_census),
        ];
        for (name, v) in tols {
            if !(v.is_finite() && v > 0.0) {
                bad.push(name);
            }
        }
        if self.budget_multiplier == 0 {
            bad.push("budget_multiplier");
        }
        if self.ambient_refinement == 0 {
            bad.push("ambient_refinement");
        }
        if self.distance_samples == 0 {
            bad.push("distance_samples");
        }
        bad
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AlignmentTag {
    ParallelAlpha,
    ParallelBeta,
    Misaligned,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentEntry {
    pub stratum: usize,
    pub tag: AlignmentTag,
    /// Largest projector distance between a member triangle and the alpha plane.
    pub alpha_distance: f64,
    pub beta_distance: f64,
}

/// Plane of triangle `t` (vertex ids) inside the chart of simplex `s`.
fn triangle_plane(m: &MetricComplex4, s: usize, t: &[usize; 3]) -> OrientedPlane {
    let simplex = &m.simplices()[s];
    let chart = m.chart(s);
    let p = t.map(|v| chart[simplex.local_index(v).expect("triangle in simplex")]);
    let u = (p[1] - p[0]).normalize();
    let mut v = p[2] - p[0];
    v -= u * u.dot(&v);
    OrientedPlane::new(u, v.normalize())
}

/// Tags every stratum by comparing its triangles' planes with the
/// transported plane fields in every simplex around them.
pub fn align_strata(
    m: &MetricComplex4,
    dist: &DistributionPair,
    census: &SingularCensus,
    tol: f64,
) -> Vec<AlignmentEntry> {
    census
        .codim2
        .iter()
        .map(|stratum| {
            let mut da: f64 = 0.0;
            let mut db: f64 = 0.0;
            for t in &stratum.triangles {
                for &s in &m.triangles()[t] {
                    let p = triangle_plane(m, s, t);
                    da = da.max(p.projector_distance(&dist.alpha[s]));
                    db = db.max(p.projector_distance(&dist.beta[s]));
                }
            }
            let tag = if da <= tol {
                AlignmentTag::ParallelAlpha
            } else if db <= tol {
                AlignmentTag::ParallelBeta
            } else {
                AlignmentTag::Misaligned
            };
            AlignmentEntry {
                stratum: stratum.id,
                tag,
                alpha_distance: da,
                beta_distance: db,
            }
        })
        .collect()
}

/// Local product structure `C₁ × C₂` at a codimension-4 vertex. `angle1`
/// is the cone angle of the factor tangent to alpha, read off the strata
/// parallel to beta; `angle2` the other way round.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Codim4Structure {
    pub vertex: usize,
    pub label: String,
    pub angle1: f64,
    pub angle2: f64,
    pub alpha_family: Vec<usize>,
    pub beta_family: Vec<usize>,
    /// Largest entry of `P_A P_B` over member triangles of the two families,
    /// compared in the base chart.
    pub orthogonality_error: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SplitError {
    #[error("vertex {label} is not a product of two cones: {reason}")]
    NotProductLike { vertex: usize, label: String, reason: String },
}

pub fn classify_codim4(
    m: &MetricComplex4,
    dist: &DistributionPair,
    census: &SingularCensus,
    alignment: &[AlignmentEntry],
    cfg: &SplitConfig,
) -> Result<Vec<Codim4Structure>, SplitError> {
    let tags: BTreeMap<usize, AlignmentTag> = alignment.iter().map(|e| (e.stratum, e.tag)).collect();
    let mut out = Vec::new();
    for cand in &census.codim4 {
        let v = cand.vertex;
        let fail = |reason: String| SplitError::NotProductLike {
            vertex: v,
            label: m.label(v).to_string(),
            reason,
        };
        let mut alpha_family = Vec::new();
        let mut beta_family = Vec::new();
        for &s in &cand.strata {
            match tags.get(&s) {
                Some(AlignmentTag::ParallelAlpha) => alpha_family.push(s),
                Some(AlignmentTag::ParallelBeta) => beta_family.push(s),
                _ => return Err(fail(format!("stratum {s} is misaligned"))),
            }
        }
        if alpha_family.is_empty() || beta_family.is_empty() {
            return Err(fail("all incident strata are parallel to one field".into()));
        }
        let family_angle = |fam: &[usize]| -> Result<f64, SplitError> {
            let a = census.codim2[fam[0]].cone_angle;
            if fam
                .iter()
                .any(|&s| (census.codim2[s].cone_angle - a).abs() > cfg.tol_angle)
            {
                return Err(fail("strata of one family have different cone angles".into()));
            }
            Ok(a)
        };
        let angle1 = family_angle(&beta_family)?;
        let angle2 = family_angle(&alpha_family)?;
        if angle1 > TAU + cfg.tol_angle || angle2 > TAU + cfg.tol_angle {
            return Err(fail(format!("cone angles {angle1} and {angle2} exceed 2π")));
        }
        let base_projectors = |fam: &[usize]| -> Vec<Mat4> {
            let mut ps = Vec::new();
            for &sid in fam {
                for t in census.codim2[sid].triangles.iter().filter(|t| t.contains(&v)) {
                    let s = m.triangles()[t][0];
                    let r = dist.placements[s].rotation;
                    ps.push(r * triangle_plane(m, s, t).projector() * r.transpose());
                }
            }
            ps
        };
        let (pa, pb) = (base_projectors(&alpha_family), base_projectors(&beta_family));
        let mut orthogonality_error: f64 = 0.0;
        for a in &pa {
            for b in &pb {
                orthogonality_error = orthogonality_error.max((a * b).amax());
            }
        }
        if orthogonality_error > cfg.tol_orth {
            return Err(fail(format!(
                "families are not orthogonal (error {orthogonality_error:.3e})"
            )));
        }
        out.push(Codim4Structure {
            vertex: v,
            label: m.label(v).to_string(),
            angle1,
            angle2,
            alpha_family,
            beta_family,
            orthogonality_error,
        });
    }
    Ok(out)
}

/// Pipeline stage at which a decomposition stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Validation,
    Census,
    BettiCheck,
    Distributions,
    AlignStrata,
    ClassifyCodim4,
    TraceLeaf,
    VerifyProduct,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Validation => "validation",
            Stage::Census => "census",
            Stage::BettiCheck => "betti_check",
            Stage::Distributions => "distributions",
            Stage::AlignStrata => "align_strata",
            Stage::ClassifyCodim4 => "classify_codim4",
            Stage::TraceLeaf => "trace_leaf",
            Stage::VerifyProduct => "verify_product",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Success,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub stage: Option<Stage>,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSummary {
    pub n_vertices: usize,
    pub n_simplices: usize,
    pub euler_characteristic: i64,
    pub total_volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumSummary {
    pub id: usize,
    pub cone_angle: f64,
    pub n_triangles: usize,
    pub n_vertices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusSummary {
    pub n_codim2: usize,
    pub n_codim4: usize,
    pub n_codim3_flags: usize,
    pub strata: Vec<StratumSummary>,
}

impl CensusSummary {
    pub fn of(c: &SingularCensus) -> Self {
        CensusSummary {
            n_codim2: c.codim2.len(),
            n_codim4: c.codim4.len(),
            n_codim3_flags: c.codim3_violations.len(),
            strata: c
                .codim2
                .iter()
                .map(|s| StratumSummary {
                    id: s.id,
                    cone_angle: s.cone_angle,
                    n_triangles: s.triangles.len(),
                    n_vertices: s.vertices.len(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolonomySummary {
    pub n_generators: usize,
    pub max_orthogonality_error: f64,
    pub unitary: UnitaryCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormsSummary {
    pub dim: usize,
    pub basis: Vec<AntisymForm>,
    pub simply_connected_heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionSummary {
    pub lambda: f64,
    pub mu: f64,
    pub eigen: EigenPair,
    pub base_alpha: OrientedPlane,
    pub base_beta: OrientedPlane,
    pub max_transport_error: f64,
    pub max_generator_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContradictionSummary {
    pub omega3: AntisymForm,
    pub max_commutator: f64,
    pub n_generators: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorSummary {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub area: f64,
    /// Defects of the singular vertices, in decreasing order.
    pub defects: Vec<f64>,
    pub polygons_visited: usize,
    pub unexplained_cone_vertices: usize,
}

impl FactorSummary {
    fn of(leaf: &Leaf, angle_tol: f64) -> Self {
        let mut defects: Vec<f64> = leaf
            .surface
            .defect_census()
            .defects
            .into_iter()
            .filter(|d| d.abs() > crate::surface2::DEFECT_TOL)
            .collect();
        defects.sort_by(|a, b| b.total_cmp(a));
        FactorSummary {
            n_vertices: leaf.surface.n_vertices(),
            n_triangles: leaf.surface.triangles().len(),
            area: leaf.surface.area(),
            defects,
            polygons_visited: leaf.trace_log.len(),
            unexplained_cone_vertices: leaf.unexplained_cone_vertices(angle_tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SplitReport {
    pub input: InputSummary,
    pub curvature: CurvatureReport,
    pub census: CensusSummary,
    pub holonomy: Option<HolonomySummary>,
    pub forms: Option<FormsSummary>,
    pub distributions: Option<DistributionSummary>,
    pub contradiction: Option<ContradictionSummary>,
    pub alignment: Vec<AlignmentEntry>,
    pub codim4: Vec<Codim4Structure>,
    pub radii: Option<Radii>,
    pub factor_alpha: Option<FactorSummary>,
    pub factor_beta: Option<FactorSummary>,
    pub verification: Option<ProductVerdict>,
    pub caveats: Vec<String>,
    pub verdict: Verdict,
    /// Recovered factor surfaces (alpha leaf, beta leaf).
    #[serde(skip)]
    pub factors: Option<(TriSurface, TriSurface)>,
}

impl SplitReport {
    pub fn succeeded(&self) -> bool {
        self.verdict.status == Status::Success
    }

    fn fail(mut self, stage: Stage, message: impl Into<String>) -> Self {
        self.verdict = Verdict {
            status: Status::Failure,
            stage: Some(stage),
            message: Some(message.into()),
        };
        self
    }
}

/// Shared preprocessing: census, plane fields and alignment.
pub(crate) struct Prepared {
    pub census: SingularCensus,
    pub dist: DistributionPair,
    pub alignment: Vec<AlignmentEntry>,
}

pub(crate) fn prepare(m: &MetricComplex4, cfg: &SplitConfig) -> Result<Prepared, FormsError> {
    let census = m.singular_census();
    let rep = holonomy_generators(m);
    let basis = invariant_forms(&rep, cfg.tol_orth);
    let dist = extract_distributions(&basis, &rep, m, cfg.seed, cfg.tol_orth)?;
    let alignment = align_strata(m, &dist, &census, cfg.tol_align);
    Ok(Prepared {
        census,
        dist,
        alignment,
    })
}

/// Message noting that stratum loops may not generate the whole holonomy.
pub const NOT_SIMPLY_CONNECTED_CAVEAT: &str = "input fails the simple-connectivity heuristic \
     (Euler characteristic differs from 4): stratum loops may not generate the full holonomy, \
     so the invariant forms are only an upper bound on parallel forms";

/// Runs the whole pipeline; the verdict names the first failing stage.
pub fn decompose(m: &MetricComplex4, cfg: &SplitConfig) -> SplitReport {
    let census = m.singular_census();
    let mut report = SplitReport {
        input: InputSummary {
            n_vertices: m.n_vertices(),
            n_simplices: m.n_simplices(),
            euler_characteristic: m.euler_characteristic(),
            total_volume: m.total_volume(),
        },
        curvature: m.check_nonneg_curvature(),
        census: CensusSummary::of(&census),
        holonomy: None,
        forms: None,
        distributions: None,
        contradiction: None,
        alignment: vec![],
        codim4: vec![],
        radii: None,
        factor_alpha: None,
        factor_beta: None,
        verification: None,
        caveats: vec![],
        verdict: Verdict {
            status: Status::Success,
            stage: None,
            message: None,
        },
        factors: None,
    };
    let validation = m.validate();
    if !validation.is_valid() {
        return report.fail(Stage::Validation, validation.to_string());
    }
    if !report.curvature.nonneg {
        report.caveats.push(format!(
            "cone angle {:.9} exceeds 2π: curvature is not nonnegative",
            report.curvature.worst_angle
        ));
    }
    if !census.codim3_violations.is_empty() {
        let n = census.codim3_violations.len();
        return report.fail(Stage::Census, format!("{n} edge(s) carry codimension-3 singularities"));
    }

    let rep = holonomy_generators(m);
    report.holonomy = Some(HolonomySummary {
        n_generators: rep.generators.len(),
        max_orthogonality_error: rep.max_orthogonality_error(),
        unitary: is_unitary_holonomy(&rep, cfg.tol_orth),
    });
    let basis = invariant_forms(&rep, cfg.tol_orth);
    let heuristic = simply_connected_heuristic(m);
    report.forms = Some(FormsSummary {
        dim: basis.dim,
        basis: basis.basis.clone(),
        simply_connected_heuristic: heuristic,
    });
    if !heuristic {
        report.caveats.push(NOT_SIMPLY_CONNECTED_CAVEAT.to_string());
    }
    if !betti_check(&basis, 2) {
        return report.fail(
            Stage::BettiCheck,
            format!("invariant 2-forms span dimension {}, expected 2", basis.dim),
        );
    }

    let dist = match extract_distributions(&basis, &rep, m, cfg.seed, cfg.tol_orth) {
        Ok(d) => d,
        Err(e) => {
            if let FormsError::ContradictionWitness {
                omega3,
                max_commutator,
                generators,
            } = &e
            {
                report.contradiction = Some(ContradictionSummary {
                    omega3: *omega3,
                    max_commutator: *max_commutator,
                    n_generators: generators.len(),
                });
            }
            return report.fail(Stage::Distributions, e.to_string());
        }
    };
    report.distributions = Some(DistributionSummary {
        lambda: dist.lambda,
        mu: dist.mu,
        eigen: dist.eigen,
        base_alpha: dist.base_alpha,
        base_beta: dist.base_beta,
        max_transport_error: dist.max_transport_error,
        max_generator_error: dist.max_generator_error,
    });

    let alignment = align_strata(m, &dist, &census, cfg.tol_align);
    report.alignment = alignment.clone();
    let misaligned: Vec<usize> = alignment
        .iter()
        .filter(|e| e.tag == AlignmentTag::Misaligned)
        .map(|e| e.stratum)
        .collect();
    if !misaligned.is_empty() {
        return report.fail(
            Stage::AlignStrata,
            format!("{} stratum/strata parallel to neither field: {misaligned:?}", misaligned.len()),
        );
    }

    match classify_codim4(m, &dist, &census, &alignment, cfg) {
        Ok(c) => report.codim4 = c,
        Err(e) => return report.fail(Stage::ClassifyCodim4, e.to_string()),
    }
    report.radii = stratum_radii(m, &census.codim2);

    let seed = SeedPoint::barycenter(0);
    let mut leaves = Vec::new();
    for which in [Which::Alpha, Which::Beta] {
        match trace_leaf(m, &dist, which, seed, &census.codim2, Some(&alignment), cfg) {
            Ok(l) => leaves.push(l),
            Err(e) => return report.fail(Stage::TraceLeaf, format!("{which:?} leaf: {e}")),
        }
    }
    let beta_leaf = leaves.pop().unwrap();
    let alpha_leaf = leaves.pop().unwrap();
    report.factor_alpha = Some(FactorSummary::of(&alpha_leaf, cfg.tol_census));
    report.factor_beta = Some(FactorSummary::of(&beta_leaf, cfg.tol_census));
    for leaf in [&alpha_leaf, &beta_leaf] {
        let bad = leaf.unexplained_cone_vertices(cfg.tol_census);
        if bad > 0 {
            return report.fail(
                Stage::TraceLeaf,
                format!("{:?} leaf has {bad} cone vertex/vertices off the transverse strata", leaf.which),
            );
        }
    }

    let verdict = verify_product_with(
        m,
        &alpha_leaf.surface,
        &beta_leaf.surface,
        Some((&dist, &alpha_leaf)),
        Some(&alignment),
        cfg,
    );
    let pass = verdict.pass;
    report.verification = Some(verdict);
    report.factors = Some((alpha_leaf.surface, beta_leaf.surface));
    if !pass {
        return report.fail(Stage::VerifyProduct, "rebuilt product does not match the input");
    }
    report
}
