//! Checks that a complex is the metric product of two recovered factors.

use super::ambient::AmbientGraph;
use super::leaf::{trace_leaf, ComplexPoint, Leaf, SeedPoint, StratumIndex};
use super::{AlignmentEntry, SplitConfig};
use crate::forms::{DistributionPair, Which};
use crate::plcomplex::{product_complex, MetricComplex4, SingularCensus};
use crate::surface2::{singular_distance_matrix, TriSurface};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusCheck {
    pub pass: bool,
    pub strata: (usize, usize),
    pub codim4: (usize, usize),
    /// Largest difference between matched sorted cone angles (strata and
    /// codim-4 angle pairs).
    pub max_angle_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeCheck {
    pub pass: bool,
    pub volume: f64,
    pub product_of_areas: f64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectraCheck {
    pub pass: bool,
    pub sampled: usize,
    /// Largest relative deviation of a sampled sorted distance row from the
    /// best-matching row of the product formula.
    pub max_deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceConsistency {
    pub pass: bool,
    /// Seed of the second leaf, chosen about half-way across the complex.
    pub target_seed: Option<SeedPoint>,
    /// Distances from sampled points of the first leaf to the second.
    pub forward: Vec<f64>,
    /// Distances from sampled points of the second leaf to the first.
    pub backward: Vec<f64>,
    /// `(max − min) / max` over each sample set, the larger of the two.
    pub max_deviation: f64,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductVerdict {
    pub pass: bool,
    pub census: CensusCheck,
    pub volume: VolumeCheck,
    pub spectra: SpectraCheck,
    pub leaf_distances: DistanceConsistency,
}

/// Sorted incident-stratum angles at each codim-4 vertex, sorted as a list.
fn codim4_signatures(c: &SingularCensus) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = c
        .codim4
        .iter()
        .map(|v| {
            let mut a: Vec<f64> = v.strata.iter().map(|&s| c.codim2[s].cone_angle).collect();
            a.sort_by(f64::total_cmp);
            a
        })
        .collect();
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(a.len().cmp(&b.len()))
    });
    out
}

pub fn census_check(m: &SingularCensus, n: &SingularCensus, tol: f64) -> CensusCheck {
    let mut am: Vec<f64> = m.codim2.iter().map(|s| s.cone_angle).collect();
    let mut an: Vec<f64> = n.codim2.iter().map(|s| s.cone_angle).collect();
    am.sort_by(f64::total_cmp);
    an.sort_by(f64::total_cmp);
    let (sm, sn) = (codim4_signatures(m), codim4_signatures(n));
    let mut err: f64 = 0.0;
    let mut shapes_match = am.len() == an.len() && sm.len() == sn.len();
    if shapes_match {
        for (a, b) in am.iter().zip(&an) {
            err = err.max((a - b).abs());
        }
        for (a, b) in sm.iter().zip(&sn) {
            if a.len() != b.len() {
                shapes_match = false;
                break;
            }
            for (x, y) in a.iter().zip(b) {
                err = err.max((x - y).abs());
            }
        }
    }
    let pass = shapes_match && err <= tol && m.codim3_violations.len() == n.codim3_violations.len();
    CensusCheck {
        pass,
        strata: (am.len(), an.len()),
        codim4: (sm.len(), sn.len()),
        max_angle_error: if shapes_match { err } else { f64::INFINITY },
    }
}

/// Sampled rows of graph distances between codim-4 vertices of `m`,
/// matched against rows of `√(d_P² + d_Q²)` between singular vertex pairs
/// of the factors.
pub fn spectra_check(
    census: &SingularCensus,
    graph: &AmbientGraph,
    fa: &TriSurface,
    fb: &TriSurface,
    cfg: &SplitConfig,
) -> SpectraCheck {
    let (_, da) = singular_distance_matrix(fa);
    let (_, db) = singular_distance_matrix(fb);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..da.len() {
        for j in 0..db.len() {
            let mut row: Vec<f64> = Vec::with_capacity(da.len() * db.len());
            for di in &da[i] {
                for dj in &db[j] {
                    row.push(di.hypot(*dj));
                }
            }
            row.sort_by(f64::total_cmp);
            rows.push(row);
        }
    }
    let verts: Vec<usize> = census.codim4.iter().map(|c| c.vertex).collect();
    if verts.len() != rows.len() || verts.is_empty() {
        return SpectraCheck {
            pass: verts.is_empty() && rows.is_empty(),
            sampled: 0,
            max_deviation: if verts.len() == rows.len() { 0.0 } else { f64::INFINITY },
        };
    }
    let floor = rows
        .iter()
        .flatten()
        .copied()
        .filter(|&d| d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.distance_samples.min(verts.len());
    let mut picks: Vec<usize> = sample(&mut rng, verts.len(), n).into_vec();
    picks.sort_unstable();
    let nodes: Vec<usize> = verts.iter().map(|&v| graph.vertex_node(v)).collect();
    let mut worst: f64 = 0.0;
    for &p in &picks {
        let tree = graph.shortest_paths(&[nodes[p]]);
        let mut row: Vec<f64> = nodes
            .iter()
            .map(|&k| graph.shortened_distance(&tree, k, None))
            .collect();
        row.sort_by(f64::total_cmp);
        let best = rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&row)
                    .map(|(a, b)| (a - b).abs() / a.max(floor))
                    .fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(best);
    }
    SpectraCheck {
        pass: worst <= cfg.tol_distance,
        sampled: picks.len(),
        max_deviation: worst,
    }
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || max <= 0.0 {
        0.0
    } else {
        (max - min) / max
    }
}

/// Distances from sampled points of `leaf` to a second leaf of the same
/// field, and back; all distances to a leaf should agree along the other.
pub fn leaf_distance_consistency(
    m: &MetricComplex4,
    dist: &DistributionPair,
    leaf: &Leaf,
    graph: &mut AmbientGraph,
    census: &SingularCensus,
    alignment: Option<&[AlignmentEntry]>,
    cfg: &SplitConfig,
) -> DistanceConsistency {
    let fail = |msg: String| DistanceConsistency {
        pass: false,
        target_seed: None,
        forward: vec![],
        backward: vec![],
        max_deviation: f64::INFINITY,
        message: Some(msg),
    };
    let a_nodes: Vec<usize> = leaf.points.iter().map(|p| graph.add_point(p)).collect();
    let da = graph.distances_from(&a_nodes);
    // simplex whose distance to the leaf is closest to half the largest
    let approx: Vec<f64> = (0..m.n_simplices())
        .map(|s| graph.simplex_min(s, &da))
        .collect();
    let far = approx.iter().copied().fold(0.0, f64::max);
    let target = (0..m.n_simplices())
        .min_by(|&a, &b| {
            (approx[a] - far / 2.0)
                .abs()
                .total_cmp(&(approx[b] - far / 2.0).abs())
        })
        .unwrap_or(0);
    let seed = SeedPoint::barycenter(target);
    let other = match trace_leaf(m, dist, leaf.which, seed, &census.codim2, alignment, cfg) {
        Ok(l) => l,
        Err(e) => return fail(format!("second leaf: {e}")),
    };
    let b_nodes: Vec<usize> = other.points.iter().map(|p| graph.add_point(p)).collect();
    let db = graph.shortest_paths(&b_nodes);
    // the graph grew; recompute so that the second leaf's nodes are covered
    let da = graph.shortest_paths(&a_nodes);
    let (pa, pb) = (leaf.polygons_by_simplex(), other.polygons_by_simplex());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
    let mut pick = |nodes: &[usize]| -> Vec<usize> {
        let n = cfg.distance_samples.min(nodes.len());
        let mut idx = sample(&mut rng, nodes.len(), n).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| nodes[i]).collect()
    };
    // sample regular points: geodesics issuing from a stratum run inside it
    let index = StratumIndex::new(&census.codim2);
    let regular = |points: &[ComplexPoint], nodes: &[usize]| -> Vec<usize> {
        points
            .iter()
            .zip(nodes)
            .filter(|(p, _)| index.containing(&p.support).is_none())
            .map(|(_, &k)| k)
            .collect()
    };
    let (a_regular, b_regular) = (regular(&leaf.points, &a_nodes), regular(&other.points, &b_nodes));
    let forward: Vec<f64> = pick(&a_regular)
        .iter()
        .map(|&k| graph.shortened_distance(&db, k, Some(&pb)))
        .collect();
    let backward: Vec<f64> = pick(&b_regular)
        .iter()
        .map(|&k| graph.shortened_distance(&da, k, Some(&pa)))
        .collect();
    let max_deviation = spread(&forward).max(spread(&backward));
    DistanceConsistency {
        pass: max_deviation <= cfg.tol_distance,
        target_seed: Some(seed),
        forward,
        backward,
        max_deviation,
        message: None,
    }
}

/// Rebuilds the product of the factors and compares it with `m`.
pub fn verify_product_with(
    m: &MetricComplex4,
    fa: &TriSurface,
    fb: &TriSurface,
    dist: Option<(&DistributionPair, &Leaf)>,
    alignment: Option<&[AlignmentEntry]>,
    cfg: &SplitConfig,
) -> ProductVerdict {
    let census = m.singular_census();
    let census_n = match product_complex(fa, fb) {
        Ok(n) => Some(n.singular_census()),
        Err(_) => None,
    };
    let census_check = match &census_n {
        Some(cn) => census_check(&census, cn, cfg.tol_census),
        None => CensusCheck {
            pass: false,
            strata: (census.codim2.len(), 0),
            codim4: (census.codim4.len(), 0),
            max_angle_error: f64::INFINITY,
        },
    };
    let volume = m.total_volume();
    let product_of_areas = fa.area() * fb.area();
    let relative_error = (volume - product_of_areas).abs() / volume.max(product_of_areas);
    let volume_check = VolumeCheck {
        pass: relative_error <= cfg.tol_volume,
        volume,
        product_of_areas,
        relative_error,
    };
    let mut graph = AmbientGraph::new(m, cfg.ambient_refinement);
    let spectra = spectra_check(&census, &graph, fa, fb, cfg);
    let leaf_distances = match dist {
        Some((d, leaf)) => {
            leaf_distance_consistency(m, d, leaf, &mut graph, &census, alignment, cfg)
        }
        None => DistanceConsistency {
            pass: false,
            target_seed: None,
            forward: vec![],
            backward: vec![],
            max_deviation: f64::INFINITY,
            message: Some("no parallel plane fields available".into()),
        },
    };
    ProductVerdict {
        pass: census_check.pass && volume_check.pass && spectra.pass && leaf_distances.pass,
        census: census_check,
        volume: volume_check,
        spectra,
        leaf_distances,
    }
}

/// Full verification of `m` against candidate factors: extracts the plane
/// fields of `m` for the leaf-distance check, then compares.
pub fn verify_product(
    m: &MetricComplex4,
    fa: &TriSurface,
    fb: &TriSurface,
    cfg: &SplitConfig,
) -> ProductVerdict {
    let prepared = super::prepare(m, cfg).ok();
    let leaf = prepared.as_ref().and_then(|p| {
        trace_leaf(
            m,
            &p.dist,
            Which::Alpha,
            SeedPoint::barycenter(0),
            &p.census.codim2,
            Some(&p.alignment),
            cfg,
        )
        .ok()
    });
    let pair = match (&prepared, &leaf) {
        (Some(p), Some(l)) => Some((&p.dist, l)),
        _ => None,
    };
    verify_product_with(
        m,
        fa,
        fb,
        pair,
        prepared.as_ref().map(|p| p.alignment.as_slice()),
        cfg,
    )
}
