//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so that the per-criterion lines are
//! always printed; the process exits nonzero if any criterion fails.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use pl4_cli::{run, CliError, EXIT_HYPOTHESIS};
use pl4_core::forms::{contradiction_witness, extract_distributions, invariant_forms, simply_connected_heuristic, FormsError, Which};
use pl4_core::holonomy::{holonomy_generators, is_unitary_holonomy};
use pl4_core::plcomplex::{flat_torus4, misaligned_cover, negative_join, product_complex, write_complex, MetricComplex4};
use pl4_core::split::{align_strata, decompose, trace_leaf, SeedPoint, SplitConfig, Status};
use pl4_core::surface2::{builtin_surface, surfaces_isometric, TriSurface};
use pl4_core::tensor4::{
    classify_kind, combine_distinct, commutant, complex_block_matrix, eigen_pairs, random_rotation, AntisymForm, Kind, Mat4,
    SU2Form, Tensor4Error, EigenPair,
};
use pl4_core::forms::EIGEN_SEPARATION;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

// ---- pinned tolerances and budgets ----
/// Matrix identities of the linear-algebra suites.
const TOL_ALGEBRA: f64 = 1e-9;
/// Cone angles of the product fixtures.
const TOL_CONE_ANGLE: f64 = 1e-7;
/// Total leaf defect and leaf cone angles.
const TOL_DEFECT: f64 = 1e-6;
/// Relative volume conservation of a round trip.
const TOL_VOLUME: f64 = 1e-6;
/// Relative distance-consistency deviations of a round trip.
const TOL_DISTANCE: f64 = 3e-2;
/// Commutators of the contradiction witness.
const TOL_WITNESS: f64 = 1e-9;
const BUDGET_KIND: Duration = Duration::from_secs(1);
const BUDGET_EIGEN: Duration = Duration::from_secs(1);
const BUDGET_SU2: Duration = Duration::from_secs(2);
const BUDGET_FORMS: Duration = Duration::from_secs(5);
const BUDGET_ROUND_TRIPS: Duration = Duration::from_secs(300);

const FIXTURES: [&str; 4] = ["tetrahedron", "cube", "octahedron", "box(1,1,2)"];

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn surface(name: &str) -> TriSurface {
    builtin_surface(name).expect("builtin surface")
}

fn product(p: &str, q: &str) -> MetricComplex4 {
    product_complex(&surface(p), &surface(q)).expect("product complex")
}

fn pfaffian(m: &Mat4) -> f64 {
    m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)]
}

fn unit3(rng: &mut ChaCha8Rng) -> (f64, f64, f64) {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.1 && n <= 1.0 {
            return (v[0] / n, v[1] / n, v[2] / n);
        }
    }
}

fn nonzero(rng: &mut ChaCha8Rng) -> f64 {
    let x: f64 = rng.gen_range(0.1..3.0);
    if rng.gen_bool(0.5) {
        x
    } else {
        -x
    }
}

fn commutator(a: &Mat4, b: &Mat4) -> f64 {
    (a * b - b * a).amax()
}

fn kind_classification() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let start = Instant::now();
    let j = AntisymForm::j().to_matrix();
    let k = AntisymForm::second_kind(1.0, 0.0, 0.0).to_matrix();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let g = random_rotation(&mut rng);
        let (base, expected) = if i % 2 == 0 { (j, Kind::FirstKind) } else { (k, Kind::SecondKind) };
        let a = g * base * g.transpose();
        let c = classify_kind(&a, TOL_ALGEBRA);
        ensure!(c.kind == expected, "sample {i}: {:?}, expected {expected:?}", c.kind);
        let pf = pfaffian(&a);
        let pf_kind = if pf > 0.0 { Kind::FirstKind } else { Kind::SecondKind };
        ensure!(pf_kind == c.kind && (pf.abs() - 1.0).abs() <= TOL_ALGEBRA, "sample {i}: Pfaffian {pf}");
        let norm = c.a * c.a + c.b * c.b + c.c * c.c;
        worst = worst.max((norm - 1.0).abs());
    }
    let elapsed = start.elapsed();
    ensure!(worst <= TOL_ALGEBRA, "a²+b²+c² deviates by {worst:e}");
    ensure!(elapsed < BUDGET_KIND, "took {elapsed:?}");
    Ok(format!("1000 conjugates classified, max |a²+b²+c²−1| = {worst:.1e}, {elapsed:.2?}"))
}

fn eigen_pairs_of_mixed_forms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let (a1, b1, c1) = unit3(&mut rng);
        let (a2, b2, c2) = unit3(&mut rng);
        let (lambda, mu) = (nonzero(&mut rng), nonzero(&mut rng));
        let w = lambda * AntisymForm::first_kind(a1, b1, c1) + mu * AntisymForm::second_kind(a2, b2, c2);
        let got = eigen_pairs(&w);
        let (p, q) = ((lambda + mu).abs(), (lambda - mu).abs());
        let expected = EigenPair { a: p.max(q), b: p.min(q) };
        let err = (got.a - expected.a).abs().max((got.b - expected.b).abs());
        // independent oracle: the spectrum of ωᵀω is {a², a², b², b²}
        let wm = w.to_matrix();
        let mut ev: Vec<f64> = SymmetricEigen::new(wm.transpose() * wm).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        let scale = expected.a * expected.a;
        let err_sq = (ev[0] - got.a * got.a).abs().max((ev[3] - got.b * got.b).abs()) / scale.max(1.0);
        worst = worst.max(err).max(err_sq);
        ensure!(err <= TOL_ALGEBRA && err_sq <= TOL_ALGEBRA, "sample {i}: got {got:?}, expected {expected:?}");
        ensure!(got.a - got.b > TOL_ALGEBRA, "sample {i}: eigenvalues not distinct");
    }
    for i in 0..100 {
        let (a1, b1, c1) = unit3(&mut rng);
        let (a2, b2, c2) = unit3(&mut rng);
        let r = combine_distinct(
            &AntisymForm::first_kind(a1, b1, c1),
            &AntisymForm::first_kind(a2, b2, c2),
            EIGEN_SEPARATION,
            i,
        );
        ensure!(r == Err(Tensor4Error::NoDistinctCombo), "first-kind pair {i}: {r:?}");
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < BUDGET_EIGEN, "took {elapsed:?}");
    Ok(format!("1000 mixed combinations within {worst:.1e}, 100 same-kind pairs degenerate, {elapsed:.2?}"))
}

fn random_su2(rng: &mut ChaCha8Rng) -> SU2Form {
    let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    SU2Form::new(Complex64::new(v[0] / n, v[1] / n), Complex64::new(v[2] / n, v[3] / n))
}

fn random_first_kind_off_j(rng: &mut ChaCha8Rng) -> Mat4 {
    loop {
        let (a, b, c) = unit3(rng);
        if a.abs() < 0.99 {
            return AntisymForm::first_kind(a, b, c).to_matrix();
        }
    }
}

fn su2_commutant() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let start = Instant::now();
    let j = AntisymForm::j().to_matrix();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let s = random_su2(&mut rng);
        ensure!((s.norm_sqr() - 1.0).abs() <= TOL_ALGEBRA, "sample {i} not unit");
        let a = s.to_matrix();
        worst = worst.max(commutator(&a, &j));
        for _ in 0..20 {
            worst = worst.max(commutator(&a, &random_first_kind_off_j(&mut rng)));
        }
    }
    ensure!(worst <= TOL_ALGEBRA, "SU(2) commutator {worst:e}");
    let mut weakest_failure = f64::INFINITY;
    for i in 0..200 {
        // e^{iθ}·SU(2) with e^{2iθ} ≠ 1 lies in U(2) but not in SU(2)
        let theta: f64 = rng.gen_range(0.1..PI - 0.1);
        let phase = Complex64::from_polar(1.0, theta);
        let zero = Complex64::new(0.0, 0.0);
        let u = complex_block_matrix([phase, zero, zero, phase]) * random_su2(&mut rng).to_matrix();
        ensure!(commutator(&u, &j) <= TOL_ALGEBRA, "U(2) sample {i} does not preserve J");
        let fail = (0..20)
            .map(|_| commutator(&u, &random_first_kind_off_j(&mut rng)))
            .fold(0.0, f64::max);
        ensure!(fail > TOL_ALGEBRA, "U(2) sample {i} commutes with every sampled first-kind form");
        weakest_failure = weakest_failure.min(fail);
    }
    let c = AntisymForm::first_kind(0.0, 1.0, 0.0).to_matrix();
    let dim = commutant(&[j, c], TOL_ALGEBRA).dim;
    ensure!(dim == 4, "commutant of {{J, C}} has dimension {dim}");
    let elapsed = start.elapsed();
    ensure!(elapsed < BUDGET_SU2, "took {elapsed:?}");
    Ok(format!(
        "SU(2) commutators ≤ {worst:.1e}, U(2)∖SU(2) failures ≥ {weakest_failure:.2e}, commutant dim 4, {elapsed:.2?}"
    ))
}

fn angles_in(m: &MetricComplex4, allowed: &[f64]) -> Result<usize, String> {
    let angles = m.cone_angles();
    for (t, a) in &angles {
        ensure!(
            allowed.iter().any(|x| (a - x).abs() <= TOL_CONE_ANGLE),
            "triangle {t:?} has cone angle {a}"
        );
    }
    Ok(angles.len())
}

fn write_temp_complex(dir: &Path, name: &str, m: &MetricComplex4) -> String {
    let path = dir.join(name);
    std::fs::write(&path, write_complex(m)).expect("write complex");
    path.to_string_lossy().into_owned()
}

fn curvature_gate() -> Outcome {
    let cc = product("cube", "cube");
    let tt = product("tetrahedron", "tetrahedron");
    let n_cc = angles_in(&cc, &[TAU, 1.5 * PI])?;
    let n_tt = angles_in(&tt, &[TAU, PI])?;
    ensure!(cc.check_nonneg_curvature().nonneg, "cube×cube rejected");
    ensure!(tt.check_nonneg_curvature().nonneg, "tetra×tetra rejected");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = write_temp_complex(dir.path(), "join.cx", &negative_join());
    let out = run(["pl4", "validate", file.as_str()], None);
    // five regular simplices around a triangle: 5·arccos(1/4)
    let expected = format!("{:.9}", 5.0 * 0.25f64.acos());
    ensure!(out.code == EXIT_HYPOTHESIS, "validate exited {} ({})", out.code, out.stderr);
    ensure!(out.stdout.is_empty(), "output on failure");
    ensure!(out.stderr.contains(&expected), "worst angle {expected} not reported: {}", out.stderr);
    Ok(format!("{n_cc} + {n_tt} triangles checked, >2π fixture exits 2 (angle {expected})"))
}

fn invariant_dimensions() -> Outcome {
    let mut parts = Vec::new();
    for (p, q) in [("cube", "cube"), ("tetrahedron", "tetrahedron"), ("tetrahedron", "box(1,1,2)")] {
        let start = Instant::now();
        let m = product(p, q);
        let dim = invariant_forms(&holonomy_generators(&m), TOL_ALGEBRA).dim;
        let elapsed = start.elapsed();
        ensure!(dim == 2, "{p}×{q}: dimension {dim}");
        ensure!(simply_connected_heuristic(&m), "{p}×{q} flagged");
        ensure!(elapsed < BUDGET_FORMS, "{p}×{q} took {elapsed:?}");
        parts.push(format!("{p}×{q} 2 ({elapsed:.2?})"));
    }
    let start = Instant::now();
    let torus = flat_torus4();
    let dim = invariant_forms(&holonomy_generators(&torus), TOL_ALGEBRA).dim;
    ensure!(dim == 6, "flat torus: dimension {dim}");
    ensure!(!simply_connected_heuristic(&torus), "flat torus caveat flag not set");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = write_temp_complex(dir.path(), "torus.cx", &torus);
    let out = run(["pl4", "analyze", file.as_str()], None);
    ensure!(out.code == 0, "analyze exited {}: {}", out.code, out.stderr);
    ensure!(out.stdout.contains("\ndim 6\n") && out.stdout.contains("caveat "), "caveat not printed");
    let elapsed = start.elapsed();
    ensure!(elapsed < BUDGET_FORMS, "flat torus took {elapsed:?}");
    parts.push(format!("torus 6 + caveat ({elapsed:.2?})"));
    Ok(parts.join(", "))
}

fn unitary_holonomy() -> Outcome {
    let mut n = 0;
    for i in 0..FIXTURES.len() {
        for j in i..FIXTURES.len() {
            let m = product(FIXTURES[i], FIXTURES[j]);
            let check = is_unitary_holonomy(&holonomy_generators(&m), TOL_ALGEBRA);
            ensure!(check.unitary, "{}×{}: max commutator {:e}", FIXTURES[i], FIXTURES[j], check.max_commutator);
            n += 1;
        }
    }
    Ok(format!("{n} products have holonomy in U(2)"))
}

fn census_counts(m: &MetricComplex4, strata: usize, vertices: usize, angle: f64) -> Result<(), String> {
    let c = m.singular_census();
    ensure!(c.codim2.len() == strata, "{} strata, expected {strata}", c.codim2.len());
    for s in &c.codim2 {
        ensure!((s.cone_angle - angle).abs() <= TOL_CONE_ANGLE, "stratum {} angle {}", s.id, s.cone_angle);
    }
    ensure!(c.codim4.len() == vertices, "{} codim-4 vertices, expected {vertices}", c.codim4.len());
    for v in &c.codim4 {
        ensure!(v.strata.len() == 2, "vertex {} meets {} strata", v.vertex, v.strata.len());
        for &s in &v.strata {
            ensure!((c.codim2[s].cone_angle - angle).abs() <= TOL_CONE_ANGLE, "vertex {} angle pair", v.vertex);
        }
    }
    ensure!(c.codim3_violations.is_empty(), "{} codim-3 flags", c.codim3_violations.len());
    Ok(())
}

fn census() -> Outcome {
    census_counts(&product("cube", "cube"), 16, 64, 1.5 * PI)?;
    census_counts(&product("tetrahedron", "tetrahedron"), 8, 16, PI)?;
    Ok("cube×cube 16 strata (3π/2) / 64 vertices; tetra×tetra 8 strata (π) / 16 vertices; no codim-3 flags".into())
}

/// Total angles of the singular vertices, sorted.
fn cone_angles(s: &TriSurface) -> Vec<f64> {
    let mut a: Vec<f64> = s.singular_vertices(TOL_DEFECT).into_iter().map(|v| s.vertex_total_angle(v)).collect();
    a.sort_by(f64::total_cmp);
    a
}

fn same_angles(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TOL_DEFECT)
}

fn leaf_suite() -> Outcome {
    let cfg = SplitConfig::default();
    let mut traced = 0;
    for (p, q) in [
        ("tetrahedron", "tetrahedron"),
        ("cube", "cube"),
        ("tetrahedron", "box(1,1,2)"),
        ("octahedron", "box(1,1,2)"),
    ] {
        let m = product(p, q);
        let rep = holonomy_generators(&m);
        let basis = invariant_forms(&rep, cfg.tol_orth);
        let dist = extract_distributions(&basis, &rep, &m, cfg.seed, cfg.tol_orth).map_err(|e| format!("{p}×{q}: {e}"))?;
        let census = m.singular_census();
        let alignment = align_strata(&m, &dist, &census, cfg.tol_align);
        let (ap, aq) = (cone_angles(&surface(p)), cone_angles(&surface(q)));
        let n = m.n_simplices();
        let seeds: Vec<SeedPoint> = (0..5)
            .map(|k| SeedPoint { simplex: k * n / 5 + k, bary: [0.3, 0.1, 0.25, 0.15, 0.2] })
            .collect();
        let mut matched = Vec::new();
        for which in [Which::Alpha, Which::Beta] {
            let mut leaves = Vec::new();
            for seed in &seeds {
                let leaf = trace_leaf(&m, &dist, which, *seed, &census.codim2, Some(&alignment), &cfg)
                    .map_err(|e| format!("{p}×{q} {which:?} seed {}: {e}", seed.simplex))?;
                let total = leaf.surface.defect_census().total;
                ensure!((total - 2.0 * TAU).abs() <= TOL_DEFECT, "{p}×{q} {which:?}: total defect {total}");
                let angles = cone_angles(&leaf.surface);
                let factor = if same_angles(&angles, &ap) {
                    0
                } else if same_angles(&angles, &aq) {
                    1
                } else {
                    return Err(format!("{p}×{q} {which:?}: cone angles {angles:?} match neither factor"));
                };
                leaves.push(leaf.surface);
                traced += 1;
                if seed == &seeds[0] {
                    matched.push(factor);
                }
            }
            for a in 0..leaves.len() {
                for b in a + 1..leaves.len() {
                    ensure!(surfaces_isometric(&leaves[a], &leaves[b]).is_some(), "{p}×{q} {which:?}: seeds {a}, {b} differ");
                }
            }
        }
        ensure!(same_angles(&ap, &aq) || matched[0] != matched[1], "{p}×{q}: both fields give the same factor");
    }
    Ok(format!("{traced} leaves closed with defect 4π, factor cone angles and pairwise isometry over 5 seeds"))
}

fn round_trips() -> Outcome {
    let cfg = SplitConfig::default();
    let start = Instant::now();
    let mut worst_volume: f64 = 0.0;
    let mut worst_distance: f64 = 0.0;
    let mut n = 0;
    for i in 0..FIXTURES.len() {
        for j in i..FIXTURES.len() {
            let (p, q) = (surface(FIXTURES[i]), surface(FIXTURES[j]));
            let m = product_complex(&p, &q).map_err(|e| e.to_string())?;
            let report = decompose(&m, &cfg);
            let name = format!("{}×{}", FIXTURES[i], FIXTURES[j]);
            ensure!(report.verdict.status == Status::Success, "{name}: {:?}", report.verdict);
            let (fa, fb) = report.factors.as_ref().ok_or(format!("{name}: no factors"))?;
            let direct = surfaces_isometric(fa, &p).is_some() && surfaces_isometric(fb, &q).is_some();
            let swapped = surfaces_isometric(fa, &q).is_some() && surfaces_isometric(fb, &p).is_some();
            ensure!(direct || swapped, "{name}: factors not isometric to the inputs");
            let volume = m.total_volume();
            let rel = (volume - fa.area() * fb.area()).abs() / volume;
            let oracle = (volume - p.area() * q.area()).abs() / volume;
            worst_volume = worst_volume.max(rel).max(oracle);
            ensure!(rel <= TOL_VOLUME && oracle <= TOL_VOLUME, "{name}: volume error {rel:e}");
            let v = report.verification.as_ref().ok_or(format!("{name}: no verification"))?;
            let dev = v.spectra.max_deviation.max(v.leaf_distances.max_deviation);
            worst_distance = worst_distance.max(dev);
            ensure!(dev <= TOL_DISTANCE, "{name}: distance deviation {dev}");
            n += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < BUDGET_ROUND_TRIPS, "took {elapsed:?}");
    Ok(format!(
        "{n} pairs recovered, volume error ≤ {worst_volume:.1e}, distance deviation ≤ {worst_distance:.2e}, {elapsed:.1?}"
    ))
}

fn negative_controls() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let file = write_temp_complex(dir.path(), "misaligned.cx", &misaligned_cover());
    let prefix = dir.path().join("out");
    let out = run(["pl4", "decompose", file.as_str(), prefix.to_str().unwrap()], None);
    ensure!(out.code == EXIT_HYPOTHESIS, "misaligned fixture exited {}: {}", out.code, out.stderr);
    ensure!(out.stdout.is_empty(), "output on failure");
    ensure!(out.stderr.contains("stopped at align_strata"), "wrong stage: {}", out.stderr.lines().next().unwrap_or(""));

    // holonomy in SU(2) preserving the two first-kind forms J and C
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let gens: Vec<Mat4> = (0..6).map(|_| random_su2(&mut rng).to_matrix()).collect();
    let j = AntisymForm::j();
    let c = AntisymForm::first_kind(0.0, 1.0, 0.0);
    let err = contradiction_witness(&j, &c, &gens, TOL_WITNESS);
    let FormsError::ContradictionWitness { omega3, max_commutator, .. } = &err else {
        return Err(format!("no witness: {err}"));
    };
    let w = omega3.to_matrix();
    let independent = gens.iter().map(|g| commutator(g, &w)).fold(0.0, f64::max);
    ensure!(*max_commutator <= TOL_WITNESS && independent <= TOL_WITNESS, "Ω₃ commutator {independent:e}");
    ensure!(classify_kind(&w, TOL_WITNESS).kind == Kind::FirstKind, "Ω₃ is not first kind");
    ensure!(omega3.dot(&j).abs() <= TOL_WITNESS && omega3.dot(&c).abs() <= TOL_WITNESS, "Ω₃ not independent");
    let code = CliError::from(err.clone()).code();
    ensure!(code == EXIT_HYPOTHESIS, "witness maps to exit {code}");
    Ok(format!("misaligned fixture exits 2 at align_strata; witness Ω₃ commutes within {independent:.1e}, exit 2"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("orthogonal antisymmetric matrices split into two kinds", kind_classification),
        ("mixed-kind combinations have distinct eigenvalues", eigen_pairs_of_mixed_forms),
        ("SU(2) is the commutant of two first-kind forms", su2_commutant),
        ("curvature gate", curvature_gate),
        ("invariant 2-form dimension", invariant_dimensions),
        ("holonomy lies in U(2)", unitary_holonomy),
        ("singular census of product fixtures", census),
        ("leaf suite", leaf_suite),
        ("round trips over the fixture pairs", round_trips),
        ("negative controls", negative_controls),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name} [{secs:.1}s]: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} [{secs:.1}s]: {detail}", k + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
