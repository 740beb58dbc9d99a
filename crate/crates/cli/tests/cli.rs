use pl4_cli::{run, Config, Outcome, EXIT_HYPOTHESIS, EXIT_INVALID_INPUT, EXIT_SUCCESS};
use pl4_core::plcomplex::{flat_torus4, misaligned_cover, negative_join, write_complex, MetricComplex4, Simplex};
use pl4_core::split::SplitConfig;
use pl4_core::surface2::{builtin_surface, parse_surface, surfaces_isometric};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::Command;
use tempfile::TempDir;

fn pl4(args: &[&str]) -> Outcome {
    pl4_env(args, None)
}

fn pl4_env(args: &[&str], env: Option<&Path>) -> Outcome {
    let argv = std::iter::once("pl4").chain(args.iter().copied());
    run(argv, env.map(|p| OsString::from(p.as_os_str())))
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn generate(dir: &TempDir, p: &str, q: &str) -> PathBuf {
    let out = dir.path().join(format!("{}_{}.cx", p.replace(['(', ')', ','], ""), q.replace(['(', ')', ','], "")));
    let r = pl4(&["generate", p, q, path_str(&out)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    out
}

fn write_fixture(dir: &TempDir, name: &str, m: &MetricComplex4) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, write_complex(m)).unwrap();
    path
}

fn field(stdout: &str, key: &str) -> String {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(' ')))
        .unwrap_or_else(|| panic!("no {key} in output:\n{stdout}"))
        .to_string()
}

#[test]
fn generate_reports_simplex_counts() {
    let dir = TempDir::new().unwrap();
    for (p, q, n) in [("tetrahedron", "tetrahedron", "96"), ("cube", "cube", "864")] {
        let out = dir.path().join("m.cx");
        let r = pl4(&["generate", p, q, path_str(&out)]);
        assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
        assert_eq!(field(&r.stdout, "simplices"), n);
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("complex4 "));
    }
}

#[test]
fn generate_rejects_a_missing_factor() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("m.cx");
    let r = pl4(&["generate", "cube", "missing.surf", path_str(&out)]);
    assert_eq!(r.code, EXIT_INVALID_INPUT);
    assert!(r.stdout.is_empty());
    assert!(!out.exists());
}

#[test]
fn validate_accepts_a_product() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "cube", "tetrahedron");
    let r = pl4(&["validate", path_str(&m)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    assert!(r.stdout.starts_with("valid\n"));
}

#[test]
fn validate_rejects_a_boundary_face() {
    let dir = TempDir::new().unwrap();
    let single = MetricComplex4::new(
        (0..5).map(|i| format!("p{i}")).collect(),
        vec![Simplex {
            vertices: [0, 1, 2, 3, 4],
            lengths: [1.0; 10],
        }],
    )
    .unwrap();
    let file = write_fixture(&dir, "open.cx", &single);
    let r = pl4(&["validate", path_str(&file)]);
    assert_eq!(r.code, EXIT_INVALID_INPUT);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("boundary face"), "{}", r.stderr);
}

#[test]
fn validate_rejects_negative_curvature_with_the_worst_angle() {
    let dir = TempDir::new().unwrap();
    let file = write_fixture(&dir, "join.cx", &negative_join());
    let r = pl4(&["validate", path_str(&file)]);
    assert_eq!(r.code, EXIT_HYPOTHESIS);
    assert!(r.stdout.is_empty());
    let expected = format!("{:.9}", 5.0 * 0.25f64.acos());
    assert!(r.stderr.contains(&expected), "{}", r.stderr);
}

#[test]
fn analyze_cube_cube_is_kahler_with_two_forms() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "cube", "cube");
    let r = pl4(&["analyze", path_str(&m)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    assert_eq!(field(&r.stdout, "dim"), "2");
    assert_eq!(field(&r.stdout, "kahler"), "true");
    assert!(!r.stdout.contains("caveat"));
    assert!(r.stdout.contains("eigen_pair "));
}

#[test]
fn analyze_flat_torus_prints_the_caveat() {
    let dir = TempDir::new().unwrap();
    let file = write_fixture(&dir, "torus.cx", &flat_torus4());
    let r = pl4(&["analyze", path_str(&file)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    assert_eq!(field(&r.stdout, "dim"), "6");
    assert!(r.stdout.contains("\ncaveat "));
}

#[test]
fn analyze_tetra_tetra_generators_rotate_by_pi() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "tetrahedron");
    let r = pl4(&["analyze", path_str(&m)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    let angles: Vec<f64> = r
        .stdout
        .lines()
        .filter_map(|l| l.split("rotation_angle ").nth(1))
        .map(|x| x.trim().parse().unwrap())
        .collect();
    assert_eq!(angles.len(), 8);
    for a in angles {
        assert!((a - std::f64::consts::PI).abs() < 1e-8, "{a}");
    }
    // matrices are printed with nine significant digits
    assert!(r.stdout.contains("3.14159265e0"));
}

#[test]
fn analyze_projectors_are_flag_gated() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "tetrahedron");
    let plain = pl4(&["analyze", path_str(&m)]);
    let full = pl4(&["analyze", "--projectors", path_str(&m)]);
    assert!(!plain.stdout.contains("projector"));
    assert_eq!(full.stdout.matches("Alpha projector").count(), 96);
}

#[test]
fn decompose_cube_cube_writes_two_cubes() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "cube", "cube");
    let prefix = dir.path().join("cc");
    let r = pl4(&["decompose", path_str(&m), path_str(&prefix)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    let cube = builtin_surface("cube").unwrap();
    for side in ["alpha", "beta"] {
        let text = std::fs::read_to_string(dir.path().join(format!("cc_{side}.surf"))).unwrap();
        let s = parse_surface(&text).unwrap();
        assert!(surfaces_isometric(&s, &cube).is_some(), "{side}");
    }
    let report = std::fs::read_to_string(dir.path().join("cc_report.json")).unwrap();
    assert_eq!(report, r.stdout);
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["verdict"]["status"], "Success");
}

#[test]
fn decompose_tetra_box_recovers_both_factors() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "box(1,1,2)");
    let prefix = dir.path().join("tb");
    let r = pl4(&["decompose", path_str(&m), path_str(&prefix)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
    let read = |side: &str| {
        parse_surface(&std::fs::read_to_string(dir.path().join(format!("tb_{side}.surf"))).unwrap()).unwrap()
    };
    let (a, b) = (read("alpha"), read("beta"));
    let (t, x) = (builtin_surface("tetrahedron").unwrap(), builtin_surface("box(1,1,2)").unwrap());
    let direct = surfaces_isometric(&a, &t).is_some() && surfaces_isometric(&b, &x).is_some();
    let swapped = surfaces_isometric(&a, &x).is_some() && surfaces_isometric(&b, &t).is_some();
    assert!(direct || swapped);
}

#[test]
fn decompose_misaligned_fixture_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let file = write_fixture(&dir, "mis.cx", &misaligned_cover());
    let prefix = dir.path().join("mis");
    let r = pl4(&["decompose", path_str(&file), path_str(&prefix)]);
    assert_eq!(r.code, EXIT_HYPOTHESIS);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("align_strata"));
    assert!(!dir.path().join("mis_alpha.surf").exists());
}

#[test]
fn verify_matching_wrong_and_swapped_factors() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "cube", "tetrahedron");
    let ok = pl4(&["verify", path_str(&m), "cube", "tetrahedron"]);
    assert_eq!(ok.code, EXIT_SUCCESS, "{}", ok.stderr);
    let swapped = pl4(&["verify", path_str(&m), "tetrahedron", "cube"]);
    assert_eq!(swapped.code, EXIT_SUCCESS, "{}", swapped.stderr);
    let wrong = pl4(&["verify", path_str(&m), "cube", "octahedron"]);
    assert_eq!(wrong.code, EXIT_HYPOTHESIS);
    assert!(wrong.stdout.is_empty());
}

#[test]
fn verify_accepts_factor_files() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "tetrahedron");
    let prefix = dir.path().join("tt");
    assert_eq!(pl4(&["decompose", path_str(&m), path_str(&prefix)]).code, EXIT_SUCCESS);
    let a = dir.path().join("tt_alpha.surf");
    let b = dir.path().join("tt_beta.surf");
    let r = pl4(&["verify", path_str(&m), path_str(&a), path_str(&b)]);
    assert_eq!(r.code, EXIT_SUCCESS, "{}", r.stderr);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "cube");
    let run_once = |name: &str| {
        let prefix = dir.path().join(name);
        let r = pl4(&["decompose", path_str(&m), path_str(&prefix)]);
        assert_eq!(r.code, EXIT_SUCCESS);
        let alpha = std::fs::read(dir.path().join(format!("{name}_alpha.surf"))).unwrap();
        (r.stdout, alpha)
    };
    assert_eq!(run_once("a"), run_once("b"));
    let analyze = |_: ()| pl4(&["analyze", path_str(&m)]).stdout;
    assert_eq!(analyze(()), analyze(()));
}

#[test]
fn quiet_suppresses_reports_but_writes_files() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("q.cx");
    let r = pl4(&["--quiet", "generate", "tetrahedron", "tetrahedron", path_str(&out)]);
    assert_eq!(r.code, EXIT_SUCCESS);
    assert!(r.stdout.is_empty());
    assert!(out.exists());
}

#[test]
fn config_file_env_fallback_and_flag_precedence() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "tetrahedron");
    let strict = dir.path().join("strict.toml");
    // a cone-angle tolerance this large folds the π strata into "flat"
    std::fs::write(&strict, "tol_angle = 4.0\n").unwrap();
    let codim2 = |r: &Outcome| field(&r.stdout, "codim2_strata");
    assert_eq!(codim2(&pl4(&["analyze", path_str(&m)])), "8");
    assert_eq!(codim2(&pl4(&["analyze", "--config", path_str(&strict), path_str(&m)])), "0");
    assert_eq!(codim2(&pl4_env(&["analyze", path_str(&m)], Some(&strict))), "0");
    // flags override the file
    assert_eq!(codim2(&pl4_env(&["analyze", "--tol-angle", "1e-7", path_str(&m)], Some(&strict))), "8");
}

#[test]
fn invalid_configurations_exit_3() {
    let dir = TempDir::new().unwrap();
    let m = generate(&dir, "tetrahedron", "tetrahedron");
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "tol_snap = -1.0\n").unwrap();
    assert_eq!(pl4(&["analyze", "--config", path_str(&bad), path_str(&m)]).code, EXIT_INVALID_INPUT);
    std::fs::write(&bad, "no_such_key = 1\n").unwrap();
    assert_eq!(pl4(&["analyze", "--config", path_str(&bad), path_str(&m)]).code, EXIT_INVALID_INPUT);
    assert_eq!(pl4(&["analyze", "--tol-angle", "0", path_str(&m)]).code, EXIT_INVALID_INPUT);
    let missing = dir.path().join("absent.toml");
    assert_eq!(pl4(&["analyze", "--config", path_str(&missing), path_str(&m)]).code, EXIT_INVALID_INPUT);
    assert_eq!(pl4(&["no-such-command"]).code, EXIT_INVALID_INPUT);
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = Config {
        split: SplitConfig {
            seed: 9,
            tol_distance: 0.05,
            ..SplitConfig::default()
        },
    };
    let text = toml::to_string(&cfg).unwrap();
    assert_eq!(Config::from_toml(&text).unwrap(), cfg);
    assert_eq!(Config::from_toml("").unwrap(), Config::default());
}

#[test]
fn binary_reports_exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.cx");
    let bin = env!("CARGO_BIN_EXE_pl4");
    let ok = Command::new(bin)
        .args(["generate", "tetrahedron", "tetrahedron", path_str(&out)])
        .env_remove("PL4_CONFIG")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_SUCCESS));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("simplices 96"));
    let bad = Command::new(bin)
        .args(["generate", "cube", "missing.surf", path_str(&out)])
        .env_remove("PL4_CONFIG")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_INVALID_INPUT));
    assert!(bad.stdout.is_empty());
}
