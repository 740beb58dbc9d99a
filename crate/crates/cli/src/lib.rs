//! Batch front end: builds product complexes, validates and analyzes
//! complexes, and recovers or checks metric product decompositions.
//!
//! Every command renders its whole output into an [`Outcome`] which the
//! binary emits once. Exit codes: `0` success, `2` the input violates a
//! hypothesis of the splitting pipeline (negative curvature, misaligned
//! strata, a contradiction witness, a complex that is not product-like or a
//! wrong factor), `3` invalid input. Nothing is printed to standard output
//! on a nonzero exit.

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use pl4_core::forms::{extract_distributions, invariant_forms, simply_connected_heuristic, FormsError, Which};
use pl4_core::holonomy::{holonomy_generators, is_unitary_holonomy};
use pl4_core::plcomplex::{parse_complex, product_complex, write_complex, ComplexTolerances, MetricComplex4};
use pl4_core::split::{decompose, verify_product, SplitConfig, Stage, NOT_SIMPLY_CONNECTED_CAVEAT};
use pl4_core::surface2::{builtin_surface, parse_surface, write_surface, TriSurface};
use pl4_core::tensor4::{AntisymForm, Mat4, Vec4};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::{self, Write};
use std::path::{Path, PathBuf};

/// Environment variable naming a configuration file, used when `--config`
/// is absent.
pub const CONFIG_ENV: &str = "PL4_CONFIG";

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_INVALID_INPUT: i32 = 3;

/// Pipeline settings read from a TOML file. The keys are the fields of
/// [`SplitConfig`]; missing keys take their defaults, unknown keys are
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Config {
    pub split: SplitConfig,
}

impl Config {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: Config = toml::from_str(text).context("malformed configuration")?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read configuration {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in configuration {}", path.display()))
    }

    fn check(&self) -> anyhow::Result<()> {
        let bad = self.split.invalid_fields();
        if !bad.is_empty() {
            bail!("configuration values must be positive: {}", bad.join(", "));
        }
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(name = "pl4", version, about = "Flat-simplex 4-manifolds and their product splittings")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML configuration file (falls back to $PL4_CONFIG).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Seed of the sampling RNG.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Tolerance on cone angles.
    #[arg(long = "tol-angle", global = true, value_name = "X")]
    tol_angle: Option<f64>,
    /// Barycentric snapping tolerance of the leaf tracer.
    #[arg(long = "tol-snap", global = true, value_name = "X")]
    tol_snap: Option<f64>,
    /// Suppress reports on success (files are still written).
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the product complex of two surfaces (builtin names or files).
    Generate {
        factor1: String,
        factor2: String,
        out: PathBuf,
    },
    /// Check closedness, metric consistency and nonnegative curvature.
    Validate { input: PathBuf },
    /// Report singular strata, holonomy generators and invariant 2-forms.
    Analyze {
        input: PathBuf,
        /// Also print the plane projectors of every simplex chart.
        #[arg(long)]
        projectors: bool,
    },
    /// Recover the two factors; writes PREFIX_alpha.surf, PREFIX_beta.surf
    /// and PREFIX_report.json.
    Decompose { input: PathBuf, out_prefix: PathBuf },
    /// Check a complex against two candidate factors.
    Verify {
        input: PathBuf,
        factor1: String,
        factor2: String,
    },
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable, malformed or invalid input (exit 3).
    Input(anyhow::Error),
    /// The input violates a hypothesis of the pipeline (exit 2). The detail
    /// is printed after the message.
    Hypothesis { message: String, detail: String },
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INVALID_INPUT,
            CliError::Hypothesis { .. } => EXIT_HYPOTHESIS,
        }
    }

    fn hypothesis(message: impl Into<String>) -> Self {
        CliError::Hypothesis {
            message: message.into(),
            detail: String::new(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "invalid input: {e:#}"),
            CliError::Hypothesis { message, .. } => write!(f, "hypothesis violated: {message}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

/// Failures of the plane-field extraction are hypothesis violations, except
/// for a degenerate basis, which only arises from malformed input.
impl From<FormsError> for CliError {
    fn from(e: FormsError) -> Self {
        match e {
            FormsError::Degenerate(_) => CliError::Input(anyhow::anyhow!("{e}")),
            other => CliError::hypothesis(other.to_string()),
        }
    }
}

/// Exit code of a decomposition that stopped at `stage`.
pub fn stage_exit_code(stage: Option<Stage>) -> i32 {
    match stage {
        None => EXIT_SUCCESS,
        Some(Stage::Validation) => EXIT_INVALID_INPUT,
        Some(_) => EXIT_HYPOTHESIS,
    }
}

/// Rendered result of one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (program name first) and runs the command. `env_config`
/// is the value of [`CONFIG_ENV`], if set.
pub fn run<I, T>(args: I, env_config: Option<OsString>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_INVALID_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: EXIT_SUCCESS,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let quiet = cli.global.quiet;
    let result = resolve_config(&cli.global, env_config).and_then(|cfg| execute(&cli.command, &cfg));
    match result {
        Ok(stdout) => Outcome {
            code: EXIT_SUCCESS,
            stdout: if quiet { String::new() } else { stdout },
            stderr: String::new(),
        },
        Err(e) => {
            let mut stderr = format!("error: {e}\n");
            if let CliError::Hypothesis { detail, .. } = &e {
                stderr.push_str(detail);
            }
            Outcome {
                code: e.code(),
                stdout: String::new(),
                stderr,
            }
        }
    }
}

/// Defaults, then the configuration file (`--config`, else the environment
/// variable), then flags.
fn resolve_config(g: &GlobalArgs, env_config: Option<OsString>) -> Result<SplitConfig, CliError> {
    let path = g.config.clone().or_else(|| env_config.filter(|p| !p.is_empty()).map(PathBuf::from));
    let mut cfg = match path {
        Some(p) => Config::load(&p)?,
        None => Config::default(),
    };
    if let Some(seed) = g.seed {
        cfg.split.seed = seed;
    }
    if let Some(x) = g.tol_angle {
        cfg.split.tol_angle = x;
    }
    if let Some(x) = g.tol_snap {
        cfg.split.tol_snap = x;
    }
    cfg.check()?;
    Ok(cfg.split)
}

fn execute(command: &Command, cfg: &SplitConfig) -> Result<String, CliError> {
    match command {
        Command::Generate { factor1, factor2, out } => cmd_generate(factor1, factor2, out),
        Command::Validate { input } => cmd_validate(&load_complex(input, cfg)?),
        Command::Analyze { input, projectors } => cmd_analyze(&load_complex(input, cfg)?, cfg, *projectors),
        Command::Decompose { input, out_prefix } => cmd_decompose(&load_complex(input, cfg)?, out_prefix, cfg),
        Command::Verify { input, factor1, factor2 } => {
            let m = load_complex(input, cfg)?;
            cmd_verify(&m, &load_surface(factor1)?, &load_surface(factor2)?, cfg)
        }
    }
}

/// Reads a complex file; the configured cone-angle tolerance replaces the
/// one stored in the file.
pub fn load_complex(path: &Path, cfg: &SplitConfig) -> anyhow::Result<MetricComplex4> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let m = parse_complex(&text).with_context(|| format!("in {}", path.display()))?;
    let tolerances = ComplexTolerances {
        angle: cfg.tol_angle,
        length: m.tolerances.length,
    };
    Ok(m.with_tolerances(tolerances))
}

/// A surface given by file path or by builtin name.
pub fn load_surface(spec: &str) -> anyhow::Result<TriSurface> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {spec}"))?;
        return parse_surface(&text).with_context(|| format!("in {spec}"));
    }
    builtin_surface(spec).map_err(|_| anyhow::anyhow!("{spec:?} is neither a surface file nor a builtin surface name"))
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn cmd_generate(factor1: &str, factor2: &str, out: &Path) -> Result<String, CliError> {
    let p = load_surface(factor1)?;
    let q = load_surface(factor2)?;
    let m = product_complex(&p, &q).context("cannot build the product")?;
    write_file(out, &write_complex(&m))?;
    let census = m.singular_census();
    let mut s = String::new();
    writeln!(s, "wrote {}", out.display()).unwrap();
    writeln!(s, "vertices {}", m.n_vertices()).unwrap();
    writeln!(s, "simplices {}", m.n_simplices()).unwrap();
    writeln!(s, "euler_characteristic {}", m.euler_characteristic()).unwrap();
    writeln!(s, "total_volume {}", m.total_volume()).unwrap();
    writeln!(s, "codim2_strata {}", census.codim2.len()).unwrap();
    writeln!(s, "codim4_vertices {}", census.codim4.len()).unwrap();
    writeln!(s, "codim3_flags {}", census.codim3_violations.len()).unwrap();
    Ok(s)
}

pub fn cmd_validate(m: &MetricComplex4) -> Result<String, CliError> {
    let validation = m.validate();
    if !validation.is_valid() {
        return Err(CliError::Input(anyhow::anyhow!("{validation}")));
    }
    let curvature = m.check_nonneg_curvature();
    let triangle = curvature
        .worst_triangle
        .as_ref()
        .map(|t| t.join(" "))
        .unwrap_or_else(|| "-".into());
    if !curvature.nonneg {
        return Err(CliError::hypothesis(format!(
            "negative curvature: cone angle {:.9} exceeds 2π at triangle {triangle}",
            curvature.worst_angle
        )));
    }
    let mut s = String::new();
    writeln!(s, "valid").unwrap();
    writeln!(s, "vertices {}", m.n_vertices()).unwrap();
    writeln!(s, "simplices {}", m.n_simplices()).unwrap();
    writeln!(s, "nonnegative_curvature true").unwrap();
    writeln!(s, "worst_angle {:.9} at {triangle}", curvature.worst_angle).unwrap();
    Ok(s)
}

/// Nine significant digits.
fn sig(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

fn fmt_vec(v: &Vec4) -> String {
    v.iter().map(|x| sig(*x)).collect::<Vec<_>>().join(" ")
}

fn fmt_form(w: &AntisymForm) -> String {
    w.0.iter().map(|x| sig(*x)).collect::<Vec<_>>().join(" ")
}

fn write_matrix(s: &mut String, indent: &str, m: &Mat4) {
    for i in 0..4 {
        let row: Vec<String> = (0..4).map(|j| sig(m[(i, j)])).collect();
        writeln!(s, "{indent}{}", row.join(" ")).unwrap();
    }
}

pub fn cmd_analyze(m: &MetricComplex4, cfg: &SplitConfig, projectors: bool) -> Result<String, CliError> {
    let validation = m.validate();
    if !validation.is_valid() {
        return Err(CliError::Input(anyhow::anyhow!("{validation}")));
    }
    let mut s = String::new();
    let census = m.singular_census();
    writeln!(s, "[census]").unwrap();
    writeln!(s, "vertices {}", m.n_vertices()).unwrap();
    writeln!(s, "simplices {}", m.n_simplices()).unwrap();
    writeln!(s, "euler_characteristic {}", m.euler_characteristic()).unwrap();
    writeln!(s, "codim2_strata {}", census.codim2.len()).unwrap();
    for st in &census.codim2 {
        writeln!(
            s,
            "  stratum {} cone_angle {} triangles {} vertices {}",
            st.id,
            sig(st.cone_angle),
            st.triangles.len(),
            st.vertices.len()
        )
        .unwrap();
    }
    writeln!(s, "codim4_vertices {}", census.codim4.len()).unwrap();
    for c in &census.codim4 {
        let angles: Vec<String> = c.strata.iter().map(|&k| sig(census.codim2[k].cone_angle)).collect();
        writeln!(s, "  vertex {} strata {:?} angles {}", m.label(c.vertex), c.strata, angles.join(" ")).unwrap();
    }
    writeln!(s, "codim3_flags {}", census.codim3_violations.len()).unwrap();

    let rep = holonomy_generators(m);
    writeln!(s, "[holonomy]").unwrap();
    writeln!(s, "base_simplex {}", rep.base).unwrap();
    writeln!(s, "generators {}", rep.generators.len()).unwrap();
    for (k, g) in rep.generators.iter().enumerate() {
        let stratum = g.stratum.map_or_else(|| "-".to_string(), |x| x.to_string());
        writeln!(
            s,
            "  generator {k} stratum {stratum} cone_angle {} rotation_angle {}",
            sig(g.cone_angle),
            sig(g.angle)
        )
        .unwrap();
        writeln!(s, "    fixed_plane_u {}", fmt_vec(&g.fixed_plane.u)).unwrap();
        writeln!(s, "    fixed_plane_v {}", fmt_vec(&g.fixed_plane.v)).unwrap();
        writeln!(s, "    rotation").unwrap();
        write_matrix(&mut s, "      ", &g.rotation);
    }
    let unitary = is_unitary_holonomy(&rep, cfg.tol_orth);
    writeln!(s, "kahler {}", unitary.unitary).unwrap();
    if let Some(w) = &unitary.witness {
        writeln!(s, "complex_structure {}", fmt_form(w)).unwrap();
    }
    writeln!(s, "kahler_max_commutator {}", sig(unitary.max_commutator)).unwrap();

    let basis = invariant_forms(&rep, cfg.tol_orth);
    writeln!(s, "[forms]").unwrap();
    writeln!(s, "dim {}", basis.dim).unwrap();
    for w in &basis.basis {
        writeln!(s, "  form {}", fmt_form(w)).unwrap();
    }
    let heuristic = simply_connected_heuristic(m);
    writeln!(s, "simply_connected_heuristic {heuristic}").unwrap();
    if !heuristic {
        writeln!(s, "caveat {NOT_SIMPLY_CONNECTED_CAVEAT}").unwrap();
    }
    if basis.dim == 2 {
        writeln!(s, "[distributions]").unwrap();
        match extract_distributions(&basis, &rep, m, cfg.seed, cfg.tol_orth) {
            Ok(d) => {
                writeln!(s, "lambda {}", sig(d.lambda)).unwrap();
                writeln!(s, "mu {}", sig(d.mu)).unwrap();
                writeln!(s, "eigen_pair {} {}", sig(d.eigen.a), sig(d.eigen.b)).unwrap();
                writeln!(s, "base_alpha_u {}", fmt_vec(&d.base_alpha.u)).unwrap();
                writeln!(s, "base_alpha_v {}", fmt_vec(&d.base_alpha.v)).unwrap();
                writeln!(s, "base_beta_u {}", fmt_vec(&d.base_beta.u)).unwrap();
                writeln!(s, "base_beta_v {}", fmt_vec(&d.base_beta.v)).unwrap();
                if projectors {
                    for k in 0..m.n_simplices() {
                        for which in [Which::Alpha, Which::Beta] {
                            writeln!(s, "  simplex {k} {which:?} projector").unwrap();
                            write_matrix(&mut s, "    ", &d.plane(which, k).projector());
                        }
                    }
                }
            }
            Err(e) => {
                writeln!(s, "error {e}").unwrap();
                if let FormsError::ContradictionWitness { omega3, .. } = &e {
                    writeln!(s, "omega3 {}", fmt_form(omega3)).unwrap();
                }
            }
        }
    }
    Ok(s)
}

pub fn cmd_decompose(m: &MetricComplex4, out_prefix: &Path, cfg: &SplitConfig) -> Result<String, CliError> {
    let report = decompose(m, cfg);
    let json = serde_json::to_string_pretty(&report).context("cannot serialize the report")? + "\n";
    if !report.succeeded() {
        let stage = report.verdict.stage;
        let message = format!(
            "decomposition stopped at {}: {}",
            stage.map_or_else(|| "-".to_string(), |s| s.to_string()),
            report.verdict.message.as_deref().unwrap_or("")
        );
        return Err(if stage_exit_code(stage) == EXIT_INVALID_INPUT {
            CliError::Input(anyhow::anyhow!(message))
        } else {
            CliError::Hypothesis { message, detail: json }
        });
    }
    let (alpha, beta) = report.factors.as_ref().context("successful report without factors")?;
    let with_suffix = |suffix: &str| {
        let mut name = out_prefix.as_os_str().to_owned();
        name.push(suffix);
        PathBuf::from(name)
    };
    write_file(&with_suffix("_alpha.surf"), &write_surface(alpha))?;
    write_file(&with_suffix("_beta.surf"), &write_surface(beta))?;
    write_file(&with_suffix("_report.json"), &json)?;
    Ok(json)
}

pub fn cmd_verify(m: &MetricComplex4, fa: &TriSurface, fb: &TriSurface, cfg: &SplitConfig) -> Result<String, CliError> {
    let verdict = verify_product(m, fa, fb, cfg);
    let json = serde_json::to_string_pretty(&verdict).context("cannot serialize the verdict")? + "\n";
    if !verdict.pass {
        return Err(CliError::Hypothesis {
            message: "the complex is not the product of the given factors".into(),
            detail: json,
        });
    }
    Ok(json)
}
