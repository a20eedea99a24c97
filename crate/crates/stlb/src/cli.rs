//! Argument parsing and the subcommand drivers.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;
use stlb_core::basis::{self, CoincidenceFamily, GapTable, PrecisionMode};
use stlb_core::boundary::{classify, match_canonical, FamilyKind};
use stlb_core::fundsol::{self, Channel};
use stlb_core::spectrum;
use stlb_core::{BoundaryMatrix, Complex64, Potential, SolverConfig, Spectrum};

use crate::input;
use crate::output::{self, cplx, num, opt, Format};
use crate::parallel;
use crate::trend::{decile_trend, Trend};
use crate::CliError;

pub const PRECISION_ENV: &str = "STLB_PRECISION";

#[derive(Debug, Parser)]
#[command(
    name = "stlb",
    version,
    about = "Spectra and eigenfunction bases of Sturm-Liouville problems with complex two-point boundary conditions"
)]
pub struct Cli {
    /// JSON run configuration; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: one per core). Output does not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct PotentialArgs {
    /// Potential file (JSON with `terms` and/or `samples`).
    #[arg(long, value_name = "FILE", group = "q")]
    pub potential: Option<PathBuf>,
    /// Mathieu potential `2 pi^2 a cos(2 pi x)`.
    #[arg(long, value_name = "A", group = "q", allow_hyphen_values = true)]
    pub mathieu: Option<f64>,
    /// Two-term potential with parameters `alpha,t`.
    #[arg(long, value_name = "ALPHA,T", group = "q", allow_hyphen_values = true)]
    pub two_term: Option<String>,
    /// Zero potential.
    #[arg(long, group = "q")]
    pub zero: bool,
}

#[derive(Debug, Args, Default)]
pub struct OutArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub out: Option<Format>,
    /// Output file (default: stdout). Written only on success.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minors, regularity flags and canonical family of a boundary matrix.
    Classify {
        /// Preset (`periodic`, `antiperiodic`, `theorem1:b0=Z[,case2]`,
        /// `type-star:a|b|c|d[,d0=Z|,b1=Z][,case2]`) or JSON file.
        #[arg(long)]
        bc: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Fundamental system at `x = 1` and Wronskian drift.
    Fundsol {
        #[command(flatten)]
        q: PotentialArgs,
        /// Spectral parameter, e.g. `10`, `50+0.5i`, `3,1`. Repeatable.
        #[arg(long, required = true, allow_hyphen_values = true)]
        mu: Vec<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Eigenvalues up to cluster `nmax`, certified by winding counts.
    Spectrum {
        #[command(flatten)]
        q: PotentialArgs,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Riesz-basis verdict for the root functions.
    BasisCheck {
        #[command(flatten)]
        q: PotentialArgs,
        #[arg(long)]
        bc: Option<String>,
        #[arg(long)]
        nmax: Option<usize>,
        /// Quadrature nodes per half-period in the kernel norms.
        #[arg(long, default_value_t = 8)]
        grid_density: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Periodic/antiperiodic spectral gaps of a real potential.
    Gaps {
        #[command(flatten)]
        q: PotentialArgs,
        #[arg(long)]
        nmax: Option<usize>,
        /// `double` or `extended`; overrides the environment and the config.
        #[arg(long)]
        precision: Option<String>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compares a symmetric-coincidence family with its reference spectrum.
    Coincide {
        #[command(flatten)]
        q: PotentialArgs,
        /// Family 1..4.
        #[arg(long)]
        family: u8,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        nmax: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Residual tables along `mu = 2 pi k` for plotting.
    Asymptotics {
        #[command(flatten)]
        q: PotentialArgs,
        /// Boundary matrices for the reduction residual (repeatable;
        /// default periodic and antiperiodic).
        #[arg(long)]
        bc: Vec<String>,
        #[arg(long, default_value_t = 10)]
        kmin: usize,
        #[arg(long, default_value_t = 50)]
        kmax: usize,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Contents of `--config`. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub solver: SolverConfig,
    /// Inline potential object or a path to a potential file.
    pub potential: Option<serde_json::Value>,
    /// Preset string, path, or inline `{"rows": ...}` object.
    pub bc: Option<serde_json::Value>,
    pub nmax: Option<usize>,
    pub precision: Option<PrecisionMode>,
    pub out: Option<String>,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        cfg.solver.validate()?;
        if cfg.nmax == Some(0) {
            return Err(CliError::Input(format!("{}: nmax must be at least 1", path.display())));
        }
        Ok(cfg)
    }
}

/// Result of a command: bytes for the output sink and, on a certification
/// failure, the summary block that goes to stderr with exit code 3.
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub failure: Option<String>,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Self { bytes, failure: None }
    }
}

struct Ctx {
    cfg: RunConfig,
    pool: rayon::ThreadPool,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("stlb: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let pool = parallel::pool(cli.jobs.or(cfg.jobs))?;
    let ctx = Ctx { cfg, pool };
    let (out, outcome) = match &cli.command {
        Command::Classify { bc, out } => (out, classify_cmd(&ctx, bc.as_deref(), out)?),
        Command::Fundsol { q, mu, out } => (out, fundsol_cmd(&ctx, q, mu, out)?),
        Command::Spectrum { q, bc, nmax, out } => (out, spectrum_cmd(&ctx, q, bc.as_deref(), *nmax, out)?),
        Command::BasisCheck { q, bc, nmax, grid_density, out } => {
            (out, basis_cmd(&ctx, q, bc.as_deref(), *nmax, *grid_density, out)?)
        }
        Command::Gaps { q, nmax, precision, out } => (out, gaps_cmd(&ctx, q, *nmax, precision.as_deref(), out)?),
        Command::Coincide { q, family, b, nmax, out } => (out, coincide_cmd(&ctx, q, *family, b, *nmax, out)?),
        Command::Asymptotics { q, bc, kmin, kmax, out } => (out, asymptotics_cmd(&ctx, q, bc, *kmin, *kmax, out)?),
    };
    let path = out.output.as_deref().or(ctx.cfg.output.as_deref());
    output::emit(&outcome.bytes, path)?;
    match outcome.failure {
        Some(summary) => {
            eprint!("{summary}");
            Ok(3)
        }
        None => Ok(0),
    }
}

fn format(ctx: &Ctx, out: &OutArgs, default: Format) -> Result<Format, CliError> {
    if let Some(f) = out.out {
        return Ok(f);
    }
    match ctx.cfg.out.as_deref() {
        None => Ok(default),
        Some(s) => <Format as clap::ValueEnum>::from_str(s, true)
            .map_err(|_| CliError::Input(format!("config: unknown output format '{s}'"))),
    }
}

fn potential(ctx: &Ctx, q: &PotentialArgs) -> Result<Potential, CliError> {
    if let Some(p) = &q.potential {
        return input::load_potential(p);
    }
    if let Some(a) = q.mathieu {
        return Ok(Potential::mathieu(a)?);
    }
    if let Some(s) = &q.two_term {
        let (alpha, t) = input::parse_pair(s)?;
        return Ok(Potential::two_term(alpha, t)?);
    }
    if q.zero {
        return Ok(Potential::zero());
    }
    match &ctx.cfg.potential {
        Some(serde_json::Value::String(path)) => input::load_potential(Path::new(path)),
        Some(v) => input::parse_potential_json(&v.to_string()).map_err(|e| CliError::Input(format!("config: {e}"))),
        None => Err(CliError::Input("no potential given (--potential, --mathieu, --two-term or --zero)".into())),
    }
}

fn boundary(ctx: &Ctx, bc: Option<&str>) -> Result<BoundaryMatrix, CliError> {
    if let Some(s) = bc {
        return input::boundary_from_arg(s);
    }
    match &ctx.cfg.bc {
        Some(serde_json::Value::String(s)) => input::boundary_from_arg(s),
        Some(v) => input::parse_boundary_json(&v.to_string()).map_err(|e| CliError::Input(format!("config: {e}"))),
        None => Err(CliError::Input("no boundary conditions given (--bc)".into())),
    }
}

fn nmax(ctx: &Ctx, flag: Option<usize>, default: usize) -> Result<usize, CliError> {
    match flag.or(ctx.cfg.nmax).unwrap_or(default) {
        0 => Err(CliError::Input("nmax must be at least 1".into())),
        n => Ok(n),
    }
}

/// Flag, then `STLB_PRECISION`, then the config file, then double.
pub fn precision(
    flag: Option<&str>,
    env: Option<&str>,
    config: Option<PrecisionMode>,
) -> Result<PrecisionMode, CliError> {
    if let Some(s) = flag {
        return Ok(s.parse()?);
    }
    if let Some(s) = env.filter(|s| !s.trim().is_empty()) {
        return s.parse().map_err(|e| CliError::Input(format!("{PRECISION_ENV}: {e}")));
    }
    Ok(config.unwrap_or(PrecisionMode::Double))
}

fn c(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

fn classify_cmd(ctx: &Ctx, bc: Option<&str>, out: &OutArgs) -> Result<Outcome, CliError> {
    let a = boundary(ctx, bc)?;
    let tol = ctx.cfg.solver.classify_tol;
    let cl = classify(&a, tol)?;
    let m = &cl.minors;
    let canonical = match_canonical(&a, tol).map(|(fam, v)| {
        let kind = match fam.kind {
            FamilyKind::Theorem1 => "theorem1",
            FamilyKind::TypeStar => "type_star",
            FamilyKind::A34Nonzero => "a34_nonzero",
        };
        let params: serde_json::Map<String, serde_json::Value> =
            fam.params.iter().zip(&v).map(|(k, z)| (k.to_string(), c(*z))).collect();
        json!({ "kind": kind, "variant": fam.variant.to_string(), "case": fam.case_tag, "params": params })
    });
    let regular = cl.regular_not_strongly;
    let report = json!({
        "matrix": a.rows.iter().map(|r| r.iter().map(|z| c(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "minors": {
            "a12": c(m.a12), "a13": c(m.a13), "a14": c(m.a14),
            "a23": c(m.a23), "a24": c(m.a24), "a34": c(m.a34),
        },
        "regular_not_strongly": regular,
        "case": cl.case_tag,
        "a14_eq_a23": cl.a14_eq_a23,
        "a34_zero": cl.a34_zero,
        "type_star": cl.type_star,
        "theorem1_family": cl.theorem1_family,
        "b": if regular { c(cl.b()) } else { serde_json::Value::Null },
        "failing": cl.failing,
        "canonical": canonical,
    });
    let bytes = match format(ctx, out, Format::Json)? {
        Format::Json => output::json(&report)?,
        Format::Jsonl => output::json_lines(&[report])?,
        Format::Csv => {
            let header = ["minor", "re", "im"];
            let names = ["a12", "a13", "a14", "a23", "a24", "a34"];
            let rows: Vec<Vec<String>> = names
                .iter()
                .zip(m.as_array())
                .map(|(n, z)| {
                    let [re, im] = cplx(z);
                    vec![n.to_string(), re, im]
                })
                .collect();
            output::csv_table(&header, &rows)?
        }
    };
    Ok(Outcome::ok(bytes))
}

#[derive(Serialize)]
struct FundsolRow {
    mu: Complex64,
    phi: Complex64,
    phi_dx: Complex64,
    psi: Complex64,
    psi_dx: Complex64,
    /// `max_j |W_j - 2 i mu| / |2 mu|`.
    wronskian_drift: f64,
    nodes: usize,
    accepted_steps: usize,
    rejected_steps: usize,
}

fn fundsol_cmd(ctx: &Ctx, q: &PotentialArgs, mus: &[String], out: &OutArgs) -> Result<Outcome, CliError> {
    let p = potential(ctx, q)?;
    let mus: Vec<Complex64> = mus.iter().map(|s| input::parse_complex(s)).collect::<Result<_, _>>()?;
    let cfg = &ctx.cfg.solver;
    let rows = parallel::map(&ctx.pool, &mus, |&mu| -> Result<FundsolRow, CliError> {
        let fs = fundsol::solve_fundamental(&p, mu, cfg, &[])?;
        let w0 = 2.0 * Complex64::i() * mu;
        let drift = (0..fs.grid.len()).map(|j| (fs.wronskian(j) - w0).norm()).fold(0.0, f64::max) / (2.0 * mu.norm());
        let l = fs.grid.len() - 1;
        Ok(FundsolRow {
            mu,
            phi: fs.phi[l],
            phi_dx: fs.phi_dx[l],
            psi: fs.psi[l],
            psi_dx: fs.psi_dx[l],
            wronskian_drift: drift,
            nodes: fs.grid.len(),
            accepted_steps: fs.stats.accepted,
            rejected_steps: fs.stats.rejected,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let bytes = match format(ctx, out, Format::Jsonl)? {
        Format::Jsonl => output::json_lines(&rows)?,
        Format::Json => output::json(&rows)?,
        Format::Csv => {
            let header = [
                "mu_re",
                "mu_im",
                "phi_re",
                "phi_im",
                "phi_dx_re",
                "phi_dx_im",
                "psi_re",
                "psi_im",
                "psi_dx_re",
                "psi_dx_im",
                "wronskian_drift",
                "nodes",
            ];
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut v = Vec::new();
                    for z in [r.mu, r.phi, r.phi_dx, r.psi, r.psi_dx] {
                        v.extend(cplx(z));
                    }
                    v.push(num(r.wronskian_drift));
                    v.push(r.nodes.to_string());
                    v
                })
                .collect();
            output::csv_table(&header, &table)?
        }
    };
    Ok(Outcome::ok(bytes))
}

/// Summary block for unresolved regions, or `None` when all are certified.
pub fn certification_summary(spec: &Spectrum) -> Option<String> {
    let bad = spec.unresolved();
    if bad.is_empty() {
        return None;
    }
    let mut s = format!("certification summary: {} of {} regions unresolved\n", bad.len(), spec.regions.len());
    for r in bad {
        let found: usize = r.roots.iter().map(|x| x.multiplicity).sum();
        let name = match r.kind {
            spectrum::RegionKind::Low => "low region".to_string(),
            spectrum::RegionKind::Cluster(n) => format!("cluster {n}"),
        };
        s += &format!("  {name}: winding {}, roots found {found}", r.winding);
        if let Some(n) = &r.note {
            s += &format!(" ({n})");
        }
        s.push('\n');
    }
    Some(s)
}

fn spectrum_rows(spec: &Spectrum) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "cluster",
        "series_tag",
        "mu_re",
        "mu_im",
        "lambda_re",
        "lambda_im",
        "multiplicity",
        "delta_prime_abs",
        "newton_residual",
        "certified",
    ];
    let rows = spec
        .points
        .iter()
        .map(|p| {
            let tag = match p.series_tag {
                spectrum::SeriesTag::Prime => "prime",
                spectrum::SeriesTag::DoublePrime => "double_prime",
                spectrum::SeriesTag::Unresolved => "unresolved",
            };
            let mut v = vec![p.cluster.to_string(), tag.to_string()];
            v.extend(cplx(p.mu));
            v.extend(cplx(p.lambda));
            v.push(p.multiplicity.to_string());
            v.push(num(p.delta_prime.norm()));
            v.push(num(p.newton_residual));
            v.push(p.certified.to_string());
            v
        })
        .collect();
    (header, rows)
}

fn spectrum_cmd(
    ctx: &Ctx,
    q: &PotentialArgs,
    bc: Option<&str>,
    n: Option<usize>,
    out: &OutArgs,
) -> Result<Outcome, CliError> {
    let p = potential(ctx, q)?;
    let a = boundary(ctx, bc)?;
    let n = nmax(ctx, n, 10)?;
    ctx.cfg.solver.validate()?;
    let spec = parallel::find_eigenvalues(&ctx.pool, &p, &a, n, &ctx.cfg.solver)?;
    let bytes = match format(ctx, out, Format::Jsonl)? {
        Format::Jsonl => output::json_lines(&spec.points)?,
        Format::Json => output::json(&spec)?,
        Format::Csv => {
            let (h, r) = spectrum_rows(&spec);
            output::csv_table(&h, &r)?
        }
    };
    Ok(Outcome { bytes, failure: certification_summary(&spec) })
}

fn basis_cmd(
    ctx: &Ctx,
    q: &PotentialArgs,
    bc: Option<&str>,
    n: Option<usize>,
    density: usize,
    out: &OutArgs,
) -> Result<Outcome, CliError> {
    let p = potential(ctx, q)?;
    let a = boundary(ctx, bc)?;
    let n = nmax(ctx, n, 40)?;
    if density == 0 {
        return Err(CliError::Input("grid density must be at least 1".into()));
    }
    let cfg = &ctx.cfg.solver;
    cfg.validate()?;
    let cl = classify(&a, cfg.classify_tol)?;
    let spec = if cl.regular_not_strongly {
        parallel::find_eigenvalues(&ctx.pool, &p, &a, n, cfg)?
    } else {
        Spectrum { points: Vec::new(), regions: Vec::new(), strip: 0.0, merge_tol: cfg.merge_tol }
    };
    let report = basis::basis_verdict(&p, &a, &spec, density, cfg)?;
    let bytes = match format(ctx, out, Format::Json)? {
        Format::Json => output::json(&report)?,
        Format::Jsonl => output::json_lines(&[&report])?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .norms
                .iter()
                .map(|s| {
                    let [re, im] = cplx(s.mu);
                    vec![s.n.to_string(), re, im, num(s.norm)]
                })
                .collect();
            output::csv_table(&["n", "mu_re", "mu_im", "norm_product"], &rows)?
        }
    };
    Ok(Outcome::ok(bytes))
}

fn gaps_cmd(
    ctx: &Ctx,
    q: &PotentialArgs,
    n: Option<usize>,
    prec: Option<&str>,
    out: &OutArgs,
) -> Result<Outcome, CliError> {
    let p = potential(ctx, q)?;
    let n = nmax(ctx, n, 7)?;
    let env = std::env::var(PRECISION_ENV).ok();
    let mode = precision(prec, env.as_deref(), ctx.cfg.precision)?;
    let table = basis::spectral_gaps(&p, n, mode)?;
    let bytes = match format(ctx, out, Format::Csv)? {
        Format::Csv => gaps_csv(&table)?,
        Format::Json => output::json(&table)?,
        Format::Jsonl => output::json_lines(&table.rows)?,
    };
    let flagged: Vec<String> = table.rows.iter().filter(|r| r.flagged).map(|r| r.n.to_string()).collect();
    let failure = (!flagged.is_empty()).then(|| {
        format!("certification summary: discriminant sign disagrees with gap parity at n = {}\n", flagged.join(", "))
    });
    Ok(Outcome { bytes, failure })
}

pub fn gaps_csv(t: &GapTable) -> Result<Vec<u8>, CliError> {
    let header = ["n", "problem", "lambda_minus", "lambda_plus", "measured", "predicted", "ratio", "flagged"];
    let rows: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| {
            let problem = match r.problem {
                basis::GapProblem::Periodic => "periodic",
                basis::GapProblem::Antiperiodic => "antiperiodic",
            };
            vec![
                r.n.to_string(),
                problem.into(),
                num(r.lambda_minus),
                num(r.lambda_plus),
                num(r.gamma),
                opt(r.predicted),
                opt(r.ratio),
                r.flagged.to_string(),
            ]
        })
        .collect();
    output::csv_table(&header, &rows)
}

fn coincide_cmd(
    ctx: &Ctx,
    q: &PotentialArgs,
    family: u8,
    b: &str,
    n: Option<usize>,
    out: &OutArgs,
) -> Result<Outcome, CliError> {
    let p = potential(ctx, q)?;
    let family = CoincidenceFamily::from_index(family)?;
    let b = input::parse_complex(b)?;
    if (b + 1.0).norm() < 1e-12 {
        return Err(CliError::Input("b = -1 is excluded".into()));
    }
    let n = nmax(ctx, n, 8)?;
    let cfg = &ctx.cfg.solver;
    cfg.validate()?;
    let tested = parallel::find_eigenvalues(&ctx.pool, &p, &family.matrix(b), n, cfg)?;
    let reference = parallel::find_eigenvalues(&ctx.pool, &p, &family.reference(), n, cfg)?;
    let report = basis::compare_spectra(family, b, p.is_symmetric(1e-10), &tested, &reference, 1e-6);
    let bytes = match format(ctx, out, Format::Json)? {
        Format::Json => output::json(&report)?,
        Format::Jsonl => output::json_lines(&[&report])?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .pairs
                .iter()
                .enumerate()
                .map(|(i, (x, y))| {
                    let mut v = vec![i.to_string()];
                    v.extend(cplx(*x));
                    v.extend(cplx(*y));
                    v.push(num((x - y).norm() / y.norm().max(1.0)));
                    v
                })
                .collect();
            output::csv_table(
                &["index", "lambda_re", "lambda_im", "reference_re", "reference_im", "relative_distance"],
                &rows,
            )?
        }
    };
    let mut failure = certification_summary(&tested);
    if let Some(s) = certification_summary(&reference) {
        failure = Some(failure.unwrap_or_default() + &s);
    }
    Ok(Outcome { bytes, failure })
}

/// One row of the asymptotics table.
#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsRow {
    pub k: usize,
    /// `|mu| = 2 pi k`.
    pub mu_abs: f64,
    /// `|mu|^2`-scaled residuals of `phi, psi` and `|mu|`-scaled ones of the derivatives.
    pub phi: f64,
    pub psi: f64,
    pub phi_dx: f64,
    pub psi_dx: f64,
    /// `|theta(mu)| |mu|` at `mu = 2 pi k + 0.3`, one per boundary matrix.
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub bc: Vec<String>,
    pub rows: Vec<AsymptoticsRow>,
    /// Column name to decile trend.
    pub trends: Vec<(String, Option<Trend>)>,
}

/// Residual-profile and determinant-reduction tables along `k = kmin..=kmax`.
pub fn asymptotics(
    pool: &rayon::ThreadPool,
    p: &Potential,
    bcs: &[(String, BoundaryMatrix)],
    ks: std::ops::RangeInclusive<usize>,
    cfg: &SolverConfig,
) -> Result<AsymptoticsReport, CliError> {
    let mean_zero = p.normalize_mean_zero();
    let ks: Vec<usize> = ks.collect();
    let rows = parallel::map(pool, &ks, |&k| -> Result<AsymptoticsRow, CliError> {
        let mu = Complex64::new(2.0 * PI * k as f64, 0.0);
        let mut r = [0.0; 4];
        for (slot, ch) in r.iter_mut().zip(Channel::ALL) {
            *slot = fundsol::residual_profile(p, &[mu], ch, cfg)?[0].1;
        }
        let mt = mu + 0.3;
        let theta = bcs
            .iter()
            .map(|(_, a)| Ok(spectrum::delta_reduction_residual(&mean_zero, a, mt, cfg)?.norm() * mt.norm()))
            .collect::<Result<Vec<f64>, CliError>>()?;
        Ok(AsymptoticsRow { k, mu_abs: mu.re, phi: r[0], psi: r[1], phi_dx: r[2], psi_dx: r[3], theta })
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let mut trends = Vec::new();
    let col = |f: &dyn Fn(&AsymptoticsRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    trends.push(("phi".to_string(), decile_trend(&col(&|r| r.phi))));
    trends.push(("psi".to_string(), decile_trend(&col(&|r| r.psi))));
    trends.push(("phi_dx".to_string(), decile_trend(&col(&|r| r.phi_dx))));
    trends.push(("psi_dx".to_string(), decile_trend(&col(&|r| r.psi_dx))));
    for (i, (name, _)) in bcs.iter().enumerate() {
        trends.push((format!("theta_{name}"), decile_trend(&col(&|r| r.theta[i]))));
    }
    Ok(AsymptoticsReport { bc: bcs.iter().map(|b| b.0.clone()).collect(), rows, trends })
}

fn asymptotics_cmd(
    ctx: &Ctx,
    q: &PotentialArgs,
    bc: &[String],
    kmin: usize,
    kmax: usize,
    out: &OutArgs,
) -> Result<Outcome, CliError> {
    let p = potential(ctx, q)?;
    if kmin == 0 || kmax < kmin {
        return Err(CliError::Input(format!("need 1 <= kmin <= kmax, got {kmin}..{kmax}")));
    }
    let names: Vec<String> = if bc.is_empty() { vec!["periodic".into(), "antiperiodic".into()] } else { bc.to_vec() };
    let bcs =
        names.iter().map(|s| Ok((s.clone(), input::boundary_from_arg(s)?))).collect::<Result<Vec<_>, CliError>>()?;
    let cfg = &ctx.cfg.solver;
    cfg.validate()?;
    let report = asymptotics(&ctx.pool, &p, &bcs, kmin..=kmax, cfg)?;
    let bytes = match format(ctx, out, Format::Csv)? {
        Format::Json => output::json(&report)?,
        Format::Jsonl => output::json_lines(&report.rows)?,
        Format::Csv => {
            let mut header =
                vec!["k".to_string(), "mu_abs".into(), "phi".into(), "psi".into(), "phi_dx".into(), "psi_dx".into()];
            header.extend(names.iter().map(|n| format!("theta_{n}")));
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    let mut v =
                        vec![r.k.to_string(), num(r.mu_abs), num(r.phi), num(r.psi), num(r.phi_dx), num(r.psi_dx)];
                    v.extend(r.theta.iter().map(|t| num(*t)));
                    v
                })
                .collect();
            output::csv_table(&h, &rows)?
        }
    };
    for (name, t) in &report.trends {
        match t {
            Some(t) => eprintln!(
                "trend {name}: reduction {:.2}x, monotone {}, {}",
                t.reduction,
                t.monotone,
                if t.pass { "pass" } else { "fail" }
            ),
            None => eprintln!("trend {name}: fewer than 10 samples"),
        }
    }
    Ok(Outcome::ok(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_precedence() {
        let e = Some(PrecisionMode::Extended);
        assert_eq!(precision(Some("double"), Some("extended"), e).unwrap(), PrecisionMode::Double);
        assert_eq!(precision(None, Some("extended"), Some(PrecisionMode::Double)).unwrap(), PrecisionMode::Extended);
        assert_eq!(precision(None, None, e).unwrap(), PrecisionMode::Extended);
        assert_eq!(precision(None, Some(""), None).unwrap(), PrecisionMode::Double);
        assert!(precision(None, Some("quad"), None).is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
