//! Command-line front end.
//!
//! Every subcommand shares the parameter flags (`--eps`/`--eta`, or the rate
//! constants `--k1 --k-1 --k2 --e0` to nondimensionalize first), a tolerance,
//! an output format, and an optional output path. Data goes to stdout or,
//! with `--out`, through a temporary file renamed into place so readers never
//! see a half-written table.
//!
//! Exit codes: 0 on success, 1 for runtime failures (a JSON error object is
//! printed to stderr), 2 for usage errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    concavity_audit, fraser_iterate, gamma1_entry, inflection_locus, EntryOutcome,
    InflectionBranch,
};
use crate::integrate::{integrate_phase, integrate_time, Tol};
use crate::isoclines::{alpha, classify_region, horizontal, in_gamma0, in_gamma1, slope_isocline, vertical};
use crate::kinetics::{Parameters, RateConstants, Scales};
use crate::manifold::{compute_manifold, origin_tail, uniqueness_probe, ManifoldConfig};
use crate::series::{infinity_coefficients, origin_coefficients};
use crate::tolerances::SELF_CONSISTENCY_TOL;
use crate::{Error, Point};

#[derive(Debug, Parser)]
#[command(name = "mmphase", version, about = "Phase-plane toolkit for the planar enzyme kinetics system")]
struct Cli {
    #[command(flatten)]
    params: ParamArgs,
    /// Relative integration tolerance; the absolute one is set 100x tighter.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout (atomically).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled checks; fixed seed, fixed output.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ParamArgs {
    /// Ratio of initial enzyme to the Michaelis pool.
    #[arg(long, global = true, default_value_t = 5.0, allow_negative_numbers = true)]
    eps: f64,
    /// Fraction of complex decay that produces product.
    #[arg(long, global = true, default_value_t = 0.8, allow_negative_numbers = true)]
    eta: f64,
    /// Binding rate; give all four rate flags to derive eps and eta.
    #[arg(long, global = true, requires = "k_minus1", requires = "k2", requires = "e0",
          conflicts_with_all = ["eps", "eta"])]
    k1: Option<f64>,
    /// Unbinding rate.
    #[arg(long = "k-1", global = true, requires = "k1", requires = "k2", requires = "e0",
          conflicts_with_all = ["eps", "eta"])]
    k_minus1: Option<f64>,
    /// Catalytic rate.
    #[arg(long, global = true, requires = "k1", requires = "k_minus1", requires = "e0",
          conflicts_with_all = ["eps", "eta"])]
    k2: Option<f64>,
    /// Initial enzyme concentration.
    #[arg(long, global = true, requires = "k1", requires = "k_minus1", requires = "k2",
          conflicts_with_all = ["eps", "eta"])]
    e0: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenstructure of the linearization at the origin.
    Spectral,
    /// Tabulate the isocline family over a logarithmic grid.
    Isoclines {
        #[arg(long, default_value_t = 0.01)]
        x_min: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Extra slope levels to tabulate alongside H, alpha, V.
        #[arg(long = "level", allow_negative_numbers = true)]
        levels: Vec<f64>,
    },
    /// Expansion coefficients of the slow manifold at the origin and at infinity.
    #[command(group = ArgGroup::new("which").required(true).multiple(true).args(["origin", "infinity"]))]
    Series {
        /// Number of origin coefficients (degree of the expansion).
        #[arg(long)]
        origin: Option<usize>,
        /// Number of far-field coefficients.
        #[arg(long)]
        infinity: Option<usize>,
    },
    /// Integrate time trajectories and locate isocline crossings.
    #[command(group = ArgGroup::new("from").required(true).multiple(true).args(["starts", "starts_file"]))]
    Portrait {
        /// Starting point as "x,y"; repeatable.
        #[arg(long = "start", value_parser = parse_point, allow_hyphen_values = true)]
        starts: Vec<Point>,
        /// JSON file with an array of [x, y] pairs.
        #[arg(long = "starts")]
        starts_file: Option<PathBuf>,
        #[arg(long, default_value_t = 20.0)]
        t_end: f64,
    },
    /// Construct the slow manifold and report its fence margins.
    Manifold {
        #[arg(long, default_value_t = 1e-3)]
        x_min: f64,
        #[arg(long, default_value_t = 1e3)]
        x_max: f64,
        #[arg(long, default_value_t = 600)]
        grid: usize,
        /// Far-field expansion order used for seeding.
        #[arg(long, default_value_t = 5)]
        seed_order: usize,
    },
    /// Classify points by isocline region and concavity.
    Classify {
        /// Point as "x,y"; repeatable.
        #[arg(long = "point", value_parser = parse_point, required = true, allow_hyphen_values = true)]
        points: Vec<Point>,
    },
    /// Trace the three branches of the inflection locus.
    Loci {
        #[arg(long, default_value_t = 0.05)]
        x_min: f64,
        #[arg(long, default_value_t = 20.0)]
        x_max: f64,
        #[arg(long, default_value_t = 60)]
        grid: usize,
    },
    /// Follow a trajectory into the trapping strip.
    Entry {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, allow_negative_numbers = true)]
        y: f64,
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
    },
    /// Functional iteration from the QSSA curve toward the manifold.
    Fraser {
        #[arg(long, default_value_t = 0.1)]
        x_min: f64,
        #[arg(long, default_value_t = 10.0)]
        x_max: f64,
        #[arg(long, default_value_t = 201)]
        grid: usize,
        /// Number of iterations.
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Run the self-consistency suite; exits 1 if any check fails.
    Verify {
        /// Skip the slow checks (deep tail fit, time-vs-phase comparison).
        #[arg(long)]
        quick: bool,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"x,y\", got \"{s}\""))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("bad x in \"{s}\": {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("bad y in \"{s}\": {e}"))?;
    Ok(Point::new(x, y))
}

struct Failure {
    kind: String,
    message: String,
    code: u8,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { kind: e.kind().to_string(), message: e.to_string(), code: 1 }
    }
}

impl Failure {
    fn io(context: &str, e: std::io::Error) -> Self {
        Failure { kind: "io".into(), message: format!("{context}: {e}"), code: 1 }
    }
}

struct Ctx {
    p: Parameters,
    scales: Option<Scales>,
    tol: Tol,
    format: Format,
    seed: u64,
}

impl Ctx {
    fn csv_comment(&self) -> String {
        format!(
            "# mmphase {} eps={} eta={} tol_rel={:e} tol_abs={:e}\n",
            env!("CARGO_PKG_VERSION"),
            self.p.eps(),
            self.p.eta(),
            self.tol.rel,
            self.tol.abs
        )
    }

    fn meta_json(&self) -> serde_json::Value {
        serde_json::json!({
            "eps": self.p.eps(),
            "eta": self.p.eta(),
            "tol_rel": self.tol.rel,
            "tol_abs": self.tol.abs,
            "scales": self.scales,
        })
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(f) => {
            let obj = serde_json::json!({"error": {"kind": f.kind, "message": f.message}});
            eprintln!("{obj}");
            ExitCode::from(f.code)
        }
    }
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    let (p, scales) = resolve_params(&cli.params)?;
    let tol = Tol::new(cli.tol, cli.tol * 1e-2)?;
    let ctx = Ctx { p, scales, tol, format: cli.format, seed: cli.seed };

    let (output, code) = match cli.command {
        Command::Spectral => (render_spectral(&ctx), ExitCode::SUCCESS),
        Command::Isoclines { x_min, x_max, grid, levels } => {
            (render_isoclines(&ctx, x_min, x_max, grid, &levels)?, ExitCode::SUCCESS)
        }
        Command::Series { origin, infinity } => {
            (render_series(&ctx, origin, infinity)?, ExitCode::SUCCESS)
        }
        Command::Portrait { starts, starts_file, t_end } => {
            (render_portrait(&ctx, starts, starts_file.as_deref(), t_end)?, ExitCode::SUCCESS)
        }
        Command::Manifold { x_min, x_max, grid, seed_order } => {
            (render_manifold(&ctx, x_min, x_max, grid, seed_order)?, ExitCode::SUCCESS)
        }
        Command::Classify { points } => (render_classify(&ctx, &points)?, ExitCode::SUCCESS),
        Command::Loci { x_min, x_max, grid } => {
            (render_loci(&ctx, x_min, x_max, grid)?, ExitCode::SUCCESS)
        }
        Command::Entry { x, y, t_end } => (render_entry(&ctx, x, y, t_end)?, ExitCode::SUCCESS),
        Command::Fraser { x_min, x_max, grid, n } => {
            (render_fraser(&ctx, x_min, x_max, grid, n)?, ExitCode::SUCCESS)
        }
        Command::Verify { quick } => {
            let (out, ok) = run_verify(&ctx, quick)?;
            (out, if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    };

    match cli.out {
        None => print!("{output}"),
        Some(path) => write_atomic(&path, &output)
            .map_err(|e| Failure::io(&format!("writing {}", path.display()), e))?,
    }
    Ok(code)
}

fn resolve_params(args: &ParamArgs) -> Result<(Parameters, Option<Scales>), Failure> {
    if let (Some(k1), Some(k_minus1), Some(k2), Some(e0)) =
        (args.k1, args.k_minus1, args.k2, args.e0)
    {
        let rates = RateConstants::new(k1, k_minus1, k2, e0)?;
        let (p, scales) = rates.nondimensionalize()?;
        Ok((p, Some(scales)))
    } else {
        Ok((Parameters::new(args.eps, args.eta)?, None))
    }
}

fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!("{name}.tmp"));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (la, lb) = (lo.ln(), hi.ln());
    let mut xs: Vec<f64> = (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect();
    xs[0] = lo;
    xs[n - 1] = hi;
    xs
}

fn finish_json(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).expect("value is tree-shaped");
    s.push('\n');
    s
}

fn render_spectral(ctx: &Ctx) -> String {
    let sp = ctx.p.spectrum();
    match ctx.format {
        Format::Json => finish_json(serde_json::json!({
            "meta": ctx.meta_json(),
            "spectrum": sp,
        })),
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str(
                "lambda_plus,lambda_minus,kappa,sigma,resonant,nearest_integer,resonance_distance,near_resonance\n",
            );
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                sp.lambda_plus,
                sp.lambda_minus,
                sp.kappa,
                sp.sigma,
                sp.resonant,
                sp.nearest_integer,
                sp.resonance_distance,
                sp.near_resonance
            ));
            s
        }
    }
}

fn render_isoclines(
    ctx: &Ctx,
    x_min: f64,
    x_max: f64,
    grid: usize,
    levels: &[f64],
) -> Result<String, Failure> {
    if !(x_min > 0.0 && x_max > x_min) || grid < 2 {
        return Err(Error::Domain("need 0 < x_min < x_max and at least two grid points".into()).into());
    }
    let xs = log_grid(x_min, x_max, grid);
    let mut rows = Vec::with_capacity(xs.len());
    for &x in &xs {
        let mut extra = Vec::with_capacity(levels.len());
        for &c in levels {
            extra.push(slope_isocline(&ctx.p, x, c)?);
        }
        rows.push((x, horizontal(x), alpha(&ctx.p, x), vertical(&ctx.p, x), extra));
    }
    match ctx.format {
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(x, h, a, v, extra)| {
                    serde_json::json!({
                        "x": x, "horizontal": h, "alpha": a, "vertical": v,
                        "levels": levels.iter().zip(extra).map(|(c, y)| serde_json::json!({"c": c, "y": y})).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(finish_json(serde_json::json!({"meta": ctx.meta_json(), "rows": rows})))
        }
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str("x,horizontal,alpha,vertical");
            for c in levels {
                s.push_str(&format!(",c={c}"));
            }
            s.push('\n');
            for (x, h, a, v, extra) in rows {
                s.push_str(&format!("{x},{h},{a},{v}"));
                for y in extra {
                    s.push_str(&format!(",{y}"));
                }
                s.push('\n');
            }
            Ok(s)
        }
    }
}

fn render_series(
    ctx: &Ctx,
    origin: Option<usize>,
    infinity: Option<usize>,
) -> Result<String, Failure> {
    let origin = origin.map(|n| origin_coefficients(&ctx.p, n));
    let infinity = infinity.map(|n| infinity_coefficients(&ctx.p, n));
    match ctx.format {
        Format::Json => Ok(finish_json(serde_json::json!({
            "meta": ctx.meta_json(),
            "origin": origin,
            "infinity": infinity,
        }))),
        Format::Csv => {
            let mut s = ctx.csv_comment();
            if let Some(o) = &origin {
                s.push_str(&format!(
                    "# origin: kappa={} resonant={} valid_terms={}\n",
                    o.kappa,
                    o.resonant,
                    o.valid_terms()
                ));
            }
            s.push_str("family,index,coefficient\n");
            if let Some(o) = &origin {
                for (i, c) in o.coeffs.iter().enumerate().take(o.valid_terms()) {
                    s.push_str(&format!("origin,{i},{c}\n"));
                }
            }
            if let Some(f) = &infinity {
                for (i, c) in f.coeffs.iter().enumerate() {
                    s.push_str(&format!("infinity,{i},{c}\n"));
                }
            }
            Ok(s)
        }
    }
}

fn render_portrait(
    ctx: &Ctx,
    mut starts: Vec<Point>,
    starts_file: Option<&Path>,
    t_end: f64,
) -> Result<String, Failure> {
    if let Some(path) = starts_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::io(&format!("reading {}", path.display()), e))?;
        let pairs: Vec<[f64; 2]> = serde_json::from_str(&text).map_err(|e| Failure {
            kind: "domain".into(),
            message: format!("{} is not a JSON array of [x, y] pairs: {e}", path.display()),
            code: 1,
        })?;
        starts.extend(pairs.into_iter().map(|[x, y]| Point::new(x, y)));
    }
    let mut trajectories = Vec::with_capacity(starts.len());
    for start in &starts {
        trajectories.push(integrate_time(&ctx.p, *start, t_end, ctx.tol)?);
    }
    match ctx.format {
        Format::Json => Ok(finish_json(serde_json::json!({
            "meta": ctx.meta_json(),
            "trajectories": trajectories,
        }))),
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str("trajectory,t,x,y\n");
            for (i, traj) in trajectories.iter().enumerate() {
                for (t, pt) in traj.ts.iter().zip(&traj.points) {
                    s.push_str(&format!("{i},{t},{},{}\n", pt.x, pt.y));
                }
            }
            Ok(s)
        }
    }
}

fn render_manifold(
    ctx: &Ctx,
    x_min: f64,
    x_max: f64,
    grid: usize,
    seed_order: usize,
) -> Result<String, Failure> {
    let cfg = ManifoldConfig { x_min, x_max, n_points: grid, seed_order, tol: ctx.tol };
    let m = compute_manifold(&ctx.p, &cfg)?;
    match ctx.format {
        Format::Json => Ok(finish_json(serde_json::json!({
            "meta": ctx.meta_json(),
            "manifold": m,
        }))),
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str(&format!(
                "# seed_x={} series_from={} fences_pass={}\n",
                m.seed_x,
                m.series_from.map_or("none".into(), |x| x.to_string()),
                m.fences.pass
            ));
            s.push_str("x,y,slope\n");
            for ((x, y), d) in m.curve.xs().iter().zip(m.curve.ys()).zip(m.curve.slopes()) {
                s.push_str(&format!("{x},{y},{d}\n"));
            }
            Ok(s)
        }
    }
}

fn render_classify(ctx: &Ctx, points: &[Point]) -> Result<String, Failure> {
    struct Row {
        pt: Point,
        region: crate::isoclines::Region,
        g0: bool,
        g1: bool,
        curvature: &'static str,
    }
    let mut rows = Vec::with_capacity(points.len());
    for &pt in points {
        let region = classify_region(&ctx.p, pt)?;
        let curvature = match crate::analysis::h_aux(&ctx.p, pt) {
            Err(_) => "singular",
            Ok(h) if h > 0.0 => "up",
            Ok(h) if h < 0.0 => "down",
            Ok(_) => "flat",
        };
        rows.push(Row { pt, region, g0: in_gamma0(&ctx.p, pt), g1: in_gamma1(&ctx.p, pt), curvature });
    }
    match ctx.format {
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "point": r.pt, "region": r.region,
                        "in_gamma0": r.g0, "in_gamma1": r.g1, "curvature": r.curvature,
                    })
                })
                .collect();
            Ok(finish_json(serde_json::json!({"meta": ctx.meta_json(), "rows": rows})))
        }
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str("x,y,region,in_gamma0,in_gamma1,curvature\n");
            for r in rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.pt.x, r.pt.y, r.region, r.g0, r.g1, r.curvature
                ));
            }
            Ok(s)
        }
    }
}

fn render_loci(ctx: &Ctx, x_min: f64, x_max: f64, grid: usize) -> Result<String, Failure> {
    if !(x_min > 0.0 && x_max > x_min) || grid < 2 {
        return Err(Error::Domain("need 0 < x_min < x_max and at least two grid points".into()).into());
    }
    let xs = log_grid(x_min, x_max, grid);
    let locus = inflection_locus(&ctx.p, &xs)?;
    for w in &locus.warnings {
        eprintln!("warning: {w}");
    }
    match ctx.format {
        Format::Json => Ok(finish_json(serde_json::json!({
            "meta": ctx.meta_json(),
            "locus": locus,
        }))),
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str("x,y,branch,h_residual\n");
            for pt in &locus.points {
                let branch = match pt.branch {
                    InflectionBranch::BelowAxis => "below-axis",
                    InflectionBranch::MidStrip => "mid-strip",
                    InflectionBranch::AboveOne => "above-one",
                };
                s.push_str(&format!("{},{},{branch},{:e}\n", pt.x, pt.y, pt.h_residual));
            }
            Ok(s)
        }
    }
}

fn render_entry(ctx: &Ctx, x: f64, y: f64, t_end: f64) -> Result<String, Failure> {
    let report = gamma1_entry(&ctx.p, Point::new(x, y), t_end, ctx.tol)?;
    match ctx.format {
        Format::Json => Ok(finish_json(serde_json::json!({
            "meta": ctx.meta_json(),
            "entry": report,
        }))),
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str("outcome,threshold_x,t,x,y\n");
            let (outcome, t, pt) = match report.outcome {
                EntryOutcome::Entered { t, point } => ("entered", t.to_string(), point),
                EntryOutcome::NotEntered { point } => ("not-entered", String::new(), point),
                EntryOutcome::Inconclusive { t_end, last } => {
                    ("inconclusive", t_end.to_string(), last)
                }
            };
            s.push_str(&format!("{outcome},{},{t},{},{}\n", report.threshold_x, pt.x, pt.y));
            Ok(s)
        }
    }
}

fn render_fraser(
    ctx: &Ctx,
    x_min: f64,
    x_max: f64,
    grid: usize,
    n: usize,
) -> Result<String, Failure> {
    if !(x_min > 0.0 && x_max > x_min) || grid < 4 {
        return Err(Error::Domain("need 0 < x_min < x_max and at least four grid points".into()).into());
    }
    // Uniform nodes: the iteration differentiates its own spline, and even
    // spacing keeps those slopes clean.
    let xs: Vec<f64> = (0..grid)
        .map(|i| x_min + (x_max - x_min) * i as f64 / (grid - 1) as f64)
        .collect();
    let it = fraser_iterate(&ctx.p, &xs, n)?;
    match ctx.format {
        Format::Json => {
            let iterates: Vec<&[f64]> = it.iterates.iter().map(|c| c.ys()).collect();
            Ok(finish_json(serde_json::json!({
                "meta": ctx.meta_json(),
                "xs": xs,
                "iterates": iterates,
                "pole_flags": it.pole_flags,
            })))
        }
        Format::Csv => {
            let mut s = ctx.csv_comment();
            s.push_str("iterate,x,y,pole\n");
            for (k, curve) in it.iterates.iter().enumerate() {
                for (i, (x, y)) in curve.xs().iter().zip(curve.ys()).enumerate() {
                    let pole = it.pole_flags[k].contains(&i) as u8;
                    s.push_str(&format!("{k},{x},{y},{pole}\n"));
                }
            }
            Ok(s)
        }
    }
}

enum CheckStatus {
    Ok,
    Fail,
    Skip,
}

struct Check {
    name: &'static str,
    status: CheckStatus,
    detail: String,
}

fn run_verify(ctx: &Ctx, quick: bool) -> Result<(String, bool), Failure> {
    let mut checks = Vec::new();
    let p = &ctx.p;
    let sp = p.spectrum();

    // Spectrum: characteristic polynomial, eigenvector residuals,
    // biorthogonality.
    {
        let (eps, eta) = (p.eps(), p.eta());
        let j = p.linearization();
        let mut worst: f64 = 0.0;
        for (lam, v) in [(sp.lambda_plus, sp.v_plus), (sp.lambda_minus, sp.v_minus)] {
            let char_res = (eps * lam * lam + (eps + 1.0) * lam + eta).abs();
            worst = worst.max(char_res / (1.0 + lam * lam));
            let r0 = j[0][0] * v[0] + j[0][1] * v[1] - lam * v[0];
            let r1 = j[1][0] * v[0] + j[1][1] * v[1] - lam * v[1];
            worst = worst.max(r0.abs().max(r1.abs()) / (1.0 + lam.abs()));
        }
        let ortho = (sp.vhat_plus[0] * sp.v_minus[0] + sp.vhat_plus[1] * sp.v_minus[1]).abs();
        worst = worst.max(ortho);
        checks.push(Check {
            name: "spectrum-residuals",
            status: if worst < 1e-12 { CheckStatus::Ok } else { CheckStatus::Fail },
            detail: format!("worst residual {worst:.3e}"),
        });
    }

    // The isocline family really is the level set of the slope field.
    {
        let mut worst: f64 = 0.0;
        let cs = [0.1, 0.5, sp.sigma, 2.0, 10.0];
        for &x in &log_grid(1e-2, 50.0, 20) {
            for &c in &cs {
                let y = slope_isocline(p, x, c).map_err(Failure::from)?;
                let f = p.slope_field(Point::new(x, y)).map_err(Failure::from)?;
                worst = worst.max((f - c).abs() / (1.0 + c.abs()));
            }
        }
        checks.push(Check {
            name: "isocline-identity",
            status: if worst < 1e-9 { CheckStatus::Ok } else { CheckStatus::Fail },
            detail: format!("worst level error {worst:.3e}"),
        });
    }

    // One manifold shared by the fence, interpolation, concavity, and probe
    // checks.
    let cfg = ManifoldConfig {
        x_min: 1e-2,
        x_max: 60.0,
        n_points: if quick { 300 } else { 800 },
        tol: ctx.tol,
        ..Default::default()
    };
    let manifold = compute_manifold(p, &cfg);
    match &manifold {
        Ok(m) => {
            checks.push(Check {
                name: "manifold-fences",
                status: if m.fences.pass { CheckStatus::Ok } else { CheckStatus::Fail },
                detail: format!(
                    "lower margin {:.3e}, upper margin {:.3e}",
                    m.fences.min_lower_margin, m.fences.min_upper_margin
                ),
            });

            // The manifold is a fixed point of the update y -> F(x, y'):
            // node values fed back through their own slopes must reproduce
            // themselves.
            let mut worst: f64 = 0.0;
            let mut worst_x = f64::NAN;
            for i in 0..m.curve.len() {
                let (x, y) = (m.curve.xs()[i], m.curve.ys()[i]);
                let d = m.curve.slopes()[i];
                let (y_again, pole) = crate::analysis::fraser_step(p, x, d);
                if !pole && (y - y_again).abs() > worst {
                    worst = (y - y_again).abs();
                    worst_x = x;
                }
            }
            checks.push(Check {
                name: "fixed-point-residual",
                status: if worst < SELF_CONSISTENCY_TOL { CheckStatus::Ok } else { CheckStatus::Fail },
                detail: format!("worst node residual {worst:.3e} at x = {worst_x:.4}"),
            });

            match concavity_audit(p, m, 8, ctx.seed) {
                Ok(report) => checks.push(Check {
                    name: "concavity-table",
                    status: if report.pass { CheckStatus::Ok } else { CheckStatus::Fail },
                    detail: format!(
                        "{}/{} rows consistent, {} skipped near the locus",
                        report.n_consistent,
                        report.rows.len(),
                        report.n_skipped
                    ),
                }),
                Err(e) => checks.push(Check {
                    name: "concavity-table",
                    status: CheckStatus::Fail,
                    detail: e.to_string(),
                }),
            }

            match uniqueness_probe(p, m, 1.0, 1e-3) {
                Ok(probe) => {
                    let ok = probe.exit_above.is_some() && probe.exit_below.is_some();
                    checks.push(Check {
                        name: "uniqueness-probe",
                        status: if ok { CheckStatus::Ok } else { CheckStatus::Fail },
                        detail: if ok {
                            "offsets expelled on both sides".into()
                        } else {
                            "an offset trajectory failed to leave the strip".into()
                        },
                    });
                }
                Err(e) => checks.push(Check {
                    name: "uniqueness-probe",
                    status: CheckStatus::Fail,
                    detail: e.to_string(),
                }),
            }

            // Informational: the functional iteration should close in on the
            // manifold, but this is a diagnostic, not a guarantee we enforce.
            let xs: Vec<f64> = (0..=300).map(|i| 0.1 + i as f64 * (5.0 - 0.1) / 300.0).collect();
            match fraser_iterate(p, &xs, 3) {
                Ok(it) => {
                    let d = it.sup_distances(&m.curve, &xs);
                    let monotone = d.windows(2).all(|w| w[1] < w[0]);
                    checks.push(Check {
                        name: "fraser-contraction",
                        status: if monotone { CheckStatus::Ok } else { CheckStatus::Skip },
                        detail: format!("informational; sup distances {d:?}"),
                    });
                }
                Err(e) => checks.push(Check {
                    name: "fraser-contraction",
                    status: CheckStatus::Skip,
                    detail: format!("informational; iteration failed: {e}"),
                }),
            }
        }
        Err(e) => {
            checks.push(Check {
                name: "manifold-fences",
                status: CheckStatus::Fail,
                detail: format!("manifold construction failed: {e}"),
            });
            for name in ["fixed-point-residual", "concavity-table", "uniqueness-probe", "fraser-contraction"] {
                checks.push(Check {
                    name,
                    status: CheckStatus::Skip,
                    detail: "manifold unavailable".into(),
                });
            }
        }
    }

    // Origin expansion consistency, by residual scaling.
    if sp.resonant {
        checks.push(Check {
            name: "origin-series-residual",
            status: CheckStatus::Skip,
            detail: format!("resonant kappa = {}", sp.kappa),
        });
    } else {
        let s = origin_coefficients(p, 6);
        if s.conditioning_warning || s.valid_terms() < 7 {
            checks.push(Check {
                name: "origin-series-residual",
                status: CheckStatus::Skip,
                detail: "expansion ill-conditioned near resonance".into(),
            });
        } else {
            let res = |x: f64| -> Result<f64, Failure> {
                let f = p.slope_field(Point::new(x, s.eval(x)))?;
                Ok((f - s.eval_deriv(x)).abs())
            };
            let (r1, r2) = (res(1e-3)?, res(2e-3)?);
            let ratio = r2 / r1.max(f64::MIN_POSITIVE);
            // The slope field amplifies eval rounding by f_y ~ eta/(eps x);
            // below this floor the ratio measures noise, not truncation.
            checks.push(Check {
                name: "origin-series-residual",
                status: if r2 < 1e-13 {
                    CheckStatus::Skip
                } else if ratio > 16.0 {
                    CheckStatus::Ok
                } else {
                    CheckStatus::Fail
                },
                detail: if r2 < 1e-13 {
                    format!("residual {r2:.3e} at 2e-3 is at the rounding floor; order not measurable")
                } else {
                    format!("residual {r1:.3e} at 1e-3 scales by {ratio:.1} per doubling")
                },
            });
        }
    }

    // Far-field expansion consistency, same idea.
    {
        let s = infinity_coefficients(p, 8);
        let res = |x: f64| -> Result<f64, Failure> {
            let f = p.slope_field(Point::new(x, s.eval(x)?))?;
            Ok((f - s.eval_deriv(x)?).abs())
        };
        let (r1, r2) = (res(40.0)?, res(80.0)?);
        let ratio = r1 / r2.max(f64::MIN_POSITIVE);
        // f_y ~ eta x / (eps D^2) is a few hundred at x = 40, so eval rounding
        // shows up at the 1e-12 scale when the coefficients stay O(1).
        checks.push(Check {
            name: "infinity-series-residual",
            status: if r1 < 1e-11 {
                CheckStatus::Skip
            } else if ratio > 64.0 {
                CheckStatus::Ok
            } else {
                CheckStatus::Fail
            },
            detail: if r1 < 1e-11 {
                format!("residual {r1:.3e} at 40 is at the rounding floor; order not measurable")
            } else {
                format!("residual {r1:.3e} at 40 shrinks by {ratio:.1} per doubling")
            },
        });
    }

    // Entry into the trapping strip.
    if sp.resonant {
        checks.push(Check {
            name: "entry-threshold",
            status: CheckStatus::Skip,
            detail: format!("resonant kappa = {}", sp.kappa),
        });
    } else {
        match gamma1_entry(p, Point::new(1.0, 0.3), 100.0, ctx.tol) {
            Ok(report) => {
                let (status, detail) = match report.outcome {
                    EntryOutcome::Entered { t, point } => {
                        if point.x >= report.threshold_x - 1e-9 {
                            (CheckStatus::Ok, format!("entered at t = {t:.4}, x = {}", point.x))
                        } else {
                            (
                                CheckStatus::Fail,
                                format!("entered below the threshold: x = {} < {}", point.x, report.threshold_x),
                            )
                        }
                    }
                    EntryOutcome::NotEntered { point } => (
                        CheckStatus::Fail,
                        format!("left the threshold column without entering, at {point}"),
                    ),
                    EntryOutcome::Inconclusive { .. } => {
                        (CheckStatus::Fail, "horizon ended before entry".into())
                    }
                };
                checks.push(Check { name: "entry-threshold", status, detail });
            }
            Err(e) => checks.push(Check {
                name: "entry-threshold",
                status: CheckStatus::Fail,
                detail: e.to_string(),
            }),
        }
    }

    // Slow checks.
    if quick {
        for name in ["tail-exponent", "time-vs-phase"] {
            checks.push(Check { name, status: CheckStatus::Skip, detail: "quick mode".into() });
        }
    } else {
        checks.push(tail_check(ctx, &sp));
        checks.push(time_vs_phase_check(ctx)?);
    }

    let all_ok = checks.iter().all(|c| !matches!(c.status, CheckStatus::Fail));
    let output = match ctx.format {
        Format::Json => {
            let rows: Vec<_> = checks
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "name": c.name,
                        "status": match c.status {
                            CheckStatus::Ok => "ok",
                            CheckStatus::Fail => "fail",
                            CheckStatus::Skip => "skip",
                        },
                        "detail": c.detail,
                    })
                })
                .collect();
            finish_json(serde_json::json!({"meta": ctx.meta_json(), "checks": rows, "pass": all_ok}))
        }
        Format::Csv => {
            let mut s = String::new();
            for c in &checks {
                let tag = match c.status {
                    CheckStatus::Ok => "ok  ",
                    CheckStatus::Fail => "FAIL",
                    CheckStatus::Skip => "skip",
                };
                s.push_str(&format!("{tag} {:<28} {}\n", c.name, c.detail));
            }
            s.push_str(if all_ok { "all checks passed\n" } else { "some checks FAILED\n" });
            s
        }
    };
    Ok((output, all_ok))
}

fn tail_check(ctx: &Ctx, sp: &crate::kinetics::Spectrum) -> Check {
    let name = "tail-exponent";
    if sp.resonant {
        return Check {
            name,
            status: CheckStatus::Skip,
            detail: format!("resonant kappa = {}", sp.kappa),
        };
    }
    if sp.kappa > 4.0 {
        return Check {
            name,
            status: CheckStatus::Skip,
            detail: format!("kappa = {:.3} leaves the tail below double precision", sp.kappa),
        };
    }
    let cfg = ManifoldConfig {
        x_min: 1e-5,
        x_max: 60.0,
        n_points: 500,
        tol: Tol { rel: ctx.tol.rel.min(1e-12), abs: ctx.tol.abs.min(1e-14) },
        ..Default::default()
    };
    let m = match compute_manifold(&ctx.p, &cfg) {
        Ok(m) => m,
        Err(e) => return Check { name, status: CheckStatus::Fail, detail: e.to_string() },
    };
    match origin_tail(&ctx.p, &m) {
        Ok(fit) => {
            let err = (fit.kappa_fit - sp.kappa).abs();
            Check {
                name,
                status: if err < 0.2 { CheckStatus::Ok } else { CheckStatus::Fail },
                detail: format!("fitted exponent {:.4} vs kappa {:.4}", fit.kappa_fit, sp.kappa),
            }
        }
        Err(e @ Error::TailBelowPrecision { .. }) => {
            Check { name, status: CheckStatus::Skip, detail: e.to_string() }
        }
        Err(e) => Check { name, status: CheckStatus::Fail, detail: e.to_string() },
    }
}

fn time_vs_phase_check(ctx: &Ctx) -> Result<Check, Failure> {
    let name = "time-vs-phase";
    let start = Point::new(2.0, 0.1);
    let traj = integrate_time(&ctx.p, start, 30.0, ctx.tol)?;
    let run = integrate_phase(&ctx.p, start, 0.05, ctx.tol)?;
    let curve = &run.curve;
    let mut worst: f64 = 0.0;
    for pt in &traj.points {
        if pt.x > curve.x_min().max(0.06) && pt.x < curve.x_max().min(1.9) {
            worst = worst.max((pt.y - curve.eval(pt.x)).abs());
        }
    }
    let sigma = ctx.p.spectrum().sigma;
    let bound = 20.0 * (ctx.tol.rel * (1.0 + sigma) + ctx.tol.abs);
    Ok(Check {
        name,
        status: if worst < bound { CheckStatus::Ok } else { CheckStatus::Fail },
        detail: format!("graphs agree to {worst:.3e} (bound {bound:.3e})"),
    })
}
