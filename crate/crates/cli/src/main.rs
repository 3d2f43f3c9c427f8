#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use lumpcyl::geodesic::{
    conserved_quantities, gamma_lines, line_arclength, scattering_snapshots,
    xi0_geodesic_with_floor, A_FLOOR,
};
use lumpcyl::lump::parse_complex;
use lumpcyl::moduli::{
    collapse_path, kahler_check, lump_from_coords, metric_components, path_length,
    path_length_truncated,
};
use lumpcyl::verify::{format_sig, run_suite, Suite, VerifyOptions};
use lumpcyl::xi0::{samples_for, scan};
use lumpcyl::{
    CollapseFamily, FiberCoordinates, GammaLine, GeodesicOutcome, GeodesicState, GridSpec,
    ScatteringFamily, TargetValue,
};

use config::{Overrides, RunConfig};
use io::{write_csv, Cell};

const EXIT_VALIDATION: u8 = 1;
const EXIT_COMPUTATION: u8 = 2;
const EXIT_VERIFICATION: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "lumpcyl",
    version,
    about = "Lumps on the cylinder: moduli metrics, elliptic geometry and geodesics"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Configuration file of `key = value` lines
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Significant digits in CSV output
    #[arg(long, global = true)]
    precision: Option<usize>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    x_cutoff: Option<f64>,
    #[arg(long, global = true)]
    y_points: Option<usize>,
    #[arg(long, global = true)]
    x_panels: Option<usize>,
    #[arg(long, global = true)]
    max_refinements: Option<u32>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the identity and oracle checks
    Verify(VerifyArgs),
    /// Conformal factor, curvature, potential and embedding of the sech surface
    Xi0(Xi0Args),
    /// Metric components at a point of a fiber
    Metric(MetricArgs),
    /// Geodesics on the sech surface, or arc length along a straight geodesic
    Geodesic(GeodesicArgs),
    /// Energy density frames along a family of configurations
    Field(FieldArgs),
    /// Length of a collapse path
    Length(LengthArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Run only these suites (repeatable)
    #[arg(long, value_parser = parse_suite)]
    only: Vec<Suite>,
    /// Replace every check tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = VerifyOptions::default().seed)]
    seed: u64,
    /// Random lumps per degree in the mass checks
    #[arg(long, default_value_t = VerifyOptions::default().random_lumps)]
    lumps: usize,
}

#[derive(Args, Debug)]
struct Xi0Args {
    #[arg(long, default_value_t = 1e-3)]
    a_min: f64,
    #[arg(long, default_value_t = 1e3)]
    a_max: f64,
    #[arg(long, default_value_t = lumpcyl::xi0::POINTS_PER_DECADE)]
    per_decade: usize,
    #[arg(long, default_value = "xi0.csv")]
    file: String,
}

#[derive(Args, Debug)]
struct MetricArgs {
    /// Degree
    #[arg(long)]
    n: usize,
    /// Fiber value: a complex number or `inf`
    #[arg(long, allow_hyphen_values = true)]
    p: String,
    /// Comma-separated complex coordinates (2n - 1 of them)
    #[arg(long, allow_hyphen_values = true)]
    zeta: String,
    /// Also report the Kahler residual with this difference step
    #[arg(long)]
    kahler_step: Option<f64>,
    #[arg(long, default_value = "metric.csv")]
    file: String,
}

#[derive(Args, Debug)]
struct GeodesicArgs {
    /// Tabulate arc length along gamma1, gamma2 or gamma3 instead
    #[arg(long, value_parser = parse_line)]
    line: Option<GammaLine>,
    #[arg(long, allow_hyphen_values = true)]
    u_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    u_max: Option<f64>,
    #[arg(long, default_value_t = 4)]
    resolution: usize,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    da: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    dtheta: f64,
    #[arg(long, default_value_t = 50.0, allow_hyphen_values = true)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = A_FLOOR)]
    a_floor: f64,
    #[arg(long)]
    file: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum FieldFamily {
    /// alpha sech z with alpha = a e^{i theta}
    Meridian,
    /// (e^-z + alpha)/(e^z + alpha), alpha > 1
    Gamma1,
    /// same with real alpha in ]-1, 1[ (tunneling frames)
    Gamma2,
    /// same with imaginary alpha (antipodal frames)
    Gamma3,
}

#[derive(Args, Debug)]
struct FieldArgs {
    #[arg(long, value_enum)]
    family: FieldFamily,
    /// Comma-separated parameter values (imaginary parts for gamma3)
    #[arg(
        long,
        allow_hyphen_values = true,
        value_delimiter = ',',
        required = true
    )]
    alphas: Vec<f64>,
    /// Meridian angle
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    theta: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    x_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    x_max: f64,
    #[arg(long, default_value_t = 161)]
    nx: usize,
    #[arg(long, default_value_t = 128)]
    ny: usize,
    #[arg(long, default_value = "field")]
    prefix: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum LengthFamily {
    Gamma0,
    Gammap,
    Gammainf,
}

#[derive(Args, Debug)]
struct LengthArgs {
    #[arg(long, value_enum)]
    family: LengthFamily,
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Fiber value for gammap
    #[arg(long)]
    p: Option<f64>,
    /// Truncate the path at this parameter value
    #[arg(long)]
    t_max: Option<f64>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: lumpcyl::Error| e.to_string())
}

fn parse_line(s: &str) -> Result<GammaLine, String> {
    s.parse().map_err(|e: lumpcyl::Error| e.to_string())
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<lumpcyl::Error> for Failure {
    fn from(e: lumpcyl::Error) -> Self {
        use lumpcyl::Error as E;
        let code = match e {
            E::Domain { .. }
            | E::InvalidLump(_)
            | E::InvalidCoordinates(_)
            | E::InvalidIsometry(_)
            | E::InvalidParameter(_)
            | E::Parse(_) => EXIT_VALIDATION,
            _ => EXIT_COMPUTATION,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_COMPUTATION,
            message: format!("write failed: {e}"),
        }
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_VALIDATION,
        message: message.into(),
    }
}

type Outcome = Result<u8, Failure>;

struct Ctx {
    out: PathBuf,
    cfg: RunConfig,
}

impl Ctx {
    fn path(&self, file: &str) -> PathBuf {
        self.out.join(file)
    }

    /// Writes a table and prints its manifest line.
    fn emit(&self, file: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<PathBuf, Failure> {
        let path = self.path(file);
        write_csv(&path, header, rows, self.cfg.precision)?;
        println!("{},{}", path.display(), rows.len());
        Ok(path)
    }

    fn num(&self, x: f64) -> String {
        format_sig(x, self.cfg.precision)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let overrides = Overrides {
        x_cutoff: g.x_cutoff,
        y_points: g.y_points,
        x_panels: g.x_panels,
        rel_tol: g.rel_tol,
        abs_tol: g.abs_tol,
        max_refinements: g.max_refinements,
        precision: g.precision,
    };
    let cfg = RunConfig::load(g.config.as_deref(), &overrides).map_err(invalid)?;
    let ctx = Ctx {
        out: g.out.clone(),
        cfg,
    };
    match cli.command {
        Command::Verify(a) => cmd_verify(&ctx, a),
        Command::Xi0(a) => cmd_xi0(&ctx, a),
        Command::Metric(a) => cmd_metric(&ctx, a),
        Command::Geodesic(a) => cmd_geodesic(&ctx, a),
        Command::Field(a) => cmd_field(&ctx, a),
        Command::Length(a) => cmd_length(&ctx, a),
    }
}

fn cmd_verify(ctx: &Ctx, a: VerifyArgs) -> Outcome {
    if let Some(t) = a.tol {
        if !(t > 0.0) {
            return Err(invalid(format!("--tol {t} must be positive")));
        }
    }
    let opts = VerifyOptions {
        cfg: ctx.cfg.quadrature,
        tol_override: a.tol,
        seed: a.seed,
        random_lumps: a.lumps,
        ..VerifyOptions::default()
    };
    let suites: Vec<Suite> = if a.only.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.only
    };
    println!("name,expected,got,tol,status");
    let mut all_pass = true;
    for suite in suites {
        for check in run_suite(suite, &opts)? {
            all_pass &= check.pass();
            println!("{check}");
        }
    }
    Ok(if all_pass { 0 } else { EXIT_VERIFICATION })
}

fn cmd_xi0(ctx: &Ctx, a: Xi0Args) -> Outcome {
    if a.per_decade == 0 {
        return Err(invalid("--per-decade must be positive"));
    }
    if !(a.a_min > 0.0 && a.a_max > a.a_min) {
        return Err(invalid(format!(
            "need 0 < a-min < a-max, got {} and {}",
            a.a_min, a.a_max
        )));
    }
    let n = samples_for(a.a_min, a.a_max, a.per_decade);
    let rows: Vec<Vec<Cell>> = scan(a.a_min, a.a_max, n)?
        .into_iter()
        .map(|s| {
            vec![
                s.a.into(),
                s.i.into(),
                s.r.into(),
                s.u_eff.into(),
                s.radius.into(),
                s.height.into(),
            ]
        })
        .collect();
    ctx.emit(&a.file, &["a", "I", "R", "Ueff", "radius", "height"], &rows)?;
    Ok(0)
}

fn parse_target(s: &str) -> Result<TargetValue, Failure> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(TargetValue::Infinity),
        t => Ok(TargetValue::Finite(parse_complex(t)?)),
    }
}

fn parse_complex_list(s: &str) -> Result<Vec<Complex64>, Failure> {
    s.split(',')
        .map(|t| parse_complex(t.trim()).map_err(Failure::from))
        .collect()
}

fn cmd_metric(ctx: &Ctx, a: MetricArgs) -> Outcome {
    let coords = FiberCoordinates::new(a.n, parse_target(&a.p)?, parse_complex_list(&a.zeta)?)?;
    lump_from_coords(&coords)?;
    let q = ctx.cfg.quadrature;
    let g = metric_components(&coords, &q)?;
    let d = g.dim();
    let mut rows = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let v = g.entries[(i, j)];
            rows.push(vec![Cell::from(i), Cell::from(j), v.re.into(), v.im.into()]);
        }
    }
    ctx.emit(&a.file, &["i", "j", "re", "im"], &rows)?;
    let eig: Vec<String> = g.eigenvalues().iter().map(|&e| ctx.num(e)).collect();
    println!("eigenvalues,{}", eig.join(","));
    println!("hermiticity_defect,{}", ctx.num(g.hermiticity_defect()));
    if let Some(h) = a.kahler_step {
        let r = kahler_check(&coords, &q, h)?;
        println!("kahler_residual,{}", ctx.num(r));
        println!("kahler_relative,{}", ctx.num(r / g.max_abs()));
    }
    Ok(0)
}

fn cmd_geodesic(ctx: &Ctx, a: GeodesicArgs) -> Outcome {
    let q = ctx.cfg.quadrature;
    if let Some(line) = a.line {
        let table = match (a.u_min, a.u_max) {
            (None, None) => gamma_lines(line, a.resolution, &q)?,
            (Some(u0), Some(u1)) => line_arclength(line, u0, u1, a.resolution, &q)?,
            _ => return Err(invalid("--u-min and --u-max go together")),
        };
        let rows: Vec<Vec<Cell>> = table
            .u
            .iter()
            .zip(table.alpha())
            .zip(&table.s)
            .map(|((&u, al), &s)| vec![u.into(), al.re.into(), al.im.into(), s.into()])
            .collect();
        let file = a.file.unwrap_or_else(|| format!("line_{line}.csv"));
        ctx.emit(&file, &["u", "alpha_re", "alpha_im", "s"], &rows)?;
        return Ok(0);
    }
    let initial = GeodesicState::new(0.0, a.a, a.theta, a.da, a.dtheta);
    let traj = xi0_geodesic_with_floor(initial, a.t_end, a.tol, a.a_floor)?;
    let rows = traj
        .states
        .iter()
        .map(|s| {
            let c = conserved_quantities(s)?;
            Ok(vec![
                s.t.into(),
                s.q1.into(),
                s.q2.into(),
                s.v1.into(),
                s.v2.into(),
                c.energy.into(),
                c.p_theta.into(),
            ])
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    let file = a.file.unwrap_or_else(|| "geodesic.csv".into());
    ctx.emit(
        &file,
        &["t", "q1", "q2", "v1", "v2", "energy", "p_theta"],
        &rows,
    )?;
    match traj.outcome {
        GeodesicOutcome::Completed => println!("outcome,completed"),
        GeodesicOutcome::Collapsed { t } => println!("outcome,collapsed,{}", ctx.num(t)),
    }
    Ok(0)
}

fn cmd_field(ctx: &Ctx, a: FieldArgs) -> Outcome {
    let family = match a.family {
        FieldFamily::Meridian => ScatteringFamily::Xi0Meridian(a.theta),
        FieldFamily::Gamma1 => ScatteringFamily::Frontal,
        FieldFamily::Gamma2 => ScatteringFamily::Tunneling,
        FieldFamily::Gamma3 => ScatteringFamily::Antipodal,
    };
    let grid = GridSpec {
        x_min: a.x_min,
        x_max: a.x_max,
        nx: a.nx,
        ny: a.ny,
        ..GridSpec::default()
    };
    let frames = scattering_snapshots(family, &a.alphas, grid)?;
    let family_name = format!("{:?}", a.family).to_ascii_lowercase();
    let mut manifest = Vec::with_capacity(frames.len());
    for (k, (frame, &u)) in frames.iter().zip(&a.alphas).enumerate() {
        let file = format!("{}_{k:03}.csv", a.prefix);
        let mut rows = Vec::with_capacity(frame.values.len());
        for (iy, &y) in frame.y.iter().enumerate() {
            for (ix, &x) in frame.x.iter().enumerate() {
                rows.push(vec![x.into(), y.into(), frame.get(ix, iy).into()]);
            }
        }
        write_csv(&ctx.path(&file), &["x", "y", "E"], &rows, ctx.cfg.precision)?;
        let alpha = family.alpha(u);
        manifest.push(vec![
            Cell::from(k),
            Cell::from(file),
            Cell::from(family_name.as_str()),
            u.into(),
            alpha.re.into(),
            alpha.im.into(),
            frame.integral().into(),
        ]);
    }
    ctx.emit(
        &format!("{}_manifest.csv", a.prefix),
        &[
            "frame", "file", "family", "param", "alpha_re", "alpha_im", "energy",
        ],
        &manifest,
    )?;
    for row in &manifest {
        if let Cell::Text(f) = &row[1] {
            println!("{}", Path::new(&ctx.out).join(f).display());
        }
    }
    Ok(0)
}

fn cmd_length(ctx: &Ctx, a: LengthArgs) -> Outcome {
    let family = match (a.family, a.p) {
        (LengthFamily::Gamma0, _) => CollapseFamily::Gamma0,
        (LengthFamily::Gammainf, _) => CollapseFamily::GammaInf,
        (LengthFamily::Gammap, Some(p)) => CollapseFamily::GammaP(p),
        (LengthFamily::Gammap, None) => return Err(invalid("gammap needs --p")),
    };
    let path = collapse_path(family, a.n)?;
    let q = ctx.cfg.quadrature;
    let length = match a.t_max {
        Some(t) => path_length_truncated(&path, t, &q)?,
        None => path_length(&path, &q)?,
    };
    println!("{}", ctx.num(length));
    Ok(0)
}
