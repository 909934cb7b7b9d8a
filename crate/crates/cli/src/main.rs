//! `supportfn`: shape analysis, distances, farthest needles, functional
//! maximization, inequality reports and plot data for planar convex bodies
//! given by their support functions.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use convex_support::farthest::{self, FarthestResult, SharpReport};
use convex_support::functional::{self, Classification, QuadCoeffs};
use convex_support::json::{self, JsonError, ShapeDto};
use convex_support::support::{hausdorff_distance, l2_distance, Point};
use convex_support::weingarten::{self, curvature_of};
use convex_support::{AngleGrid, Atom, GeomError, SupportFn};
use serde::Serialize;

/// Value gap above which the two maximizers are reported as disagreeing.
const AGREEMENT_TOL: f64 = 1e-3;

/// Class-𝒜 residual above which inputs are renormalized.
const CLASS_A_TOL: f64 = 1e-9;

#[derive(Parser)]
#[command(name = "supportfn", version, about)]
struct Cli {
    /// Seed for randomized solvers; the SHAPES_SEED environment variable takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Perimeter, Steiner point, extrema of h, curvature support and class-𝒜 residuals.
    Info {
        shape: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Hausdorff and/or L² distance between two shapes.
    Distance {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricArg::Both)]
        metric: MetricArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Farthest needle from a class-𝒜 body.
    Farthest {
        shape: PathBuf,
        #[arg(long, value_enum, default_value_t = MetricArg::Both)]
        metric: MetricArg,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Write boundary points of the body and both farthest needles as CSV.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Boundary sampling for --plot.
        #[arg(long, default_value_t = 720)]
        n: usize,
    },
    /// Maximize the quadratic functional with both solvers and compare.
    Maximize {
        coeffs: PathBuf,
        /// Cone-solver grid size.
        #[arg(long, default_value_t = 512)]
        n: usize,
        /// Cone-solver restarts.
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Residuals of the sharp inequalities on class 𝒜.
    Check {
        shape: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Boundary points of a shape as CSV.
    Plot {
        shape: PathBuf,
        #[arg(long, default_value_t = 720)]
        n: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Table of G₄ over [0, π] and its minimum set.
    G4 {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// CSV destination; the summary JSON goes to stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Hausdorff,
    L2,
    Both,
}

/// Failure with a dedicated exit code.
#[derive(Debug)]
enum Failure {
    Malformed(String),
    NotConvex(String),
    BadCoeffs(String),
    Other(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Other(_) => 1,
            Failure::Malformed(_) => 2,
            Failure::NotConvex(_) => 3,
            Failure::BadCoeffs(_) => 4,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Other(e)
    }
}

impl From<JsonError> for Failure {
    fn from(e: JsonError) -> Self {
        let msg = e.to_string();
        match e {
            JsonError::Syntax { .. } => Failure::Malformed(msg),
            JsonError::Shape(GeomError::NotConvex { .. }) => Failure::NotConvex(msg),
            JsonError::Shape(_) => Failure::Malformed(msg),
            JsonError::Coeffs(_) => Failure::BadCoeffs(msg),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Malformed(m) | Failure::NotConvex(m) | Failure::BadCoeffs(m) => f.write_str(m),
            Failure::Other(e) => write!(f, "{e:#}"),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let seed = match seed_from_env(cli.seed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, seed) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn seed_from_env(flag: u64) -> anyhow::Result<u64> {
    match std::env::var("SHAPES_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("SHAPES_SEED={v:?} is not an unsigned integer")),
        Err(_) => Ok(flag),
    }
}

fn run(command: Command, seed: u64) -> CliResult<()> {
    match command {
        Command::Info { shape, out } => {
            let h = load_shape(&shape)?;
            emit(out.as_deref(), &json::to_json(&info_report(&h)))
        }
        Command::Distance {
            first,
            second,
            metric,
            out,
        } => {
            let a = load_shape(&first)?;
            let b = load_shape(&second)?;
            let report = DistanceReport {
                hausdorff: (metric != MetricArg::L2).then(|| hausdorff_distance(&a, &b)),
                l2: (metric != MetricArg::Hausdorff).then(|| l2_distance(&a, &b)),
            };
            emit(out.as_deref(), &json::to_json(&report))
        }
        Command::Farthest {
            shape,
            metric,
            out,
            plot,
            n,
        } => {
            let c = class_a(load_shape(&shape)?)?;
            let l2 = (metric != MetricArg::Hausdorff).then(|| farthest::farthest_l2(&c));
            let hausdorff = (metric != MetricArg::L2).then(|| farthest::farthest_hausdorff(&c));
            if let Some(path) = plot {
                let grid = AngleGrid::new(n).map_err(|e| Failure::Malformed(e.to_string()))?;
                let mut series = vec![("C", c.clone())];
                series.extend(l2.as_ref().map(|r| ("segment_l2", r.segment())));
                series.extend(hausdorff.as_ref().map(|r| ("segment_hausdorff", r.segment())));
                write_file(&path, &plot_csv(&series, grid))?;
            }
            let report = FarthestReport {
                alpha_gap: match (&l2, &hausdorff) {
                    (Some(a), Some(b)) => Some(convex_support::grid::axis_distance(a.alpha_star, b.alpha_star)),
                    _ => None,
                },
                l2,
                hausdorff,
            };
            emit(out.as_deref(), &json::to_json(&report))
        }
        Command::Maximize {
            coeffs,
            n,
            restarts,
            out,
        } => {
            let q = load_coeffs(&coeffs)?;
            emit(out.as_deref(), &json::to_json(&maximize_report(&q, n, restarts, seed)?))
        }
        Command::Check { shape, out } => {
            let c = class_a(load_shape(&shape)?)?;
            let report = farthest::sharp_inequality_report(&c);
            emit(out.as_deref(), &json::to_json(&CheckReport::new(report)))
        }
        Command::Plot { shape, n, out } => {
            let h = load_shape(&shape)?;
            let grid = AngleGrid::new(n).map_err(|e| Failure::Malformed(e.to_string()))?;
            emit(out.as_deref(), &plot_csv(&[("shape", h)], grid))
        }
        Command::G4 { samples, out } => {
            let samples = samples.max(2);
            let table = weingarten::g4_table(samples);
            let mut csv = String::from("tau,g4\n");
            for (t, v) in &table {
                writeln!(csv, "{t:.16e},{v:.16e}").unwrap();
            }
            let (minimum, at) = weingarten::g4_minimum_set(samples, 1e-9);
            let asymmetry = table
                .iter()
                .map(|(t, v)| (v - weingarten::g4(PI - t)).abs())
                .fold(0.0, f64::max);
            let summary = G4Summary {
                samples: table.len(),
                minimum,
                minimum_at: at,
                max_asymmetry: asymmetry,
            };
            match out {
                Some(path) => {
                    write_file(&path, &csv)?;
                    emit(None, &json::to_json(&summary))
                }
                None => {
                    eprintln!("{}", json::to_json(&summary));
                    emit(None, &csv)
                }
            }
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    Ok(fs::write(path, text).with_context(|| format!("writing {}", path.display()))?)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    let mut text = text.to_owned();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Parse a shape and reject non-convex input.
fn load_shape(path: &Path) -> CliResult<SupportFn> {
    let h = json::parse_shape(&read(path)?).map_err(|e| Failure::from(e).context(path))?;
    h.check_convex()
        .map_err(|e| Failure::NotConvex(format!("{}: {e}", path.display())))?;
    Ok(h)
}

fn load_coeffs(path: &Path) -> CliResult<QuadCoeffs> {
    json::parse_coeffs(&read(path)?).map_err(|e| Failure::from(e).context(path))
}

impl Failure {
    fn context(self, path: &Path) -> Self {
        let p = path.display();
        match self {
            Failure::Malformed(m) => Failure::Malformed(format!("{p}: {m}")),
            Failure::NotConvex(m) => Failure::NotConvex(format!("{p}: {m}")),
            Failure::BadCoeffs(m) => Failure::BadCoeffs(format!("{p}: {m}")),
            Failure::Other(e) => Failure::Other(e.context(p.to_string())),
        }
    }
}

/// Map into class 𝒜 when the residuals are not negligible.
fn class_a(h: SupportFn) -> CliResult<SupportFn> {
    let (dp, ds) = h.class_a_residuals();
    if dp.abs() <= CLASS_A_TOL && ds <= CLASS_A_TOL {
        return Ok(h);
    }
    log::warn!("input is not in class 𝒜 (P - 2π = {dp:e}, |s| = {ds:e}); normalizing");
    h.normalize_to_class_a()
        .map_err(|e| Failure::Malformed(e.to_string()))
}

#[derive(Serialize)]
struct InfoReport {
    shape: ShapeDto,
    perimeter: f64,
    steiner: Point,
    min_h: f64,
    argmin: f64,
    max_h: f64,
    argmax: f64,
    curvature_support_size: usize,
    class_a_residuals: ClassAResiduals,
}

#[derive(Serialize)]
struct ClassAResiduals {
    perimeter: f64,
    steiner: f64,
}

fn info_report(h: &SupportFn) -> InfoReport {
    let mm = h.min_max();
    let (dp, ds) = h.class_a_residuals();
    InfoReport {
        shape: ShapeDto::from(h),
        perimeter: h.perimeter(),
        steiner: h.steiner(),
        min_h: mm.min,
        argmin: mm.argmin,
        max_h: mm.max,
        argmax: mm.argmax,
        curvature_support_size: curvature_of(h).support().len(),
        class_a_residuals: ClassAResiduals {
            perimeter: dp,
            steiner: ds,
        },
    }
}

#[derive(Serialize)]
struct DistanceReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    hausdorff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    l2: Option<f64>,
}

#[derive(Serialize)]
struct FarthestReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    l2: Option<FarthestResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hausdorff: Option<FarthestResult>,
    /// Distance between the two needle axes in `[0, π/2]`.
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_gap: Option<f64>,
}

#[derive(Serialize)]
struct CheckReport {
    #[serde(flatten)]
    residuals: SharpReport,
    worst: f64,
    holds: bool,
}

impl CheckReport {
    fn new(residuals: SharpReport) -> Self {
        let worst = residuals.worst();
        Self {
            residuals,
            worst,
            holds: worst <= 1e-6,
        }
    }
}

#[derive(Serialize)]
struct G4Summary {
    samples: usize,
    minimum: f64,
    minimum_at: Vec<f64>,
    max_asymmetry: f64,
}

#[derive(Serialize)]
struct ConeReport {
    classification: Classification,
    value: f64,
    atoms: Vec<Atom>,
    shape: ShapeDto,
    grid: usize,
    restarts: usize,
    iterations: usize,
}

#[derive(Serialize)]
struct SegmentReport {
    alpha: f64,
    value: f64,
}

#[derive(Serialize)]
struct TriangleReport {
    angles: [f64; 3],
    lengths: [f64; 3],
    value: f64,
}

#[derive(Serialize)]
struct ContinuousReport {
    classification: Classification,
    value: f64,
    shape: ShapeDto,
    triangle: TriangleReport,
    segment: SegmentReport,
}

#[derive(Serialize)]
struct MaximizeReport {
    cone: ConeReport,
    continuous: ContinuousReport,
    value_gap: f64,
    agree: bool,
}

fn maximize_report(q: &QuadCoeffs, n: usize, restarts: usize, seed: u64) -> CliResult<MaximizeReport> {
    let cone = functional::maximize_over_cone(q, n, restarts, seed).map_err(|e| match e {
        GeomError::BadGrid(_) => Failure::Malformed(e.to_string()),
        GeomError::InvalidCoeffs(_) => Failure::BadCoeffs(e.to_string()),
        _ => Failure::Other(e.into()),
    })?;
    let tri = functional::maximize_over_triangles(q);
    let gap = (cone.value - tri.value()).abs();
    let agree = gap <= AGREEMENT_TOL * tri.value().abs().max(1.0) && cone.classification == tri.classification();
    if !agree {
        log::warn!(
            "solvers disagree: cone {:?} {:.6e}, continuous {:?} {:.6e}",
            cone.classification,
            cone.value,
            tri.classification(),
            tri.value()
        );
    }
    Ok(MaximizeReport {
        cone: ConeReport {
            classification: cone.classification,
            value: cone.value,
            shape: ShapeDto::from(&cone.h_opt),
            atoms: cone.atoms,
            grid: cone.grid,
            restarts,
            iterations: cone.iterations,
        },
        continuous: ContinuousReport {
            classification: tri.classification(),
            value: tri.value(),
            shape: ShapeDto::from(&tri.shape()),
            triangle: TriangleReport {
                angles: tri.triangle.angles(),
                lengths: tri.triangle.lengths(),
                value: tri.triangle_value,
            },
            segment: SegmentReport {
                alpha: tri.segment_alpha,
                value: tri.segment_value,
            },
        },
        value_gap: gap,
        agree,
    })
}

/// CSV with columns `series,theta,x,y`.
fn plot_csv(series: &[(&str, SupportFn)], grid: AngleGrid) -> String {
    let mut csv = String::from("series,theta,x,y\n");
    for (name, h) in series {
        for (t, p) in grid.nodes().zip(h.boundary_points(grid)) {
            writeln!(csv, "{name},{t:.16e},{:.16e},{:.16e}", p[0], p[1]).unwrap();
        }
    }
    csv
}
