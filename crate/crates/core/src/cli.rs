//! The `reflector` command-line front end.
//!
//! One job per process. Inputs are focal fields in the JSON format of
//! [`input::FieldDocument`]; every output file goes to `--out` and is
//! written atomically. Exit codes: 0 on success, 2 for malformed input,
//! 3 for mathematical failures (the error name is printed), 1 for output
//! I/O failures.

mod input;
mod output;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::directrix::{agreement_tolerance, directrix_from_support, directrix_map_cloud, hausdorff};
use crate::error::ReflectorError;
use crate::optics::trace;
use crate::reflector::{FocalField, Reflector, MAP_EPS};
use crate::sphere::{make_grid, DirectionGrid};
use crate::validity::{is_focal_function, ValidityVerdict};

pub use input::{Entry, FieldDocument, Fill};
pub use output::json_bytes;
pub use report::{run_suite, Property, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Build the reflector and export its surface.
    Build,
    /// Write the closure of the input field and the per-direction gaps.
    Closure,
    /// Decide whether the input is a focal function.
    Check,
    /// Build the directrix both ways and compare.
    Directrix,
    /// Trace the rays from the focus through every sample direction.
    Trace,
    /// Run the property suite.
    Report,
}

/// A single job.
#[derive(Clone, Debug, Parser)]
#[command(name = "reflector", version, about = "Convex reflectors from confocal paraboloids")]
pub struct JobSpec {
    #[arg(value_enum)]
    pub command: Command,
    /// Focal field document; optional for `report`.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Sphere dimension; defaults to the document's (2 for `report`).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
    pub dim: Option<u32>,
    /// Grid level used for the focal field and all samples.
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("{v} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Schema(String),
    #[error("[{}] {source}", source.name())]
    Math {
        #[from]
        source: ReflectorError,
    },
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Math { .. } => 3,
            CliError::Io(_) => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses the process arguments, runs the job and maps the outcome to an
/// exit code. `REFLECTOR_THREADS` caps the worker count.
pub fn main() -> ExitCode {
    let spec = JobSpec::parse();
    if let Ok(v) = std::env::var("REFLECTOR_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: REFLECTOR_THREADS={v:?} is not a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    match run(&spec) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs one job, writing its files under `spec.out`, and returns the text
/// summary.
pub fn run(spec: &JobSpec) -> CliResult<String> {
    std::fs::create_dir_all(&spec.out)?;
    let doc = spec.input.as_deref().map(read_document).transpose()?;
    let field = match &doc {
        Some(doc) => {
            let dim = spec.dim.unwrap_or(doc.dim);
            let grid = Arc::new(make_grid(dim, spec.level)?);
            Some(doc.to_field(&grid)?)
        }
        None if spec.command == Command::Report => None,
        None => {
            return Err(CliError::Schema(format!(
                "--in: an input document is required for {:?}",
                spec.command
            )))
        }
    };
    match (spec.command, field) {
        (Command::Report, field) => report_job(spec, field.as_ref()),
        (command, Some(field)) => match command {
            Command::Build => build_job(spec, &field),
            Command::Closure => closure_job(spec, &field),
            Command::Check => check_job(spec, &field),
            Command::Directrix => directrix_job(spec, &field),
            Command::Trace => trace_job(spec, &field),
            Command::Report => unreachable!(),
        },
        (_, None) => unreachable!(),
    }
}

fn read_document(path: &Path) -> CliResult<FieldDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(format!("--in {}: {e}", path.display())))?;
    input::parse(&text)
}

#[derive(Serialize)]
struct Span {
    min: f64,
    max: f64,
}

impl Span {
    fn of(values: impl IntoIterator<Item = f64>) -> Self {
        values.into_iter().fold(
            Span {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |s, v| Span {
                min: s.min.min(v),
                max: s.max.max(v),
            },
        )
    }
}

#[derive(Serialize)]
struct GridStats {
    dim: u32,
    level: u32,
    points: usize,
    edges: usize,
    resolution: f64,
}

impl GridStats {
    fn of(grid: &DirectionGrid) -> Self {
        Self {
            dim: grid.dim(),
            level: grid.level(),
            points: grid.len(),
            edges: grid.edges().len(),
            resolution: grid.resolution(),
        }
    }
}

#[derive(Serialize)]
struct BuildSummary {
    grid: GridStats,
    finite_entries: usize,
    supporting_members: usize,
    exact: bool,
    radius: Span,
    support: Span,
    diameter: f64,
    files: Vec<String>,
}

fn build_job(spec: &JobSpec, field: &FocalField) -> CliResult<String> {
    let r = Reflector::build(field, spec.level, spec.tol)?;
    let grid = r.eval_grid();
    let surface: Vec<_> = grid
        .points()
        .iter()
        .zip(r.radial().values())
        .map(|(x, rho)| x.vector() * *rho)
        .collect();
    let mut files = output::write_surface(&spec.out, "reflector", grid, &surface)?;
    output::write_json(&spec.out.join("focal.json"), &FieldDocument::from_field(field))?;
    files.push("focal.json".into());
    files.push("summary.json".into());
    let summary = BuildSummary {
        grid: GridStats::of(grid),
        finite_entries: field.finite_count(),
        supporting_members: r.family().len(),
        exact: r.is_exact(),
        radius: Span::of(r.radial().values().iter().copied()),
        support: Span::of(r.support_samples().iter().map(|s| s.h)),
        diameter: r.diameter(),
        files,
    };
    output::write_json(&spec.out.join("summary.json"), &summary)?;
    Ok(format!(
        "reflector on {} directions: radius [{}, {}], support [{}, {}]\n",
        grid.len(),
        output::num(summary.radius.min),
        output::num(summary.radius.max),
        output::num(summary.support.min),
        output::num(summary.support.max),
    ))
}

fn closure_job(spec: &JobSpec, field: &FocalField) -> CliResult<String> {
    let r = Reflector::build(field, spec.level, spec.tol)?;
    let star = r.closure();
    let dim = field.dim();
    let mut header = vec!["index"];
    header.extend(["y1", "y2", "y3"].iter().take(dim as usize + 1));
    header.extend(["p", "closure", "relative_gap"]);
    let rows = field
        .grid()
        .points()
        .iter()
        .zip(field.values().iter().zip(star.values()))
        .enumerate()
        .map(|(i, (y, (p, s)))| {
            let gap = if p.is_finite() { (p - s) / p } else { f64::NAN };
            let mut row = vec![i.to_string()];
            row.extend(output::coords(y.vector(), dim));
            row.extend([output::num(*p), output::num(*s), output::num(gap)]);
            row
        });
    output::write_atomic(&spec.out.join("gaps.csv"), output::csv(&header, rows).as_bytes())?;
    output::write_json(&spec.out.join("closure.json"), &FieldDocument::from_field(star))?;
    let v = crate::validity::reflector_verdict(&r, spec.tol);
    Ok(format!(
        "closure written; max relative gap {}\n",
        output::num(v.max_relative_gap)
    ))
}

#[derive(Serialize)]
struct WitnessReport {
    axis: Vec<f64>,
    p: f64,
    closure: f64,
}

#[derive(Serialize)]
struct VerdictReport {
    valid: bool,
    max_relative_gap: f64,
    tol: f64,
    witness: Option<WitnessReport>,
}

impl VerdictReport {
    fn new(v: &ValidityVerdict, dim: u32, tol: f64) -> Self {
        Self {
            valid: v.valid,
            max_relative_gap: v.max_relative_gap,
            tol,
            witness: v.witness.map(|w| WitnessReport {
                axis: w.axis.coords(dim),
                p: w.value,
                closure: w.closure,
            }),
        }
    }
}

fn check_job(spec: &JobSpec, field: &FocalField) -> CliResult<String> {
    let v = is_focal_function(field, spec.tol)?;
    output::write_json(&spec.out.join("verdict.json"), &VerdictReport::new(&v, field.dim(), spec.tol))?;
    Ok(format!(
        "{}; max relative gap {}\n",
        if v.valid { "valid focal function" } else { "not a focal function" },
        output::num(v.max_relative_gap)
    ))
}

#[derive(Serialize)]
struct DirectrixSummary {
    grid: GridStats,
    radius: Span,
    map_points: usize,
    hausdorff: f64,
    tolerance: f64,
    agreement: bool,
    max_support_residual: f64,
    pedal_defect: f64,
    convexity_defect: f64,
    files: Vec<String>,
}

fn directrix_job(spec: &JobSpec, field: &FocalField) -> CliResult<String> {
    let r = Reflector::build(field, spec.level, spec.tol)?;
    let d = directrix_from_support(&r, r.eval_grid());
    let cloud: Vec<_> = directrix_map_cloud(&r, MAP_EPS).into_iter().map(|m| m.point).collect();
    let dist = hausdorff(&cloud, d.points());
    let tolerance = agreement_tolerance(&r);
    let dim = field.dim();
    let mut files = output::write_surface(&spec.out, "directrix", d.grid(), d.points())?;

    let mut header = vec!["index"];
    header.extend(["y1", "y2", "y3"].iter().take(dim as usize + 1));
    header.extend(["directrix_support", "focal", "residual"]);
    let rows = d.support_check().iter().enumerate().map(|(i, rec)| {
        let mut row = vec![i.to_string()];
        row.extend(output::coords(rec.axis.vector(), dim));
        row.extend([
            output::num(rec.directrix_support),
            output::num(rec.focal),
            output::num(rec.residual()),
        ]);
        row
    });
    output::write_atomic(&spec.out.join("support_identity.csv"), output::csv(&header, rows).as_bytes())?;
    files.extend(["support_identity.csv".into(), "directrix.json".into()]);

    let summary = DirectrixSummary {
        grid: GridStats::of(d.grid()),
        radius: Span::of(d.points().iter().map(|z| z.norm())),
        map_points: cloud.len(),
        hausdorff: dist,
        tolerance,
        agreement: dist <= tolerance,
        max_support_residual: d
            .support_check()
            .iter()
            .map(|rec| rec.residual().abs())
            .fold(0.0, f64::max),
        pedal_defect: d.pedal_defect(),
        convexity_defect: d.convexity_defect(),
        files,
    };
    output::write_json(&spec.out.join("directrix.json"), &summary)?;
    Ok(format!(
        "directrix radius [{}, {}]; hausdorff {} (tolerance {})\n",
        output::num(summary.radius.min),
        output::num(summary.radius.max),
        output::num(dist),
        output::num(tolerance)
    ))
}

fn trace_job(spec: &JobSpec, field: &FocalField) -> CliResult<String> {
    let r = Reflector::build(field, spec.level, spec.tol)?;
    let dim = field.dim();
    let cols = |name: &str| -> Vec<String> {
        ["1", "2", "3"].iter().take(dim as usize + 1).map(|k| format!("{name}{k}")).collect()
    };
    let mut header: Vec<String> = vec!["index".into()];
    for name in ["x", "hit", "axis", "normal", "outgoing"] {
        header.extend(cols(name));
    }
    header.push("deviation".into());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();

    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (i, x) in r.eval_grid().points().iter().enumerate() {
        let rec = trace(&r, x, MAP_EPS)?;
        for ((y, n), o) in rec.axes.iter().zip(&rec.normals).zip(&rec.outgoing) {
            let deviation = (o.vector() - y.vector()).norm();
            worst = worst.max(deviation);
            let mut row = vec![i.to_string()];
            for v in [x.vector(), &rec.hit, y.vector(), n.vector(), o.vector()] {
                row.extend(output::coords(v, dim));
            }
            row.push(output::num(deviation));
            rows.push(row);
        }
    }
    let count = rows.len();
    output::write_atomic(&spec.out.join("trace.csv"), output::csv(&header, rows).as_bytes())?;
    Ok(format!(
        "{count} reflected rays; largest deviation from the supporting axis {}\n",
        output::num(worst)
    ))
}

fn report_job(spec: &JobSpec, field: Option<&FocalField>) -> CliResult<String> {
    let dim = spec.dim.or(field.map(FocalField::dim)).unwrap_or(2);
    let report = run_suite(dim, spec.level, spec.tol, spec.seed, field)?;
    output::write_json(&spec.out.join("report.json"), &report)?;
    let mut text = format!("seed {}\n", report.seed);
    for p in &report.properties {
        text.push_str(&format!(
            "{} {} value {} limit {}\n",
            if p.passed { "PASS" } else { "FAIL" },
            p.name,
            output::num(p.value),
            output::num(p.limit)
        ));
    }
    Ok(text)
}
