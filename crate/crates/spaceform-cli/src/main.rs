use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;
use serde::Serialize;

use spaceform::export::{build_mesh, leaf_point_cloud, write_lattice, write_mesh_sidecar, write_obj, write_point_cloud};
use spaceform::families::{FamilySpec, HypersurfacePatch};
use spaceform::numgeom::{verify_family, FdSteps, SampleGrid, Tolerances};
use spaceform::report::{run_all, run_typeiii, ConsolidatedReport, TypeIiiConfig};
use spaceform::typeiii::holonomy::holonomy;
use spaceform::typeiii::quaternion::lattice_build;
use spaceform::weierstrass::{tabulate, theta_range, write_table};

#[derive(Parser)]
#[command(name = "spaceform", version, about = "Levi-flat minimal hypersurfaces: verification runs and exports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify one family on a sample grid.
    Verify(VerifyArgs),
    /// Run the type-3 pipeline.
    Typeiii(TypeIiiArgs),
    /// Tabulate roots and half-periods over a θ-range.
    Tabulate(TabulateArgs),
    /// Export a family patch as an OBJ mesh with a CSV sidecar.
    ExportMesh(MeshArgs),
    /// Export the abelian-map images of a type-3 leaf cell as CSV.
    ExportLeaf(LeafArgs),
    /// Export the lattice basis and minimal vectors as CSV.
    ExportLattice(OutArgs),
    /// Run every family, the negative control and the type-3 pipeline.
    VerifyAll(VerifyAllArgs),
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "R", allow_negative_numbers = true)]
    curvature: Option<f64>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value = "10x10")]
    grid: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "tol-H", default_value_t = 1e-5)]
    tol_h: f64,
    #[arg(long = "tol-levi", default_value_t = 1e-7)]
    tol_levi: f64,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Slope of the non-minimal deformation of the diagonal family.
    #[arg(long = "perturb-y", allow_negative_numbers = true)]
    perturb_y: Option<f64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ThetaArgs {
    /// a:b:n
    #[arg(long = "theta-range", default_value = "-1.2:1.2:9", allow_hyphen_values = true)]
    theta_range: String,
}

#[derive(Args)]
struct TypeIiiArgs {
    #[command(flatten)]
    theta: ThetaArgs,
    /// Check group to leave out; may be repeated.
    #[arg(long)]
    skip: Vec<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct TabulateArgs {
    #[command(flatten)]
    theta: ThetaArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct MeshArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "40x40")]
    grid: String,
    /// OBJ path; the sidecar goes next to it with a .csv extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LeafArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// Samples per side of the cell.
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct VerifyAllArgs {
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    theta: ThetaArgs,
    #[arg(long)]
    skip: Vec<String>,
    #[command(flatten)]
    out: OutArgs,
}

/// Errors mapped to exit status 2.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult = Result<bool, UsageError>;

fn parse_theta_range(s: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(UsageError(format!("theta range '{s}' is not of the form a:b:n")));
    };
    let bad = || UsageError(format!("theta range '{s}' is not of the form a:b:n"));
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    Ok(theta_range(a, b, n)?)
}

fn tolerances(g: &GridArgs) -> Result<Tolerances, UsageError> {
    if !(g.tol_h > 0.0 && g.tol_levi > 0.0) {
        return Err(UsageError("tolerances must be positive".into()));
    }
    Ok(Tolerances { mean_curvature: g.tol_h, levi_defect: g.tol_levi, ..Tolerances::default() })
}

fn family(f: &FamilyArgs) -> Result<FamilySpec, UsageError> {
    Ok(FamilySpec::from_parts(&f.family, f.lambda, f.mu, f.curvature)?)
}

fn create(path: &Path) -> Result<BufWriter<File>, UsageError> {
    File::create(path).map(BufWriter::new).map_err(|e| UsageError(format!("cannot write {}: {e}", path.display())))
}

/// Writes to `out` or stdout.
fn emit(out: &Option<PathBuf>, body: &[u8]) -> Result<(), UsageError> {
    match out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(body)?;
            w.flush()?;
        }
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), UsageError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    emit(out, s.as_bytes())
}

fn summarize(report: &ConsolidatedReport) {
    for r in report.failures() {
        eprintln!("FAIL {}: measured {} target {} tol {}{}", r.name, r.measured, r.target, r.tolerance, r.note.as_deref().map_or(String::new(), |n| format!(" ({n})")));
    }
    eprintln!("{}: {} of {} checks passed", report.suite, report.records.iter().filter(|r| r.pass).count(), report.records.len());
}

fn verify(a: VerifyArgs) -> CliResult {
    let spec = family(&a.family)?;
    let grid = SampleGrid::parse(&a.grid.grid, a.grid.seed)?;
    let patch = match a.perturb_y {
        Some(c) => HypersurfacePatch::perturbed(spec, c)?,
        None => HypersurfacePatch::new(spec),
    };
    let rep = verify_family(&patch, grid, tolerances(&a.grid)?, FdSteps::default());
    eprintln!("{}: max|H| = {:e}, max Levi = {:e}, {}", rep.family, rep.max_abs_mean_curvature, rep.max_levi_defect, if rep.pass { "pass" } else { "FAIL" });
    emit_json(&a.out.out, &rep)?;
    Ok(rep.pass)
}

fn typeiii(a: TypeIiiArgs) -> CliResult {
    let cfg = TypeIiiConfig { thetas: parse_theta_range(&a.theta.theta_range)?, skip: a.skip, ..Default::default() };
    let rep = run_typeiii(&cfg)?;
    summarize(&rep);
    emit_json(&a.out.out, &rep)?;
    Ok(rep.pass)
}

fn tabulate_cmd(a: TabulateArgs) -> CliResult {
    let rows = tabulate(&parse_theta_range(&a.theta.theta_range)?)?;
    let mut buf = Vec::new();
    write_table(&rows, &mut buf)?;
    emit(&a.out.out, &buf)?;
    Ok(true)
}

fn export_mesh(a: MeshArgs) -> CliResult {
    let spec = family(&a.family)?;
    let grid = SampleGrid::parse(&a.grid, 0)?;
    let patch = HypersurfacePatch::new(spec);
    let mesh = build_mesh(&patch, grid.n_w, grid.n_r)?;
    let mut obj = create(&a.out)?;
    write_obj(&mesh, &spec.to_string(), &mut obj)?;
    obj.flush()?;
    let mut side = create(&a.out.with_extension("csv"))?;
    write_mesh_sidecar(&patch, &mesh, FdSteps::default(), &mut side)?;
    side.flush()?;
    info!("wrote {} vertices to {}", mesh.vertices.len(), a.out.display());
    Ok(true)
}

fn export_leaf(a: LeafArgs) -> CliResult {
    if a.n < 2 {
        return Err(UsageError("need at least 2 samples per side".into()));
    }
    let pts = leaf_point_cloud(a.theta, a.n)?;
    let mut buf = Vec::new();
    write_point_cloud(&pts, &mut buf)?;
    emit(&a.out.out, &buf)?;
    Ok(true)
}

fn export_lattice(a: OutArgs) -> CliResult {
    let lat = lattice_build(holonomy()?.r)?;
    let mut buf = Vec::new();
    write_lattice(&lat, 2, &mut buf)?;
    emit(&a.out, &buf)?;
    Ok(true)
}

fn verify_all(a: VerifyAllArgs) -> CliResult {
    let grid = SampleGrid::parse(&a.grid.grid, a.grid.seed)?;
    let cfg = TypeIiiConfig { thetas: parse_theta_range(&a.theta.theta_range)?, skip: a.skip, ..Default::default() };
    let rep = run_all(grid, tolerances(&a.grid)?, &cfg)?;
    summarize(&rep);
    emit_json(&a.out.out, &rep)?;
    Ok(rep.pass)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPACEFORM_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Typeiii(a) => typeiii(a),
        Command::Tabulate(a) => tabulate_cmd(a),
        Command::ExportMesh(a) => export_mesh(a),
        Command::ExportLeaf(a) => export_leaf(a),
        Command::ExportLattice(a) => export_lattice(a),
        Command::VerifyAll(a) => verify_all(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
