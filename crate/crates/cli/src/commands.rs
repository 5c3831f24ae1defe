use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use bivekua::calculus::{l2_norm, relative_vekua_residual};
use bivekua::io;
use bivekua::main_vekua::{conductivity_residuals, conjugate_pair, hilbert_transform, metaharmonic_conjugate, Conductivity, ConductivityProfile};
use bivekua::verify::{Check, Status, Suite};
use bivekua::{gram_schmidt, kernel_samples, make_solution_set, project as project_onto, Complex64, Domain, Grid, GridFunction, OrthoBasis};
use serde::Serialize;

use crate::config::{CoefficientSpec, RunConfig};
use crate::Failure;

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    config_hash: String,
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn write_report<T: Serialize>(cfg: &RunConfig, command: &'static str, body: T) -> Result<PathBuf, Failure> {
    let path = cfg.output.join(format!("{command}_report.json"));
    let report = Report {
        command,
        config_hash: cfg.hash(),
        config: cfg,
        body,
    };
    io::write_json(&path, &report)?;
    Ok(path)
}

#[derive(Serialize)]
struct VerifyBody<'a> {
    passed: bool,
    seconds: f64,
    checks: &'a [Check],
}

pub fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let start = Instant::now();
    let suite = Suite::new(cfg.settings());
    let mut checks = Vec::new();
    for &(id, _) in &bivekua::verify::CRITERIA {
        let check = suite.run(id);
        println!("{}", check.line());
        checks.push(check);
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    let errors = checks.iter().filter(|c| c.status == Status::Error).count();
    let body = VerifyBody {
        passed: failed == 0 && errors == 0,
        seconds: start.elapsed().as_secs_f64(),
        checks: &checks,
    };
    let path = write_report(cfg, "verify", body)?;
    println!("config {}; report {}", cfg.hash(), path.display());
    if errors > 0 {
        let notes: Vec<String> = checks
            .iter()
            .filter(|c| c.status == Status::Error)
            .map(|c| format!("criterion {}: {}", c.id, c.note.clone().unwrap_or_default()))
            .collect();
        return Err(Failure::Numeric(notes.join("; ")));
    }
    if failed > 0 {
        return Err(Failure::Checks(failed));
    }
    Ok(())
}

fn build_basis(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<OrthoBasis, Failure> {
    let coefficients = cfg.coefficients(grid)?;
    Ok(gram_schmidt(&make_solution_set(&coefficients, cfg.basis_order)?)?)
}

#[derive(Serialize)]
struct BasisSummary {
    members: usize,
    dropped: Vec<usize>,
    gram_residual: f64,
    max_member_residual: f64,
}

fn summary(basis: &OrthoBasis) -> BasisSummary {
    BasisSummary {
        members: basis.len(),
        dropped: basis.dropped.clone(),
        gram_residual: basis.gram_residual,
        max_member_residual: basis.member_residuals.iter().cloned().fold(0.0, f64::max),
    }
}

fn read_point_file(path: Option<PathBuf>, into: &mut Vec<Complex64>) -> Result<(), Failure> {
    if let Some(p) = path {
        into.extend(io::read_points(open(&p)?)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct KernelBody {
    basis: BasisSummary,
    rows: usize,
    csv: PathBuf,
}

pub fn kernel(
    cfg: &RunConfig,
    mut z: Vec<Complex64>,
    mut zeta: Vec<Complex64>,
    z_file: Option<PathBuf>,
    zeta_file: Option<PathBuf>,
) -> Result<(), Failure> {
    read_point_file(z_file, &mut z)?;
    read_point_file(zeta_file, &mut zeta)?;
    let grid = cfg.grid()?;
    // Fail on points outside the grid before building the basis.
    for p in z.iter().chain(&zeta) {
        grid.locate(*p)?;
    }
    let basis = build_basis(cfg, &grid)?;
    let samples = kernel_samples(&basis, &z, &zeta)?;
    let csv = cfg.output.join("kernel.csv");
    io::write_kernel_samples(create(&csv)?, &samples)?;
    let path = write_report(cfg, "kernel", KernelBody { basis: summary(&basis), rows: samples.len(), csv: csv.clone() })?;
    println!("{} kernel samples -> {}; report {}", samples.len(), csv.display(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct ProjectBody {
    basis: BasisSummary,
    input_norm: f64,
    projection_norm: f64,
    remainder_norm: f64,
    csv: PathBuf,
}

pub fn project(cfg: &RunConfig, input: &Path, save_basis: bool) -> Result<(), Failure> {
    let grid = cfg.grid()?;
    let psi = io::read_grid_function(open(input)?, &grid)?;
    let basis = build_basis(cfg, &grid)?;
    let p = project_onto(&basis, &psi)?;
    let csv = cfg.output.join("projection.csv");
    io::write_grid_function(create(&csv)?, &p)?;
    if save_basis {
        io::write_basis_archive(&cfg.output.join("basis"), &basis)?;
    }
    let body = ProjectBody {
        basis: summary(&basis),
        input_norm: l2_norm(&psi),
        projection_norm: l2_norm(&p),
        remainder_norm: l2_norm(&psi.sub(&p)?),
        csv: csv.clone(),
    };
    let path = write_report(cfg, "project", body)?;
    println!("projection -> {}; report {}", csv.display(), path.display());
    Ok(())
}

/// The conductivity of the configured main Vekua equation; zero
/// coefficients are the case f = 1.
fn conductivity(cfg: &RunConfig, grid: &Arc<Grid>) -> Result<Conductivity, Failure> {
    let profile = match &cfg.coefficients {
        CoefficientSpec::Zero => ConductivityProfile::One,
        CoefficientSpec::Conductivity { .. } => cfg.profile()?.expect("conductivity coefficients"),
        CoefficientSpec::Constants { .. } => {
            return Err(Failure::Config("this command needs zero or conductivity coefficients".into()))
        }
    };
    Ok(Conductivity::from_profile(grid, profile))
}

/// Built-in choices of u for `conjugate`.
pub const U_FORMULAS: [&str; 5] = ["x", "y", "x2-y2", "xy", "f"];

fn u_source(source: &str, grid: &Arc<Grid>, cond: &Conductivity) -> Result<GridFunction, Failure> {
    let real = |f: fn(Complex64) -> f64| GridFunction::from_scalar_fn(grid, move |z| Complex64::new(f(z), 0.0));
    Ok(match source {
        "x" => real(|z| z.re),
        "y" => real(|z| z.im),
        "x2-y2" => real(|z| z.re * z.re - z.im * z.im),
        "xy" => real(|z| z.re * z.im),
        "f" => cond.f().clone(),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(Failure::Config(format!(
                    "{path:?} is neither a formula ({}) nor an existing file",
                    U_FORMULAS.join(", ")
                )));
            }
            io::read_grid_function(open(p)?, grid)?
        }
    })
}

#[derive(Serialize)]
struct ConjugateBody {
    conductivity: &'static str,
    u: String,
    c: Complex64,
    vekua_residual: f64,
    conductivity_residuals: [f64; 2],
    u_csv: PathBuf,
    v_csv: PathBuf,
}

pub fn conjugate(cfg: &RunConfig, source: &str, c: Complex64) -> Result<(), Failure> {
    let grid = cfg.grid()?;
    let cond = conductivity(cfg, &grid)?;
    let u = u_source(source, &grid, &cond)?;
    let v = metaharmonic_conjugate(&cond, &u, c)?;
    let w = conjugate_pair(&u, &v)?;
    let coefficients = bivekua::main_vekua::b_from_f(&cond)?;
    let vekua_residual = relative_vekua_residual(&w, coefficients.a(), coefficients.b())?;
    let (r1, r2) = conductivity_residuals(&cond, &w)?;
    let (u_csv, v_csv) = (cfg.output.join("u.csv"), cfg.output.join("v.csv"));
    io::write_grid_function(create(&u_csv)?, &u)?;
    io::write_grid_function(create(&v_csv)?, &v)?;
    let body = ConjugateBody {
        conductivity: cond.profile().map_or("custom", |p| p.formula()),
        u: source.to_string(),
        c,
        vekua_residual,
        conductivity_residuals: [r1, r2],
        u_csv,
        v_csv: v_csv.clone(),
    };
    let path = write_report(cfg, "conjugate", body)?;
    println!("v -> {}; relative Vekua residual {vekua_residual:.3e}; report {}", v_csv.display(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct HilbertBody {
    conductivity: &'static str,
    samples: usize,
    csv: PathBuf,
}

fn param_name(domain: &Domain) -> &'static str {
    match domain {
        Domain::Disk { .. } => "theta",
        Domain::Rectangle { .. } => "arc",
    }
}

pub fn hilbert(cfg: &RunConfig, input: &Path) -> Result<(), Failure> {
    let grid = cfg.grid()?;
    let cond = conductivity(cfg, &grid)?;
    let phi = io::read_boundary(open(input)?)?;
    let h = hilbert_transform(&cond, &phi)?;
    let csv = cfg.output.join("hilbert.csv");
    io::write_boundary(create(&csv)?, param_name(grid.domain()), &h)?;
    let body = HilbertBody {
        conductivity: cond.profile().map_or("custom", |p| p.formula()),
        samples: h.len(),
        csv: csv.clone(),
    };
    let path = write_report(cfg, "hilbert", body)?;
    println!("{} boundary values -> {}; report {}", h.len(), csv.display(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct GridBody {
    nodes: usize,
    safe_nodes: usize,
    h: f64,
    csv: PathBuf,
}

pub fn dump_grid(cfg: &RunConfig) -> Result<(), Failure> {
    let grid = cfg.grid()?;
    let csv = cfg.output.join("grid.csv");
    io::write_grid_dump(create(&csv)?, &grid)?;
    let body = GridBody {
        nodes: grid.len(),
        safe_nodes: grid.safe_nodes().count(),
        h: grid.h(),
        csv: csv.clone(),
    };
    let path = write_report(cfg, "dump-grid", body)?;
    println!("{} nodes -> {}; report {}", grid.len(), csv.display(), path.display());
    Ok(())
}
