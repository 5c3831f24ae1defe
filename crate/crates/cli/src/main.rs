//! `bivekua`: command-line driver for the bicomplex Vekua toolkit.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use bivekua::Complex64;
use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "bivekua", version, about = "Bicomplex Vekua equations: verification, kernels, projections, conjugates")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Grid resolution (overrides the configuration).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Number of complex seed degrees N; the basis has up to 2N members.
    #[arg(long, global = true)]
    basis_order: Option<usize>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", global = true, value_name = "KEY=VAL", value_parser = parse_tolerance)]
    tolerances: Vec<(String, f64)>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the acceptance checks on the configured domain.
    Verify,
    /// Sample the reproducing kernels K and L on a product of point lists.
    Kernel {
        /// Point `re,im`, repeatable.
        #[arg(long = "z", value_name = "RE,IM", allow_hyphen_values = true, value_parser = parse_point)]
        z: Vec<Complex64>,
        /// Point `re,im`, repeatable.
        #[arg(long = "zeta", value_name = "RE,IM", allow_hyphen_values = true, value_parser = parse_point)]
        zeta: Vec<Complex64>,
        /// File of `re,im` lines appended to the z list.
        #[arg(long, value_name = "PATH")]
        z_file: Option<PathBuf>,
        /// File of `re,im` lines appended to the zeta list.
        #[arg(long, value_name = "PATH")]
        zeta_file: Option<PathBuf>,
    },
    /// Project a grid function onto the truncated Vekua-Bergman space.
    Project {
        /// Grid-function CSV (x, y, sc_re, sc_im, vec_re, vec_im).
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        /// Also write the orthonormal basis to `<out>/basis/`.
        #[arg(long)]
        save_basis: bool,
    },
    /// Metaharmonic conjugate v of a conductivity solution u.
    Conjugate {
        /// A formula id (x, y, x2-y2, xy, f) or a grid-function CSV path.
        #[arg(long, value_name = "ID|PATH")]
        u: String,
        /// Additive constant c in v = (I_f u + c)/f, as `re,im`.
        #[arg(long, value_name = "RE,IM", allow_hyphen_values = true, value_parser = parse_point, default_value = "0,0")]
        c: Complex64,
    },
    /// Hilbert transform of boundary data.
    Hilbert {
        /// Boundary CSV (theta or arc, value_re, value_im).
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
    /// Write the grid nodes.
    DumpGrid,
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("not a number: {v:?}"))?;
    Ok((k.trim().to_string(), v))
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
    let re: f64 = re.trim().parse().map_err(|_| format!("not a number: {re:?}"))?;
    let im: f64 = im.trim().parse().map_err(|_| format!("not a number: {im:?}"))?;
    Ok(Complex64::new(re, im))
}

/// Why a command did not succeed; each kind has its own exit code.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration or input files (exit 2).
    Config(String),
    /// A numerical routine failed (exit 3).
    Numeric(String),
    /// Verification ran but some checks did not pass (exit 1).
    Checks(usize),
}

impl From<bivekua::Error> for Failure {
    fn from(e: bivekua::Error) -> Self {
        use bivekua::Error as E;
        match e {
            E::ZeroDivisor(_) | E::SolverDivergence { .. } | E::SingularSystem { .. } | E::EmptyBasis => {
                Failure::Numeric(e.to_string())
            }
            other => Failure::Config(other.to_string()),
        }
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Checks(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }
}

fn load_config(args: &GlobalArgs) -> Result<RunConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = args.n {
        cfg.domain.n = n;
    }
    if let Some(order) = args.basis_order {
        cfg.basis_order = order;
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    for (k, v) in &args.tolerances {
        cfg.tolerances.insert(k.clone(), *v);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.global)?;
    std::fs::create_dir_all(&cfg.output).map_err(|e| Failure::Config(format!("{}: {e}", cfg.output.display())))?;
    match cli.command {
        Command::Verify => commands::verify(&cfg),
        Command::Kernel { z, zeta, z_file, zeta_file } => commands::kernel(&cfg, z, zeta, z_file, zeta_file),
        Command::Project { input, save_basis } => commands::project(&cfg, &input, save_basis),
        Command::Conjugate { u, c } => commands::conjugate(&cfg, &u, c),
        Command::Hilbert { input } => commands::hilbert(&cfg, &input),
        Command::DumpGrid => commands::dump_grid(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("error: configuration: {m}"),
                Failure::Numeric(m) => eprintln!("error: numerical failure: {m}"),
                Failure::Checks(k) => eprintln!("{k} check(s) failed"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
