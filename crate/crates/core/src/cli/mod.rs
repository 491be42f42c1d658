//! The `simfilm` command line. Exit codes: 0 success, 2 configuration or
//! usage error, 3 numerical failure, 4 broken invariant, 64 unknown
//! subcommand, 73 missing output directory.

pub mod commands;
pub mod config;
pub mod emit;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use commands::Outcome;
use config::{from_section, FileConfig, GlobalOverrides, Schedule};
use emit::{Format, RunManifest, Target};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;
pub const EXIT_UNKNOWN_SUBCOMMAND: i32 = 64;
pub const EXIT_NO_OUTPUT_DIR: i32 = 73;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "SIMFILM_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "simfilm",
    version,
    about = "Numerics for the thin film equation"
)]
pub struct Cli {
    /// JSON file with one section per subcommand; command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for outputs [default: $SIMFILM_OUT, else .]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Output format [default: from the --out extension]
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Tolerance of the subcommand's primary check
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Grid half-width L
    #[arg(long = "grid-L", global = true)]
    pub grid_l: Option<f64>,
    /// Grid cells across [-L, L] (even)
    #[arg(long, global = true)]
    pub grid_cells: Option<usize>,
    /// Worker threads for parallel sweeps [default: available cores]
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the rescaled kernel F and check its mass and B F = 0
    Kernel(KernelArgs),
    /// Eigenfunctions, adjoint polynomials and the Gram matrix
    Eigen(EigenArgs),
    /// Linear evolution by eigen-expansion against direct convolution
    Evolve(EvolveArgs),
    /// Branching coefficients and roots at level 0, 1 or 2
    Branch(BranchArgs),
    /// Self-similar profiles along n by continuation
    Profile(ProfileArgs),
    /// Regularized PDE run and the eps -> 0 limit study
    Homotopy(HomotopyArgs),
    /// Run the acceptance suite and print a pass/fail table
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub max_order: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub order: Option<u32>,
    /// Comma-separated times
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    #[arg(long)]
    pub truncation: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BranchArgs {
    #[arg(long)]
    pub level: Option<u32>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub lattice: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    /// Comma-separated increasing exponents
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HomotopyArgs {
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Also run the limit study along this schedule
    #[arg(long, value_enum)]
    pub limit: Option<Schedule>,
    /// Comma-separated decreasing eps for the limit study
    #[arg(long, value_delimiter = ',')]
    pub limit_eps: Vec<f64>,
    #[arg(long)]
    pub t_eval: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Cheap subset only
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::InvalidSubcommand => EXIT_UNKNOWN_SUBCOMMAND,
                _ => EXIT_CONFIG,
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("simfilm: {e}");
            e.exit_code()
        }
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn set_vec<T>(slot: &mut Vec<T>, v: &[T])
where
    T: Clone,
{
    if !v.is_empty() {
        *slot = v.to_vec();
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let file = cli.config.as_deref().map(FileConfig::load).transpose()?;
    let file = file.as_ref();
    let jobs = cli
        .jobs
        .or(file.and_then(|f| f.jobs))
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return Err(Error::config("--jobs must be at least 1"));
    }
    let g = GlobalOverrides {
        tol: cli.tol,
        grid_half_width: cli.grid_l,
        grid_cells: cli.grid_cells,
    };
    match &cli.command {
        Command::Kernel(a) => {
            let mut o: config::KernelOpts = from_section("kernel", file)?;
            set(&mut o.dim, a.dim);
            set(&mut o.order, a.order);
            o.finish(&g)?;
            dispatch(
                cli,
                "kernel",
                &o,
                jobs,
                a.out.as_deref(),
                "kernel.csv",
                || commands::kernel(&o),
            )
        }
        Command::Eigen(a) => {
            let mut o: config::EigenOpts = from_section("eigen", file)?;
            set(&mut o.dim, a.dim);
            set(&mut o.order, a.order);
            set(&mut o.max_order, a.max_order);
            o.finish(&g)?;
            dispatch(
                cli,
                "eigen",
                &o,
                jobs,
                a.out.as_deref(),
                "eigen.csv",
                || commands::eigen(&o, jobs),
            )
        }
        Command::Evolve(a) => {
            let mut o: config::EvolveOpts = from_section("evolve", file)?;
            set(&mut o.order, a.order);
            set_vec(&mut o.taus, &a.tau);
            set(&mut o.truncation, a.truncation);
            o.finish(&g)?;
            dispatch(
                cli,
                "evolve",
                &o,
                jobs,
                a.out.as_deref(),
                "evolve.csv",
                || commands::evolve(&o, jobs),
            )
        }
        Command::Branch(a) => {
            let mut o: config::BranchOpts = from_section("branch", file)?;
            set(&mut o.level, a.level);
            set(&mut o.dim, a.dim);
            if a.lattice.is_some() {
                o.lattice = a.lattice;
            }
            o.finish(&g)?;
            dispatch(
                cli,
                "branch",
                &o,
                jobs,
                a.out.as_deref(),
                "branch.json",
                || commands::branch(&o),
            )
        }
        Command::Profile(a) => {
            let mut o: config::ProfileOpts = from_section("profile", file)?;
            set_vec(&mut o.ns, &a.n);
            o.finish(&g)?;
            dispatch(
                cli,
                "profile",
                &o,
                jobs,
                a.out.as_deref(),
                "profile.csv",
                || commands::profile(&o),
            )
        }
        Command::Homotopy(a) => {
            let mut o: config::HomotopyOpts = from_section("homotopy", file)?;
            set(&mut o.eps, a.eps);
            set(&mut o.n, a.n);
            set(&mut o.t_final, a.t_final);
            if a.limit.is_some() {
                o.limit = a.limit;
            }
            set_vec(&mut o.limit_eps, &a.limit_eps);
            set(&mut o.t_eval, a.t_eval);
            o.finish(&g)?;
            dispatch(
                cli,
                "homotopy",
                &o,
                jobs,
                a.out.as_deref(),
                "homotopy.csv",
                || commands::homotopy(&o, jobs),
            )
        }
        Command::Verify(a) => {
            let mut o: config::VerifyOpts = from_section("verify", file)?;
            o.quick |= a.quick;
            o.finish(&g)?;
            dispatch(
                cli,
                "verify",
                &o,
                jobs,
                a.out.as_deref(),
                "verify.json",
                || verify::verify(&o, jobs),
            )
        }
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out_dir
        .clone()
        .or_else(|| {
            std::env::var_os(OUT_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Resolves `--out` against the output directory. `Ok(None)` means the
/// directory does not exist.
fn target(cli: &Cli, out: Option<&Path>, default: &str) -> Result<Option<Target>> {
    let path = out_dir(cli).join(out.unwrap_or(Path::new(default)));
    let dir = match path.parent() {
        Some(p) if p.as_os_str().is_empty() => PathBuf::from("."),
        Some(p) => p.to_path_buf(),
        None => PathBuf::from("."),
    };
    if !dir.is_dir() {
        return Ok(None);
    }
    let format = match cli.format.or_else(|| Format::from_extension(&path)) {
        Some(f) => f,
        None => {
            return Err(Error::config(format!(
                "cannot infer a format from {}; use --format csv|json|plotdata",
                path.display()
            )))
        }
    };
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::config(format!("bad output name {}", path.display())))?;
    Ok(Some(Target {
        dir,
        stem: stem.to_string(),
        format,
    }))
}

fn dispatch<O: Serialize>(
    cli: &Cli,
    name: &str,
    opts: &O,
    jobs: usize,
    out: Option<&Path>,
    default_out: &str,
    work: impl FnOnce() -> Result<Outcome>,
) -> Result<i32> {
    // checked before any work so a bad path fails fast
    let Some(target) = target(cli, out, default_out)? else {
        eprintln!(
            "simfilm: output directory {} does not exist",
            out_dir(cli).display()
        );
        return Ok(EXIT_NO_OUTPUT_DIR);
    };
    let mut config = serde_json::to_value(opts)?;
    config["output"] = serde_json::json!({ "stem": target.stem, "format": target.format });
    let mut manifest = RunManifest::new(name, config);
    manifest.config["jobs"] = jobs.into();

    let outcome = work()?;
    manifest.outputs = emit::emit(&outcome.results, &target)?;
    manifest.invariant_checks = outcome.checks;
    manifest.notes = outcome.notes;
    let path = manifest.write(&target.dir, &target.stem)?;
    for line in &outcome.stdout {
        println!("{line}");
    }
    eprintln!(
        "simfilm {name}: {} outputs, manifest {}",
        manifest.outputs.len(),
        path.display()
    );
    if manifest.all_pass() {
        Ok(EXIT_OK)
    } else {
        eprintln!(
            "simfilm {name}: invariant checks failed: {}",
            manifest.failures().join(", ")
        );
        Ok(EXIT_INVARIANT)
    }
}
